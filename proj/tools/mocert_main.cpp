// mocert: certification engine and pseudo-spectral laboratory for
// moduli-of-continuity Lipschitz bounds.
//
// Commands: verify, simulate, sweep, hypothesis. Global flags --config
// (JSON defaults), --out, --seed, --threads; command flags override the
// config file.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "mocert/config.hpp"
#include "mocert/monitor.hpp"
#include "mocert/verifier.hpp"

using namespace mocert;

namespace {

struct Global {
  std::string config_path;
  std::string out_dir = "mocert_out";
  unsigned long seed = 1;
  int threads = int(std::thread::hardware_concurrency());
  RunConfig cfg;
};

void write_text(const std::string& path, const std::string& text) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream(path) << text << "\n";
}

InequalityKind kind_of_thm(const std::string& thm) {
  if (thm == "2") return InequalityKind::Thm2;
  if (thm == "3") return InequalityKind::Thm3;
  if (thm == "4") return InequalityKind::Thm4Crit;
  if (thm == "4s") return InequalityKind::Thm4Super;
  throw ParameterError("unknown theorem id '" + thm + "' (use 2, 3, 4 or 4s)");
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int cmd_verify(Global& g, const std::string& thm, bool hyp1, double alpha,
               double beta, double B, double lambda0, double c0_flag,
               double cconst_flag, double cd, double T, int tcount,
               double sigma_min, double sigma_max, int sigma_count,
               bool conservative, const std::string& regime, double g0,
               double gslope) {
  VerifierParams params;
  params.conservative = conservative;
  params.c_d = cd;
  GridSpec grid;
  grid.sigma_min = sigma_min;
  grid.sigma_max = sigma_max;
  grid.sigma_count = sigma_count;
  grid.t_min = 0.0;
  grid.t_max = T;
  grid.t_count = tcount;

  VerificationReport rep;

  if (hyp1) {
    // margin check of the evolution inequality for the stationary tanh
    // profile, plus a short march regression
    TimeDependentModulus tdm;
    tdm.omega = tanh_modulus();
    tdm.law = ScalingLaw::constant(1.0, 1.0);
    params.c_d = cd;
    GridSpec gg = grid;
    gg.sigma_min = 1e-4;
    gg.sigma_max = 50.0;
    rep = check_inequality(InequalityKind::Hyp1, tdm, nullptr, params, gg);

    MarchGrid mg;
    mg.T = std::max(T, 0.1);
    mg.nodes = 4000;
    auto res = hypothesis_march(burgers_stationary_profile(2.0), 1.0, 1.0, cd, mg);
    double drift = 0.0;
    if (cd == 0.0) {
      for (int j = 0; j < res.xi.size(); ++j)
        drift = std::max(drift, std::abs(res.profile[j] -
                                         4.0 * std::tanh(res.xi[j] / 2.0)));
    }
    rep.note = res.completed
                   ? (cd == 0.0 ? "march stationary drift " + std::to_string(drift)
                                : "march completed")
                   : "march stopped: " + res.stop_reason;
    const bool march_ok = res.completed && (cd != 0.0 || drift <= 1e-5);
    write_text(g.out_dir + "/verify_hyp1.json", rep.to_json());
    std::cout << (rep.certified && march_ok ? "certified" : "not certified")
              << ": HYP1 margins min=" << rep.min_margin << "; " << rep.note
              << "\n";
    return rep.certified && march_ok ? 0 : 1;
  }

  const InequalityKind kind = kind_of_thm(thm);
  switch (kind) {
    case InequalityKind::Thm3: {
      auto [r, delta] = feasible_delta(alpha, beta, params.c_kernel, kind);
      auto drift = DriftEnvelope::constant(std::max(g0, 1.0), beta);
      Thm3Options opts;
      opts.delta = delta;
      auto tdm = build_thm3_modulus(alpha, beta, std::max(B, 1.0), drift, opts);
      GridSpec gg = grid;
      gg.t_count = 1;
      rep = check_inequality(kind, tdm, &drift, params, gg);
      rep.constants["r"] = r;
      break;
    }
    case InequalityKind::Thm2: {
      CertifyRequest req;
      req.kind = kind;
      req.lambda0 = std::max(lambda0, std::exp(1.0));
      req.params = params;
      req.grid = grid;
      if (c0_flag > 0.0) {
        const double delta =
            feasible_delta(1.0, 0.5, params.c_kd, kind).second;
        auto tdm = build_thm2_modulus(delta, std::nan(""), req.lambda0, c0_flag);
        rep = check_inequality(kind, tdm, nullptr, params, grid);
      } else {
        auto res = certify_constant(req);
        if (!res.found) {
          std::cout << "not certified: no C0 <= 1e6 certifies\n";
          return 1;
        }
        rep = res.report;
        rep.constants["C0_certified"] = res.constant;
      }
      break;
    }
    case InequalityKind::Thm4Crit:
    case InequalityKind::Thm4Super: {
      auto drift = DriftEnvelope::affine(std::max(g0, 1.0), std::max(gslope, 0.0), beta);
      const InequalityKind k4 =
          regime == "supercritical" ? InequalityKind::Thm4Super : InequalityKind::Thm4Crit;
      CertifyRequest req;
      req.kind = k4;
      req.alpha = alpha;
      req.beta = beta;
      req.B = std::max(B, 1.0);
      req.drift = drift;
      req.params = params;
      req.grid = grid;
      req.delta = feasible_delta(alpha, beta, params.c_kernel, k4).second;
      if (cconst_flag > 0.0) {
        Thm4Options opts;
        opts.delta = req.delta;
        opts.C = cconst_flag;
        auto tdm = build_thm4_modulus(alpha, beta, req.B, drift,
                                      k4 == InequalityKind::Thm4Super
                                          ? Thm4Regime::Supercritical
                                          : Thm4Regime::Critical,
                                      opts);
        rep = check_inequality(k4, tdm, &drift, params, grid);
      } else {
        auto res = certify_constant(req);
        if (!res.found) {
          std::cout << "not certified: no growth constant <= 1e6 certifies\n";
          return 1;
        }
        rep = res.report;
        rep.constants["C_certified"] = res.constant;
      }
      break;
    }
    default:
      throw ParameterError("verify: unsupported kind");
  }

  write_text(g.out_dir + "/verify_" + to_string(rep.kind) + ".json", rep.to_json());
  std::cout << (rep.certified ? "certified" : "not certified") << ": "
            << to_string(rep.kind) << " min_margin=" << rep.min_margin
            << " (argmin sigma=" << rep.argmin_sigma << ", t=" << rep.argmin_t
            << ")\n";
  return rep.certified ? 0 : 1;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(Global& g, const std::string& eq, double nu, double alpha,
                 int N, double L, double dt, double T, double record_dt,
                 const std::string& ic, const std::string& bound_mode,
                 double c0_flag, double gbeta, double g0, double gslope,
                 int scan_every) {
  ExperimentConfig cfg;
  cfg.solver.nu = nu;
  cfg.solver.alpha = alpha;
  cfg.solver.dt = dt;
  cfg.solver.T = T;
  cfg.N = N;
  cfg.L = L;
  cfg.record_dt = record_dt;
  cfg.ic = ic;
  cfg.seed = g.seed;
  cfg.scan_every = scan_every;
  cfg.out_dir = g.out_dir;

  if (eq == "burgers")
    cfg.eq = Equation::Burgers;
  else if (eq == "burgers-hilbert")
    cfg.eq = Equation::BurgersHilbert;
  else if (eq == "fractal-burgers")
    cfg.eq = Equation::FractalBurgers;
  else if (eq == "drift-diffusion")
    cfg.eq = Equation::DriftDiffusion;
  else if (eq == "sqg")
    cfg.eq = Equation::Sqg;
  else if (eq == "linear-nse")
    cfg.eq = Equation::LinearNse;
  else
    throw ParameterError("unknown equation '" + eq + "'");
  cfg.run_name = eq;

  if (cfg.eq == Equation::Sqg) {
    cfg.dim = 2;
    cfg.ic = "random";
    cfg.components = 1;
  }
  if (cfg.eq == Equation::LinearNse) {
    cfg.dim = 3;
    cfg.ic = (ic == "sin") ? "random" : ic;
    cfg.components = 3;
  }

  // prescribed drifts for the linear equations
  const double sin_holder = holder_seminorm_estimate(sine_field(256, L), gbeta);
  if (cfg.eq == Equation::DriftDiffusion) {
    cfg.drift = [=](double t) {
      SpectralField b = sine_field(N, L);
      b.coeff(0) *= (g0 + gslope * t) / sin_holder;
      return b;
    };
  } else if (cfg.eq == Equation::LinearNse) {
    cfg.drift = [=](double t) { return taylor_green(N, L, g0 + gslope * t); };
  } else {
    cfg.drift = [=](double) { return SpectralField(1, N, L, 1); };
  }

  // arm bounds and the breakthrough modulus
  if (bound_mode == "auto") {
    if (cfg.eq == Equation::Burgers || cfg.eq == Equation::BurgersHilbert) {
      const double delta =
          feasible_delta(1.0, 0.5, 1.0, InequalityKind::Thm2).second;
      auto w = viscous_burgers_modulus(delta);
      SpectralField u0 = sine_field(N, L);
      const double lam = std::max(
          rescale_for_data(w, u0.sup_norm(4), gradient_max(u0)), std::exp(1.0));
      if (cfg.eq == Equation::Burgers) {
        BoundSpec bs;
        bs.kind = BoundKind::Burgers;
        bs.lambda0 = lam;
        cfg.bounds.push_back(arm_bound(bs));
        TimeDependentModulus om;
        om.omega = w;
        om.law = ScalingLaw::constant(lam, lam);
        cfg.modulus = om;
      } else {
        CertifyRequest req;
        req.kind = InequalityKind::Thm2;
        req.lambda0 = lam;
        req.delta = delta;
        req.grid.t_max = T;
        req.grid.t_count = 6;
        req.grid.sigma_count = 101;
        double c0 = c0_flag;
        if (!(c0 > 0.0)) {
          auto res = certify_constant(req);
          if (!res.found) throw ConfigError("could not certify C0 for the armed bound");
          c0 = res.constant;
        }
        BoundSpec bs;
        bs.kind = BoundKind::Thm2;
        bs.lambda0 = lam;
        bs.C0 = c0;
        cfg.bounds.push_back(arm_bound(bs));
        cfg.modulus = build_thm2_modulus(delta, std::nan(""), lam, c0);
      }
    }
    if (cfg.eq == Equation::DriftDiffusion && gbeta > 0.0) {
      // report-only constant: measured a posteriori by the sweep tools;
      // arm with the gradient of the initial data as C_{0,alpha}
      BoundSpec bs;
      bs.kind = BoundKind::Thm3;
      bs.alpha = alpha;
      bs.beta = gbeta;
      bs.c0alpha = 4.0 * std::max(1.0, gradient_max(sine_field(N, L)));
      bs.g = DriftEnvelope::affine(g0, gslope, gbeta);
      cfg.bounds.push_back(arm_bound(bs));
    }
  }

  auto trace = run_experiment(cfg);
  std::cout << "records=" << trace.times.size()
            << " final_lipschitz=" << (trace.lipschitz.empty() ? 0.0 : trace.lipschitz.back())
            << (trace.blowup ? " BLOWUP at t=" + std::to_string(trace.blowup_time) : "")
            << (trace.bound_exceeded ? " BOUND EXCEEDED" : "")
            << (trace.breakthrough ? " BREAKTHROUGH" : "") << "\n";
  if (trace.blowup) return 3;
  if (trace.bound_exceeded || trace.breakthrough) return 1;
  return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

int cmd_sweep(Global& g, const std::string& thm, const std::string& alphas,
              const std::string& betas) {
  const auto as = parse_list(alphas);
  const auto bs = parse_list(betas);
  struct Cell {
    double alpha, beta;
    bool certified = false;
    bool param_error = false;
    std::string message;
    double min_margin = 0.0;
  };
  std::vector<Cell> cells;
  for (double a : as)
    for (double b : bs) cells.push_back({a, b});

  const InequalityKind kind = kind_of_thm(thm);
  std::vector<std::thread> pool;
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      Cell& c = cells[i];
      try {
        auto [r, delta] = feasible_delta(c.alpha, c.beta, 1.0, kind);
        auto drift = DriftEnvelope::constant(1.0, c.beta);
        Thm3Options opts;
        opts.delta = delta;
        auto tdm = build_thm3_modulus(c.alpha, c.beta, 1.0, drift, opts);
        VerifierParams p;
        GridSpec grid;
        auto rep = check_inequality(kind, tdm, &drift, p, grid);
        c.certified = rep.certified;
        c.min_margin = rep.min_margin;
      } catch (const std::exception& e) {
        c.param_error = true;
        c.message = e.what();
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(g.threads, int(cells.size())));
  for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  nlohmann::json j;
  j["kind"] = "THM" + thm;
  int worst = 0;
  for (const auto& c : cells) {
    nlohmann::json cj;
    cj["alpha"] = c.alpha;
    cj["beta"] = c.beta;
    cj["certified"] = c.certified;
    cj["min_margin"] = c.min_margin;
    if (c.param_error) cj["error"] = c.message;
    j["cells"].push_back(cj);
    if (!c.certified) worst = std::max(worst, c.param_error ? 2 : 1);
  }
  write_text(g.out_dir + "/sweep.json", j.dump(2));
  std::cout << j.dump(2) << "\n";
  return worst;
}

// ---------------------------------------------------------------------------
// hypothesis
// ---------------------------------------------------------------------------

int cmd_hypothesis(Global& g, double cd, double T, int nodes, double xi_max,
                   double dt, const std::string& profile, double delta) {
  MarchGrid mg;
  mg.T = T;
  mg.nodes = nodes;
  mg.xi_max = xi_max;
  mg.dt = dt;

  PiecewiseModulus w0 = profile == "burgers-modulus"
                            ? viscous_burgers_modulus(delta)
                            : burgers_stationary_profile(2.0);
  auto res = hypothesis_march(w0, 1.0, 1.0, cd, mg);

  std::string csv = "t,slope_at_zero,sup_norm\n";
  for (size_t i = 0; i < res.times.size(); ++i) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", res.times[i],
                  res.slope_at_zero[i], res.sup_norm[i]);
    csv += buf;
  }
  write_text(g.out_dir + "/hypothesis_trace.csv", csv);

  nlohmann::json j;
  j["completed"] = res.completed;
  j["stop_time"] = res.stop_time;
  j["stop_reason"] = res.stop_reason;
  j["cd"] = cd;
  j["profile"] = profile;
  j["final_slope_at_zero"] = res.slope_at_zero.back();
  write_text(g.out_dir + "/hypothesis_report.json", j.dump(2));

  std::cout << (res.completed
                    ? "completed to T=" + std::to_string(res.stop_time)
                    : "stopped at t=" + std::to_string(res.stop_time) + ": " +
                          res.stop_reason)
            << ", final slope at 0 = " << res.slope_at_zero.back() << "\n";
  return res.completed ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moduli-of-continuity certification engine and spectral lab"};
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  app.add_option("--config", g.config_path, "JSON config file with defaults");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "worker threads for sweeps");

  // verify
  auto* verify = app.add_subcommand("verify", "certify a differential inequality");
  std::string thm = "3", regime = "critical";
  bool hyp1 = false, conservative = false;
  double alpha = 1.0, beta = 0.5, B = 1.0, lambda0 = std::exp(1.0);
  double c0_flag = 0.0, cconst_flag = 0.0, cd = 1.0, T = 0.0;
  int tcount = 1, sigma_count = 181;
  double sigma_min = 1e-6, sigma_max = 1e3, g0v = 1.0, gslope = 0.0;
  verify->add_option("--thm", thm, "theorem id: 2, 3, 4 or 4s");
  verify->add_flag("--hyp1", hyp1, "check the evolution inequality instead");
  verify->add_option("--alpha", alpha);
  verify->add_option("--beta", beta);
  verify->add_option("--B", B);
  verify->add_option("--lambda0", lambda0);
  verify->add_option("--c0", c0_flag, "use this C0 instead of certifying");
  verify->add_option("--cconst", cconst_flag, "use this growth constant");
  verify->add_option("--cd", cd);
  verify->add_option("--T", T);
  verify->add_option("--tcount", tcount);
  verify->add_option("--sigma-min", sigma_min);
  verify->add_option("--sigma-max", sigma_max);
  verify->add_option("--sigma-count", sigma_count);
  verify->add_flag("--conservative", conservative);
  verify->add_option("--regime", regime);
  verify->add_option("--g0", g0v);
  verify->add_option("--gslope", gslope);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run a model PDE with monitors");
  std::string eq = "burgers", ic = "sin", bound_mode = "auto";
  double nu = 1.0, salpha = 1.0, L = 2.0 * M_PI, dt = 1e-3, sT = 1.0;
  double record_dt = 0.05, gbeta = 0.5, sg0 = 1.0, sgslope = 0.0;
  int N = 256, scan_every = 1;
  simulate->add_option("--eq", eq,
                       "burgers | burgers-hilbert | fractal-burgers | "
                       "drift-diffusion | sqg | linear-nse");
  simulate->add_option("--nu", nu);
  simulate->add_option("--alpha", salpha);
  simulate->add_option("--N", N);
  simulate->add_option("--L", L);
  simulate->add_option("--dt", dt);
  simulate->add_option("--T", sT);
  simulate->add_option("--record-dt", record_dt);
  simulate->add_option("--ic", ic);
  simulate->add_option("--bound", bound_mode, "auto | none");
  simulate->add_option("--c0", c0_flag);
  simulate->add_option("--gbeta", gbeta);
  simulate->add_option("--g0", sg0);
  simulate->add_option("--gslope", sgslope);
  simulate->add_option("--scan-every", scan_every);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "fan a certification over (alpha, beta)");
  std::string sthm = "3", alphas = "1.0,0.75", betas = "0.5,0.25";
  sweep->add_option("--thm", sthm);
  sweep->add_option("--alphas", alphas);
  sweep->add_option("--betas", betas);

  // hypothesis
  auto* hypo = app.add_subcommand("hypothesis", "march the evolution inequality");
  double hcd = 0.0, hT = 1.0, hxi = 60.0, hdt = 5e-4, hdelta = 0.25;
  int hnodes = 4000;
  std::string profile = "stationary";
  hypo->add_option("--cd", hcd);
  hypo->add_option("--T", hT);
  hypo->add_option("--nodes", hnodes);
  hypo->add_option("--xi-max", hxi);
  hypo->add_option("--dt", hdt);
  hypo->add_option("--profile", profile, "stationary | burgers-modulus");
  hypo->add_option("--delta", hdelta);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!g.config_path.empty()) {
      g.cfg = RunConfig::load(g.config_path);
      // config supplies defaults; explicit flags were already applied by the
      // parser, so only fill values the user did not pass
      auto fill = [&](CLI::Option* opt, const std::string& sec,
                      const std::string& key, double& target) {
        if (opt->count() == 0 && g.cfg.has(sec, key))
          target = g.cfg.num(sec, key, target);
      };
      fill(verify->get_option("--alpha"), "verify", "alpha", alpha);
      fill(verify->get_option("--beta"), "verify", "beta", beta);
      fill(verify->get_option("--T"), "verify", "T", T);
      fill(simulate->get_option("--nu"), "simulate", "nu", nu);
      fill(simulate->get_option("--alpha"), "simulate", "alpha", salpha);
      fill(simulate->get_option("--T"), "simulate", "T", sT);
      fill(simulate->get_option("--dt"), "simulate", "dt", dt);
      if (simulate->get_option("--eq")->count() == 0)
        eq = g.cfg.str("simulate", "eq", eq);
      if (verify->get_option("--thm")->count() == 0)
        thm = g.cfg.str("verify", "thm", thm);
    }

    if (app.got_subcommand(verify))
      return cmd_verify(g, thm, hyp1, alpha, beta, B, lambda0, c0_flag,
                        cconst_flag, cd, T, tcount, sigma_min, sigma_max,
                        sigma_count, conservative, regime, g0v, gslope);
    if (app.got_subcommand(simulate))
      return cmd_simulate(g, eq, nu, salpha, N, L, dt, sT, record_dt, ic,
                          bound_mode, c0_flag, gbeta, sg0, sgslope, scan_every);
    if (app.got_subcommand(sweep)) return cmd_sweep(g, sthm, alphas, betas);
    if (app.got_subcommand(hypo))
      return cmd_hypothesis(g, hcd, hT, hnodes, hxi, hdt, profile, hdelta);
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
