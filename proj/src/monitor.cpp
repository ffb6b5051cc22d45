#include "mocert/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "json.hpp"

namespace mocert {

namespace {

struct Shift {
  int s[3] = {0, 0, 0};
  double len = 0.0;
};

double minimal_image_length(const SpectralField& f, const int s[3]) {
  double acc = 0.0;
  for (int ax = 0; ax < f.dim(); ++ax) {
    const int n = f.modes(ax);
    const int m = ((s[ax] % n) + n) % n;
    const int w = std::min(m, n - m);
    const double d = w * f.period(ax) / n;
    acc += d * d;
  }
  return std::sqrt(acc);
}

std::vector<Shift> enumerate_shifts(const SpectralField& f, long samples,
                                    unsigned long seed) {
  const int d = f.dim();
  const int n = f.modes(0);
  std::vector<Shift> shifts;
  std::set<std::array<int, 3>> seen;
  auto push = [&](int a, int b, int c) {
    std::array<int, 3> key = {((a % n) + n) % n, d > 1 ? ((b % n) + n) % n : 0,
                              d > 2 ? ((c % n) + n) % n : 0};
    if (key == std::array<int, 3>{0, 0, 0}) return;
    if (!seen.insert(key).second) return;
    Shift sh;
    sh.s[0] = key[0];
    sh.s[1] = key[1];
    sh.s[2] = key[2];
    sh.len = minimal_image_length(f, sh.s);
    shifts.push_back(sh);
  };

  if (d == 1) {
    for (int a = 1; a < n; ++a) push(a, 0, 0);
    return shifts;
  }
  if (d == 2) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) push(a, b, 0);
    return shifts;
  }
  // 3d: all axis-aligned shifts plus a stratified random sample by shell
  for (int a = 1; a < n; ++a) {
    push(a, 0, 0);
    push(0, a, 0);
    push(0, 0, a);
  }
  std::mt19937_64 rng(seed);
  const int shells = 24;
  const double rmax = n / 2.0;
  const long per_shell = std::max<long>(1, samples / shells);
  for (int sh = 0; sh < shells; ++sh) {
    const double r0 = rmax * std::pow(2.0, -double(shells - 1 - sh) / 3.0);
    for (long k = 0; k < per_shell; ++k) {
      // random direction, radius within the shell
      double v[3], norm = 0.0;
      for (double& x : v) {
        x = 2.0 * (double(rng() >> 11) / 4503599627370496.0) - 1.0;
        norm += x * x;
      }
      norm = std::sqrt(norm);
      if (norm < 1e-9) continue;
      const double r = r0 * (0.8 + 0.4 * (double(rng() >> 11) / 4503599627370496.0));
      push(int(std::lround(v[0] / norm * r)), int(std::lround(v[1] / norm * r)),
           int(std::lround(v[2] / norm * r)));
    }
  }
  return shifts;
}

// max over base points of the Euclidean increment for one lattice shift
double max_increment(const SpectralField& f,
                     const std::vector<Eigen::ArrayXd>& vals, const int s[3],
                     long& arg, int stride = 1) {
  const int d = f.dim();
  const int n0 = f.modes(0), n1 = d > 1 ? f.modes(1) : 1,
            n2 = d > 2 ? f.modes(2) : 1;
  std::vector<int> w0(n0), w1(n1), w2(n2);
  for (int i = 0; i < n0; ++i) w0[i] = (i + s[0]) % n0;
  for (int i = 0; i < n1; ++i) w1[i] = (i + s[1]) % n1;
  for (int i = 0; i < n2; ++i) w2[i] = (i + s[2]) % n2;

  double worst = 0.0;
  arg = 0;
  for (int i0 = 0; i0 < n0; i0 += stride)
    for (int i1 = 0; i1 < n1; i1 += stride) {
      const long base = (long(i0) * n1 + i1) * n2;
      const long sh01 = (long(w0[i0]) * n1 + w1[i1]) * n2;
      for (int i2 = 0; i2 < n2; ++i2) {
        const long p = base + i2;
        const long q = sh01 + w2[i2];
        double mag = 0.0;
        for (const auto& v : vals) {
          const double dv = v[q] - v[p];
          mag += dv * dv;
        }
        if (mag > worst) {
          worst = mag;
          arg = p;
        }
      }
    }
  return std::sqrt(worst);
}

}  // namespace

ScanResult breakthrough_scan(const SpectralField& u, const TimeDependentModulus& Om,
                             double t, long shift_samples, unsigned long seed,
                             double gradient_hint) {
  ScanResult out;
  const auto vals = u.to_physical();
  const auto shifts = enumerate_shifts(u, shift_samples, seed);
  out.shifts_scanned = long(shifts.size());

  for (const auto& sh : shifts) {
    long arg = 0;
    const double inc = max_increment(u, vals, sh.s, arg);
    const double om = Om.value(t, sh.len);
    const double deficit = inc - om;
    if (deficit > out.worst_deficit) {
      out.worst_deficit = deficit;
      out.shift_len = sh.len;
      out.base_index = arg;
      out.increment = inc;
      out.omega_value = om;
    }
  }

  const double g = std::isnan(gradient_hint) ? gradient_max(u) : gradient_hint;
  out.slack = g * u.period(0) / u.modes(0);
  out.violation = out.worst_deficit > out.slack;
  return out;
}

double holder_seminorm_estimate(const SpectralField& f, double beta,
                                long shift_samples, unsigned long seed) {
  const auto vals = f.to_physical();
  const auto shifts = enumerate_shifts(f, shift_samples, seed);
  double worst = 0.0;
  for (const auto& sh : shifts) {
    long arg = 0;
    const double inc = max_increment(f, vals, sh.s, arg);
    worst = std::max(worst, inc / std::pow(sh.len, beta));
  }
  return worst;
}

TabulatedModulus empirical_modulus_envelope(const SpectralField& f,
                                            long shift_samples,
                                            unsigned long seed) {
  const auto vals = f.to_physical();
  const auto shifts = enumerate_shifts(f, shift_samples, seed);

  // bin the increments over log-spaced separations
  const double h = f.period(0) / f.modes(0);
  const double lo = 0.5 * h;
  const double hi = 0.5 * std::sqrt(double(f.dim())) * f.period(0) * 1.01;
  const int bins = 48;
  const int stride = f.lattice_size() > 100000 ? 2 : 1;  // envelope scans may subsample bases
  std::vector<double> env(bins, 0.0), pos(bins);
  for (int b = 0; b < bins; ++b)
    pos[b] = lo * std::pow(hi / lo, (b + 0.5) / bins);
  for (const auto& sh : shifts) {
    long arg = 0;
    const double inc = max_increment(f, vals, sh.s, arg, stride);
    int b = int(std::floor(std::log(sh.len / lo) / std::log(hi / lo) * bins));
    b = std::clamp(b, 0, bins - 1);
    env[b] = std::max(env[b], inc);
  }

  // nondecreasing pass, then the upper concave hull in linear coordinates
  for (int b = 1; b < bins; ++b) env[b] = std::max(env[b], env[b - 1]);
  std::vector<std::pair<double, double>> hull;  // (xi, value)
  hull.push_back({0.0, 0.0});
  for (int b = 0; b < bins; ++b) {
    while (hull.size() >= 2) {
      const auto& p1 = hull[hull.size() - 2];
      const auto& p2 = hull[hull.size() - 1];
      // drop p2 when (pos, env) lies above the chord p1->p2 extended
      const double cross = (p2.first - p1.first) * (env[b] - p1.second) -
                           (pos[b] - p1.first) * (p2.second - p1.second);
      if (cross >= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back({pos[b], env[b]});
  }

  // evaluate the hull on the bin grid (tabulated modulus nodes)
  std::vector<double> nodes, values;
  size_t seg = 0;
  for (int b = 0; b < bins; ++b) {
    while (seg + 1 < hull.size() - 1 && hull[seg + 1].first < pos[b]) ++seg;
    const auto& p1 = hull[seg];
    const auto& p2 = hull[seg + 1];
    const double w = (pos[b] - p1.first) / (p2.first - p1.first);
    nodes.push_back(pos[b]);
    values.push_back(p1.second + w * (p2.second - p1.second));
  }
  return TabulatedModulus(nodes, values, TabulatedModulus::Tail::Bounded);
}

// ---------------------------------------------------------------------------
// Bound formulas
// ---------------------------------------------------------------------------

BoundFormula arm_bound(const BoundSpec& spec) {
  BoundFormula out;
  switch (spec.kind) {
    case BoundKind::Thm1: {
      if (!spec.slope0_trace) throw ConfigError("Thm1 bound needs a slope trace");
      const double B2 = spec.B * spec.B;
      auto f = spec.slope0_trace;
      out.name = "THM1";
      out.value = [B2, f](double t) { return B2 * f(t); };
      return out;
    }
    case BoundKind::Thm2: {
      const double l0 = spec.lambda0, c0 = spec.C0;
      if (!(l0 > 1.0)) throw ConfigError("Thm2 bound needs lambda0 > 1");
      out.name = "THM2";
      out.value = [l0, c0](double t) {
        return 2.0 * std::exp(2.0 * std::log(l0) * std::exp(c0 * t));
      };
      return out;
    }
    case BoundKind::Burgers: {
      const double v = spec.lambda0 * spec.lambda0;
      out.name = "BURGERS";
      out.value = [v](double) { return v; };
      return out;
    }
    case BoundKind::Thm3: {
      const double gamma = holder_gamma(spec.alpha, spec.beta);
      const double c = spec.c0alpha;
      DriftEnvelope g = spec.g;
      out.name = "THM3";
      out.value = [c, gamma, g](double t) { return c * std::pow(g(t), gamma); };
      return out;
    }
    case BoundKind::Thm4Crit: {
      const double gamma = holder_gamma(spec.alpha, spec.beta);
      const double pstar = critical_exponent(spec.alpha, spec.beta);
      const double pre = spec.slope0 * spec.B;
      const double cb = spec.C * std::pow(spec.B, 1.0 - spec.beta);
      DriftEnvelope g = spec.g;
      out.name = "THM4_CRIT";
      out.value = [pre, cb, gamma, pstar, g](double t) {
        return pre * std::pow(g(t), gamma) *
               std::exp(cb * g.power_integral(pstar, t));
      };
      return out;
    }
    case BoundKind::Thm4Super: {
      ScalingLaw law = spec.law;
      const double pre = spec.slope0 * spec.B;
      out.name = "THM4_SUPER";
      out.value = [pre, law](double t) {
        return pre * law.lambda(t) * law.mu(t);
      };
      return out;
    }
  }
  throw ConfigError("unknown bound kind");
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

std::string to_string(Equation eq) {
  switch (eq) {
    case Equation::Burgers: return "burgers";
    case Equation::BurgersHilbert: return "burgers-hilbert";
    case Equation::FractalBurgers: return "fractal-burgers";
    case Equation::DriftDiffusion: return "drift-diffusion";
    case Equation::Sqg: return "sqg";
    case Equation::LinearNse: return "linear-nse";
  }
  return "?";
}

namespace {

SpectralField initial_condition(const ExperimentConfig& cfg) {
  if (cfg.ic == "sin") {
    if (cfg.dim != 1) throw ConfigError("sin initial data is one-dimensional");
    return sine_field(cfg.N, cfg.L);
  }
  if (cfg.ic == "taylor-green") return taylor_green(cfg.N, cfg.L);
  if (cfg.ic == "random")
    return random_low_mode_field(cfg.dim, cfg.N, cfg.L, cfg.components, 3,
                                 cfg.seed, cfg.components == cfg.dim);
  throw ConfigError("unknown initial condition '" + cfg.ic + "'");
}

void append_num(std::string& s, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  s += buf;
}

}  // namespace

void SimulationTrace::write_csv(const std::string& path) const {
  std::string s = "t,lipschitz,sup_norm";
  for (const auto& n : bound_names) s += ",bound_" + n;
  s += ",breakthrough_flag\n";
  for (size_t i = 0; i < times.size(); ++i) {
    append_num(s, times[i]);
    s += ',';
    append_num(s, lipschitz[i]);
    s += ',';
    append_num(s, sup_norm[i]);
    for (size_t b = 0; b < bounds.size(); ++b) {
      s += ',';
      append_num(s, bounds[b][i]);
    }
    s += ',';
    s += std::to_string(breakthrough_flag[i]);
    s += '\n';
  }
  std::ofstream(path) << s;
}

void SimulationTrace::write_long_csv(const std::string& path) const {
  std::string s = "t,series,value\n";
  auto row = [&](double t, const std::string& name, double v) {
    append_num(s, t);
    s += ',' + name + ',';
    append_num(s, v);
    s += '\n';
  };
  for (size_t i = 0; i < times.size(); ++i) {
    row(times[i], "lipschitz", lipschitz[i]);
    row(times[i], "sup_norm", sup_norm[i]);
    for (size_t b = 0; b < bounds.size(); ++b)
      row(times[i], "bound_" + bound_names[b], bounds[b][i]);
  }
  std::ofstream(path) << s;
}

std::string SimulationTrace::manifest_json(const ExperimentConfig& cfg) const {
  nlohmann::json j;
  j["equation"] = mocert::to_string(cfg.eq);
  j["dim"] = cfg.dim;
  j["N"] = cfg.N;
  j["L"] = cfg.L;
  j["ic"] = cfg.ic;
  j["seed"] = cfg.seed;
  j["nu"] = cfg.solver.nu;
  j["alpha"] = cfg.solver.alpha;
  j["dt"] = cfg.solver.dt;
  j["T"] = cfg.solver.T;
  j["records"] = times.size();
  j["bounds"] = bound_names;
  j["blowup"] = blowup;
  if (blowup) j["blowup_time"] = blowup_time;
  j["bound_exceeded"] = bound_exceeded;
  j["breakthrough"] = breakthrough.has_value();
  if (breakthrough) {
    j["breakthrough_t"] = breakthrough->t;
    j["breakthrough_separation"] = breakthrough->shift_len;
    j["breakthrough_deficit"] = breakthrough->deficit;
  }
  return j.dump(2);
}

SimulationTrace run_experiment(const ExperimentConfig& cfg) {
  SimulationTrace trace;
  SpectralField u = initial_condition(cfg);

  SolverConfig solver = cfg.solver;
  if (cfg.eq == Equation::BurgersHilbert && !solver.zero_order)
    solver.zero_order = MultiplierSpec::hilbert_1d();
  if (cfg.eq == Equation::Sqg) solver.sqg_mode = true;

  for (const auto& b : cfg.bounds) trace.bound_names.push_back(b.name);
  trace.bounds.assign(cfg.bounds.size(), {});

  const std::string dir = cfg.out_dir;
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    u.save(dir + "/" + cfg.run_name + "_initial.field", 0.0);
  }

  double t = 0.0;
  int record = 0;
  const int steps_per_record =
      std::max(1, int(std::llround(cfg.record_dt / solver.dt)));

  // inviscid/supercritical runs lose regularity with bounded coefficients;
  // energy piling into the top modes is the usable blowup signal
  auto resolution_lost = [&]() {
    double total = 0.0, tail = 0.0;
    for (int c = 0; c < u.components(); ++c) {
      for (long idx = 0; idx < u.lattice_size(); ++idx) {
        int i0, i1, i2;
        u.unindex(idx, i0, i1, i2);
        const int is[3] = {i0, i1, i2};
        const double e = std::norm(u.coeff(c)[idx]);
        total += e;
        for (int ax = 0; ax < u.dim(); ++ax) {
          const int m = std::abs(u.mode_of(ax, is[ax]));
          if (4 * m > u.modes(ax)) {
            tail += e;
            break;
          }
        }
      }
    }
    return total > 1e-30 && tail > 0.05 * total;
  };

  auto record_state = [&](double tnow) {
    const double lip = gradient_max(u, cfg.grad_refine);
    trace.times.push_back(tnow);
    trace.lipschitz.push_back(lip);
    trace.sup_norm.push_back(u.sup_norm(2));
    for (size_t b = 0; b < cfg.bounds.size(); ++b) {
      const double bv = cfg.bounds[b].value(tnow);
      trace.bounds[b].push_back(bv);
      if (lip > bv) trace.bound_exceeded = true;
    }
    int flag = 0;
    if (cfg.modulus && cfg.scan_every > 0 && record % cfg.scan_every == 0) {
      ScanResult sc = breakthrough_scan(u, *cfg.modulus, tnow, cfg.scan_shifts,
                                        cfg.seed, lip);
      if (sc.violation) {
        flag = 1;
        if (!trace.breakthrough) {
          Violation v;
          v.t = tnow;
          v.shift_len = sc.shift_len;
          v.base_index = sc.base_index;
          v.deficit = sc.worst_deficit;
          trace.breakthrough = v;
        }
      }
    }
    trace.breakthrough_flag.push_back(flag);
    ++record;
  };

  record_state(0.0);
  const long total_steps = std::llround(cfg.solver.T / solver.dt);
  for (long s = 0; s < total_steps; ++s) {
    StepStatus st;
    switch (cfg.eq) {
      case Equation::Burgers:
      case Equation::BurgersHilbert:
      case Equation::FractalBurgers:
        st = step_burgers(u, t, solver);
        break;
      case Equation::DriftDiffusion:
      case Equation::Sqg:
        st = step_drift_diffusion(u, t, solver, cfg.drift);
        break;
      case Equation::LinearNse:
        st = step_linear_nse(u, t, solver, cfg.drift);
        break;
    }
    if (st.blowup) {
      trace.blowup = true;
      trace.blowup_time = t;
      break;
    }
    t += solver.dt;
    if ((s + 1) % steps_per_record == 0 || s + 1 == total_steps) {
      if (resolution_lost()) {
        trace.blowup = true;
        trace.blowup_time = t;
        break;
      }
      record_state(t);
    }
  }

  if (!dir.empty()) {
    u.save(dir + "/" + cfg.run_name + "_final.field", t);
    trace.write_csv(dir + "/" + cfg.run_name + "_trace.csv");
    trace.write_long_csv(dir + "/" + cfg.run_name + "_trace_long.csv");
    std::ofstream(dir + "/" + cfg.run_name + "_manifest.json")
        << trace.manifest_json(cfg) << "\n";
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Pressure-bound desk check
// ---------------------------------------------------------------------------

PressureCheckResult pressure_lemma_check(const SpectralField& u,
                                         const SpectralField& b, long pairs,
                                         unsigned long seed) {
  PressureCheckResult out;
  if (u.dim() != 3 || b.dim() != 3)
    throw ParameterError("pressure check runs in three dimensions");
  if (u.max_coeff_norm() == 0.0 || b.max_coeff_norm() == 0.0) {
    out.skipped = true;
    return out;
  }

  TabulatedModulus env_u = empirical_modulus_envelope(u, 4000, seed);
  TabulatedModulus env_b = empirical_modulus_envelope(b, 4000, seed + 1);
  ModulusRef mu = ModulusRef::of(env_u);
  ModulusRef mb = ModulusRef::of(env_b);

  // omega~ on a log grid of separations, interpolated per pair
  const double h = u.period(0) / u.modes(0);
  const double lo = 0.49 * h, hi = 0.5 * std::sqrt(3.0) * u.period(0) * 1.01;
  const int nx = 64;
  std::vector<double> xs(nx), ws(nx);
  for (int i = 0; i < nx; ++i) {
    xs[i] = lo * std::pow(hi / lo, double(i) / (nx - 1));
    ws[i] = pressure_functional(mb, mu, xs[i], 1.0).value;
  }
  auto omega_tilde = [&](double xi) {
    const double w =
        std::log(xi / lo) / std::log(hi / lo) * (nx - 1);
    const int i = std::clamp(int(std::floor(w)), 0, nx - 2);
    const double fr = w - i;
    return ws[i] * (1.0 - fr) + ws[i + 1] * fr;
  };

  SpectralField gp = pressure_gradient(u, b);
  const auto gvals = gp.to_physical();

  std::mt19937_64 rng(seed);
  const long lattice = u.lattice_size();
  double worst = 0.0, worst_inc = 0.0;
  long used = 0;
  for (long k = 0; k < pairs; ++k) {
    const long p = long(rng() % (unsigned long)(lattice));
    const long q = long(rng() % (unsigned long)(lattice));
    if (p == q) continue;
    int p0, p1, p2, q0, q1, q2;
    u.unindex(p, p0, p1, p2);
    u.unindex(q, q0, q1, q2);
    const int s[3] = {q0 - p0, q1 - p1, q2 - p2};
    const double sep = minimal_image_length(u, s);
    double inc2 = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double dv = gvals[c][q] - gvals[c][p];
      inc2 += dv * dv;
    }
    const double inc = std::sqrt(inc2);
    const double den = omega_tilde(sep);
    if (den <= 0.0) continue;
    worst = std::max(worst, inc / den);
    worst_inc = std::max(worst_inc, inc);
    ++used;
  }
  out.c_hat = worst;
  out.pairs_used = used;
  out.max_increment = worst_inc;
  return out;
}

}  // namespace mocert
