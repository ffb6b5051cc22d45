#include "mocert/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <cstdio>
#include <cstdlib>

#include "json.hpp"
#include "mocert/quadrature.hpp"

namespace mocert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSigmaSat = 1e12;  // tanh == 1.0 in double far before this

struct MarginPoint {
  double margin = 0.0;
  double budget = 0.0;
  bool structural = false;  // positive by closed-form algebra, below fp floor
  bool analytic = false;    // closed-form margin: no grid-sampling slack
};

double exp_clamped(double x) {
  if (x > 700.0) return std::numeric_limits<double>::max() / 8.0;
  return std::exp(x);
}

// ---- Thm2 ------------------------------------------------------------------
// lambda'(w + sigma w') - 4 lambda^3 w'' - lambda^3 w w' - C_Kd lambda I >= 0,
// reported divided by lambda(t).

struct SioCache {
  std::map<double, FunctionalResult> memo;  // keyed by log sigma
};

FunctionalResult thm2_sio(const ModulusRef& ref, const VerifierParams& p,
                          double log_sigma, SioCache& cache) {
  auto it = cache.memo.find(log_sigma);
  if (it != cache.memo.end()) return it->second;
  FunctionalResult r;
  const double lsat = std::log(kSigmaSat);
  if (log_sigma <= lsat) {
    r = sio_functional(ref, p.rho, std::exp(log_sigma), 1.0);
  } else {
    // omega == 1.0 exactly beyond saturation: the near integral grows by
    // log sigma and the far term is the constant 3^(-rho)/rho
    FunctionalResult base = thm2_sio(ref, p, lsat, cache);
    r = base;
    r.value = base.value + (log_sigma - lsat);
  }
  cache.memo[log_sigma] = r;
  return r;
}

double thm2_sio_bound(const PiecewiseModulus& w, const VerifierParams& p,
                      double log_sigma) {
  const double delta = w.delta();
  if (log_sigma <= std::log(delta)) {
    const double s = std::exp(log_sigma);
    return 6.0 * s + 3.0 * std::pow(s, p.rho) * std::abs(std::log(3.0 * s)) / p.rho;
  }
  return 2.0 * delta + (std::log(3.0) + log_sigma - std::log(delta)) + 1.0 / p.rho;
}

MarginPoint thm2_margin(const TimeDependentModulus& Om, const ModulusRef& ref,
                        const VerifierParams& p, double t, double log_sigma,
                        SioCache& cache) {
  const PiecewiseModulus& w = Om.omega;
  const double ll = Om.law.log_lambda(t);
  const double dll = Om.law.dlog_lambda(t);

  MarginPoint out;
  if (log_sigma > std::log(kSigmaSat)) {
    // beyond saturation the margin is exactly linear in log sigma; the cap
    // endpoint log sigma = log lambda + log(2 L sqrt(d)) may overflow, so
    // group the log lambda terms before combining
    out.analytic = true;
    double base, err = 0.0;
    if (p.conservative) {
      base = thm2_sio_bound(w, p, std::log(kSigmaSat));
    } else {
      FunctionalResult I = thm2_sio(ref, p, std::log(kSigmaSat), cache);
      base = I.value;
      err = I.budget();
      out.budget = p.c_kd * err;
    }
    if (std::isfinite(log_sigma)) {
      out.margin = dll - p.c_kd * (base + log_sigma - std::log(kSigmaSat));
    } else {
      // cap endpoint with overflowing lambda: sign decided by C0 vs c_kd
      out.margin = (Om.law.C0 > p.c_kd) ? kInf : -kInf;
    }
    return out;
  }
  const double s = std::exp(log_sigma);
  const double wval = w(s);
  const double wp = w.eval(s, 1);
  const double surplus = -4.0 * w.eval(s, 2) - wval * wp;  // stationary slack
  out.margin = dll * (wval + s * wp);
  if (surplus > 0.0) out.margin += exp_clamped(2.0 * ll + std::log(surplus));
  if (p.conservative) {
    out.margin -= p.c_kd * thm2_sio_bound(w, p, log_sigma);
  } else {
    FunctionalResult I = thm2_sio(ref, p, log_sigma, cache);
    out.margin -= p.c_kd * I.value;
    out.budget = p.c_kd * I.budget();
  }
  return out;
}

// ---- Thm3 ------------------------------------------------------------------
// margin = -D_alpha[w](sigma) - sigma^beta w'(sigma)

struct Thm3Setup {
  double alpha = 1.0, beta = 0.5;
  double c_bound = 4.0, c_ode = 2.0;
};

MarginPoint thm3_margin(const TimeDependentModulus& Om, const ModulusRef& ref,
                        const VerifierParams& p, const Thm3Setup& su, double sigma) {
  const PiecewiseModulus& w = Om.omega;
  MarginPoint out;
  if (!p.conservative && su.alpha < 1.0) {
    FunctionalResult fr = frac_dissipation(ref, su.alpha, sigma, p.c_kernel);
    out.margin = -fr.value - std::pow(sigma, su.beta) * w.eval(sigma, 1);
    out.budget = fr.budget();
    return out;
  }
  // local closed form; on the exp-integral tail the terms combine to
  // (c_bound/c_ode - 1) sigma^beta w'(sigma), positive for all sigma
  if (sigma > w.delta()) {
    const double wp = w.eval(sigma, 1);
    out.margin = (su.c_bound / su.c_ode - 1.0) * std::pow(sigma, su.beta) * wp;
    out.analytic = true;
    if (out.margin == 0.0 && su.c_bound > su.c_ode) out.structural = true;
    return out;
  }
  out.margin = -su.c_bound * std::pow(sigma, 2.0 - 2.0 * su.alpha) * w.eval(sigma, 2) -
               std::pow(sigma, su.beta) * w.eval(sigma, 1);
  out.analytic = true;  // closed form on the head piece as well
  return out;
}

// ---- Thm4 ------------------------------------------------------------------
// margin/lambda = (lambda'/lambda) w + dissipation
//               - c_d (B mu)^(1-beta) g [sigma^beta w' + 1/(1-beta) int w' eta^(beta-1)
//                                        + sigma^beta int w/eta^2]

struct PressureCache {
  std::map<double, FunctionalResult> memo;
};

FunctionalResult thm4_bracket_exact(const ModulusRef& ref, const PiecewiseModulus& w,
                                    double beta, double sigma, PressureCache& cache) {
  auto it = cache.memo.find(sigma);
  if (it != cache.memo.end()) return it->second;
  FunctionalResult r = nse_pressure_functional(ref, 1.0, beta, sigma, 1.0,
                                               PressureEvalPath::IntegratedByParts);
  r.value += std::pow(sigma, beta) * w.eval(sigma, 1);
  cache.memo[sigma] = r;
  return r;
}

double thm4_bracket_bound(const PiecewiseModulus& w, double beta, double sigma) {
  const double delta = w.delta();
  if (sigma <= delta)
    return std::pow(sigma, beta) *
           (5.0 + 2.0 / (beta * (1.0 - beta)) - 2.0 * std::log(sigma));
  return 2.0 * delta * std::pow(sigma, beta - 1.0) +
         std::pow(delta, beta) / (1.0 - beta) * (2.0 / beta + 1.0 / (1.0 - beta)) +
         std::pow(sigma, beta - 1.0) * w(sigma);
}

MarginPoint thm4_margin(const TimeDependentModulus& Om, const ModulusRef& ref,
                        const VerifierParams& p, double alpha, double beta,
                        double t, double sigma, PressureCache& cache) {
  const PiecewiseModulus& w = Om.omega;
  const double Bmu = Om.B * Om.law.mu(t);
  const double g_t = Om.law.g(t);
  const double cb = dissipation_bound_constant(alpha, p.c_kernel);

  MarginPoint out;
  out.margin = Om.law.dlog_lambda(t) * w(sigma);

  if (!p.conservative && alpha < 1.0) {
    FunctionalResult fr = frac_dissipation(ref, alpha, sigma, p.c_kernel);
    out.margin += std::pow(Bmu, 2.0 * alpha) * (-fr.value);
    out.budget += std::pow(Bmu, 2.0 * alpha) * fr.budget();
  } else {
    out.margin += -cb * std::pow(Bmu, 2.0 * alpha) *
                  std::pow(sigma, 2.0 - 2.0 * alpha) * w.eval(sigma, 2);
  }

  const double pf = p.c_d * std::pow(Bmu, 1.0 - beta) * g_t;
  if (p.conservative) {
    out.margin -= pf * thm4_bracket_bound(w, beta, sigma);
  } else {
    FunctionalResult P = thm4_bracket_exact(ref, w, beta, sigma, cache);
    out.margin -= pf * P.value;
    out.budget += pf * P.budget();
  }
  return out;
}

// ---- Hyp1 ------------------------------------------------------------------
// margin = dOmega/dt - 4 Omega_xixi - Omega Omega_xi
//        - 2 c_d [int_0^xi Omega^2/eta^2 + Omega(xi) int_xi^inf Omega/eta^2]

MarginPoint hyp1_margin(const TimeDependentModulus& Om, const ModulusRef& base,
                        const VerifierParams& p, double t, double xi) {
  const double a = Om.amplitude(t);
  const double s = Om.argscale(t);
  const double sg = s * xi;
  const PiecewiseModulus& w = Om.omega;

  MarginPoint out;
  out.margin = a * Om.law.dlog_lambda(t) * w(sg);  // lower bound on dOmega/dt
  out.margin += -4.0 * a * s * s * w.eval(sg, 2);
  out.margin += -a * a * s * w(sg) * w.eval(sg, 1);

  if (p.c_d != 0.0) {
    ModulusRef ref = scale_ref(base, a, s);
    auto f = [&](double eta) {
      const double v = ref(eta);
      return v * v / (eta * eta);
    };
    QuadResult q1 = integrate_split(f, 0.0, xi, ref.kinks, 1e-14, 1e-10);
    FunctionalResult up = weighted_tail(ref, xi, 1.0);
    out.margin -= 2.0 * p.c_d * (q1.value + ref(xi) * up.value);
    out.budget += 2.0 * p.c_d * (q1.abs_error + ref(xi) * up.budget());
  }
  return out;
}

// ---- grid assembly ---------------------------------------------------------

// log-sigma points: log-spaced base grid plus breakpoint-adjacent pairs,
// never sampling exactly at a slope kink
std::vector<double> log_sigma_grid(double lo, double hi, int count,
                                   const std::vector<double>& kinks) {
  std::vector<double> ls;
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < count; ++i)
    ls.push_back(llo + (lhi - llo) * i / double(count - 1));
  for (double b : kinks) {
    const double lb = std::log(b);
    if (lb > llo && lb < lhi) {
      ls.push_back(std::log(b * (1.0 - 1e-6)));
      ls.push_back(std::log(b * (1.0 + 1e-6)));
    }
  }
  std::sort(ls.begin(), ls.end());
  std::vector<double> out;
  for (double v : ls) {
    bool at_kink = false;
    for (double b : kinks)
      if (std::abs(v - std::log(b)) < 1e-9) at_kink = true;
    if (!at_kink && (out.empty() || v > out.back() + 1e-12)) out.push_back(v);
  }
  return out;
}

int piece_index(const std::vector<double>& kinks, double log_sigma) {
  int idx = 0;
  for (double b : kinks)
    if (log_sigma > std::log(b)) ++idx;
  return idx;
}

}  // namespace

std::string to_string(InequalityKind k) {
  switch (k) {
    case InequalityKind::Thm2: return "THM2";
    case InequalityKind::Thm3: return "THM3";
    case InequalityKind::Thm4Crit: return "THM4_CRIT";
    case InequalityKind::Thm4Super: return "THM4_SUPER";
    case InequalityKind::Hyp1: return "HYP1";
  }
  return "?";
}

VerificationReport check_inequality(InequalityKind kind,
                                    const TimeDependentModulus& Omega,
                                    const DriftEnvelope* drift,
                                    const VerifierParams& p, const GridSpec& grid) {
  VerificationReport rep;
  rep.kind = kind;
  rep.grid = grid;
  rep.params["c_kernel"] = p.c_kernel;
  rep.params["c_d"] = p.c_d;
  rep.params["c_kd"] = p.c_kd;
  rep.params["rho"] = p.rho;
  rep.params["conservative"] = p.conservative ? 1.0 : 0.0;

  const ModulusRef ref = ModulusRef::of(Omega.omega);
  const std::vector<double> kinks = Omega.omega.breakpoints();

  // time rows
  std::vector<double> ts;
  if (grid.t_count <= 1 || !(grid.t_max > grid.t_min)) {
    ts.push_back(grid.t_min);
  } else {
    for (int i = 0; i < grid.t_count; ++i)
      ts.push_back(grid.t_min + (grid.t_max - grid.t_min) * i / double(grid.t_count - 1));
  }

  // sigma columns; Thm2 extends to the per-time cap 2 L sqrt(d) lambda(t)
  double hi_global = grid.sigma_max;
  const double cap_coef = 2.0 * p.L * std::sqrt(double(p.dim));
  if (kind == InequalityKind::Thm2) {
    // work in log space: the cap may be far beyond double range
    const double lcap = Omega.law.log_lambda(ts.back()) + std::log(cap_coef);
    hi_global = lcap > std::log(1e290) ? 1e290 : std::exp(lcap);
    hi_global = std::max(hi_global, grid.sigma_max);
  }
  std::vector<double> ls_all =
      log_sigma_grid(grid.sigma_min, hi_global, grid.sigma_count, kinks);

  Thm3Setup t3;
  SioCache sio_cache;
  PressureCache press_cache;
  double alpha = 1.0, beta = 0.5;
  if (kind == InequalityKind::Thm3 || kind == InequalityKind::Thm4Crit ||
      kind == InequalityKind::Thm4Super) {
    // recover (alpha, beta) from the construction
    beta = drift ? drift->beta : Omega.law.g.beta;
    const double gamma = Omega.law.gamma > 0.0 ? Omega.law.gamma
                                               : holder_gamma(1.0, beta);
    alpha = (1.0 / gamma + 1.0 - beta) / 2.0;
    t3.alpha = alpha;
    t3.beta = beta;
    t3.c_bound = dissipation_bound_constant(alpha, p.c_kernel);
    for (const ModulusPiece& pc : Omega.omega.pieces())
      if (pc.kind == PieceKind::ExpIntegralTail) t3.c_ode = pc.c_ode;
    rep.constants["alpha"] = alpha;
    rep.constants["beta"] = beta;
    rep.constants["c_bound"] = t3.c_bound;
    rep.constants["c_ode"] = t3.c_ode;
    rep.constants["delta"] = Omega.omega.delta();
  }
  if (kind == InequalityKind::Thm2) {
    rep.constants["C0"] = Omega.law.C0;
    rep.constants["lambda0"] = Omega.law.lambda0;
    rep.constants["delta"] = Omega.omega.delta();
  }
  if (kind == InequalityKind::Thm4Crit || kind == InequalityKind::Thm4Super)
    rep.constants["C"] = Omega.law.C;

  auto margin_at = [&](double t, double lsig) -> MarginPoint {
    const double sigma = std::exp(lsig);  // may overflow to inf for Thm2
    switch (kind) {
      case InequalityKind::Thm2:
        return thm2_margin(Omega, ref, p, t, lsig, sio_cache);
      case InequalityKind::Thm3:
        return thm3_margin(Omega, ref, p, t3, sigma);
      case InequalityKind::Thm4Crit:
      case InequalityKind::Thm4Super:
        return thm4_margin(Omega, ref, p, alpha, beta, t, sigma, press_cache);
      case InequalityKind::Hyp1:
        return hyp1_margin(Omega, ref, p, t, sigma);
    }
    return {};
  };

  bool all_pass = true;
  std::vector<double> row_margins(ls_all.size());
  std::vector<double> row_budget(ls_all.size());
  std::vector<int> row_state(ls_all.size());  // 0 numeric, 1 structural
  std::vector<int> row_analytic(ls_all.size());

  for (double t : ts) {
    // Thm2: this row only covers sigma <= 2 L sqrt(d) lambda(t)
    double row_cap_log = std::log(hi_global) + 1.0;
    if (kind == InequalityKind::Thm2)
      row_cap_log = Omega.law.log_lambda(t) + std::log(cap_coef);

    std::vector<double> ls(ls_all);
    if (kind == InequalityKind::Thm2) {
      while (!ls.empty() && ls.back() > row_cap_log) ls.pop_back();
      ls.push_back(row_cap_log);  // always include the endpoint itself
    }

    row_margins.assign(ls.size(), 0.0);
    row_budget.assign(ls.size(), 0.0);
    row_state.assign(ls.size(), 0);
    row_analytic.assign(ls.size(), 0);

    for (size_t i = 0; i < ls.size(); ++i) {
      MarginPoint mp = margin_at(t, ls[i]);
      row_margins[i] = mp.margin;
      row_budget[i] = mp.budget;
      row_state[i] = mp.structural ? 1 : 0;
      row_analytic[i] = mp.analytic ? 1 : 0;
      ++rep.points_checked;
      if (mp.structural) ++rep.structural_points;
    }

    // Between grid points a smooth margin can only undershoot its endpoint
    // values near an interior minimum; monotone-sampled triples are
    // certified by their endpoints, sampled minima carry a parabolic
    // estimate of the inter-grid dip, refined locally until conclusive.
    // Closed-form (analytic) margins have no sampling gap.
    for (size_t i = 0; i < ls.size(); ++i) {
      if (row_state[i] == 1) continue;
      double slack = 0.0;
      const double m = row_margins[i];
      if (!row_analytic[i] && i > 0 && i + 1 < ls.size()) {
        const int pi = piece_index(kinks, ls[i]);
        const bool in_piece = row_state[i - 1] == 0 && row_state[i + 1] == 0 &&
                              piece_index(kinks, ls[i - 1]) == pi &&
                              piece_index(kinks, ls[i + 1]) == pi;
        if (in_piece) {
          double dl = ls[i] - ls[i - 1], dr = ls[i + 1] - ls[i];
          double a = row_margins[i - 1], c = row_margins[i + 1];
          for (int level = 0; level < 8; ++level) {
            if (!(m < a && m < c)) {
              slack = 0.0;  // not a sampled minimum at this resolution
              break;
            }
            const double curv = a + c - 2.0 * m;
            slack = curv > 0.0 ? (c - a) * (c - a) / (8.0 * curv)
                               : std::max(a, c) - m;
            if (m > row_budget[i] + slack) break;
            dl *= 0.5;
            dr *= 0.5;
            a = margin_at(t, ls[i] - dl).margin;
            c = margin_at(t, ls[i] + dr).margin;
            ++rep.points_checked;
          }
        }
      }
      if (m < rep.min_margin) {
        rep.min_margin = m;
        rep.argmin_t = t;
        rep.argmin_sigma = std::exp(ls[i]);
        rep.budget_at_argmin = row_budget[i];
        rep.slack_at_argmin = slack;
      }
      const bool pass = std::isfinite(m) ? (m > row_budget[i] + slack)
                                         : (m > 0.0);  // +inf margins pass
      if (!pass) {
        all_pass = false;
        ++rep.failed_points;
        if (std::getenv("MOCERT_DEBUG_MARGINS"))
          std::fprintf(stderr, "fail t=%g log_sigma=%g margin=%g budget=%g slack=%g\n",
                       t, ls[i], m, row_budget[i], slack);
      }
    }
  }

  rep.certified = all_pass && rep.failed_points == 0;
  return rep;
}

std::pair<double, double> feasible_delta(double alpha, double beta,
                                         double c_kernel, InequalityKind kind) {
  const double r = tail_exponent(alpha, beta);
  (void)holder_gamma(alpha, beta);  // throws at the sharp threshold

  VerifierParams p;
  p.c_kernel = c_kernel;
  GridSpec fine;
  fine.sigma_min = 1e-8;
  fine.sigma_count = 241;

  auto g1 = DriftEnvelope::constant(1.0, beta);

  if (kind == InequalityKind::Thm2) {
    // below delta only the stationary surplus -4w'' - w w' is available to
    // absorb the zero-order term; the large-sigma region is handled by C0
    const double rho = 1.0;
    double delta = 0.25;
    for (int tries = 0; tries < 20; ++tries) {
      PiecewiseModulus w = viscous_burgers_modulus(delta);
      bool ok = true;
      for (int i = 0; i <= 200 && ok; ++i) {
        const double sig = delta * std::pow(1e-6, 1.0 - i / 200.0);
        const double surplus = -4.0 * w.eval(sig, 2) - w(sig) * w.eval(sig, 1);
        const double destab =
            c_kernel * (6.0 * sig + 3.0 * std::pow(sig, rho) *
                                        std::abs(std::log(3.0 * sig)) / rho);
        if (surplus < 2.0 * destab) ok = false;  // factor-2 headroom
      }
      if (ok) return {0.5, delta};
      delta *= 0.5;
    }
    throw ConstructionError("no feasible delta for the tanh junction");
  }

  double delta;
  if (kind == InequalityKind::Thm3) {
    Thm3Options opts;
    opts.c_kernel = c_kernel;
    delta = build_thm3_modulus(alpha, beta, 1.0, g1, opts).omega.delta();
  } else {
    delta = build_thm4_modulus(alpha, beta, 1.0, g1,
                               kind == InequalityKind::Thm4Super
                                   ? Thm4Regime::Supercritical
                                   : Thm4Regime::Critical)
                .omega.delta();
  }

  // re-check on a fine grid near 0 and shrink if needed
  for (int tries = 0; tries < 8; ++tries) {
    GridSpec gg = fine;
    gg.sigma_max = std::max(3.0 * delta, 1e-6);
    TimeDependentModulus tdm;
    if (kind == InequalityKind::Thm3) {
      Thm3Options opts;
      opts.c_kernel = c_kernel;
      opts.delta = delta;
      tdm = build_thm3_modulus(alpha, beta, 1.0, g1, opts);
    } else {
      Thm4Options opts;
      opts.delta = delta;
      tdm = build_thm4_modulus(alpha, beta, 1.0, g1,
                               kind == InequalityKind::Thm4Super
                                   ? Thm4Regime::Supercritical
                                   : Thm4Regime::Critical,
                               opts);
    }
    auto rep = check_inequality(kind, tdm, nullptr, p, gg);
    if (rep.certified) return {r, delta};
    delta *= 0.5;
  }
  throw ConstructionError("feasible_delta: fine-grid re-check kept failing");
}

CertifyResult certify_constant(const CertifyRequest& req) {
  CertifyResult out;

  double delta = req.delta;
  if (std::isnan(delta) && req.kind == InequalityKind::Thm2)
    delta = feasible_delta(1.0, 0.5, req.params.c_kd, InequalityKind::Thm2).second;

  auto check_at = [&](double C) -> VerificationReport {
    TimeDependentModulus tdm;
    switch (req.kind) {
      case InequalityKind::Thm2: {
        tdm = build_thm2_modulus(delta, std::nan(""), req.lambda0, C);
        break;
      }
      case InequalityKind::Thm4Crit:
      case InequalityKind::Thm4Super: {
        Thm4Options opts;
        opts.delta = delta;
        opts.C = C;
        tdm = build_thm4_modulus(req.alpha, req.beta, req.B, req.drift,
                                 req.kind == InequalityKind::Thm4Super
                                     ? Thm4Regime::Supercritical
                                     : Thm4Regime::Critical,
                                 opts);
        break;
      }
      default:
        throw ParameterError("certify_constant supports Thm2 and Thm4 kinds");
    }
    const DriftEnvelope* drift =
        req.kind == InequalityKind::Thm2 ? nullptr : &req.drift;
    return check_inequality(req.kind, tdm, drift, req.params, req.grid);
  };

  double hi = req.hi;
  VerificationReport rep_hi = check_at(hi);
  if (!rep_hi.certified) {
    out.found = false;
    out.report = rep_hi;
    return out;
  }
  double lo = std::min(1e-3, hi);
  if (check_at(lo).certified) {
    out.found = true;
    out.constant = lo;
    out.report = check_at(lo);
    return out;
  }
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (check_at(mid).certified)
      hi = mid;
    else
      lo = mid;
  }
  out.found = true;
  out.constant = hi;
  out.report = check_at(hi);
  return out;
}

// ---------------------------------------------------------------------------
// hypothesis_march
// ---------------------------------------------------------------------------

namespace {

void thomas_solve(const Eigen::ArrayXd& a, Eigen::ArrayXd b,
                  const Eigen::ArrayXd& c, Eigen::ArrayXd d, Eigen::ArrayXd& x) {
  const int n = int(b.size());
  for (int i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  x.resize(n);
  x[n - 1] = d[n - 1] / b[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
}

}  // namespace

MarchResult hypothesis_march(const PiecewiseModulus& W0, double amplitude,
                             double argscale, double c_d, const MarchGrid& grid) {
  MarchResult res;
  const int N = grid.nodes;
  const double h = std::log(grid.xi_max / grid.xi_min) / (N - 1);

  Eigen::ArrayXd xi(N), s(N);
  for (int j = 0; j < N; ++j) {
    s[j] = std::log(grid.xi_min) + j * h;
    xi[j] = std::exp(s[j]);
  }
  res.xi = xi;

  Eigen::ArrayXd w(N);
  for (int j = 0; j < N; ++j) w[j] = amplitude * W0(argscale * xi[j]);

  // implicit diffusion: 4 Omega_xixi = 4 e^(-2s) (w_ss - w_s), uniform in s;
  // node 0 couples to the Dirichlet value 0 at xi = 0 through a nonuniform
  // 3-point stencil
  Eigen::ArrayXd La(N), Lb(N), Lc(N);  // sub/diag/super of L
  {
    const double hm = xi[0], hp = xi[1] - xi[0];
    La[0] = 0.0;
    Lb[0] = -2.0 / (hm * hp);
    Lc[0] = 2.0 / (hp * (hm + hp));
  }
  for (int j = 1; j < N - 1; ++j) {
    const double e2 = std::exp(-2.0 * s[j]);
    La[j] = e2 * (1.0 / (h * h) + 1.0 / (2.0 * h));
    Lb[j] = e2 * (-2.0 / (h * h));
    Lc[j] = e2 * (1.0 / (h * h) - 1.0 / (2.0 * h));
  }
  {
    // Neumann far field: w_s(s_N) = 0 via mirror ghost
    const double e2 = std::exp(-2.0 * s[N - 1]);
    La[N - 1] = e2 * (2.0 / (h * h));
    Lb[N - 1] = e2 * (-2.0 / (h * h));
    Lc[N - 1] = 0.0;
  }

  auto slope0 = [&](const Eigen::ArrayXd& v) {
    const double x1 = xi[0], x2 = xi[1];
    return (v[0] * x2 * x2 - v[1] * x1 * x1) / (x1 * x2 * (x2 - x1));
  };

  double dt = grid.dt;
  double t = 0.0;
  int halvings = 0;
  int step = 0;
  res.times.push_back(0.0);
  res.slope_at_zero.push_back(slope0(w));
  res.sup_norm.push_back(w.maxCoeff());

  Eigen::ArrayXd rhs(N), wn(N);
  while (t < grid.T - 1e-14) {
    // advective stability guard
    double cfl = kInf;
    for (int j = 0; j < N - 1; ++j)
      cfl = std::min(cfl, (xi[j + 1] - xi[j]) / std::max(std::abs(w[j]), 1e-12));
    while (dt > 0.25 * cfl) {
      dt *= 0.5;
      if (++halvings > 12) {
        res.stop_time = t;
        res.stop_reason = "time step collapsed under the advective limit";
        res.profile = w;
        return res;
      }
    }
    const double step_dt = std::min(dt, grid.T - t);

    // explicit transport + nonlocal term
    rhs = w;
    for (int j = 0; j < N; ++j) {
      double wx;
      if (j == 0) {
        const double hm = xi[0], hp = xi[1] - xi[0];
        // nonuniform central first derivative through (0, w0, w1)
        wx = (w[1] * hm * hm - 0.0 + w[0] * (hp * hp - hm * hm)) /
             (hm * hp * (hm + hp));
      } else if (j == N - 1) {
        wx = 0.0;  // Neumann
      } else {
        wx = std::exp(-s[j]) * (w[j + 1] - w[j - 1]) / (2.0 * h);
      }
      rhs[j] += step_dt * w[j] * wx;
    }
    if (c_d != 0.0) {
      std::vector<double> nodes(xi.data(), xi.data() + N);
      std::vector<double> vals(N);
      for (int j = 0; j < N; ++j) vals[j] = std::max(w[j], 0.0);
      TabulatedModulus tab(nodes, vals);
      std::vector<double> I = hypothesis_functional_all_nodes(tab, c_d);
      for (int j = 0; j < N; ++j) rhs[j] += step_dt * I[j];
    }

    // implicit diffusion solve: (I - 4 dt L) w_next = rhs
    Eigen::ArrayXd A = -4.0 * step_dt * La;
    Eigen::ArrayXd B = 1.0 - 4.0 * step_dt * Lb;
    Eigen::ArrayXd C = -4.0 * step_dt * Lc;
    thomas_solve(A, B, C, rhs, wn);

    // reject unstable steps
    const double prev_max = w.abs().maxCoeff();
    if (!wn.allFinite() || wn.abs().maxCoeff() > 10.0 * prev_max + 10.0) {
      dt *= 0.5;
      if (++halvings > 12) {
        res.stop_time = t;
        res.stop_reason = "unstable step after 12 halvings";
        res.profile = w;
        return res;
      }
      continue;
    }

    // modulus-property validation: vanishing at 0 is built in; check
    // monotonicity in xi
    const double tol = 1e-8 * std::max(wn.abs().maxCoeff(), 1.0);
    bool monotone = wn[0] >= -tol;
    for (int j = 0; j + 1 < N && monotone; ++j)
      if (wn[j + 1] < wn[j] - tol) monotone = false;
    if (!monotone) {
      res.stop_time = t + step_dt;
      res.stop_reason = "monotonicity lost";
      res.profile = wn;
      return res;
    }

    w = wn;
    t += step_dt;
    ++step;
    if (step % grid.record_every == 0 || t >= grid.T - 1e-14) {
      res.times.push_back(t);
      res.slope_at_zero.push_back(slope0(w));
      res.sup_norm.push_back(w.maxCoeff());
    }
  }

  res.completed = true;
  res.stop_time = t;
  res.profile = w;
  return res;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

std::string VerificationReport::to_json() const {
  nlohmann::json j;
  j["kind"] = mocert::to_string(kind);
  j["params"] = params;
  j["constants"] = constants;
  j["grid"] = {{"sigma_min", grid.sigma_min}, {"sigma_max", grid.sigma_max},
               {"sigma_count", grid.sigma_count}, {"t_min", grid.t_min},
               {"t_max", grid.t_max}, {"t_count", grid.t_count}};
  j["min_margin"] = min_margin;
  j["argmin"] = {{"t", argmin_t}, {"sigma", std::isfinite(argmin_sigma)
                                                ? argmin_sigma
                                                : -1.0}};
  j["budget_at_argmin"] = budget_at_argmin;
  j["slack_at_argmin"] = slack_at_argmin;
  j["points_checked"] = points_checked;
  j["structural_points"] = structural_points;
  j["failed_points"] = failed_points;
  j["certified"] = certified;
  if (!note.empty()) j["note"] = note;
  return j.dump(2);
}

}  // namespace mocert
