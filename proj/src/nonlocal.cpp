#include "mocert/nonlocal.hpp"

#include <algorithm>
#include <cmath>

#include "mocert/quadrature.hpp"

namespace mocert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHorizonMax = 1e280;

double envelope_value_tail(const GrowthEnvelope& g, double H, double s) {
  double out = g.v_const * power_tail_const(H, s);
  if (g.v_log != 0.0) out += g.v_log * power_tail_log(H, s);
  if (g.v_lin != 0.0) out += g.v_lin * power_tail_linear(H, s);
  if (g.v_pow != 0.0) out += g.v_pow * power_tail_power(H, s, g.p_pow);
  return out;
}

std::vector<double> kinks_in(const std::vector<double>& kinks, double a, double b) {
  std::vector<double> out;
  for (double k : kinks)
    if (k > a && k < b) out.push_back(k);
  return out;
}

// log-substituted adaptive quadrature with kink splits
template <class F>
QuadResult quad_log(const F& f, double a, double b, const std::vector<double>& kinks,
                    double rel = 1e-11) {
  std::vector<double> cuts;
  for (double k : kinks_in(kinks, a, b)) cuts.push_back(std::log(k));
  auto g = [&](double s) {
    const double eta = std::exp(s);
    return f(eta) * eta;
  };
  return integrate_split(g, std::log(a), std::log(b), cuts, 0.0, rel);
}

// int_A^inf omega(eta) eta^(-1-s) d eta with certified truncation.
struct TailIntegral {
  double value = 0.0;
  double err = 0.0;
  double trunc = 0.0;
};

TailIntegral weighted_tail_integral(const ModulusRef& m, double A, double s,
                                    double rel_target) {
  TailIntegral out;
  const GrowthEnvelope& g = m.growth;

  if (g.bounded()) {
    // omega -> M; split off the exact constant part and integrate the
    // exponentially-decaying deficit
    const double M = g.v_const;
    out.value = M * power_tail_const(A, s);
    double H = std::max({2.0 * A, g.from, 1.0});
    auto deficit = [&](double eta) { return (M - m(eta)) / std::pow(eta, 1.0 + s); };
    QuadResult q = quad_log(deficit, A, H, m.kinks);
    double bound = std::max(M - m(H), 0.0) * power_tail_const(H, s);
    while (bound > rel_target * std::abs(out.value - q.value) + 1e-300 &&
           H < kHorizonMax) {
      QuadResult inc = quad_log(deficit, H, 2.0 * H, m.kinks);
      q += inc;
      H *= 2.0;
      bound = std::max(M - m(H), 0.0) * power_tail_const(H, s);
    }
    out.value -= q.value;
    out.err = q.abs_error;
    out.trunc = bound;
    return out;
  }

  if (!std::isfinite(envelope_value_tail(g, std::max(A, g.from) + 1.0, s)))
    throw ConvergenceError("tail integral diverges for this growth class");

  double H = std::max({2.0 * A, g.from, 1.0});
  auto f = [&](double eta) { return m(eta) / std::pow(eta, 1.0 + s); };
  QuadResult q = quad_log(f, A, H, m.kinks);
  double bound = envelope_value_tail(g, H, s);
  while (bound > rel_target * std::abs(q.value) + 1e-300 && H < kHorizonMax) {
    q += quad_log(f, H, 2.0 * H, m.kinks);
    H *= 2.0;
    bound = envelope_value_tail(g, H, s);
  }
  out.value = q.value;
  out.err = q.abs_error;
  out.trunc = bound;
  return out;
}

// int_0^A omega-weighted integrand with an integrable eta -> 0 endpoint;
// extends the log-substituted range downward until the leading-order
// remainder estimate is negligible. remainder(eta0) must bound
// |int_0^eta0 f|.
template <class F, class R>
QuadResult quad_to_zero(const F& f, double A, const std::vector<double>& kinks,
                        const R& remainder, double rel_target, double& rem_out) {
  double eta0 = A * 1e-4;
  QuadResult q = quad_log(f, eta0, A, kinks);
  double rem = remainder(eta0);
  while (rem > rel_target * std::abs(q.value) + 1e-300 && eta0 > 1e-290) {
    const double lo = eta0 * 1e-4;
    q += quad_log(f, lo, eta0, kinks);
    eta0 = lo;
    rem = remainder(eta0);
  }
  rem_out = rem;
  return q;
}

}  // namespace

// ---------------------------------------------------------------------------
// TabulatedModulus
// ---------------------------------------------------------------------------

TabulatedModulus::TabulatedModulus(std::vector<double> nodes,
                                   std::vector<double> values, Tail tail)
    : nodes_(std::move(nodes)), values_(std::move(values)), tail_(tail) {
  if (nodes_.size() != values_.size() || nodes_.size() < 2)
    throw ParameterError("tabulated modulus needs >= 2 matching nodes/values");
  if (!(nodes_.front() > 0.0))
    throw ParameterError("tabulated modulus nodes must be positive");
  for (size_t i = 0; i + 1 < nodes_.size(); ++i)
    if (!(nodes_[i + 1] > nodes_[i]))
      throw ParameterError("tabulated modulus nodes must increase");
  for (double v : values_)
    if (!std::isfinite(v) || v < 0.0)
      throw ParameterError("tabulated modulus values must be finite and nonnegative");

  const size_t n = nodes_.size();
  prefix_sq_.assign(n, 0.0);
  const double s = values_.front() / nodes_.front();
  prefix_sq_[0] = s * s * nodes_.front();
  for (size_t i = 1; i < n; ++i)
    prefix_sq_[i] = prefix_sq_[i - 1] + square_cell(i - 1, nodes_[i - 1], nodes_[i]);

  suffix_.assign(n, 0.0);
  double tail_val;
  if (tail_ == Tail::Bounded) {
    tail_val = values_.back() / nodes_.back();
  } else {
    const double slope =
        (values_[n - 1] - values_[n - 2]) / (nodes_[n - 1] - nodes_[n - 2]);
    tail_val = slope > 0.0 ? kInf : values_.back() / nodes_.back();
  }
  suffix_[n - 1] = tail_val;
  for (size_t i = n - 1; i-- > 0;)
    suffix_[i] = suffix_[i + 1] + upper_cell(i, nodes_[i], nodes_[i + 1]);
}

double TabulatedModulus::cell_slope(size_t i) const {
  return (values_[i + 1] - values_[i]) / std::log(nodes_[i + 1] / nodes_[i]);
}

double TabulatedModulus::upper_cell(size_t i, double lo, double hi) const {
  // value = A + B log(eta/nodes_[i]); antiderivative of value/eta^2 is
  // -(value + B)/eta
  const double B = cell_slope(i);
  auto V = [&](double e) { return values_[i] + B * std::log(e / nodes_[i]); };
  return (V(lo) + B) / lo - (V(hi) + B) / hi;
}

double TabulatedModulus::square_cell(size_t i, double lo, double hi) const {
  const double B = cell_slope(i);
  auto V = [&](double e) { return values_[i] + B * std::log(e / nodes_[i]); };
  auto F = [&](double e) {
    const double v = V(e);
    return -(v * v + 2.0 * B * v + 2.0 * B * B) / e;
  };
  return F(hi) - F(lo);
}

double TabulatedModulus::value(double eta) const {
  if (eta < 0.0) throw ParameterError("modulus argument must be nonnegative");
  if (eta == 0.0) return 0.0;
  if (eta <= nodes_.front()) return values_.front() * eta / nodes_.front();
  if (eta >= nodes_.back()) {
    if (tail_ == Tail::Bounded) return values_.back();
    const size_t n = nodes_.size();
    const double slope =
        (values_[n - 1] - values_[n - 2]) / (nodes_[n - 1] - nodes_[n - 2]);
    return values_.back() + slope * (eta - nodes_.back());
  }
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), eta) - 1;
  const size_t i = size_t(it - nodes_.begin());
  const double w = std::log(eta / nodes_[i]) / std::log(nodes_[i + 1] / nodes_[i]);
  return values_[i] + w * (values_[i + 1] - values_[i]);
}

double TabulatedModulus::deriv(double eta) const {
  if (eta <= 0.0) return values_.front() / nodes_.front();
  if (eta <= nodes_.front()) return values_.front() / nodes_.front();
  if (eta >= nodes_.back()) {
    if (tail_ == Tail::Bounded) return 0.0;
    const size_t n = nodes_.size();
    return (values_[n - 1] - values_[n - 2]) / (nodes_[n - 1] - nodes_[n - 2]);
  }
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), eta);
  size_t i = size_t(it - nodes_.begin());
  if (nodes_[i] >= eta) --i;  // left-sided at nodes
  return cell_slope(i) / eta;
}

double TabulatedModulus::upper_integral(double x) const {
  if (x <= 0.0) throw ParameterError("upper integral needs x > 0");
  const size_t n = nodes_.size();
  if (!std::isfinite(suffix_.back())) return kInf;
  if (x >= nodes_.back()) return values_.back() / x;
  if (x <= nodes_.front()) {
    const double s = values_.front() / nodes_.front();
    return suffix_.front() + s * std::log(nodes_.front() / x);
  }
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x) - 1;
  const size_t i = size_t(it - nodes_.begin());
  return suffix_[i + 1] + upper_cell(i, x, nodes_[i + 1]);
}

double TabulatedModulus::lower_square_integral(double x) const {
  if (x <= 0.0) return 0.0;
  const size_t n = nodes_.size();
  const double s = values_.front() / nodes_.front();
  if (x <= nodes_.front()) return s * s * x;
  if (x >= nodes_.back()) {
    double acc = prefix_sq_.back();
    if (tail_ == Tail::Bounded) {
      const double M = values_.back();
      acc += M * M * (1.0 / nodes_.back() - 1.0 / x);
    } else {
      auto f = [&](double e) {
        const double v = value(e);
        return v * v / (e * e);
      };
      acc += integrate(f, nodes_.back(), x).value;
    }
    return acc;
  }
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x) - 1;
  const size_t i = size_t(it - nodes_.begin());
  return prefix_sq_[i] + square_cell(i, nodes_[i], x);
}

// ---------------------------------------------------------------------------
// ModulusRef adapters
// ---------------------------------------------------------------------------

ModulusRef ModulusRef::of(PiecewiseModulus pm) {
  ModulusRef ref;
  ref.kinks = pm.breakpoints();
  ref.growth = pm.growth();
  pm.leading_term(ref.lead_coeff, ref.lead_expo);
  ref.concave = pm.concave_hint();
  ref.eval = [m = std::move(pm)](double s, int order) { return m.eval(s, order); };
  return ref;
}

ModulusRef ModulusRef::of(TabulatedModulus tm) {
  ModulusRef ref;
  ref.kinks = tm.nodes();
  GrowthEnvelope g;
  g.from = tm.nodes().back();
  if (tm.tail() == TabulatedModulus::Tail::Bounded) {
    g.v_const = tm.values().back();
  } else {
    const size_t n = tm.nodes().size();
    const double slope = (tm.values()[n - 1] - tm.values()[n - 2]) /
                         (tm.nodes()[n - 1] - tm.nodes()[n - 2]);
    g.v_const = tm.values().back();
    g.v_lin = std::max(slope, 0.0);
    g.s_const = std::max(slope, 0.0);
  }
  ref.growth = g;
  ref.lead_coeff = tm.values().front() / tm.nodes().front();
  ref.lead_expo = 1.0;
  // concave in real coordinates iff the log-cell slopes are nonnegative,
  // nonincreasing and below the head slope
  bool concave = true;
  {
    const auto& nd = tm.nodes();
    const auto& vl = tm.values();
    double prev = vl.front() / nd.front() * nd.front();  // head B-equivalent
    prev = vl.front();                                   // B = v0 matches s*eta
    for (size_t i = 0; i + 1 < nd.size(); ++i) {
      const double B = (vl[i + 1] - vl[i]) / std::log(nd[i + 1] / nd[i]);
      if (B < -1e-15 || B > prev + 1e-12 * (1.0 + std::abs(prev))) concave = false;
      prev = B;
    }
  }
  ref.concave = concave;
  ref.eval = [m = std::move(tm)](double s, int order) {
    if (order == 0) return m.value(s);
    if (order == 1) return m.deriv(s);
    // in-cell curvature of the log-linear interpolant: -B/eta^2
    const auto& nd = m.nodes();
    if (s <= nd.front() || s >= nd.back()) return 0.0;
    const double d = m.deriv(s);
    return -d / s;  // d = B/eta, so -B/eta^2 = -d/eta
  };
  return ref;
}

ModulusRef scale_ref(const ModulusRef& m, double lam, double mu) {
  if (!(lam > 0.0 && mu > 0.0)) throw ParameterError("scale factors must be positive");
  ModulusRef out;
  out.eval = [base = m.eval, lam, mu](double s, int order) {
    return lam * std::pow(mu, order) * base(mu * s, order);
  };
  for (double k : m.kinks) out.kinks.push_back(k / mu);
  GrowthEnvelope g = m.growth;
  g.from = m.growth.from / mu;
  g.v_const = lam * (m.growth.v_const + m.growth.v_log * std::log(mu));
  g.v_log = lam * m.growth.v_log;
  g.v_lin = lam * mu * m.growth.v_lin;
  g.v_pow = lam * std::pow(mu, m.growth.p_pow) * m.growth.v_pow;
  g.s_const = lam * mu * m.growth.s_const;
  g.s_lin = lam * mu * mu * m.growth.s_lin;
  out.growth = g;
  out.lead_coeff = lam * std::pow(mu, m.lead_expo) * m.lead_coeff;
  out.lead_expo = m.lead_expo;
  out.concave = m.concave;
  return out;
}

// ---------------------------------------------------------------------------
// Fractional dissipation
// ---------------------------------------------------------------------------

FunctionalResult frac_dissipation(const ModulusRef& m, double alpha, double xi,
                                  double c_alpha, double tail_rel) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ParameterError("frac_dissipation needs alpha in (0,1); alpha = 1 is local");
  if (!(xi > 0.0)) throw ParameterError("frac_dissipation needs xi > 0");

  FunctionalResult out;
  const double lam = xi / 2.0;
  const double q = 2.0 - 2.0 * alpha;

  // near-diagonal integral, integrated by parts against the slope difference:
  //   int_0^L D(e) e^(-1-2a) de
  //     = -D(L) L^(-2a)/(2a) + (1/a) int_0^L [w'(xi+2e)-w'(xi-2e)] e^(-2a) de,
  // then u = e^(2-2a) regularizes the remaining endpoint.
  const double DL = m(2.0 * xi) + m(0.0) - 2.0 * m(xi);
  double i1 = -DL * std::pow(lam, -2.0 * alpha) / (2.0 * alpha);

  std::vector<double> u_cuts;
  double kink_gap = kInf;
  for (double b : m.kinks) {
    kink_gap = std::min(kink_gap, std::abs(b - xi));
    for (double eta : {(b - xi) / 2.0, (xi - b) / 2.0})
      if (eta > 0.0 && eta < lam) u_cuts.push_back(std::pow(eta, q));
  }
  // below eta_switch the slope difference cancels in floating point; its
  // Taylor value 4 w''(xi) is accurate to O(eta^2) there
  const double eta_switch = 1e-6 * std::min(xi, kink_gap);
  const double curv_xi = m.eval(xi, 2);
  auto inner = [&](double u) {
    const double eta = std::pow(u, 1.0 / q);
    if (eta < eta_switch) return 4.0 * curv_xi;
    return (m.eval(xi + 2.0 * eta, 1) - m.eval(xi - 2.0 * eta, 1)) / eta;
  };
  QuadResult qi = integrate_split(inner, 0.0, std::pow(lam, q), u_cuts, 0.0, 1e-11);
  i1 += qi.value / (alpha * q);
  out.est_error += qi.abs_error / (alpha * q);

  // far part: the -2 w(xi) piece integrates in closed form to infinity
  double i2 = -2.0 * m(xi) * power_tail_const(lam, 2.0 * alpha);

  std::vector<double> far_kinks;
  for (double b : m.kinks) {
    for (double eta : {(b - xi) / 2.0, (b + xi) / 2.0})
      if (eta > lam) far_kinks.push_back(eta);
  }
  const GrowthEnvelope& g = m.growth;
  const double scale0 = std::abs(i1) + std::abs(i2);

  if (m.concave) {
    // increments w(xi+2e) - w(2e-xi) approach 2 xi s_lim; the deviation is
    // controlled by the slope at the left argument, so the horizon is found
    // before any integration from a single slope evaluation per step
    const double s_lim = g.v_lin;
    auto dev_bound = [&](double H) {
      const double dev = std::max(m.eval(2.0 * H - xi, 1) - s_lim, 0.0);
      return 2.0 * xi * dev * power_tail_const(H, 2.0 * alpha);
    };
    double H = std::max({4.0 * lam, (g.from + xi) / 2.0, 1.0});
    while (dev_bound(H) > tail_rel * std::max(scale0, 1e-30) + 1e-300 &&
           H < kHorizonMax)
      H *= 2.0;
    auto incr = [&](double eta) {
      return (m(xi + 2.0 * eta) - m(2.0 * eta - xi)) /
             std::pow(eta, 1.0 + 2.0 * alpha);
    };
    QuadResult qf = quad_log(incr, lam, H, far_kinks);
    i2 += qf.value + 2.0 * xi * s_lim * power_tail_const(H, 2.0 * alpha);
    out.est_error += qf.abs_error;
    out.tail_truncation = c_alpha * dev_bound(H);
  } else {
    // convex-capable route, twice integrated by parts so only curvature
    // differences are sampled (monomial test shapes evaluate these exactly):
    //   int_L^inf incr e^(-1-2a) de = incr(L) L^(-2a)/(2a)
    //     + incr'(L) L^(1-2a)/(2a(2a-1))
    //     + (4/(2a(2a-1))) int_L^inf [w''(xi+2e) - w''(2e-xi)] e^(1-2a) de,
    // valid when the boundary terms vanish at infinity (alpha > 1/2 for
    // growing slopes).
    if (alpha <= 0.5 && (g.s_lin > 0.0 || g.v_lin > 0.0 || g.p_pow > 1.0))
      throw QuadratureError(
          "fractional far integral diverges: growth too fast for alpha <= 1/2");
    const double incrL = m(2.0 * xi) - m(0.0);
    const double dincrL = 2.0 * (m.eval(2.0 * xi, 1) - m.eval(0.0, 1));
    i2 += incrL * std::pow(lam, -2.0 * alpha) / (2.0 * alpha) +
          dincrL * std::pow(lam, 1.0 - 2.0 * alpha) /
              (2.0 * alpha * (2.0 * alpha - 1.0));
    auto curv = [&](double eta) {
      return (m.eval(xi + 2.0 * eta, 2) - m.eval(2.0 * eta - xi, 2)) *
             std::pow(eta, 1.0 - 2.0 * alpha);
    };
    double H = std::max({4.0 * lam, (g.from + xi) / 2.0, 1.0});
    auto curv_rem = [&](double Hc) {
      // slowly-varying estimate of the remaining curvature tail
      return std::abs(curv(Hc)) * Hc;
    };
    while (curv_rem(H) > tail_rel * std::max(scale0, 1e-30) + 1e-300 &&
           H < kHorizonMax)
      H *= 2.0;
    QuadResult qc = quad_log(curv, lam, H, far_kinks);
    const double fac = 4.0 / (2.0 * alpha * (2.0 * alpha - 1.0));
    i2 += fac * qc.value;
    out.est_error += std::abs(fac) * qc.abs_error;
    out.tail_truncation = c_alpha * std::abs(fac) * curv_rem(H);
  }

  out.value = c_alpha * (i1 + i2);
  out.est_error *= c_alpha;
  return out;
}

double frac_dissipation_local_bound(const ModulusRef& m, double alpha, double xi,
                                    double c_alpha) {
  const double w2 = m.eval(xi, 2);  // left curvature at kinks
  if (alpha >= 1.0) return 4.0 * w2;
  return c_alpha * std::pow(xi, 2.0 - 2.0 * alpha) * w2;
}

// ---------------------------------------------------------------------------
// Zero-order singular integral bound
// ---------------------------------------------------------------------------

FunctionalResult sio_functional(const ModulusRef& m, double rho, double xi,
                                double c_kd, double tail_rel) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ParameterError("rho must lie in (0, 1]");
  if (!(xi > 0.0)) throw ParameterError("sio_functional needs xi > 0");
  if (!(m.lead_expo > 0.0))
    throw ConvergenceError("sio integrand not integrable at 0: modulus does not vanish");

  FunctionalResult out;
  const double A = 3.0 * xi;

  auto near = [&](double eta) { return m(eta) / eta; };
  auto near_rem = [&](double eta0) { return 2.0 * m(eta0) / m.lead_expo; };
  double rem = 0.0;
  QuadResult qn = quad_to_zero(near, A, m.kinks, near_rem, 1e-12, rem);
  out.est_error += qn.abs_error + rem;

  TailIntegral t = weighted_tail_integral(m, A, rho, tail_rel);
  out.est_error += std::pow(xi, rho) * t.err;
  out.tail_truncation = c_kd * std::pow(xi, rho) * t.trunc;

  out.value = c_kd * (qn.value + std::pow(xi, rho) * t.value);
  out.est_error *= c_kd;
  return out;
}

// ---------------------------------------------------------------------------
// Pressure functionals
// ---------------------------------------------------------------------------

FunctionalResult pressure_functional(const ModulusRef& mb, const ModulusRef& mu,
                                     double xi, double c_d, double tail_rel) {
  if (!(xi > 0.0)) throw ParameterError("pressure_functional needs xi > 0");
  auto is_zero = [](const ModulusRef& m) {
    return m.lead_coeff == 0.0 && m.growth.bounded() && m.growth.v_const == 0.0;
  };
  if (is_zero(mb) || is_zero(mu)) return {};
  if (!(mb.lead_expo + mu.lead_expo > 1.0))
    throw ConvergenceError(
        "pressure integrand diverges at 0: product modulus is not o(eta)");

  FunctionalResult out;
  std::vector<double> kinks = mb.kinks;
  kinks.insert(kinks.end(), mu.kinks.begin(), mu.kinks.end());

  auto prod = [&](double eta) { return mb(eta) * mu(eta) / (eta * eta); };
  const double psum = mb.lead_expo + mu.lead_expo - 1.0;
  auto prod_rem = [&](double eta0) { return 2.0 * mb(eta0) * mu(eta0) / (eta0 * psum); };
  double rem = 0.0;
  QuadResult q1 = quad_to_zero(prod, xi, kinks, prod_rem, 1e-12, rem);
  out.est_error += q1.abs_error + rem;

  TailIntegral tu = weighted_tail_integral(mu, xi, 1.0, tail_rel);
  TailIntegral tb = weighted_tail_integral(mb, xi, 1.0, tail_rel);
  const double wb = mb(xi), wu = mu(xi);
  out.est_error += wb * tu.err + wu * tb.err;
  out.tail_truncation = c_d * (wb * tu.trunc + wu * tb.trunc);

  out.value = c_d * (q1.value + wb * tu.value + wu * tb.value);
  out.est_error *= c_d;
  return out;
}

FunctionalResult nse_pressure_functional(const ModulusRef& m, double g_t,
                                         double beta, double xi, double c_d,
                                         PressureEvalPath path) {
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("beta must lie in (0,1)");
  if (path == PressureEvalPath::Direct) {
    ModulusRef holder = ModulusRef::of(power_modulus(g_t, beta));
    return pressure_functional(holder, m, xi, c_d);
  }
  // integrated-by-parts route:
  //   g [ 1/(1-beta) int_0^xi w'(eta) eta^(beta-1) + xi^beta int_xi^inf w/eta^2 ]
  FunctionalResult out;
  auto f = [&](double eta) { return m.eval(eta, 1) * std::pow(eta, beta - 1.0); };
  const double slope0 = m.eval(0.0, 1);
  auto frem = [&](double eta0) {
    return 2.0 * std::max(slope0, m.eval(eta0, 1)) * std::pow(eta0, beta) / beta;
  };
  double rem = 0.0;
  QuadResult q = quad_to_zero(f, xi, m.kinks, frem, 1e-12, rem);
  out.est_error += (q.abs_error + rem) / (1.0 - beta);

  TailIntegral t = weighted_tail_integral(m, xi, 1.0, 1e-9);
  out.est_error += std::pow(xi, beta) * t.err;
  out.tail_truncation = c_d * g_t * std::pow(xi, beta) * t.trunc;
  out.value = c_d * g_t * (q.value / (1.0 - beta) + std::pow(xi, beta) * t.value);
  out.est_error *= c_d * g_t;
  return out;
}

FunctionalResult weighted_tail(const ModulusRef& m, double A, double s,
                               double tail_rel) {
  TailIntegral t = weighted_tail_integral(m, A, s, tail_rel);
  FunctionalResult out;
  out.value = t.value;
  out.est_error = t.err;
  out.tail_truncation = t.trunc;
  return out;
}

// ---------------------------------------------------------------------------
// Hypothesis functional
// ---------------------------------------------------------------------------

FunctionalResult hypothesis_functional(const TabulatedModulus& W, double xi,
                                       double c_d) {
  if (!(xi > 0.0)) throw ParameterError("hypothesis functional needs xi > 0");
  const double up = W.upper_integral(xi);
  if (!std::isfinite(up))
    throw ConvergenceError("hypothesis tail integral diverges for a growing tail");
  FunctionalResult out;
  out.value = 2.0 * c_d * (W.lower_square_integral(xi) + W.value(xi) * up);
  return out;
}

std::vector<double> hypothesis_functional_all_nodes(const TabulatedModulus& W,
                                                    double c_d) {
  const auto& nodes = W.nodes();
  std::vector<double> out(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) {
    out[i] = 2.0 * c_d * (W.lower_square_integral(nodes[i]) +
                          W.value(nodes[i]) * W.upper_integral(nodes[i]));
  }
  return out;
}

}  // namespace mocert
