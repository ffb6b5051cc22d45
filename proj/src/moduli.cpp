#include "mocert/moduli.hpp"

#include <algorithm>
#include <cassert>

#include "mocert/quadrature.hpp"

namespace mocert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sech2(double u) {
  const double c = std::cosh(u);
  if (!std::isfinite(c)) return 0.0;
  const double s = 1.0 / c;
  return s * s;
}

double exp_tail_kernel(double e, double sref, double a, double c_ode) {
  return std::exp(-(std::pow(e, a) - std::pow(sref, a)) / (c_ode * a));
}

}  // namespace

// ---------------------------------------------------------------------------
// PiecewiseModulus
// ---------------------------------------------------------------------------

PiecewiseModulus::PiecewiseModulus(std::vector<ModulusPiece> pieces)
    : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw ConstructionError("modulus needs at least one piece");
  std::sort(pieces_.begin(), pieces_.end(),
            [](const ModulusPiece& a, const ModulusPiece& b) { return a.lo < b.lo; });
  if (pieces_.front().lo != 0.0)
    throw ConstructionError("first piece must start at sigma = 0");
  for (size_t i = 0; i + 1 < pieces_.size(); ++i)
    pieces_[i].hi = pieces_[i + 1].lo;
  pieces_.back().hi = kInf;
  build_tail_cache();
  derive_growth();
}

void PiecewiseModulus::build_tail_cache() {
  for (const ModulusPiece& p : pieces_) {
    if (p.kind != PieceKind::ExpIntegralTail) continue;
    auto cache = std::make_shared<ExpTailCache>();
    const double ratio = std::pow(2.0, 1.0 / 8.0);
    double x = p.sref;
    cache->nodes.push_back(x);
    cache->cum.push_back(0.0);
    auto k = [&](double e) { return exp_tail_kernel(e, p.sref, p.a, p.c_ode); };
    while (k(x) > 1e-300 && x < 1e18) {
      const double nx = x * ratio;
      QuadResult q = integrate(k, x, nx, 0.0, 1e-13);
      cache->nodes.push_back(nx);
      cache->cum.push_back(cache->cum.back() + q.value);
      x = nx;
    }
    cache->saturation = cache->cum.back();
    tail_cache_ = std::move(cache);
    break;  // at most one exp-integral tail per modulus
  }
}

const ModulusPiece& PiecewiseModulus::piece_at(double sigma, bool left) const {
  if (sigma <= pieces_.front().hi && (sigma < pieces_.front().hi || left || pieces_.size() == 1))
    return pieces_.front();
  for (size_t i = 0; i < pieces_.size(); ++i) {
    const ModulusPiece& p = pieces_[i];
    if (left) {
      if (sigma > p.lo && sigma <= p.hi) return p;
    } else {
      if (sigma >= p.lo && sigma < p.hi) return p;
    }
  }
  return pieces_.back();
}

double PiecewiseModulus::eval_piece(const ModulusPiece& p, double s, int order) const {
  switch (p.kind) {
    case PieceKind::LinearMinusPower: {
      const double e = 2.0 - p.r;
      switch (order) {
        case 0:
          return p.c1 * s - p.c2 * std::pow(s, e);
        case 1:
          return p.c1 - p.c2 * e * std::pow(s, e - 1.0);
        default:
          return -p.c2 * e * (e - 1.0) * std::pow(s, e - 2.0);
      }
    }
    case PieceKind::TanhShift: {
      const double u = p.rate * (s - p.delta) + p.shift;
      switch (order) {
        case 0:
          return p.amp * std::tanh(u);
        case 1:
          return p.amp * p.rate * sech2(u);
        default:
          return -2.0 * p.amp * p.rate * p.rate * std::tanh(u) * sech2(u);
      }
    }
    case PieceKind::LogTail: {
      switch (order) {
        case 0:
          return p.dcoef * std::log(s / p.sref) + p.c0;
        case 1:
          return p.dcoef / s;
        default:
          return -p.dcoef / (s * s);
      }
    }
    case PieceKind::ExpIntegralTail: {
      switch (order) {
        case 0: {
          if (s <= p.sref) return p.v0;
          const auto& c = *tail_cache_;
          double acc;
          if (s >= c.nodes.back()) {
            acc = c.saturation;
          } else {
            const auto it =
                std::upper_bound(c.nodes.begin(), c.nodes.end(), s) - 1;
            const size_t i = size_t(it - c.nodes.begin());
            auto k = [&](double e) { return exp_tail_kernel(e, p.sref, p.a, p.c_ode); };
            acc = c.cum[i] + integrate(k, c.nodes[i], s, 0.0, 1e-12).value;
          }
          return p.v0 + p.s0 * acc;
        }
        case 1:
          return p.s0 * exp_tail_kernel(s, p.sref, p.a, p.c_ode);
        default:
          return p.s0 * exp_tail_kernel(s, p.sref, p.a, p.c_ode) *
                 (-std::pow(s, p.a - 1.0) / p.c_ode);
      }
    }
  }
  return 0.0;
}

double PiecewiseModulus::eval(double sigma, int order) const {
  if (sigma < 0.0) throw ParameterError("modulus argument must be nonnegative");
  if (order == 0) return eval_piece(piece_at(sigma, false), sigma, 0);
  if (sigma == 0.0) {
    if (order == 2) {
      double coeff, expo;
      curvature_leading_term(coeff, expo);
      if (expo < 0.0 && coeff != 0.0)
        throw SingularityError("omega'' is singular at sigma = 0");
      return coeff * (expo == 0.0 ? 1.0 : 0.0);
    }
    return eval_piece(pieces_.front(), 0.0, order);
  }
  return eval_piece(piece_at(sigma, true), sigma, order);
}

double PiecewiseModulus::deriv_left(double sigma) const {
  return eval(sigma, 1);
}

double PiecewiseModulus::deriv_right(double sigma) const {
  if (sigma < 0.0) throw ParameterError("modulus argument must be nonnegative");
  return eval_piece(piece_at(sigma, false), sigma, 1);
}

std::vector<double> PiecewiseModulus::breakpoints() const {
  std::vector<double> out;
  for (size_t i = 1; i < pieces_.size(); ++i) out.push_back(pieces_[i].lo);
  return out;
}

double PiecewiseModulus::delta() const {
  return pieces_.size() > 1 ? pieces_[1].lo : 0.0;
}

double PiecewiseModulus::slope_at_zero() const {
  const ModulusPiece& p = pieces_.front();
  if (p.kind == PieceKind::LinearMinusPower) {
    const double e = 2.0 - p.r;
    if (e > 1.0) return p.c1;
    if (e == 1.0) return p.c1 - p.c2;
    return p.c2 < 0.0 ? kInf : -kInf;
  }
  return eval_piece(p, 0.0, 1);
}

void PiecewiseModulus::leading_term(double& coeff, double& expo) const {
  const ModulusPiece& p = pieces_.front();
  if (p.kind == PieceKind::LinearMinusPower) {
    const double e = 2.0 - p.r;
    if (p.c1 != 0.0 && (e > 1.0 || p.c2 == 0.0)) {
      coeff = p.c1;
      expo = 1.0;
    } else {
      coeff = -p.c2;
      expo = e;
    }
    return;
  }
  if (p.kind == PieceKind::TanhShift) {
    const double v0 = eval_piece(p, 0.0, 0);
    if (std::abs(v0) > 0.0) {
      coeff = v0;
      expo = 0.0;
    } else {
      coeff = eval_piece(p, 0.0, 1);
      expo = 1.0;
    }
    return;
  }
  coeff = eval_piece(p, 0.0, 0);
  expo = 0.0;
}

void PiecewiseModulus::curvature_leading_term(double& coeff, double& expo) const {
  const ModulusPiece& p = pieces_.front();
  switch (p.kind) {
    case PieceKind::LinearMinusPower: {
      const double e = 2.0 - p.r;
      coeff = -p.c2 * e * (e - 1.0);
      expo = e - 2.0;
      if (coeff == 0.0) expo = 0.0;
      return;
    }
    case PieceKind::TanhShift: {
      const double u0 = p.shift - p.rate * p.delta;
      const double w2 = -2.0 * p.amp * p.rate * p.rate * std::tanh(u0) * sech2(u0);
      if (w2 != 0.0) {
        coeff = w2;
        expo = 0.0;
      } else {
        coeff = -2.0 * p.amp * p.rate * p.rate * p.rate;  // d/ds at u0 = 0
        expo = 1.0;
      }
      return;
    }
    case PieceKind::LogTail:
      coeff = -p.dcoef;
      expo = -2.0;
      return;
    case PieceKind::ExpIntegralTail:
      coeff = -p.s0 / p.c_ode;
      expo = p.a - 1.0;
      return;
  }
}

void PiecewiseModulus::derive_growth() {
  const ModulusPiece& p = pieces_.back();
  GrowthEnvelope g;
  g.from = p.lo;
  switch (p.kind) {
    case PieceKind::LinearMinusPower: {
      const double e = 2.0 - p.r;
      if (p.c2 == 0.0) {
        g.v_lin = p.c1;
        g.s_const = p.c1;
      } else if (p.c2 < 0.0) {
        // growing power term; the slope envelope uses s^(e-1) <= 1 + s
        const double c = -p.c2;
        g.v_lin = p.c1;
        if (e == 0.0) {
          g.v_const = c;
        } else {
          g.v_pow = c;
          g.p_pow = e;
        }
        g.s_const = p.c1 + ((e <= 1.0) ? 0.0 : c * e);
        g.s_lin = (e <= 1.0) ? 0.0 : c * e;
      } else {
        // eventually decreasing closed form; the linear part still dominates
        g.v_lin = p.c1;
        g.s_const = p.c1;
      }
      break;
    }
    case PieceKind::TanhShift: {
      g.v_const = p.amp;
      const double u0 = p.rate * (p.lo - p.delta) + p.shift;
      g.s_const = p.amp * p.rate * ((u0 >= 0.0) ? sech2(u0) : 1.0);
      break;
    }
    case PieceKind::LogTail: {
      g.v_log = p.dcoef;
      g.v_const = p.c0 - p.dcoef * std::log(p.sref);
      g.s_const = p.dcoef / std::max(p.lo, 1e-300);
      break;
    }
    case PieceKind::ExpIntegralTail: {
      g.v_const = p.v0 + p.s0 * tail_cache_->saturation;
      g.s_const = p.s0 * exp_tail_kernel(std::max(p.lo, p.sref), p.sref, p.a, p.c_ode);
      break;
    }
  }

  // concavity hint: every piece curves down and every junction drops slope
  bool concave = true;
  for (const ModulusPiece& q : pieces_) {
    switch (q.kind) {
      case PieceKind::LinearMinusPower: {
        const double e = 2.0 - q.r;
        if (-q.c2 * e * (e - 1.0) > 0.0) concave = false;
        break;
      }
      case PieceKind::TanhShift:
        if (q.rate * (q.lo - q.delta) + q.shift < 0.0) concave = false;
        break;
      default:
        break;
    }
  }
  if (concave) {
    for (double bp : breakpoints())
      if (deriv_right(bp) > deriv_left(bp) + 1e-12) concave = false;
  }
  concave_ = concave;
  growth_ = g;
}

double PiecewiseModulus::sup_value() const {
  if (!growth_.bounded()) return kInf;
  return growth_.v_const;
}

// ---------------------------------------------------------------------------
// Stock shapes
// ---------------------------------------------------------------------------

PiecewiseModulus linear_modulus(double c) {
  ModulusPiece p;
  p.kind = PieceKind::LinearMinusPower;
  p.c1 = c;
  return PiecewiseModulus({p});
}

PiecewiseModulus power_modulus(double c, double p_exp) {
  if (!(p_exp > 0.0 && p_exp <= 2.0))
    throw ParameterError("power modulus exponent must lie in (0, 2]");
  if (p_exp == 1.0) return linear_modulus(c);
  ModulusPiece p;
  p.kind = PieceKind::LinearMinusPower;
  p.c1 = 0.0;
  p.c2 = -c;
  p.r = 2.0 - p_exp;
  return PiecewiseModulus({p});
}

PiecewiseModulus constant_modulus(double c) {
  ModulusPiece p;
  p.kind = PieceKind::LinearMinusPower;
  p.c1 = 0.0;
  p.c2 = -c;
  p.r = 2.0;
  return PiecewiseModulus({p});
}

PiecewiseModulus capped_linear_modulus(double c, double cap) {
  ModulusPiece lin;
  lin.kind = PieceKind::LinearMinusPower;
  lin.c1 = c;
  ModulusPiece flat;
  flat.kind = PieceKind::LinearMinusPower;
  flat.lo = cap / c;
  flat.c2 = -cap;
  flat.r = 2.0;
  return PiecewiseModulus({lin, flat});
}

PiecewiseModulus tanh_modulus() {
  ModulusPiece p;
  p.kind = PieceKind::TanhShift;
  return PiecewiseModulus({p});
}

PiecewiseModulus burgers_stationary_profile(double slope_at_zero) {
  if (!(slope_at_zero > 0.0)) throw ParameterError("slope at zero must be positive");
  const double b = std::sqrt(slope_at_zero / 8.0);
  ModulusPiece p;
  p.kind = PieceKind::TanhShift;
  p.amp = 8.0 * b;
  p.rate = b;
  return PiecewiseModulus({p});
}

PiecewiseModulus viscous_burgers_modulus(double delta, double mu_shift) {
  if (!(delta > 0.0 && delta <= 1.0))
    throw ParameterError("delta must lie in (0, 1]");
  const double target = 2.0 * delta - std::pow(delta, 1.5);
  if (std::isnan(mu_shift)) {
    // continuity condition tanh(mu) = 2 delta - delta^(3/2), mu in (0, 1]
    if (!(target > 0.0 && target < std::tanh(1.0)))
      throw ConstructionError("no mu_shift in (0, 1] solves the tanh continuity condition");
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 80 && hi - lo > 1e-14 * std::max(1.0, hi); ++i) {
      const double mid = 0.5 * (lo + hi);
      (std::tanh(mid) < target ? lo : hi) = mid;
    }
    mu_shift = 0.5 * (lo + hi);
  } else {
    if (std::abs(std::tanh(mu_shift) - target) > 1e-10)
      throw ConstructionError("mu_shift does not satisfy the continuity condition");
  }
  const double slope_left = 2.0 - 1.5 * std::sqrt(delta);
  if (sech2(mu_shift) > slope_left + 1e-12)
    throw ConstructionError("tanh junction violates the slope-drop condition");

  ModulusPiece head;
  head.kind = PieceKind::LinearMinusPower;
  head.c1 = 2.0;
  head.c2 = 1.0;
  head.r = 0.5;
  ModulusPiece tail;
  tail.kind = PieceKind::TanhShift;
  tail.lo = delta;
  tail.delta = delta;
  tail.shift = mu_shift;
  return PiecewiseModulus({head, tail});
}

PiecewiseModulus drift_diffusion_modulus(double alpha, double beta, double r,
                                         double delta, double c_ode) {
  const double a = beta + 2.0 * alpha - 1.0;
  if (!(a > 0.0)) throw ParameterError("beta+2alpha-1 must be positive");
  if (!(r > 0.0 && r < 1.0)) throw ParameterError("r must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  const double s0 = 0.5 - (2.0 - r) * std::pow(delta, 1.0 - r);
  if (!(s0 > 0.0))
    throw ConstructionError("delta too large: tail slope 1/2-(2-r)delta^(1-r) not positive");

  ModulusPiece head;
  head.kind = PieceKind::LinearMinusPower;
  head.c1 = 1.0;
  head.c2 = 1.0;
  head.r = r;
  ModulusPiece tail;
  tail.kind = PieceKind::ExpIntegralTail;
  tail.lo = delta;
  tail.sref = delta;
  tail.v0 = delta - std::pow(delta, 2.0 - r);
  tail.s0 = s0;
  tail.a = a;
  tail.c_ode = c_ode;
  return PiecewiseModulus({head, tail});
}

PiecewiseModulus log_tail_modulus(double r, double delta) {
  if (!(r > 0.0 && r < 1.0)) throw ParameterError("r must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  if ((2.0 - r) * std::pow(delta, 1.0 - r) > 1.0)
    throw ConstructionError("delta too large: log-tail junction violates the slope drop");
  ModulusPiece head;
  head.kind = PieceKind::LinearMinusPower;
  head.c1 = 2.0;
  head.c2 = 1.0;
  head.r = r;
  ModulusPiece tail;
  tail.kind = PieceKind::LogTail;
  tail.lo = delta;
  tail.sref = delta;
  tail.dcoef = delta;
  tail.c0 = 2.0 * delta - std::pow(delta, 2.0 - r);
  return PiecewiseModulus({head, tail});
}

// ---------------------------------------------------------------------------
// DriftEnvelope
// ---------------------------------------------------------------------------

double DriftEnvelope::operator()(double t) const {
  switch (kind) {
    case Kind::Constant:
      return g0;
    case Kind::Affine:
      return g0 + slope * t;
    case Kind::PowerLaw:
      return g0 * std::pow(1.0 + t, expo);
    case Kind::SingularBlowup:
      if (!(t < T)) throw ParameterError("singular envelope evaluated at t >= T");
      return coef * std::pow(T - t, -kappa);
    case Kind::Table: {
      if (ts.empty()) throw ConfigError("empty drift table");
      if (t <= ts.front()) return gs.front();
      if (t >= ts.back()) return gs.back();
      const auto it = std::upper_bound(ts.begin(), ts.end(), t) - 1;
      const size_t i = size_t(it - ts.begin());
      const double w = (t - ts[i]) / (ts[i + 1] - ts[i]);
      return gs[i] + w * (gs[i + 1] - gs[i]);
    }
  }
  return g0;
}

double DriftEnvelope::power_integral(double q, double t, double rel_tol) const {
  if (t <= 0.0) return 0.0;
  switch (kind) {
    case Kind::Constant:
      return std::pow(g0, q) * t;
    case Kind::Affine: {
      if (slope == 0.0) return std::pow(g0, q) * t;
      const double e = q + 1.0;
      if (e == 0.0) return (std::log(g0 + slope * t) - std::log(g0)) / slope;
      return (std::pow(g0 + slope * t, e) - std::pow(g0, e)) / (slope * e);
    }
    case Kind::PowerLaw: {
      const double e = q * expo + 1.0;
      if (e == 0.0) return std::pow(g0, q) * std::log(1.0 + t);
      return std::pow(g0, q) * (std::pow(1.0 + t, e) - 1.0) / e;
    }
    case Kind::SingularBlowup: {
      if (!(t < T)) throw ParameterError("singular envelope integrated past T");
      const double e = 1.0 - q * kappa;
      if (e == 0.0)
        return std::pow(coef, q) * (std::log(T) - std::log(T - t));
      return std::pow(coef, q) * (std::pow(T, e) - std::pow(T - t, e)) / e;
    }
    case Kind::Table: {
      auto f = [&](double s) { return std::pow((*this)(s), q); };
      std::vector<double> cuts(ts.begin(), ts.end());
      return integrate_split(f, 0.0, t, cuts, 0.0, rel_tol).value;
    }
  }
  return 0.0;
}

void DriftEnvelope::validate() const {
  auto bad = [](const std::string& why) { throw ParameterError("drift envelope: " + why); };
  switch (kind) {
    case Kind::Constant:
      if (g0 < 1.0) bad("g must be >= 1");
      break;
    case Kind::Affine:
      if (g0 < 1.0) bad("g(0) must be >= 1");
      if (slope < 0.0) bad("g must be nondecreasing");
      break;
    case Kind::PowerLaw:
      if (g0 < 1.0) bad("g(0) must be >= 1");
      if (expo < 0.0) bad("g must be nondecreasing");
      break;
    case Kind::SingularBlowup:
      if (kappa <= 0.0) bad("blowup exponent must be positive");
      if (coef * std::pow(T, -kappa) < 1.0) bad("g(0) must be >= 1");
      break;
    case Kind::Table: {
      if (ts.size() != gs.size() || ts.size() < 2) bad("table needs matching t/g samples");
      if (gs.front() < 1.0) bad("g must be >= 1");
      for (size_t i = 0; i + 1 < ts.size(); ++i) {
        if (!(ts[i + 1] > ts[i])) bad("table times must increase");
        if (gs[i + 1] < gs[i]) bad("g must be nondecreasing");
      }
      break;
    }
  }
}

DriftEnvelope DriftEnvelope::constant(double value, double beta) {
  DriftEnvelope g;
  g.kind = Kind::Constant;
  g.g0 = value;
  g.beta = beta;
  g.validate();
  return g;
}

DriftEnvelope DriftEnvelope::affine(double g0, double slope, double beta) {
  DriftEnvelope g;
  g.kind = Kind::Affine;
  g.g0 = g0;
  g.slope = slope;
  g.beta = beta;
  g.validate();
  return g;
}

DriftEnvelope DriftEnvelope::table(std::vector<double> ts, std::vector<double> gs,
                                   double beta) {
  DriftEnvelope g;
  g.kind = Kind::Table;
  g.ts = std::move(ts);
  g.gs = std::move(gs);
  g.beta = beta;
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------
// ScalingLaw
// ---------------------------------------------------------------------------

double ScalingLaw::log_lambda(double t) const {
  switch (kind) {
    case ScalingKind::Constant:
      return std::log(lambda0);
    case ScalingKind::DoubleExp:
      return std::log(lambda0) * std::exp(C0 * t);
    case ScalingKind::ExpIntegral:
      return C * std::pow(B, 1.0 - beta) * g.power_integral(q, t);
    case ScalingKind::LogPowerMu:
      return std::pow(g(t), prefactor_exponent) *
             std::exp(C * std::pow(B, 1.0 - beta) * g.power_integral(q, t));
  }
  return 0.0;
}

double ScalingLaw::lambda(double t) const { return std::exp(log_lambda(t)); }

double ScalingLaw::dlog_lambda(double t) const {
  switch (kind) {
    case ScalingKind::Constant:
      return 0.0;
    case ScalingKind::DoubleExp:
      return C0 * log_lambda(t);
    case ScalingKind::ExpIntegral:
      return C * std::pow(B, 1.0 - beta) * std::pow(g(t), q);
    case ScalingKind::LogPowerMu:
      return C * std::pow(B, 1.0 - beta) * std::pow(g(t), q) * log_lambda(t);
  }
  return 0.0;
}

double ScalingLaw::mu(double t) const {
  switch (kind) {
    case ScalingKind::Constant:
      return mu0;
    case ScalingKind::DoubleExp:
      return lambda(t);
    case ScalingKind::ExpIntegral:
      return std::pow(g(t), gamma);
    case ScalingKind::LogPowerMu:
      return std::pow(log_lambda(t), kappa);
  }
  return 1.0;
}

ScalingLaw ScalingLaw::constant(double lambda0, double mu0) {
  ScalingLaw law;
  law.kind = ScalingKind::Constant;
  law.lambda0 = lambda0;
  law.mu0 = mu0;
  return law;
}

ScalingLaw ScalingLaw::double_exp(double lambda0, double C0) {
  if (!(lambda0 >= std::exp(1.0) - 1e-12))
    throw ParameterError("double-exponential law needs lambda0 >= e");
  ScalingLaw law;
  law.kind = ScalingKind::DoubleExp;
  law.lambda0 = lambda0;
  law.C0 = C0;
  return law;
}

// ---------------------------------------------------------------------------
// TimeDependentModulus
// ---------------------------------------------------------------------------

double TimeDependentModulus::amplitude(double t) const {
  if (form == ModulusForm::BOmegaBg) return B;
  return law.lambda(t);
}

double TimeDependentModulus::argscale(double t) const {
  switch (form) {
    case ModulusForm::LambdaOmegaMu:
      return law.mu(t);
    case ModulusForm::BOmegaBg:
      return B * std::pow(law.g(t), law.gamma);
    case ModulusForm::LambdaOmegaBMu:
      return B * law.mu(t);
  }
  return 1.0;
}

double TimeDependentModulus::value(double t, double xi) const {
  return amplitude(t) * omega(argscale(t) * xi);
}

double TimeDependentModulus::dxi(double t, double xi) const {
  const double s = argscale(t);
  return amplitude(t) * s * omega.eval(s * xi, 1);
}

double TimeDependentModulus::dxi0(double t) const {
  return amplitude(t) * argscale(t) * omega.slope_at_zero();
}

// ---------------------------------------------------------------------------
// Derived exponents
// ---------------------------------------------------------------------------

double holder_gamma(double alpha, double beta) {
  const double a = beta + 2.0 * alpha - 1.0;
  if (!(a > 0.0)) throw ParameterError("beta+2alpha-1 must be positive");
  return 1.0 / a;
}

double critical_exponent(double alpha, double beta) {
  return 2.0 * alpha * holder_gamma(alpha, beta);
}

double tail_exponent(double alpha, double beta) {
  return 0.5 + 0.5 * (2.0 - 2.0 * alpha - beta);
}

double dissipation_bound_constant(double alpha, double c_kernel) {
  if (alpha >= 1.0) return 4.0;  // Laplacian increment convention
  return c_kernel * std::pow(2.0, 2.0 * alpha - 1.0) / (1.0 - alpha);
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

TimeDependentModulus build_thm2_modulus(double delta, double mu_shift,
                                        double lambda0, double C0) {
  TimeDependentModulus tdm;
  tdm.omega = viscous_burgers_modulus(delta, mu_shift);
  tdm.law = ScalingLaw::double_exp(lambda0, C0);
  tdm.form = ModulusForm::LambdaOmegaMu;
  return tdm;
}

namespace {

double choose_delta_thm3(double alpha, double beta, double r, double c_bound) {
  // largest power-of-two fraction <= 1/3 with 50% smallness headroom and a
  // positive tail slope
  const double a2 = 0.5 * (beta + 2.0 * alpha - 1.0);
  double delta = 0.25;
  while (delta > 1e-45) {
    const bool small_ok =
        std::pow(delta, a2) <= 0.5 * (2.0 - r) * (1.0 - r) * c_bound;
    const bool slope_ok = (2.0 - r) * std::pow(delta, 1.0 - r) <= 0.25;
    if (small_ok && slope_ok) return delta;
    delta *= 0.5;
  }
  throw ConstructionError("no feasible delta for the drift-diffusion modulus");
}

double choose_delta_thm4(double alpha, double beta, double r, double c_bound,
                         double c_pressure) {
  double delta = 0.25;
  while (delta > 1e-45) {
    const double diss = c_bound * (2.0 - r) * (1.0 - r) * std::pow(delta, 2.0 - 2.0 * alpha - r);
    const double destab =
        c_pressure * std::pow(delta, beta) *
        (7.0 - 2.0 * std::log(delta) + 2.0 / (beta * (1.0 - beta)));
    const bool small_ok = diss >= 2.0 * destab;
    const bool slope_ok = (2.0 - r) * std::pow(delta, 1.0 - r) <= 0.75;
    if (small_ok && slope_ok) return delta;
    delta *= 0.5;
  }
  throw ConstructionError("no feasible delta for the log-tail modulus");
}

}  // namespace

TimeDependentModulus build_thm3_modulus(double alpha, double beta, double B,
                                        const DriftEnvelope& g,
                                        const Thm3Options& opts) {
  const double gamma = holder_gamma(alpha, beta);  // throws at the sharp threshold
  if (!(B >= 1.0)) throw ParameterError("B must be >= 1");
  g.validate();
  const double r = std::isnan(opts.r) ? tail_exponent(alpha, beta) : opts.r;
  const double c_bound = dissipation_bound_constant(alpha, opts.c_kernel);
  const double delta =
      std::isnan(opts.delta) ? choose_delta_thm3(alpha, beta, r, c_bound) : opts.delta;

  TimeDependentModulus tdm;
  tdm.omega = drift_diffusion_modulus(alpha, beta, r, delta,
                                      opts.ode_headroom * c_bound);
  tdm.form = ModulusForm::BOmegaBg;
  tdm.B = B;
  tdm.law = ScalingLaw::constant(B);
  tdm.law.gamma = gamma;
  tdm.law.g = g;
  return tdm;
}

TimeDependentModulus build_thm4_modulus(double alpha, double beta, double B,
                                        const DriftEnvelope& g, Thm4Regime regime,
                                        const Thm4Options& opts) {
  if (!(beta > 0.0 && beta < 1.0))
    throw ParameterError("beta must lie in (0, 1): the pressure bound needs Holder drift");
  const double gamma = holder_gamma(alpha, beta);
  if (!(B >= 1.0)) throw ParameterError("B must be >= 1");
  g.validate();
  const double r = std::isnan(opts.r) ? tail_exponent(alpha, beta) : opts.r;
  const double c_bound = dissipation_bound_constant(alpha, 1.0);
  const double delta = std::isnan(opts.delta)
                           ? choose_delta_thm4(alpha, beta, r, c_bound, opts.c_pressure)
                           : opts.delta;

  double C = opts.C;
  if (std::isnan(C)) {
    // explicit large-sigma requirement; scales like delta^(beta-1)
    C = opts.c_pressure * std::pow(delta, beta - 1.0) *
        (3.0 + (2.0 / beta + 1.0 / (1.0 - beta)) / (1.0 - beta));
  }

  TimeDependentModulus tdm;
  tdm.omega = log_tail_modulus(r, delta);
  tdm.form = ModulusForm::LambdaOmegaBMu;
  tdm.B = B;

  ScalingLaw law;
  law.B = B;
  law.beta = beta;
  law.gamma = gamma;
  law.C = C;
  law.g = g;
  if (regime == Thm4Regime::Critical) {
    law.kind = ScalingKind::ExpIntegral;
    law.q = critical_exponent(alpha, beta);  // p*
  } else {
    law.kind = ScalingKind::LogPowerMu;
    if (alpha >= 0.5) {
      law.kappa = 1.0;
      law.prefactor_exponent = gamma;
      law.q = 1.0 - gamma * beta;  // = gamma (2 alpha - 1)
    } else {
      law.kappa = 1.0 / (1.0 - beta);
      law.prefactor_exponent = gamma * (1.0 - beta);
      law.q = 1.0;
    }
  }
  tdm.law = law;
  return tdm;
}

// ---------------------------------------------------------------------------
// Rescaling and validation
// ---------------------------------------------------------------------------

double rescale_for_data(const PiecewiseModulus& m, double sup_norm, double lip_norm) {
  if (sup_norm < 0.0 || lip_norm < 0.0)
    throw ParameterError("norms must be nonnegative");
  if (sup_norm == 0.0 && lip_norm == 0.0) return 0.0;

  if (m.growth().bounded()) {
    const double delta = m.delta() > 0.0 ? m.delta() : 1.0;
    const double wd = m(delta);
    if (!(wd > 0.0)) throw ConstructionError("degenerate modulus: omega(delta) = 0");
    return 2.0 * sup_norm / wd + std::sqrt(delta * lip_norm / wd);
  }

  // unbounded concave case: smallest B0 with omega(B0) >= max(lip+1, 2 sup+1)
  const double target = std::max(lip_norm + 1.0, 2.0 * sup_norm + 1.0);
  double hi = 1.0;
  while (m(hi) < target) {
    hi *= 2.0;
    if (hi > 1e300) throw ConstructionError("modulus does not reach the rescale target");
  }
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (m(mid) < target ? lo : hi) = mid;
  }
  return hi;
}

StrongModulusReport check_strong_modulus(const PiecewiseModulus& m) {
  StrongModulusReport rep;
  const std::vector<double> bps = m.breakpoints();

  {
    PropertyCheck c{"vanishes_at_zero", false, 0.0, ""};
    const double v = m(0.0);
    c.pass = std::abs(v) <= 1e-12;
    c.detail = "omega(0) = " + std::to_string(v);
    rep.checks.push_back(c);
  }
  {
    PropertyCheck c{"continuous_at_breakpoints", true, 0.0, ""};
    for (double bp : bps) {
      const double l = m.eval(std::max(bp - 1e-12, bp * (1.0 - 1e-12)), 0);
      const double rv = m.eval(bp + std::max(1e-12, bp * 1e-12), 0);
      if (std::abs(l - rv) > 1e-9 * std::max(1.0, std::abs(l))) {
        c.pass = false;
        c.witness = bp;
        c.detail = "jump " + std::to_string(rv - l);
        break;
      }
    }
    rep.checks.push_back(c);
  }
  {
    PropertyCheck c{"nondecreasing", true, 0.0, ""};
    std::vector<double> grid;
    for (int i = 0; i <= 240; ++i)
      grid.push_back(std::pow(10.0, -8.0 + 12.0 * i / 240.0));
    for (double bp : bps) {
      grid.push_back(std::max(bp - 1e-12, bp * 0.5));
      grid.push_back(bp + 1e-12);
    }
    for (double s : grid) {
      if (m.eval(s, 1) < -1e-12) {
        c.pass = false;
        c.witness = s;
        c.detail = "omega'(" + std::to_string(s) + ") < 0";
        break;
      }
    }
    rep.checks.push_back(c);
  }
  {
    PropertyCheck c{"slope_drop_at_kinks", true, 0.0, ""};
    for (double bp : bps) {
      if (m.deriv_right(bp) > m.deriv_left(bp) + 1e-12) {
        c.pass = false;
        c.witness = bp;
        c.detail = "omega'(xi+) > omega'(xi-)";
        break;
      }
    }
    rep.checks.push_back(c);
  }
  {
    PropertyCheck c{"positive_finite_slope_at_zero", false, 0.0, ""};
    const double s = m.slope_at_zero();
    c.pass = s > 0.0 && std::isfinite(s);
    c.detail = "omega'(0) = " + std::to_string(s);
    rep.checks.push_back(c);
  }
  {
    PropertyCheck c{"curvature_blows_down_at_zero", false, 0.0, ""};
    double coeff = 0.0, expo = 0.0;
    m.curvature_leading_term(coeff, expo);
    c.pass = coeff < 0.0 && expo < 0.0;
    c.detail = "omega'' ~ " + std::to_string(coeff) + " * s^" + std::to_string(expo);
    rep.checks.push_back(c);
  }
  return rep;
}

}  // namespace mocert
