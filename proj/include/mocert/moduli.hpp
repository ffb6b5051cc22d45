#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mocert/errors.hpp"

namespace mocert {

// ---------------------------------------------------------------------------
// Piecewise moduli of continuity
// ---------------------------------------------------------------------------

enum class PieceKind {
  LinearMinusPower,  // c1*s - c2*s^(2-r)
  TanhShift,         // amp * tanh(rate*(s - delta) + shift)
  LogTail,           // dcoef*log(s/sref) + c0
  ExpIntegralTail,   // v0 + s0 * int_sref^s exp(-e^a / (c_ode*a)) de
};

struct ModulusPiece {
  PieceKind kind = PieceKind::LinearMinusPower;
  double lo = 0.0;  // piece covers [lo, hi); derivatives at lo use the left piece
  double hi = std::numeric_limits<double>::infinity();

  double c1 = 0.0, c2 = 0.0, r = 0.0;            // LinearMinusPower
  double amp = 1.0, rate = 1.0, shift = 0.0;     // TanhShift
  double delta = 0.0;                            // TanhShift pivot
  double dcoef = 0.0, c0 = 0.0, sref = 1.0;      // LogTail / ExpIntegralTail
  double v0 = 0.0, s0 = 0.0, a = 0.0, c_ode = 1.0;  // ExpIntegralTail
};

/// Eventual growth of a modulus, used for analytic tail remainders. For
/// sigma >= from the value is bounded by v_const + v_log*log(sigma) +
/// v_lin*sigma + v_pow*sigma^p_pow and the slope by s_const + s_lin*sigma.
struct GrowthEnvelope {
  double from = 0.0;
  double v_const = 0.0, v_log = 0.0, v_lin = 0.0, v_pow = 0.0, p_pow = 0.0;
  double s_const = 0.0, s_lin = 0.0;
  bool bounded() const { return v_log == 0 && v_lin == 0 && v_pow == 0; }
};

/// A stationary modulus of continuity stored as tagged closed-form pieces.
/// Immutable after construction; all evaluation is pure. The exp-integral
/// tail is backed by a precomputed cumulative cache on a geometric grid,
/// refined per call by adaptive quadrature to 1e-10 relative.
class PiecewiseModulus {
 public:
  PiecewiseModulus() = default;
  explicit PiecewiseModulus(std::vector<ModulusPiece> pieces);

  /// omega, omega' or omega'' at sigma. order 1 and 2 use the left piece at
  /// breakpoints. Throws ParameterError for sigma < 0 and ConstructionError
  /// (singularity) for order 2 at sigma = 0 when the curvature blows up.
  double eval(double sigma, int order) const;
  double operator()(double sigma) const { return eval(sigma, 0); }

  /// One-sided derivatives at interior breakpoints.
  double deriv_left(double sigma) const;
  double deriv_right(double sigma) const;

  const std::vector<ModulusPiece>& pieces() const { return pieces_; }

  /// Interior breakpoints (piece boundaries in (0, inf)).
  std::vector<double> breakpoints() const;

  /// Principal small-scale breakpoint delta (first interior boundary, or 0).
  double delta() const;

  /// omega'(0) read off the first piece's closed form (may be +inf).
  double slope_at_zero() const;

  /// Leading behaviour at 0: omega(s) ~ coeff * s^expo.
  void leading_term(double& coeff, double& expo) const;

  /// Leading term of the first piece's second derivative at 0:
  /// omega''(s) ~ coeff * s^expo. The structural omega''(0+) = -inf test is
  /// coeff < 0 and expo < 0.
  void curvature_leading_term(double& coeff, double& expo) const;

  GrowthEnvelope growth() const { return growth_; }

  /// True when every piece has nonincreasing slope (all builders qualify).
  bool concave_hint() const { return concave_; }

  /// Supremum of omega when the growth envelope is bounded.
  double sup_value() const;

 private:
  const ModulusPiece& piece_at(double sigma, bool left) const;
  double eval_piece(const ModulusPiece& p, double sigma, int order) const;
  void build_tail_cache();
  void derive_growth();

  std::vector<ModulusPiece> pieces_;
  GrowthEnvelope growth_;
  bool concave_ = false;

  struct ExpTailCache {
    std::vector<double> nodes;  // geometric grid starting at sref
    std::vector<double> cum;    // cumulative integral of the kernel
    double saturation = 0.0;    // full integral to infinity (double precision)
  };
  std::shared_ptr<const ExpTailCache> tail_cache_;  // read-only after build
};

// -- stock shapes -----------------------------------------------------------

/// omega(s) = c * s.
PiecewiseModulus linear_modulus(double c = 1.0);

/// omega(s) = c * s^p, p in (0, 2].
PiecewiseModulus power_modulus(double c, double p);

/// omega(s) = c (constant).
PiecewiseModulus constant_modulus(double c);

/// omega(s) = min(c*s, cap).
PiecewiseModulus capped_linear_modulus(double c = 1.0, double cap = 1.0);

/// omega(s) = tanh(s).
PiecewiseModulus tanh_modulus();

/// omega(s) = 8b * tanh(b s): the stationary profile of w_t = 4 w'' + w w'
/// with slope 8 b^2 at the origin.
PiecewiseModulus burgers_stationary_profile(double slope_at_zero = 2.0);

/// 2s - s^(3/2) on [0, delta] glued to tanh((s - delta) + mu_shift). The
/// shift solves the continuity equation tanh(mu) = 2 delta - delta^(3/2);
/// pass mu_shift = NaN to solve it by bisection to 1e-14.
PiecewiseModulus viscous_burgers_modulus(double delta,
                                         double mu_shift =
                                             std::numeric_limits<double>::quiet_NaN());

/// s - s^(2-r) on [0, delta] glued to the solution of
/// c_ode * s^(2-2 alpha) w'' + s^beta w' = 0 with w'(delta+) =
/// 1/2 - (2 - r) delta^(1-r) (a deliberate slope drop).
PiecewiseModulus drift_diffusion_modulus(double alpha, double beta, double r,
                                         double delta, double c_ode);

/// 2s - s^(2-r) on [0, delta] glued to delta*log(s/delta) + 2delta - delta^(2-r).
PiecewiseModulus log_tail_modulus(double r, double delta);

// ---------------------------------------------------------------------------
// Drift envelopes g(t)
// ---------------------------------------------------------------------------

/// Holder exponent beta plus a nondecreasing bound g(t) >= 1 on the drift
/// seminorm. Closed forms or a monotone sample table with linear interpolation.
struct DriftEnvelope {
  enum class Kind { Constant, Affine, PowerLaw, SingularBlowup, Table };

  double beta = 0.0;
  Kind kind = Kind::Constant;
  double g0 = 1.0;    // Constant / Affine / PowerLaw base value
  double slope = 0.0; // Affine: g0 + slope * t
  double expo = 1.0;  // PowerLaw: g0 * (1 + t)^expo
  double T = 1.0;     // SingularBlowup: coef * (T - t)^(-kappa), t < T
  double kappa = 1.0;
  double coef = 1.0;
  std::vector<double> ts, gs;  // Table nodes

  double operator()(double t) const;

  /// int_0^t g(s)^q ds to relative accuracy rel_tol (exact for closed forms,
  /// refined trapezoid otherwise).
  double power_integral(double q, double t, double rel_tol = 1e-6) const;

  /// Throws ParameterError when g < 1 or decreasing.
  void validate() const;

  static DriftEnvelope constant(double value, double beta);
  static DriftEnvelope affine(double g0, double slope, double beta);
  static DriftEnvelope table(std::vector<double> ts, std::vector<double> gs,
                             double beta);
};

// ---------------------------------------------------------------------------
// Scaling laws lambda(t), mu(t)
// ---------------------------------------------------------------------------

enum class ScalingKind {
  Constant,     // lambda = lambda0, mu = mu0
  DoubleExp,    // lambda = exp[log(lambda0) exp(C0 t)], mu = lambda
  ExpIntegral,  // log lambda = C * B^(1-beta) * int_0^t g^q, mu = g^gamma
  LogPowerMu,   // log lambda = g^pre * exp(C B^(1-beta) int_0^t g^q), mu = log^kappa(lambda)
};

/// Time laws building Omega(t, xi) = lambda(t) * omega(mu(t) * xi). Values
/// are computed in log space; lambda(t) itself may overflow to +inf.
struct ScalingLaw {
  ScalingKind kind = ScalingKind::Constant;
  double lambda0 = 1.0;
  double mu0 = 1.0;
  double C0 = 1.0;      // DoubleExp rate
  double C = 1.0;       // ExpIntegral / LogPowerMu constant
  double B = 1.0;
  double beta = 0.0;
  double gamma = 0.0;
  double q = 0.0;       // exponent inside the integral
  double prefactor_exponent = 0.0;  // LogPowerMu: log lambda carries g^pre
  double kappa = 1.0;               // LogPowerMu: mu = log^kappa(lambda)
  DriftEnvelope g;

  double log_lambda(double t) const;
  double lambda(double t) const;  // exp(log_lambda), may be +inf
  /// Certified lower bound on lambda'(t)/lambda(t) (drops nonnegative
  /// g'-terms for nondecreasing g).
  double dlog_lambda(double t) const;
  double mu(double t) const;

  static ScalingLaw constant(double lambda0, double mu0 = 1.0);
  static ScalingLaw double_exp(double lambda0, double C0);
};

// ---------------------------------------------------------------------------
// Time-dependent moduli
// ---------------------------------------------------------------------------

enum class ModulusForm {
  LambdaOmegaMu,   // Omega = lambda(t) * omega(mu(t) xi)
  BOmegaBg,        // Omega = B * omega(B g^gamma(t) xi)
  LambdaOmegaBMu,  // Omega = lambda(t) * omega(B mu(t) xi)
};

struct TimeDependentModulus {
  PiecewiseModulus omega;
  ScalingLaw law;
  ModulusForm form = ModulusForm::LambdaOmegaMu;
  double B = 1.0;

  double amplitude(double t) const;  // lambda(t) (or B)
  double argscale(double t) const;   // mu(t), B g^gamma(t) or B mu(t)
  double value(double t, double xi) const;
  double dxi(double t, double xi) const;  // left derivative at kinks
  double dxi0(double t) const;            // amplitude * argscale * omega'(0)
};

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

/// Dynamically rescaled viscous Burgers modulus:
/// Omega(t, xi) = lambda(t) w(lambda(t) xi) with lambda' = C0 lambda log lambda.
/// Requires lambda0 >= e. mu_shift = NaN solves the tanh continuity condition.
TimeDependentModulus build_thm2_modulus(double delta, double mu_shift,
                                        double lambda0, double C0);

struct Thm3Options {
  double r = std::numeric_limits<double>::quiet_NaN();      // default: midpoint formula
  double delta = std::numeric_limits<double>::quiet_NaN();  // default: feasibility chooser
  double c_kernel = 1.0;   // kernel constant of the fractional dissipation
  double ode_headroom = 0.5;  // tail ODE runs at headroom * local-bound constant
};

/// Omega(t, xi) = B w(B g^gamma(t) xi) with the drift-diffusion stationary
/// modulus. Throws ParameterError when beta + 2 alpha - 1 <= 0.
TimeDependentModulus build_thm3_modulus(double alpha, double beta, double B,
                                        const DriftEnvelope& g,
                                        const Thm3Options& opts = {});

enum class Thm4Regime { Critical, Supercritical };

struct Thm4Options {
  double r = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();
  double c_pressure = 1.0;                                   // C_d of the pressure bound
  double C = std::numeric_limits<double>::quiet_NaN();       // growth constant, default certified-shape delta^(beta-1)
};

/// Omega(t, xi) = lambda(t) w(B mu(t) xi) with the log-tail stationary
/// modulus; Critical: mu = g^gamma, log lambda = C B^(1-beta) int g^(p*).
/// Supercritical: mu = log^kappa(lambda) with the displayed closed forms.
TimeDependentModulus build_thm4_modulus(double alpha, double beta, double B,
                                        const DriftEnvelope& g, Thm4Regime regime,
                                        const Thm4Options& opts = {});

// -- derived exponents -------------------------------------------------------

/// gamma = 1 / (beta + 2 alpha - 1); throws ParameterError at or below the
/// sharp threshold beta + 2 alpha - 1 = 0.
double holder_gamma(double alpha, double beta);

/// Critical time exponent p* = 2 alpha / (2 alpha + beta - 1).
double critical_exponent(double alpha, double beta);

/// Tail exponent r = 1/2 + (2 - 2 alpha - beta)/2.
double tail_exponent(double alpha, double beta);

/// Local fractional-dissipation bound constant: c_kernel * 2^(2a-1)/(1-a)
/// for alpha < 1; the Laplacian convention 4 at alpha = 1.
double dissipation_bound_constant(double alpha, double c_kernel = 1.0);

// ---------------------------------------------------------------------------
// Data-driven rescaling and validation
// ---------------------------------------------------------------------------

/// Smallest B0 such that a field with the given sup/Lipschitz norms strictly
/// obeys B w(B xi) for every B >= B0. Bounded concave case:
/// B0 = 2 sup/w(delta) + sqrt(delta lip / w(delta)); unbounded case: smallest
/// B0 with w(B0) >= max(lip + 1, 2 sup + 1) by monotone bisection.
double rescale_for_data(const PiecewiseModulus& m, double sup_norm,
                        double lip_norm);

struct PropertyCheck {
  std::string name;
  bool pass = false;
  double witness = std::numeric_limits<double>::quiet_NaN();
  std::string detail;
};

struct StrongModulusReport {
  std::vector<PropertyCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  const PropertyCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Evaluates the strong-modulus properties (vanishing at 0, continuity at
/// breakpoints, monotonicity, slope drops at kinks, finite positive slope at
/// 0, curvature blow-down at 0) on a log grid sigma in [1e-8, 1e4] plus
/// breakpoint neighborhoods.
StrongModulusReport check_strong_modulus(const PiecewiseModulus& m);

}  // namespace mocert
