#pragma once

#include <functional>
#include <vector>

#include "mocert/moduli.hpp"

namespace mocert {

/// Quadrature output of a nonlocal functional: the computed value, an
/// absolute quadrature error estimate and an analytic bound on the
/// truncated far tail (always reported, never silently dropped).
struct FunctionalResult {
  double value = 0.0;
  double est_error = 0.0;
  double tail_truncation = 0.0;

  double budget() const { return est_error + tail_truncation; }
};

/// Modulus tabulated on a log grid. Linear from (0, 0) below the first
/// node, linear in (log eta, value) between nodes, and either a constant
/// or a linear extension beyond the last node.
class TabulatedModulus {
 public:
  enum class Tail { Bounded, Linear };

  TabulatedModulus() = default;
  TabulatedModulus(std::vector<double> nodes, std::vector<double> values,
                   Tail tail = Tail::Bounded);

  double value(double eta) const;
  double deriv(double eta) const;  // left-sided at nodes

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }
  Tail tail() const { return tail_; }

  /// int_x^inf value/eta^2 d eta, closed form per cell (O(log n)).
  double upper_integral(double x) const;
  /// int_0^x value^2/eta^2 d eta, closed form per cell (O(log n)).
  double lower_square_integral(double x) const;

 private:
  double cell_slope(size_t i) const;
  double upper_cell(size_t i, double lo, double hi) const;
  double square_cell(size_t i, double lo, double hi) const;

  std::vector<double> nodes_, values_;
  Tail tail_ = Tail::Bounded;
  std::vector<double> prefix_sq_;  // int_0^{node_i} value^2/eta^2
  std::vector<double> suffix_;     // int_{node_i}^inf value/eta^2 (may be inf)
};

/// Evaluation adapter handed to the nonlocal functionals: closed-form or
/// tabulated moduli both fit. Owns a copy of the underlying object, so it
/// can outlive its source.
struct ModulusRef {
  std::function<double(double, int)> eval;  // (sigma, order in {0,1,2})
  std::vector<double> kinks;                // slope-kink locations
  GrowthEnvelope growth;
  double lead_coeff = 0.0, lead_expo = 1.0;  // omega ~ coeff * s^expo at 0
  bool concave = false;

  double operator()(double s) const { return eval(s, 0); }

  static ModulusRef of(PiecewiseModulus m);
  static ModulusRef of(TabulatedModulus m);
};

/// View of sigma -> lam * m(mu * sigma) with kinks, growth envelope and
/// leading term rescaled to match.
ModulusRef scale_ref(const ModulusRef& m, double lam, double mu);

/// Fractional dissipation of a modulus along the breakthrough segment:
///   D_a[w](xi) = C_a int_0^(xi/2) [w(xi+2e)+w(xi-2e)-2w(xi)] e^(-1-2a) de
///              + C_a int_(xi/2)^inf [w(xi+2e)-w(2e-xi)-2w(xi)] e^(-1-2a) de.
/// The near-diagonal singularity is removed by integration by parts against
/// the slope difference plus a power substitution; the far tail is cut at a
/// horizon with the analytic remainder reported in tail_truncation.
/// Requires alpha in (0, 1); the alpha = 1 case is local (use the bound).
FunctionalResult frac_dissipation(const ModulusRef& m, double alpha, double xi,
                                  double c_alpha, double tail_rel = 1e-9);

/// The local sufficient upper bound on the fractional dissipation:
/// c_alpha * xi^(2-2alpha) * w''(xi) for alpha < 1, and the Laplacian
/// increment convention 4 w''(xi) at alpha = 1 (left curvature at kinks).
double frac_dissipation_local_bound(const ModulusRef& m, double alpha, double xi,
                                    double c_alpha);

/// Zero-order singular-integral continuity bound:
///   C_Kd [ int_0^(3 xi) w/eta d eta + xi^rho int_(3 xi)^inf w eta^(-1-rho) ].
/// Throws ConvergenceError when the growth envelope makes the tail diverge
/// (w growing at least like eta^rho).
FunctionalResult sio_functional(const ModulusRef& m, double rho, double xi,
                                double c_kd, double tail_rel = 1e-9);

/// Pressure-gradient continuity bound for a product of two moduli:
///   C_d [ int_0^xi wb wu/eta^2 + wb(xi) int_xi^inf wu/eta^2
///       + wu(xi) int_xi^inf wb/eta^2 ].
/// Symmetric in its two moduli. Throws ConvergenceError when the first
/// integral diverges at 0 (leading exponents sum <= 1) or a tail diverges.
FunctionalResult pressure_functional(const ModulusRef& mb, const ModulusRef& mu,
                                     double xi, double c_d, double tail_rel = 1e-9);

enum class PressureEvalPath { Direct, IntegratedByParts };

/// Pressure functional specialized to a Holder drift wb = g * eta^beta:
///   C_d g [ int_0^xi w eta^(beta-2) + xi^beta int_xi^inf w/eta^2
///         + xi^(beta-1) w(xi)/(1-beta) ].
/// The Direct path composes pressure_functional with the power modulus;
/// IntegratedByParts evaluates the equivalent
/// 1/(1-beta) int_0^xi w'(eta) eta^(beta-1) form for cross-checks.
FunctionalResult nse_pressure_functional(const ModulusRef& m, double g_t,
                                         double beta, double xi, double c_d,
                                         PressureEvalPath path = PressureEvalPath::Direct);

/// int_A^inf m(eta) eta^(-1-s) d eta with certified truncation (the building
/// block of the sio/pressure tails, exposed for margin assembly).
FunctionalResult weighted_tail(const ModulusRef& m, double A, double s,
                               double tail_rel = 1e-9);

/// Quadratic nonlocal term of the evolution inequality for a tabulated
/// profile:
///   2 C_d [ int_0^xi W^2/eta^2 + W(xi) int_xi^inf W/eta^2 ],
/// evaluated in closed form per tabulation cell.
FunctionalResult hypothesis_functional(const TabulatedModulus& W, double xi,
                                       double c_d);

/// hypothesis_functional at every tabulation node in one O(n) sweep
/// (prefix/suffix sums of the per-cell closed forms).
std::vector<double> hypothesis_functional_all_nodes(const TabulatedModulus& W,
                                                    double c_d);

}  // namespace mocert
