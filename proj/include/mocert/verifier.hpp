#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mocert/moduli.hpp"
#include "mocert/nonlocal.hpp"

namespace mocert {

/// Differential inequalities certified by this module. Each kind binds a
/// fixed left-hand-side assembly recipe in the dynamic variable sigma.
enum class InequalityKind { Thm2, Thm3, Thm4Crit, Thm4Super, Hyp1 };

std::string to_string(InequalityKind k);

struct GridSpec {
  double sigma_min = 1e-6;
  double sigma_max = 1e3;
  int sigma_count = 181;
  double t_min = 0.0;
  double t_max = 0.0;  // t_max <= t_min: single time slice at t_min
  int t_count = 1;
};

struct VerifierParams {
  double c_kernel = 1.0;  // kernel constant of the fractional dissipation
  double c_d = 1.0;       // pressure-bound constant
  double c_kd = 1.0;      // zero-order singular-integral constant
  double rho = 1.0;       // Holder exponent of the kernel on the sphere
  double L = 2.0 * M_PI;  // period (Thm2 sigma cap)
  int dim = 1;
  bool conservative = false;  // margin mode: displayed bounds vs quadrature
};

/// Margin certificate over a (t, sigma) grid. min_margin/argmin range over
/// the numerically evaluated points; points whose positivity follows from
/// closed-form algebra below the floating-point floor are counted in
/// structural_points and do not enter the minimum.
struct VerificationReport {
  InequalityKind kind = InequalityKind::Thm3;
  GridSpec grid;
  std::map<std::string, double> params;
  std::map<std::string, double> constants;
  double min_margin = std::numeric_limits<double>::infinity();
  double argmin_t = 0.0;
  double argmin_sigma = 0.0;
  double budget_at_argmin = 0.0;  // quadrature + tail estimates at the argmin
  double slack_at_argmin = 0.0;   // local margin variation times grid spacing
  long points_checked = 0;
  long structural_points = 0;
  long failed_points = 0;
  bool certified = false;
  std::string note;

  std::string to_json() const;
};

/// Evaluates the margin of the chosen inequality over the grid. Margins for
/// the time-scaled kinds are reported divided by lambda(t) so they stay
/// representable; certification is unaffected since lambda > 0. Never
/// throws for an uncertifiable margin; parameter errors do throw.
VerificationReport check_inequality(InequalityKind kind,
                                    const TimeDependentModulus& Omega,
                                    const DriftEnvelope* drift,
                                    const VerifierParams& p, const GridSpec& grid);

/// Tail exponent r from the midpoint formula plus the largest power-of-two
/// delta <= 1/3 satisfying the kind-specific smallness conditions, re-checked
/// by a fine-grid margin scan near 0. Throws ParameterError at or below the
/// sharp threshold beta + 2 alpha - 1 = 0.
std::pair<double, double> feasible_delta(double alpha, double beta,
                                         double c_kernel, InequalityKind kind);

struct CertifyRequest {
  InequalityKind kind = InequalityKind::Thm2;
  double alpha = 1.0;
  double beta = 0.5;
  double lambda0 = std::exp(1.0);  // Thm2
  double B = 1.0;                  // Thm4
  double delta = std::numeric_limits<double>::quiet_NaN();
  DriftEnvelope drift;             // Thm4
  VerifierParams params;
  GridSpec grid;
  double hi = 1e6;                 // search bracket
};

struct CertifyResult {
  bool found = false;
  double constant = std::numeric_limits<double>::quiet_NaN();
  VerificationReport report;  // report at the certified constant
};

/// Smallest growth constant (C0 for Thm2, C_{d,alpha,beta} for Thm4) for
/// which check_inequality certifies on the reference grid; bisection with
/// 40 iterations. found = false when even the bracket top fails.
CertifyResult certify_constant(const CertifyRequest& req);

// ---------------------------------------------------------------------------
// Evolution-inequality explorer
// ---------------------------------------------------------------------------

struct MarchGrid {
  double xi_min = 1e-3;
  double xi_max = 60.0;
  int nodes = 2000;       // interior nodes, uniform in log xi
  double dt = 5e-4;
  double T = 1.0;
  int record_every = 20;  // cadence for the slope trace
};

struct MarchResult {
  std::vector<double> times;
  std::vector<double> slope_at_zero;  // one-sided d_xi Omega(t, 0)
  std::vector<double> sup_norm;
  bool completed = false;
  double stop_time = 0.0;
  std::string stop_reason;  // empty when completed
  Eigen::ArrayXd xi;
  Eigen::ArrayXd profile;  // final state
};

/// Time march of W_t = 4 W_xixi + W W_xi + I[W] on a log mesh, Dirichlet
/// W(t, 0) = 0 and Neumann far field. Diffusion implicit (tridiagonal),
/// transport and the nonlocal term explicit. Validates the modulus
/// properties each step and stops at the first violation; unstable steps
/// are rejected and dt halved up to 12 times.
MarchResult hypothesis_march(const PiecewiseModulus& W0, double amplitude,
                             double argscale, double c_d, const MarchGrid& grid);

}  // namespace mocert
