#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mocert/moduli.hpp"
#include "mocert/nonlocal.hpp"
#include "mocert/spectral.hpp"

namespace mocert {

// ---------------------------------------------------------------------------
// Breakthrough detection
// ---------------------------------------------------------------------------

struct ScanResult {
  double worst_deficit = -std::numeric_limits<double>::infinity();
  double shift_len = 0.0;       // separation of the worst pair
  long base_index = 0;          // lattice index of the worst base point
  double increment = 0.0;       // |u(x+s) - u(x)| at the worst pair
  double omega_value = 0.0;     // Omega(t, |s|) there
  double slack = 0.0;           // grid-resolution allowance gradient_max * h
  bool violation = false;       // deficit > slack
  long shifts_scanned = 0;
};

/// Max over grid shifts of max over base points of |u(x+s) - u(x)| -
/// Omega(t, |s|). All shifts in 1d/2d; axis-aligned shifts plus a stratified
/// random sample in 3d. A violation is a deficit above the grid slack
/// gradient_max * h (off-grid extrema allowance).
ScanResult breakthrough_scan(const SpectralField& u, const TimeDependentModulus& Om,
                             double t, long shift_samples = 100000,
                             unsigned long seed = 12345,
                             double gradient_hint = std::numeric_limits<double>::quiet_NaN());

/// Largest increment over sampled shifts divided by |s|^beta: an empirical
/// Holder seminorm (beta = 1 gives a Lipschitz estimate).
double holder_seminorm_estimate(const SpectralField& f, double beta,
                                long shift_samples = 20000,
                                unsigned long seed = 4242);

/// Upper concave monotone hull of shift-scan increments, tabulated on a log
/// grid: the tightest modulus-shaped dominator of the field's increments.
TabulatedModulus empirical_modulus_envelope(const SpectralField& f,
                                            long shift_samples = 20000,
                                            unsigned long seed = 4242);

// ---------------------------------------------------------------------------
// Theorem bound formulas
// ---------------------------------------------------------------------------

enum class BoundKind { Thm1, Thm2, Burgers, Thm3, Thm4Crit, Thm4Super };

struct BoundSpec {
  BoundKind kind = BoundKind::Burgers;
  double lambda0 = 1.0;   // Burgers / Thm2
  double C0 = 1.0;        // Thm2
  double B = 1.0;         // Thm1 / Thm4
  double C = 1.0;         // Thm4 growth constant (certified)
  double c0alpha = 1.0;   // Thm3 constant (measured/reported)
  double alpha = 1.0;
  double beta = 0.5;
  double slope0 = 2.0;    // omega'(0) of the armed modulus
  DriftEnvelope g;
  ScalingLaw law;                              // Thm4Super
  std::function<double(double)> slope0_trace;  // Thm1: d_xi Omega(t, 0)
};

struct BoundFormula {
  std::string name;
  std::function<double(double)> value;  // nondecreasing in t for g nondecreasing
};

/// Builds the evaluable Lipschitz bound for the requested kind; integrals of
/// g powers are evaluated to relative 1e-6. Throws ConfigError on missing
/// constants.
BoundFormula arm_bound(const BoundSpec& spec);

// ---------------------------------------------------------------------------
// Experiment orchestration
// ---------------------------------------------------------------------------

enum class Equation {
  Burgers,
  BurgersHilbert,
  FractalBurgers,
  DriftDiffusion,
  Sqg,
  LinearNse,
};

std::string to_string(Equation eq);

struct ExperimentConfig {
  Equation eq = Equation::Burgers;
  SolverConfig solver;
  int dim = 1;
  int N = 256;
  double L = 2.0 * M_PI;
  int components = 1;
  std::string ic = "sin";  // sin | taylor-green | random
  unsigned long seed = 1;
  double record_dt = 0.05;
  int scan_every = 1;   // run breakthrough_scan every k-th record; 0 disables
  long scan_shifts = 100000;
  int grad_refine = 4;
  std::optional<TimeDependentModulus> modulus;
  std::vector<BoundFormula> bounds;
  DriftProvider drift;     // for the drift equations
  std::string out_dir;     // when set: trace CSVs + manifest + snapshots
  std::string run_name = "run";
};

struct Violation {
  double t = 0.0;
  double shift_len = 0.0;
  long base_index = 0;
  double deficit = 0.0;
};

struct SimulationTrace {
  std::vector<double> times;
  std::vector<double> lipschitz;
  std::vector<double> sup_norm;
  std::vector<std::string> bound_names;
  std::vector<std::vector<double>> bounds;  // [bound][record]
  std::vector<int> breakthrough_flag;
  std::optional<Violation> breakthrough;
  bool blowup = false;
  double blowup_time = std::numeric_limits<double>::quiet_NaN();
  bool bound_exceeded = false;

  void write_csv(const std::string& path) const;
  void write_long_csv(const std::string& path) const;
  std::string manifest_json(const ExperimentConfig& cfg) const;
};

/// Steps the configured solver, recording gradient_max / sup norm at the
/// cadence, evaluating armed bounds and scanning for breakthroughs. On
/// blowup the trace is truncated at the last good state and flagged.
SimulationTrace run_experiment(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Pressure-bound desk check
// ---------------------------------------------------------------------------

struct PressureCheckResult {
  bool skipped = false;      // degenerate inputs
  double c_hat = 0.0;        // minimal constant max |grad p increments| / omega~
  long pairs_used = 0;
  double max_increment = 0.0;
};

/// Measures the minimal constant turning the two-moduli pressure bound into
/// an equality witness: spectral grad p increments over sampled grid pairs
/// divided by the functional of the empirical envelopes of u and b.
PressureCheckResult pressure_lemma_check(const SpectralField& u,
                                         const SpectralField& b, long pairs,
                                         unsigned long seed = 7);

}  // namespace mocert
