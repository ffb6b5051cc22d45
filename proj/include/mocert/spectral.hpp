#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mocert/errors.hpp"

namespace mocert {

/// Real periodic field on a uniform d-dimensional grid stored as complex
/// Fourier coefficients over the full lattice |m_i| < N_i/2 (row-major,
/// mode m stored at index m mod N). Invariants: Hermitian symmetry (real
/// values), zero mean, optionally divergence-free.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(int dim, int modes_per_axis, double period, int components);

  int dim() const { return dim_; }
  int modes(int axis = 0) const { return N_[axis]; }
  double period(int axis = 0) const { return L_[axis]; }
  int components() const { return int(coeff_.size()); }
  long lattice_size() const { return lattice_; }

  Eigen::ArrayXcd& coeff(int c) { return coeff_[c]; }
  const Eigen::ArrayXcd& coeff(int c) const { return coeff_[c]; }

  /// signed mode along an axis for a lattice index along that axis
  int mode_of(int axis, int k) const {
    return k < N_[axis] / 2 ? k : k - N_[axis];
  }
  /// physical wavenumber 2 pi m / L
  double wavenumber(int axis, int k) const {
    return 2.0 * M_PI * mode_of(axis, k) / L_[axis];
  }
  long index(int i0, int i1 = 0, int i2 = 0) const {
    return (long(i0) * N1_ + i1) * N2_ + i2;
  }
  void unindex(long idx, int& i0, int& i1, int& i2) const {
    i2 = int(idx % N2_);
    i1 = int((idx / N2_) % N1_);
    i0 = int(idx / (long(N1_) * N2_));
  }

  /// physical values on the native grid (real part after inverse transform)
  std::vector<Eigen::ArrayXd> to_physical() const;
  void from_physical(const std::vector<Eigen::ArrayXd>& values);

  /// physical values on a zero-padded grid refined by an integer factor
  std::vector<Eigen::ArrayXd> to_physical_refined(int refine) const;

  void set_mean_zero();
  void symmetrize_hermitian();  // average with the conjugate mirror
  double hermitian_defect() const;
  double mean_coefficient_norm() const;

  double divergence_max() const;  // max over modes of |m . u_hat(m)| (2 pi / L scale)
  bool divergence_free(double tol = 1e-10) const;

  double sup_norm(int refine = 1) const;   // max pointwise Euclidean magnitude
  double l2_norm() const;                  // sqrt(sum |u_hat|^2) (Parseval, unit mass)
  double max_coeff_norm() const;

  void dealias_two_thirds();

  void save(const std::string& path, double time) const;
  static SpectralField load(const std::string& path, double* time = nullptr);

 private:
  int dim_ = 1;
  std::array<int, 3> N_ = {1, 1, 1};
  std::array<double, 3> L_ = {2.0 * M_PI, 2.0 * M_PI, 2.0 * M_PI};
  int N1_ = 1, N2_ = 1;
  long lattice_ = 1;
  std::vector<Eigen::ArrayXcd> coeff_;
};

// ---------------------------------------------------------------------------
// Fourier multipliers
// ---------------------------------------------------------------------------

enum class MultiplierKind { FractionalLaplacian, Hilbert1D, Riesz, CustomSio };

/// Symbol of a Fourier multiplier on the lattice. Custom zero-order
/// singular-integral symbols are tabulated per mode from a function on the
/// sphere; their Hermitian compatibility is validated at construction.
struct MultiplierSpec {
  MultiplierKind kind = MultiplierKind::FractionalLaplacian;
  double alpha = 1.0;  // FractionalLaplacian
  int axis = 0;        // Riesz component
  Eigen::ArrayXcd symbol;  // CustomSio: tabulated over the lattice

  static MultiplierSpec fractional_laplacian(double alpha);
  static MultiplierSpec hilbert_1d();
  static MultiplierSpec riesz(int axis);

  /// Builds the periodized zero-order operator from Phi on the sphere via
  ///   K_hat(m) = C_d int_{S^{d-1}} [pi i/2 sgn(m_hat.y) - log|m_hat.y|] Phi(y) dS
  /// normalized so Phi_j(y) = y_j reproduces the Riesz symbol -i m_j/|m|
  /// exactly. Phi must have zero average on the sphere.
  static MultiplierSpec custom_sio(const SpectralField& geometry,
                                   const std::function<double(double, double, double)>& Phi,
                                   double quad_tol = 1e-9);

  std::complex<double> at(const SpectralField& f, long idx) const;
};

/// Coefficient-wise product; preserves zero mean and Hermitian symmetry.
SpectralField apply_multiplier(const SpectralField& f, const MultiplierSpec& mu);

/// v - grad laplace^{-1} (div v): the divergence-free part of v.
SpectralField leray_project(const SpectralField& v);

/// grad p with p = sum_ij R_i R_j (b_i u_j); products dealiased.
SpectralField pressure_gradient(const SpectralField& u, const SpectralField& b);

/// (b.grad) u evaluated pseudo-spectrally, optionally dealiased (2/3 rule),
/// mean re-zeroed.
SpectralField advection_term(const SpectralField& b, const SpectralField& u,
                             bool dealias = true);

// ---------------------------------------------------------------------------
// Time stepping
// ---------------------------------------------------------------------------

struct SolverConfig {
  double nu = 1.0;      // dissipation coefficient
  double alpha = 1.0;   // dissipation power: nu (-Laplace)^alpha
  double dt = 1e-3;
  double T = 1.0;
  bool dealias = true;  // two-thirds truncation of quadratic products
  bool midpoint = true; // Lawson midpoint (2nd order) vs Lawson-Euler
  std::optional<MultiplierSpec> zero_order;  // Burgers-Hilbert term
  bool sqg_mode = false;  // drift-diffusion with b = (-R2 u, R1 u)
};

struct StepStatus {
  bool ok = true;
  bool blowup = false;
  double max_coeff = 0.0;
};

using DriftProvider = std::function<SpectralField(double t)>;

/// One integrating-factor step of u_t = -nu (-Laplace)^alpha u + (u.grad) u
/// [+ N u]. The linear part (dissipation and the zero-order multiplier) is
/// exact per mode; the advective product is pseudo-spectral and dealiased.
StepStatus step_burgers(SpectralField& u, double t, const SolverConfig& cfg);

/// u_t = -nu (-Laplace)^alpha u + (b.grad) u, with b supplied per time or
/// derived from u in SQG mode.
StepStatus step_drift_diffusion(SpectralField& u, double t, const SolverConfig& cfg,
                                const DriftProvider& b);

/// u_t = -nu (-Laplace)^alpha u + P[(b.grad) u] with P the Leray projection;
/// b must be divergence-free (validated) and u stays divergence-free.
StepStatus step_linear_nse(SpectralField& u, double t, const SolverConfig& cfg,
                           const DriftProvider& b);

/// Max over a 4x zero-padded grid of the pointwise Jacobian operator norm
/// (exact largest singular value per point for d <= 3).
double gradient_max(const SpectralField& u, int refine = 4);

// ---------------------------------------------------------------------------
// Stock fields
// ---------------------------------------------------------------------------

/// scalar sin(2 pi x / L) in 1d (zero mean, unit amplitude)
SpectralField sine_field(int N, double L);

/// Taylor-Green-type solenoidal 3d field scaled by amplitude
SpectralField taylor_green(int N, double L, double amplitude = 1.0);

/// Random zero-mean field with modes |m_i| <= max_mode; solenoidal vector
/// field when components == dim (Leray-projected). Deterministic in seed.
SpectralField random_low_mode_field(int dim, int N, double L, int components,
                                    int max_mode, unsigned long seed,
                                    bool solenoidal);

}  // namespace mocert
