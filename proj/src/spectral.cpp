#include "mocert/spectral.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "mocert/quadrature.hpp"

namespace mocert {

namespace {

using Cplx = std::complex<double>;

// unnormalized forward transform along every active axis:
//   X(k) = sum_n x(n) exp(-2 pi i k n / N)
void fwd_all_axes(Eigen::ArrayXcd& a, int dim, const std::array<int, 3>& N) {
  thread_local Eigen::FFT<double> fft;
  std::vector<Cplx> line, out;
  for (int axis = 0; axis < dim; ++axis) {
    const int n = N[axis];
    if (n == 1) continue;
    long stride = 1;
    for (int d = axis + 1; d < 3; ++d) stride *= N[d];
    const long lines = a.size() / n;
    line.assign(n, Cplx(0));
    out.assign(n, Cplx(0));
    for (long l = 0; l < lines; ++l) {
      // base index of this line: split l into (outer, inner) around the axis
      const long inner = l % stride;
      const long outer = l / stride;
      const long base = outer * stride * n + inner;
      for (int k = 0; k < n; ++k) line[k] = a[base + k * stride];
      fft.fwd(out, line);
      for (int k = 0; k < n; ++k) a[base + k * stride] = out[k];
    }
  }
}

void two_thirds_mask(const SpectralField& f, Eigen::ArrayXcd& a) {
  for (long idx = 0; idx < a.size(); ++idx) {
    int i0, i1, i2;
    f.unindex(idx, i0, i1, i2);
    const int is[3] = {i0, i1, i2};
    for (int ax = 0; ax < f.dim(); ++ax) {
      const int m = (is[ax] < f.modes(ax) / 2) ? is[ax] : is[ax] - f.modes(ax);
      if (3 * std::abs(m) > f.modes(ax)) {
        a[idx] = 0.0;
        break;
      }
    }
  }
}

double uniform_pm1(std::mt19937_64& rng) {
  // deterministic across platforms: 53 mantissa bits
  return double(rng() >> 11) * (1.0 / 4503599627370496.0) - 1.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// SpectralField
// ---------------------------------------------------------------------------

SpectralField::SpectralField(int dim, int modes_per_axis, double period,
                             int components) {
  if (dim < 1 || dim > 3) throw ParameterError("dim must be 1, 2 or 3");
  if (modes_per_axis < 2 || (modes_per_axis & (modes_per_axis - 1)) != 0)
    throw ParameterError("modes per axis must be a power of two");
  dim_ = dim;
  for (int d = 0; d < 3; ++d) {
    N_[d] = d < dim ? modes_per_axis : 1;
    L_[d] = period;
  }
  N1_ = N_[1];
  N2_ = N_[2];
  lattice_ = long(N_[0]) * N_[1] * N_[2];
  coeff_.assign(components, Eigen::ArrayXcd::Zero(lattice_));
}

std::vector<Eigen::ArrayXd> SpectralField::to_physical() const {
  std::vector<Eigen::ArrayXd> out;
  for (const auto& c : coeff_) {
    Eigen::ArrayXcd tmp = c.conjugate();
    fwd_all_axes(tmp, dim_, N_);
    out.push_back(tmp.real());
  }
  return out;
}

void SpectralField::from_physical(const std::vector<Eigen::ArrayXd>& values) {
  if (long(values.size()) != long(coeff_.size()))
    throw InputError("component count mismatch");
  for (size_t c = 0; c < coeff_.size(); ++c) {
    Eigen::ArrayXcd tmp = values[c].cast<Cplx>();
    fwd_all_axes(tmp, dim_, N_);
    coeff_[c] = tmp / double(lattice_);
  }
}

std::vector<Eigen::ArrayXd> SpectralField::to_physical_refined(int refine) const {
  if (refine <= 1) return to_physical();
  SpectralField big(dim_, N_[0] * refine, L_[0], components());
  for (int c = 0; c < components(); ++c) {
    for (long idx = 0; idx < lattice_; ++idx) {
      int i0, i1, i2;
      unindex(idx, i0, i1, i2);
      const int is[3] = {i0, i1, i2};
      int ms[3] = {0, 0, 0};
      bool nyq[3] = {false, false, false};
      for (int ax = 0; ax < dim_; ++ax) {
        ms[ax] = mode_of(ax, is[ax]);
        nyq[ax] = (ms[ax] == -N_[ax] / 2);
      }
      // split self-conjugate Nyquist modes onto +-N/2 in the refined lattice
      std::vector<std::array<int, 3>> targets = {{ms[0], ms[1], ms[2]}};
      double weight = 1.0;
      for (int ax = 0; ax < dim_; ++ax) {
        if (!nyq[ax]) continue;
        weight *= 0.5;
        std::vector<std::array<int, 3>> doubled;
        for (auto tgt : targets) {
          auto pos = tgt;
          pos[ax] = N_[ax] / 2;
          doubled.push_back(tgt);
          doubled.push_back(pos);
        }
        targets = doubled;
      }
      for (const auto& tgt : targets) {
        int bi[3] = {0, 0, 0};
        for (int ax = 0; ax < dim_; ++ax)
          bi[ax] = tgt[ax] >= 0 ? tgt[ax] : tgt[ax] + big.modes(ax);
        big.coeff(c)[big.index(bi[0], bi[1], bi[2])] += weight * coeff_[c][idx];
      }
    }
  }
  return big.to_physical();
}

void SpectralField::set_mean_zero() {
  for (auto& c : coeff_) c[0] = 0.0;
}

void SpectralField::symmetrize_hermitian() {
  for (auto& c : coeff_) {
    Eigen::ArrayXcd orig = c;
    for (long idx = 0; idx < lattice_; ++idx) {
      int i0, i1, i2;
      unindex(idx, i0, i1, i2);
      const int j0 = (N_[0] - i0) % N_[0];
      const int j1 = (N_[1] - i1) % N_[1];
      const int j2 = (N_[2] - i2) % N_[2];
      c[idx] = 0.5 * (orig[idx] + std::conj(orig[index(j0, j1, j2)]));
    }
  }
}

double SpectralField::hermitian_defect() const {
  double worst = 0.0;
  for (const auto& c : coeff_) {
    for (long idx = 0; idx < lattice_; ++idx) {
      int i0, i1, i2;
      unindex(idx, i0, i1, i2);
      const int j0 = (N_[0] - i0) % N_[0];
      const int j1 = (N_[1] - i1) % N_[1];
      const int j2 = (N_[2] - i2) % N_[2];
      worst = std::max(worst,
                       std::abs(c[idx] - std::conj(c[index(j0, j1, j2)])));
    }
  }
  return worst;
}

double SpectralField::mean_coefficient_norm() const {
  double v = 0.0;
  for (const auto& c : coeff_) v = std::max(v, std::abs(c[0]));
  return v;
}

double SpectralField::divergence_max() const {
  if (components() != dim_) return 0.0;
  double worst = 0.0;
  for (long idx = 0; idx < lattice_; ++idx) {
    int i0, i1, i2;
    unindex(idx, i0, i1, i2);
    const int is[3] = {i0, i1, i2};
    Cplx div = 0.0;
    for (int ax = 0; ax < dim_; ++ax)
      div += Cplx(0.0, wavenumber(ax, is[ax])) * coeff_[ax][idx];
    worst = std::max(worst, std::abs(div));
  }
  return worst;
}

bool SpectralField::divergence_free(double tol) const {
  return divergence_max() <= tol;
}

double SpectralField::sup_norm(int refine) const {
  auto vals = refine > 1 ? to_physical_refined(refine) : to_physical();
  const long n = vals[0].size();
  double worst = 0.0;
  for (long i = 0; i < n; ++i) {
    double mag2 = 0.0;
    for (const auto& v : vals) mag2 += v[i] * v[i];
    worst = std::max(worst, mag2);
  }
  return std::sqrt(worst);
}

double SpectralField::l2_norm() const {
  double acc = 0.0;
  for (const auto& c : coeff_) acc += c.abs2().sum();
  return std::sqrt(acc);
}

double SpectralField::max_coeff_norm() const {
  double worst = 0.0;
  for (const auto& c : coeff_) worst = std::max(worst, c.abs().maxCoeff());
  return worst;
}

void SpectralField::dealias_two_thirds() {
  for (auto& c : coeff_) two_thirds_mask(*this, c);
}

void SpectralField::save(const std::string& path, double time) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  const std::int64_t dim = dim_, comps = components();
  out.write(reinterpret_cast<const char*>(&dim), 8);
  for (int d = 0; d < dim_; ++d) {
    const std::int64_t n = N_[d];
    out.write(reinterpret_cast<const char*>(&n), 8);
  }
  for (int d = 0; d < dim_; ++d)
    out.write(reinterpret_cast<const char*>(&L_[d]), 8);
  out.write(reinterpret_cast<const char*>(&comps), 8);
  out.write(reinterpret_cast<const char*>(&time), 8);
  for (const auto& c : coeff_)
    for (long i = 0; i < lattice_; ++i) {
      const double re = c[i].real(), im = c[i].imag();
      out.write(reinterpret_cast<const char*>(&re), 8);
      out.write(reinterpret_cast<const char*>(&im), 8);
    }
}

SpectralField SpectralField::load(const std::string& path, double* time) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::int64_t dim = 0, comps = 0, n = 0;
  in.read(reinterpret_cast<char*>(&dim), 8);
  std::array<std::int64_t, 3> N = {1, 1, 1};
  for (int d = 0; d < dim; ++d) {
    in.read(reinterpret_cast<char*>(&n), 8);
    N[d] = n;
  }
  std::array<double, 3> L = {0, 0, 0};
  for (int d = 0; d < dim; ++d) in.read(reinterpret_cast<char*>(&L[d]), 8);
  in.read(reinterpret_cast<char*>(&comps), 8);
  double t = 0.0;
  in.read(reinterpret_cast<char*>(&t), 8);
  if (time) *time = t;
  SpectralField f(int(dim), int(N[0]), L[0], int(comps));
  for (int c = 0; c < comps; ++c)
    for (long i = 0; i < f.lattice_size(); ++i) {
      double re = 0, im = 0;
      in.read(reinterpret_cast<char*>(&re), 8);
      in.read(reinterpret_cast<char*>(&im), 8);
      f.coeff(c)[i] = Cplx(re, im);
    }
  if (!in) throw ConfigError("truncated field file " + path);
  return f;
}

// ---------------------------------------------------------------------------
// Multipliers
// ---------------------------------------------------------------------------

MultiplierSpec MultiplierSpec::fractional_laplacian(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw ParameterError("fractional power must lie in (0, 1]");
  MultiplierSpec s;
  s.kind = MultiplierKind::FractionalLaplacian;
  s.alpha = alpha;
  return s;
}

MultiplierSpec MultiplierSpec::hilbert_1d() {
  MultiplierSpec s;
  s.kind = MultiplierKind::Hilbert1D;
  return s;
}

MultiplierSpec MultiplierSpec::riesz(int axis) {
  MultiplierSpec s;
  s.kind = MultiplierKind::Riesz;
  s.axis = axis;
  return s;
}

namespace {

// K_hat_raw(m_hat) = int_{S^{d-1}} [pi i/2 sgn(m_hat.y) - log|m_hat.y|] Phi(y) dS
Cplx khat_raw(int dim, const std::array<double, 3>& mhat,
              const std::function<double(double, double, double)>& Phi,
              double tol) {
  if (dim == 1) {
    const double s = mhat[0] >= 0 ? 1.0 : -1.0;
    return Cplx(0.0, M_PI / 2.0) * (s * Phi(1, 0, 0) - s * Phi(-1, 0, 0));
  }
  if (dim == 2) {
    const double psi = std::atan2(mhat[1], mhat[0]);
    auto fr = [&](double u) {
      return -std::log(std::abs(std::cos(u))) *
             Phi(std::cos(psi + u), std::sin(psi + u), 0.0);
    };
    auto fi = [&](double u) {
      return (M_PI / 2.0) * (std::cos(u) >= 0 ? 1.0 : -1.0) *
             Phi(std::cos(psi + u), std::sin(psi + u), 0.0);
    };
    const std::vector<double> cuts = {M_PI / 2.0, 1.5 * M_PI};
    QuadResult re = integrate_split(fr, 0.0, 2.0 * M_PI, cuts, tol, tol);
    QuadResult im = integrate_split(fi, 0.0, 2.0 * M_PI, cuts, tol, tol);
    return Cplx(re.value, im.value);
  }
  // dim == 3: local frame (ea, eb, mhat), y = cos(th) mhat + sin(th)(..)
  Eigen::Vector3d m(mhat[0], mhat[1], mhat[2]);
  Eigen::Vector3d probe = std::abs(m[0]) < 0.9 ? Eigen::Vector3d(1, 0, 0)
                                               : Eigen::Vector3d(0, 1, 0);
  Eigen::Vector3d ea = m.cross(probe).normalized();
  Eigen::Vector3d eb = m.cross(ea);
  const int nphi = 64;
  auto ring = [&](double th) {
    double acc = 0.0;
    for (int k = 0; k < nphi; ++k) {
      const double ph = 2.0 * M_PI * k / nphi;
      Eigen::Vector3d y =
          std::cos(th) * m + std::sin(th) * (std::cos(ph) * ea + std::sin(ph) * eb);
      acc += Phi(y[0], y[1], y[2]);
    }
    return acc * (2.0 * M_PI / nphi);
  };
  auto fr = [&](double th) {
    return -std::log(std::abs(std::cos(th))) * std::sin(th) * ring(th);
  };
  auto fi = [&](double th) {
    return (M_PI / 2.0) * (std::cos(th) >= 0 ? 1.0 : -1.0) * std::sin(th) *
           ring(th);
  };
  const std::vector<double> cuts = {M_PI / 2.0};
  QuadResult re = integrate_split(fr, 0.0, M_PI, cuts, tol, tol);
  QuadResult im = integrate_split(fi, 0.0, M_PI, cuts, tol, tol);
  return Cplx(re.value, im.value);
}

}  // namespace

MultiplierSpec MultiplierSpec::custom_sio(
    const SpectralField& f, const std::function<double(double, double, double)>& Phi,
    double quad_tol) {
  const int dim = f.dim();

  // zero-average check on the sphere
  {
    double avg = 0.0;
    if (dim == 1) {
      avg = Phi(1, 0, 0) + Phi(-1, 0, 0);
    } else if (dim == 2) {
      QuadResult q = integrate(
          [&](double u) { return Phi(std::cos(u), std::sin(u), 0.0); }, 0.0,
          2.0 * M_PI, 1e-10, 1e-10);
      avg = q.value;
    } else {
      QuadResult q = integrate(
          [&](double th) {
            double acc = 0.0;
            const int nphi = 64;
            for (int k = 0; k < nphi; ++k) {
              const double ph = 2.0 * M_PI * k / nphi;
              acc += Phi(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                         std::cos(th));
            }
            return std::sin(th) * acc * (2.0 * M_PI / nphi);
          },
          0.0, M_PI, 1e-9, 1e-9);
      avg = q.value;
    }
    if (std::abs(avg) > 1e-7)
      throw ConstructionError("custom kernel: Phi must have zero average on the sphere");
  }

  // calibration: Phi_j(y) = y_j must reproduce the Riesz symbol -i m_j/|m|
  auto phi1 = [](double y0, double, double) { return y0; };
  const Cplx raw_e1 = khat_raw(dim, {1.0, 0.0, 0.0}, phi1, quad_tol);
  const Cplx cal = Cplx(0.0, -1.0) / raw_e1;

  MultiplierSpec s;
  s.kind = MultiplierKind::CustomSio;
  s.symbol = Eigen::ArrayXcd::Zero(f.lattice_size());
  for (long idx = 1; idx < f.lattice_size(); ++idx) {
    int i0, i1, i2;
    f.unindex(idx, i0, i1, i2);
    const int is[3] = {i0, i1, i2};
    double m[3] = {0, 0, 0}, norm = 0.0;
    bool nyquist = false;
    for (int ax = 0; ax < dim; ++ax) {
      const int mm = f.mode_of(ax, is[ax]);
      if (mm == -f.modes(ax) / 2) nyquist = true;
      m[ax] = mm;
      norm += m[ax] * m[ax];
    }
    if (nyquist) continue;  // self-conjugate modes keep a zero symbol
    norm = std::sqrt(norm);
    s.symbol[idx] = cal * khat_raw(dim, {m[0] / norm, m[1] / norm, m[2] / norm},
                                   Phi, quad_tol);
  }

  // Hermitian compatibility: K(-m) = conj(K(m))
  double defect = 0.0, scale = 0.0;
  for (long idx = 1; idx < f.lattice_size(); ++idx) {
    int i0, i1, i2;
    f.unindex(idx, i0, i1, i2);
    const long mirror = f.index((f.modes(0) - i0) % f.modes(0),
                                (f.modes(1) - i1) % f.modes(1),
                                (f.modes(2) - i2) % f.modes(2));
    if (mirror == 0) continue;
    defect = std::max(defect, std::abs(s.symbol[idx] - std::conj(s.symbol[mirror])));
    scale = std::max(scale, std::abs(s.symbol[idx]));
  }
  if (defect > 1e-6 * std::max(scale, 1.0))
    throw ConstructionError("custom kernel symbol violates Hermitian symmetry");
  return s;
}

std::complex<double> MultiplierSpec::at(const SpectralField& f, long idx) const {
  int i0, i1, i2;
  f.unindex(idx, i0, i1, i2);
  const int is[3] = {i0, i1, i2};
  switch (kind) {
    case MultiplierKind::FractionalLaplacian: {
      double k2 = 0.0;
      for (int ax = 0; ax < f.dim(); ++ax) {
        const double k = f.wavenumber(ax, is[ax]);
        k2 += k * k;
      }
      return std::pow(k2, alpha);
    }
    case MultiplierKind::Hilbert1D: {
      const int m = f.mode_of(0, i0);
      // odd symbols vanish on the self-conjugate Nyquist mode
      if (m == 0 || m == -f.modes(0) / 2) return 0.0;
      return Cplx(0.0, m > 0 ? -1.0 : 1.0);
    }
    case MultiplierKind::Riesz: {
      double m[3] = {0, 0, 0}, n2 = 0.0;
      for (int ax = 0; ax < f.dim(); ++ax) {
        const int mm = f.mode_of(ax, is[ax]);
        if (mm == -f.modes(ax) / 2) return 0.0;
        m[ax] = mm;
        n2 += m[ax] * m[ax];
      }
      if (n2 == 0.0) return 0.0;
      return Cplx(0.0, -m[axis] / std::sqrt(n2));
    }
    case MultiplierKind::CustomSio:
      return symbol[idx];
  }
  return 0.0;
}

SpectralField apply_multiplier(const SpectralField& f, const MultiplierSpec& mu) {
  if (mu.kind == MultiplierKind::CustomSio && mu.symbol.size() != f.lattice_size())
    throw InputError("custom symbol tabulated for a different lattice");
  SpectralField out = f;
  for (int c = 0; c < f.components(); ++c)
    for (long idx = 0; idx < f.lattice_size(); ++idx)
      out.coeff(c)[idx] = f.coeff(c)[idx] * mu.at(f, idx);
  out.set_mean_zero();
  return out;
}

SpectralField leray_project(const SpectralField& v) {
  if (v.components() != v.dim())
    throw InputError("Leray projection needs a full vector field");
  SpectralField out = v;
  for (long idx = 1; idx < v.lattice_size(); ++idx) {
    int i0, i1, i2;
    v.unindex(idx, i0, i1, i2);
    const int is[3] = {i0, i1, i2};
    double k[3] = {0, 0, 0}, k2 = 0.0;
    for (int ax = 0; ax < v.dim(); ++ax) {
      k[ax] = v.wavenumber(ax, is[ax]);
      k2 += k[ax] * k[ax];
    }
    if (k2 == 0.0) continue;
    Cplx kdotu = 0.0;
    for (int ax = 0; ax < v.dim(); ++ax) kdotu += k[ax] * v.coeff(ax)[idx];
    for (int ax = 0; ax < v.dim(); ++ax)
      out.coeff(ax)[idx] -= k[ax] * kdotu / k2;
  }
  out.set_mean_zero();
  return out;
}

SpectralField pressure_gradient(const SpectralField& u, const SpectralField& b) {
  const int d = u.dim();
  if (u.components() != d || b.components() != d)
    throw InputError("pressure gradient needs full vector fields");
  auto uphys = u.to_physical();
  auto bphys = b.to_physical();

  // p_hat = -sum_ij k_i k_j / |k|^2 (b_i u_j)_hat
  Eigen::ArrayXcd phat = Eigen::ArrayXcd::Zero(u.lattice_size());
  SpectralField scratch(u.dim(), u.modes(0), u.period(0), 1);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      scratch.from_physical({(bphys[i] * uphys[j]).eval()});
      two_thirds_mask(u, scratch.coeff(0));
      for (long idx = 1; idx < u.lattice_size(); ++idx) {
        int i0, i1, i2;
        u.unindex(idx, i0, i1, i2);
        const int is[3] = {i0, i1, i2};
        double k[3] = {0, 0, 0}, k2 = 0.0;
        for (int ax = 0; ax < d; ++ax) {
          k[ax] = u.wavenumber(ax, is[ax]);
          k2 += k[ax] * k[ax];
        }
        phat[idx] += -k[i] * k[j] / k2 * scratch.coeff(0)[idx];
      }
    }

  SpectralField grad(u.dim(), u.modes(0), u.period(0), d);
  for (long idx = 1; idx < u.lattice_size(); ++idx) {
    int i0, i1, i2;
    u.unindex(idx, i0, i1, i2);
    const int is[3] = {i0, i1, i2};
    for (int ax = 0; ax < d; ++ax)
      grad.coeff(ax)[idx] = Cplx(0.0, u.wavenumber(ax, is[ax])) * phat[idx];
  }
  return grad;
}

SpectralField advection_term(const SpectralField& b, const SpectralField& u,
                             bool dealias) {
  const int d = u.dim();
  if (b.components() != d) throw InputError("drift must have dim components");
  auto bphys = b.to_physical();

  SpectralField out(u.dim(), u.modes(0), u.period(0), u.components());
  SpectralField deriv(u.dim(), u.modes(0), u.period(0), 1);
  for (int j = 0; j < u.components(); ++j) {
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(u.lattice_size());
    for (int i = 0; i < d; ++i) {
      for (long idx = 0; idx < u.lattice_size(); ++idx) {
        int i0, i1, i2;
        u.unindex(idx, i0, i1, i2);
        const int is[3] = {i0, i1, i2};
        deriv.coeff(0)[idx] =
            Cplx(0.0, u.wavenumber(i, is[i])) * u.coeff(j)[idx];
      }
      acc += bphys[i] * deriv.to_physical()[0];
    }
    SpectralField tmp(u.dim(), u.modes(0), u.period(0), 1);
    tmp.from_physical({acc});
    out.coeff(j) = tmp.coeff(0);
  }
  if (dealias) out.dealias_two_thirds();
  out.set_mean_zero();
  return out;
}

// ---------------------------------------------------------------------------
// Time stepping
// ---------------------------------------------------------------------------

namespace {

Eigen::ArrayXcd linear_symbol(const SpectralField& f, const SolverConfig& cfg) {
  Eigen::ArrayXcd sym(f.lattice_size());
  MultiplierSpec lap = MultiplierSpec::fractional_laplacian(cfg.alpha);
  for (long idx = 0; idx < f.lattice_size(); ++idx) {
    Cplx s = -cfg.nu * lap.at(f, idx);
    if (cfg.zero_order) s += cfg.zero_order->at(f, idx);
    sym[idx] = s;
  }
  return sym;
}

void scale_exp(SpectralField& f, const Eigen::ArrayXcd& sym, double s) {
  for (int c = 0; c < f.components(); ++c)
    f.coeff(c) *= (s * sym).exp();
}

StepStatus commit(SpectralField& u, SpectralField& next) {
  StepStatus st;
  st.max_coeff = next.max_coeff_norm();
  if (!std::isfinite(st.max_coeff) || st.max_coeff > 1e12) {
    st.ok = false;
    st.blowup = true;  // u keeps the last good state
    return st;
  }
  u = std::move(next);
  return st;
}

// Lawson step: exact integrating factor for the linear symbol, explicit
// nonlinear term, optional midpoint stage
template <class NonlinearHat>
StepStatus lawson_step(SpectralField& u, double t, const SolverConfig& cfg,
                       NonlinearHat&& nl) {
  const Eigen::ArrayXcd sym = linear_symbol(u, cfg);
  const double dt = cfg.dt;

  if (!cfg.midpoint) {
    SpectralField nterm = nl(u, t);
    SpectralField next = u;
    for (int c = 0; c < u.components(); ++c)
      next.coeff(c) += dt * nterm.coeff(c);
    scale_exp(next, sym, dt);
    next.set_mean_zero();
    return commit(u, next);
  }

  SpectralField stage = u;
  SpectralField n0 = nl(u, t);
  for (int c = 0; c < u.components(); ++c)
    stage.coeff(c) += 0.5 * dt * n0.coeff(c);
  scale_exp(stage, sym, 0.5 * dt);
  stage.set_mean_zero();

  SpectralField n1 = nl(stage, t + 0.5 * dt);
  scale_exp(n1, sym, 0.5 * dt);
  SpectralField next = u;
  scale_exp(next, sym, dt);
  for (int c = 0; c < u.components(); ++c)
    next.coeff(c) += dt * n1.coeff(c);
  next.set_mean_zero();
  return commit(u, next);
}

}  // namespace

StepStatus step_burgers(SpectralField& u, double t, const SolverConfig& cfg) {
  return lawson_step(u, t, cfg, [&](const SpectralField& v, double) {
    return advection_term(v, v, cfg.dealias);
  });
}

StepStatus step_drift_diffusion(SpectralField& u, double t, const SolverConfig& cfg,
                                const DriftProvider& b) {
  if (cfg.sqg_mode) {
    return lawson_step(u, t, cfg, [&](const SpectralField& v, double) {
      // b = (-R2 v, R1 v)
      SpectralField drift(v.dim(), v.modes(0), v.period(0), v.dim());
      SpectralField r1 = apply_multiplier(v, MultiplierSpec::riesz(0));
      SpectralField r2 = apply_multiplier(v, MultiplierSpec::riesz(1));
      drift.coeff(0) = -r2.coeff(0);
      drift.coeff(1) = r1.coeff(0);
      return advection_term(drift, v, cfg.dealias);
    });
  }
  return lawson_step(u, t, cfg, [&](const SpectralField& v, double s) {
    return advection_term(b(s), v, cfg.dealias);
  });
}

StepStatus step_linear_nse(SpectralField& u, double t, const SolverConfig& cfg,
                           const DriftProvider& b) {
  if (u.components() != u.dim())
    throw InputError("linear NSE evolves a full vector field");
  return lawson_step(u, t, cfg, [&](const SpectralField& v, double s) {
    SpectralField drift = b(s);
    if (drift.divergence_max() > 1e-10 * std::max(drift.max_coeff_norm(), 1.0))
      throw InputError("drift field is not solenoidal");
    SpectralField adv = advection_term(drift, v, cfg.dealias);
    return leray_project(adv);
  });
}

namespace {

// squared Jacobian operator norm at an arbitrary point by direct Fourier sums
double jac_norm2_at(const SpectralField& u, const double x[3]) {
  const int d = u.dim(), nc = u.components();
  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
  for (long idx = 0; idx < u.lattice_size(); ++idx) {
    int i0, i1, i2;
    u.unindex(idx, i0, i1, i2);
    const int is[3] = {i0, i1, i2};
    double kx = 0.0;
    double k[3] = {0, 0, 0};
    for (int ax = 0; ax < d; ++ax) {
      k[ax] = u.wavenumber(ax, is[ax]);
      kx += k[ax] * x[ax];
    }
    const Cplx ph(std::cos(kx), std::sin(kx));
    for (int j = 0; j < nc; ++j) {
      const Cplx cj = u.coeff(j)[idx] * ph;
      for (int i = 0; i < d; ++i)
        J(j, i) += (Cplx(0.0, k[i]) * cj).real();
    }
  }
  if (nc == 1) {
    double g2 = 0.0;
    for (int i = 0; i < d; ++i) g2 += J(0, i) * J(0, i);
    return g2;
  }
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  M.topLeftCorner(d, d) =
      J.topLeftCorner(nc, d).transpose() * J.topLeftCorner(nc, d);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
  es.computeDirect(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

double gradient_max(const SpectralField& u, int refine) {
  const int d = u.dim();
  const int nc = u.components();

  // refined physical derivative fields d_i u_j
  std::vector<std::vector<Eigen::ArrayXd>> der(nc);
  SpectralField tmp(u.dim(), u.modes(0), u.period(0), 1);
  for (int j = 0; j < nc; ++j) {
    der[j].resize(d);
    for (int i = 0; i < d; ++i) {
      for (long idx = 0; idx < u.lattice_size(); ++idx) {
        int i0, i1, i2;
        u.unindex(idx, i0, i1, i2);
        const int is[3] = {i0, i1, i2};
        tmp.coeff(0)[idx] = Cplx(0.0, u.wavenumber(i, is[i])) * u.coeff(j)[idx];
      }
      der[j][i] = tmp.to_physical_refined(refine)[0];
    }
  }

  const long n = der[0][0].size();
  double worst = 0.0;
  long argmax = 0;
  auto consider = [&](long p, double g2) {
    if (g2 > worst) {
      worst = g2;
      argmax = p;
    }
  };
  if (nc == 1) {
    for (long p = 0; p < n; ++p) {
      double g2 = 0.0;
      for (int i = 0; i < d; ++i) g2 += der[0][i][p] * der[0][i][p];
      consider(p, g2);
    }
  } else if (d == 2 && nc == 2) {
    for (long p = 0; p < n; ++p) {
      Eigen::Matrix2d J;
      for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i) J(j, i) = der[j][i][p];
      const Eigen::Matrix2d M = J.transpose() * J;
      const double tr = M.trace(), det = M.determinant();
      consider(p, 0.5 * (tr + std::sqrt(std::max(tr * tr - 4.0 * det, 0.0))));
    }
  } else {
    for (long p = 0; p < n; ++p) {
      Eigen::Matrix3d J;
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) J(j, i) = der[j][i][p];
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
      es.computeDirect(J.transpose() * J, Eigen::EigenvaluesOnly);
      consider(p, es.eigenvalues().maxCoeff());
    }
  }

  // sub-grid polish: coordinate descent from the refined-grid argmax so the
  // result is grid-independent for smooth fields
  const int nr = u.modes(0) * refine;
  double x[3] = {0, 0, 0};
  {
    const long p = argmax;
    const int i2 = int(p % (d > 2 ? nr : 1));
    const int i1 = int((p / (d > 2 ? nr : 1)) % (d > 1 ? nr : 1));
    const int i0 = int(p / ((d > 1 ? long(nr) : 1) * (d > 2 ? nr : 1)));
    const int is[3] = {i0, i1, i2};
    for (int ax = 0; ax < d; ++ax) x[ax] = u.period(ax) * is[ax] / nr;
  }
  double step = u.period(0) / nr;
  double best = worst;
  for (int it = 0; it < 60 && step > 1e-12 * u.period(0); ++it) {
    bool improved = false;
    for (int ax = 0; ax < d; ++ax) {
      for (double sgn : {1.0, -1.0}) {
        double y[3] = {x[0], x[1], x[2]};
        y[ax] += sgn * step;
        const double g2 = jac_norm2_at(u, y);
        if (g2 > best) {
          best = g2;
          x[ax] = y[ax];
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return std::sqrt(best);
}

// ---------------------------------------------------------------------------
// Stock fields
// ---------------------------------------------------------------------------

SpectralField sine_field(int N, double L) {
  SpectralField f(1, N, L, 1);
  f.coeff(0)[1] = Cplx(0.0, -0.5);
  f.coeff(0)[N - 1] = Cplx(0.0, 0.5);
  return f;
}

SpectralField taylor_green(int N, double L, double amplitude) {
  SpectralField f(3, N, L, 3);
  std::vector<Eigen::ArrayXd> vals(3, Eigen::ArrayXd::Zero(f.lattice_size()));
  const double w = 2.0 * M_PI / L;
  for (long idx = 0; idx < f.lattice_size(); ++idx) {
    int i0, i1, i2;
    f.unindex(idx, i0, i1, i2);
    const double x = i0 * L / N, y = i1 * L / N, z = i2 * L / N;
    vals[0][idx] = amplitude * std::sin(w * x) * std::cos(w * y) * std::cos(w * z);
    vals[1][idx] = -amplitude * std::cos(w * x) * std::sin(w * y) * std::cos(w * z);
    vals[2][idx] = 0.0;
  }
  f.from_physical(vals);
  f.set_mean_zero();
  return f;
}

SpectralField random_low_mode_field(int dim, int N, double L, int components,
                                    int max_mode, unsigned long seed,
                                    bool solenoidal) {
  SpectralField f(dim, N, L, components);
  std::mt19937_64 rng(seed);
  for (int c = 0; c < components; ++c) {
    for (long idx = 0; idx < f.lattice_size(); ++idx) {
      int i0, i1, i2;
      f.unindex(idx, i0, i1, i2);
      const int is[3] = {i0, i1, i2};
      bool keep = true;
      for (int ax = 0; ax < dim; ++ax)
        if (std::abs(f.mode_of(ax, is[ax])) > max_mode) keep = false;
      const double re = uniform_pm1(rng), im = uniform_pm1(rng);
      if (keep && idx != 0) f.coeff(c)[idx] = Cplx(re, im);
    }
  }
  f.symmetrize_hermitian();
  f.set_mean_zero();
  if (solenoidal) {
    if (components != dim)
      throw ParameterError("solenoidal field needs dim components");
    f = leray_project(f);
  }
  return f;
}

}  // namespace mocert
