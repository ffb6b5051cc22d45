#include "mocert/spectral.hpp"

#include <cmath>
#include <cstdio>

#include "doctest.h"

using namespace mocert;

namespace {

SpectralField cosine_field(int N, double L) {
  SpectralField f(1, N, L, 1);
  f.coeff(0)[1] = 0.5;
  f.coeff(0)[N - 1] = 0.5;
  return f;
}

}  // namespace

TEST_CASE("physical round trip and invariants") {
  auto f = sine_field(64, 2.0 * M_PI);
  auto vals = f.to_physical();
  for (int j = 0; j < 64; ++j)
    CHECK(vals[0][j] == doctest::Approx(std::sin(2.0 * M_PI * j / 64.0)).epsilon(1e-12));
  SpectralField g(1, 64, 2.0 * M_PI, 1);
  g.from_physical(vals);
  CHECK((g.coeff(0) - f.coeff(0)).abs().maxCoeff() <= 1e-14);
  CHECK(f.hermitian_defect() <= 1e-14);
  CHECK(f.mean_coefficient_norm() == 0.0);
  CHECK(f.sup_norm(4) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("field io round trip") {
  auto f = random_low_mode_field(2, 16, 2.0 * M_PI, 2, 3, 99, true);
  f.save("/tmp/mocert_field.bin", 1.25);
  double t = 0.0;
  auto g = SpectralField::load("/tmp/mocert_field.bin", &t);
  CHECK(t == 1.25);
  for (int c = 0; c < 2; ++c)
    CHECK((g.coeff(c) - f.coeff(c)).abs().maxCoeff() == 0.0);
  std::remove("/tmp/mocert_field.bin");
}

TEST_CASE("multipliers") {
  SUBCASE("Hilbert transform maps cos to sin") {
    auto f = cosine_field(64, 2.0 * M_PI);
    auto h = apply_multiplier(f, MultiplierSpec::hilbert_1d());
    auto s = sine_field(64, 2.0 * M_PI);
    CHECK((h.coeff(0) - s.coeff(0)).abs().maxCoeff() <= 1e-14);
  }
  SUBCASE("fractional laplacian at alpha = 1 is -Laplace") {
    const int k = 3;
    SpectralField f(1, 64, 2.0 * M_PI, 1);
    f.coeff(0)[k] = std::complex<double>(0, -0.5);
    f.coeff(0)[64 - k] = std::complex<double>(0, 0.5);
    auto lap = apply_multiplier(f, MultiplierSpec::fractional_laplacian(1.0));
    // (-Laplace) sin(kx) = k^2 sin(kx)
    CHECK((lap.coeff(0) - double(k * k) * f.coeff(0)).abs().maxCoeff() <= 1e-12);
  }
  SUBCASE("riesz composition sums to minus identity") {
    auto u = random_low_mode_field(2, 32, 2.0 * M_PI, 1, 6, 7, false);
    SpectralField acc(2, 32, 2.0 * M_PI, 1);
    for (int j = 0; j < 2; ++j) {
      auto rj = apply_multiplier(u, MultiplierSpec::riesz(j));
      auto rjj = apply_multiplier(rj, MultiplierSpec::riesz(j));
      acc.coeff(0) += rjj.coeff(0);
    }
    CHECK((acc.coeff(0) + u.coeff(0)).abs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("custom kernel reproduces the closed-form symbols") {
  SUBCASE("1d odd kernel is the Hilbert transform") {
    SpectralField geom(1, 32, 2.0 * M_PI, 1);
    auto spec = MultiplierSpec::custom_sio(
        geom, [](double y0, double, double) { return y0; });
    auto hil = MultiplierSpec::hilbert_1d();
    for (long idx = 1; idx < geom.lattice_size(); ++idx)
      CHECK(std::abs(spec.symbol[idx] - hil.at(geom, idx)) <= 1e-12);
  }
  SUBCASE("2d Phi_j matches the Riesz symbol") {
    SpectralField geom(2, 16, 2.0 * M_PI, 1);
    auto spec = MultiplierSpec::custom_sio(
        geom, [](double, double y1, double) { return y1; });
    auto rj = MultiplierSpec::riesz(1);
    for (long idx = 1; idx < geom.lattice_size(); ++idx)
      CHECK(std::abs(spec.symbol[idx] - rj.at(geom, idx)) <= 1e-8);
  }
  SUBCASE("3d Phi_j matches the Riesz symbol") {
    SpectralField geom(3, 8, 2.0 * M_PI, 1);
    auto spec = MultiplierSpec::custom_sio(
        geom, [](double y0, double, double) { return y0; });
    auto rj = MultiplierSpec::riesz(0);
    for (long idx = 1; idx < geom.lattice_size(); ++idx)
      CHECK(std::abs(spec.symbol[idx] - rj.at(geom, idx)) <= 1e-7);
  }
  SUBCASE("nonzero average is rejected") {
    SpectralField geom(2, 8, 2.0 * M_PI, 1);
    CHECK_THROWS_AS(
        MultiplierSpec::custom_sio(geom, [](double, double, double) { return 1.0; }),
        ConstructionError);
  }
}

TEST_CASE("leray projection") {
  auto v = random_low_mode_field(3, 16, 2.0 * M_PI, 3, 4, 3, false);
  auto pv = leray_project(v);
  CHECK(pv.divergence_max() <= 1e-12 * std::max(1.0, pv.max_coeff_norm()));
  auto ppv = leray_project(pv);
  for (int c = 0; c < 3; ++c)
    CHECK((ppv.coeff(c) - pv.coeff(c)).abs().maxCoeff() <= 1e-12);

  // gradient fields are annihilated
  SpectralField grad(3, 16, 2.0 * M_PI, 3);
  auto phi = random_low_mode_field(3, 16, 2.0 * M_PI, 1, 4, 5, false);
  for (long idx = 0; idx < grad.lattice_size(); ++idx) {
    int i0, i1, i2;
    grad.unindex(idx, i0, i1, i2);
    const int is[3] = {i0, i1, i2};
    for (int ax = 0; ax < 3; ++ax)
      grad.coeff(ax)[idx] = std::complex<double>(0.0, grad.wavenumber(ax, is[ax])) *
                            phi.coeff(0)[idx];
  }
  auto pg = leray_project(grad);
  CHECK(pg.max_coeff_norm() <= 1e-12 * grad.max_coeff_norm());

  // already-solenoidal fields are fixed points
  auto sol = random_low_mode_field(3, 16, 2.0 * M_PI, 3, 4, 11, true);
  auto ps = leray_project(sol);
  for (int c = 0; c < 3; ++c)
    CHECK((ps.coeff(c) - sol.coeff(c)).abs().maxCoeff() <= 1e-13);
}

TEST_CASE("dealiased advection of a single mode pair is the hand convolution") {
  // b = sin(3x), d/dx u with u = sin(5x):
  //   sin(3x) * 5 cos(5x) = (5/2)(sin 8x - sin 2x)
  const int N = 64;
  SpectralField b(1, N, 2.0 * M_PI, 1), u(1, N, 2.0 * M_PI, 1);
  b.coeff(0)[3] = std::complex<double>(0, -0.5);
  b.coeff(0)[N - 3] = std::complex<double>(0, 0.5);
  u.coeff(0)[5] = std::complex<double>(0, -0.5);
  u.coeff(0)[N - 5] = std::complex<double>(0, 0.5);
  auto adv = advection_term(b, u, true);
  // (5/2) sin(8x) has coefficient -i 5/4 at mode 8; same for the -sin(2x) part
  SpectralField expect(1, N, 2.0 * M_PI, 1);
  expect.coeff(0)[8] = std::complex<double>(0, -5.0 / 4.0);
  expect.coeff(0)[N - 8] = std::complex<double>(0, 5.0 / 4.0);
  expect.coeff(0)[2] = std::complex<double>(0, 5.0 / 4.0);
  expect.coeff(0)[N - 2] = std::complex<double>(0, -5.0 / 4.0);
  CHECK((adv.coeff(0) - expect.coeff(0)).abs().maxCoeff() <= 1e-13);
}

TEST_CASE("burgers stepping") {
  SUBCASE("pure diffusion decays mode-exactly") {
    const int k = 3;
    SpectralField u(1, 64, 2.0 * M_PI, 1);
    u.coeff(0)[k] = std::complex<double>(0, -0.5);
    u.coeff(0)[64 - k] = std::complex<double>(0, 0.5);
    SolverConfig cfg;
    cfg.nu = 1.0;
    cfg.dt = 1e-2;
    // amplitude so small the quadratic term sits at rounding level: the
    // step is then the pure integrating factor
    SpectralField v = u;
    v.coeff(0) *= 1e-150;
    for (int s = 0; s < 100; ++s) step_burgers(v, s * cfg.dt, cfg);
    const double expect = 1e-150 * 0.5 * std::exp(-k * k * 1.0);
    CHECK(std::abs(v.coeff(0)[k]) == doctest::Approx(expect).epsilon(1e-10));
  }
  SUBCASE("zero data stays zero") {
    SpectralField u(1, 32, 2.0 * M_PI, 1);
    SolverConfig cfg;
    for (int s = 0; s < 10; ++s) step_burgers(u, 0.0, cfg);
    CHECK(u.max_coeff_norm() == 0.0);
  }
  SUBCASE("maximum principle for sin data") {
    SpectralField u = sine_field(256, 2.0 * M_PI);
    SolverConfig cfg;
    cfg.dt = 1e-3;
    const double m0 = u.sup_norm(4);
    double t = 0.0;
    for (int s = 0; s < 2000; ++s) {
      auto st = step_burgers(u, t, cfg);
      REQUIRE(st.ok);
      t += cfg.dt;
      if (s % 200 == 0) CHECK(u.sup_norm(4) <= m0 + 1e-8);
    }
    CHECK(u.sup_norm(4) <= m0 + 1e-8);
    CHECK(u.hermitian_defect() <= 1e-12);
    CHECK(u.mean_coefficient_norm() == 0.0);
  }
  SUBCASE("linear part never grows with nonlinearity off") {
    SpectralField u = sine_field(64, 2.0 * M_PI);
    SolverConfig cfg;
    cfg.dt = 0.05;
    cfg.zero_order = MultiplierSpec::hilbert_1d();
    SpectralField v = u;
    v.coeff(0) *= 1e-150;
    double prev = v.max_coeff_norm();
    for (int s = 0; s < 40; ++s) {
      step_burgers(v, 0.0, cfg);
      CHECK(v.max_coeff_norm() <= prev * (1.0 + 1e-12));
      prev = v.max_coeff_norm();
    }
  }
}

TEST_CASE("drift diffusion stepping") {
  SUBCASE("fractional heat decay per mode") {
    const double alpha = 0.6;
    const int k = 2;
    SpectralField u(1, 64, 2.0 * M_PI, 1);
    u.coeff(0)[k] = 0.5;
    u.coeff(0)[64 - k] = 0.5;
    SolverConfig cfg;
    cfg.alpha = alpha;
    cfg.dt = 1e-2;
    auto zero_b = [&](double) { return SpectralField(1, 64, 2.0 * M_PI, 1); };
    for (int s = 0; s < 100; ++s) step_drift_diffusion(u, s * cfg.dt, cfg, zero_b);
    const double expect = 0.5 * std::exp(-std::pow(double(k * k), alpha) * 1.0);
    CHECK(std::abs(u.coeff(0)[k]) == doctest::Approx(expect).epsilon(1e-10));
  }
  SUBCASE("constant drift is an exact translation") {
    // b = const: u(t) = translated fractional-heat solution
    const int N = 64;
    SpectralField u = sine_field(N, 2.0 * M_PI);
    SolverConfig cfg;
    cfg.alpha = 0.75;
    cfg.dt = 2e-4;
    cfg.T = 0.1;
    const double bval = 0.7;
    auto bfield = [&](double) {
      SpectralField b(1, N, 2.0 * M_PI, 1);
      std::vector<Eigen::ArrayXd> v = {Eigen::ArrayXd::Constant(N, bval)};
      b.from_physical(v);
      return b;
    };
    double t = 0.0;
    while (t < cfg.T - 1e-12) {
      auto st = step_drift_diffusion(u, t, cfg, bfield);
      REQUIRE(st.ok);
      t += cfg.dt;
    }
    // oracle: u_hat(t, k) = exp(-|k|^(2a) t) exp(+i k b t) u0_hat(k)
    // (the drift term is +(b.grad)u, so modes translate with phase +k b t)
    const std::complex<double> u0k(0, -0.5);
    const std::complex<double> expect =
        u0k * std::exp(std::complex<double>(-std::pow(1.0, 1.5) * cfg.T,
                                            1.0 * bval * cfg.T));
    CHECK(std::abs(u.coeff(0)[1] - expect) <= 1e-8);
  }
  SUBCASE("sqg mode conserves L2 up to dissipation") {
    SpectralField th = random_low_mode_field(2, 32, 2.0 * M_PI, 1, 4, 21, false);
    SolverConfig cfg;
    cfg.alpha = 0.5;
    cfg.dt = 2e-3;
    cfg.sqg_mode = true;
    double prev = th.l2_norm();
    auto dummy = [&](double) { return SpectralField(2, 32, 2.0 * M_PI, 2); };
    for (int s = 0; s < 50; ++s) {
      auto st = step_drift_diffusion(th, s * cfg.dt, cfg, dummy);
      REQUIRE(st.ok);
      const double now = th.l2_norm();
      CHECK(now <= prev * (1.0 + 1e-8));
      prev = now;
    }
  }
}

TEST_CASE("linear nse stepping") {
  const int N = 16;
  SpectralField u = random_low_mode_field(3, N, 2.0 * M_PI, 3, 2, 31, true);
  auto b = [&](double t) {
    return taylor_green(N, 2.0 * M_PI, 1.0 + 0.5 * t);
  };
  SolverConfig cfg;
  cfg.alpha = 1.0;
  cfg.dt = 2e-3;
  double t = 0.0;
  double prev_l2 = u.l2_norm();
  for (int s = 0; s < 200; ++s) {
    auto st = step_linear_nse(u, t, cfg, b);
    REQUIRE(st.ok);
    t += cfg.dt;
    CHECK(u.divergence_max() <= 1e-10);
    const double now = u.l2_norm();
    CHECK(now <= prev_l2 * (1.0 + 1e-8));  // skew transport + dissipation
    prev_l2 = now;
  }
  CHECK(u.hermitian_defect() <= 1e-11);

  SUBCASE("non-solenoidal drift is rejected") {
    auto bad = [&](double) {
      return random_low_mode_field(3, N, 2.0 * M_PI, 3, 2, 41, false);
    };
    SpectralField v = random_low_mode_field(3, N, 2.0 * M_PI, 3, 2, 51, true);
    CHECK_THROWS_AS(step_linear_nse(v, 0.0, cfg, bad), InputError);
  }
}

TEST_CASE("gradient_max") {
  SUBCASE("1d sine") {
    auto u = sine_field(64, 2.0 * M_PI);
    CHECK(gradient_max(u) == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("2d shear") {
    SpectralField u(2, 32, 2.0 * M_PI, 2);
    // u = (sin y, 0)
    u.coeff(0)[u.index(0, 1)] = std::complex<double>(0, -0.5);
    u.coeff(0)[u.index(0, 31)] = std::complex<double>(0, 0.5);
    CHECK(gradient_max(u) == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("refinement consistency") {
    auto u = random_low_mode_field(2, 32, 2.0 * M_PI, 2, 3, 61, true);
    const double g4 = gradient_max(u, 4);
    const double g8 = gradient_max(u, 8);
    CHECK(g4 == doctest::Approx(g8).epsilon(1e-6));
  }
}

TEST_CASE("pressure gradient of solenoidal fields is curl-free and matched") {
  const int N = 16;
  auto u = random_low_mode_field(3, N, 2.0 * M_PI, 3, 2, 71, true);
  auto b = random_low_mode_field(3, N, 2.0 * M_PI, 3, 2, 72, true);
  auto gp = pressure_gradient(u, b);
  // gradient fields live in the Leray complement
  auto proj = leray_project(gp);
  CHECK(proj.max_coeff_norm() <= 1e-12 * std::max(gp.max_coeff_norm(), 1e-30));
}
