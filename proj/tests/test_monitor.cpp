#include "mocert/monitor.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"

using namespace mocert;

namespace {

TimeDependentModulus rescaled_burgers_modulus(double lam, double mu) {
  TimeDependentModulus tdm;
  tdm.omega = viscous_burgers_modulus(0.25);
  tdm.law = ScalingLaw::constant(lam, mu);
  tdm.form = ModulusForm::LambdaOmegaMu;
  return tdm;
}

// independent all-pairs oracle on a 1d periodic grid
void brute_force_scan(const SpectralField& u, const TimeDependentModulus& Om,
                      double t, double& worst, double& worst_sep) {
  const auto vals = u.to_physical();
  const int n = u.modes(0);
  const double h = u.period(0) / n;
  worst = -std::numeric_limits<double>::infinity();
  worst_sep = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int diff = std::abs(i - j);
      const double sep = std::min(diff, n - diff) * h;
      const double inc = std::abs(vals[0][i] - vals[0][j]);
      const double d = inc - Om.value(t, sep);
      if (d > worst) {
        worst = d;
        worst_sep = sep;
      }
    }
}

}  // namespace

TEST_CASE("breakthrough scan agrees with the all-pairs brute force") {
  for (int N : {64, 256, 512}) {
    auto u = sine_field(N, 2.0 * M_PI);
    auto Om = rescaled_burgers_modulus(2.0, 2.0);
    auto sc = breakthrough_scan(u, Om, 0.0);
    double worst = 0.0, sep = 0.0;
    brute_force_scan(u, Om, 0.0, worst, sep);
    CHECK(sc.worst_deficit == doctest::Approx(worst).epsilon(1e-12));
    CHECK(sc.shift_len == doctest::Approx(sep).epsilon(1e-12));
  }
}

TEST_CASE("rescaled modulus dominates sin; a tenth of it does not") {
  const int N = 256;
  auto u = sine_field(N, 2.0 * M_PI);
  auto w = viscous_burgers_modulus(0.25);
  const double lam = rescale_for_data(w, 1.0, 1.0);

  SUBCASE("no violation at t = 0") {
    auto Om = rescaled_burgers_modulus(lam, lam);
    auto sc = breakthrough_scan(u, Om, 0.0);
    CHECK_FALSE(sc.violation);
    CHECK(sc.worst_deficit < 0.0);
  }
  SUBCASE("scaled down by 10: violation near separation pi") {
    auto Om = rescaled_burgers_modulus(lam / 10.0, lam);
    auto sc = breakthrough_scan(u, Om, 0.0);
    CHECK(sc.violation);
    CHECK(sc.worst_deficit > 0.0);
    CHECK(std::abs(sc.shift_len - M_PI) < 0.5);
  }
  SUBCASE("constant field never violates") {
    SpectralField z(1, 64, 2.0 * M_PI, 1);
    auto Om = rescaled_burgers_modulus(1.0, 1.0);
    auto sc = breakthrough_scan(z, Om, 0.0);
    CHECK_FALSE(sc.violation);
  }
}

TEST_CASE("no violation implies the gradient bound surrogate") {
  const int N = 128;
  auto u = sine_field(N, 2.0 * M_PI);
  auto w = viscous_burgers_modulus(0.25);
  const double lam = rescale_for_data(w, 1.0, 1.0);
  auto Om = rescaled_burgers_modulus(lam, lam);
  auto sc = breakthrough_scan(u, Om, 0.0);
  REQUIRE_FALSE(sc.violation);
  const double g = gradient_max(u);
  CHECK(g < Om.dxi0(0.0) + sc.slack);
}

TEST_CASE("armed bounds") {
  SUBCASE("burgers constant") {
    BoundSpec s;
    s.kind = BoundKind::Burgers;
    s.lambda0 = 3.0;
    auto b = arm_bound(s);
    CHECK(b.value(0.0) == 9.0);
    CHECK(b.value(4.0) == 9.0);
  }
  SUBCASE("thm2 at t = 0 equals 2 lambda0^2") {
    BoundSpec s;
    s.kind = BoundKind::Thm2;
    s.lambda0 = 5.0;
    s.C0 = 2.0;
    auto b = arm_bound(s);
    CHECK(b.value(0.0) == doctest::Approx(2.0 * 25.0).epsilon(1e-14));
  }
  SUBCASE("thm3 scales like g^(2/3) for (alpha, beta) = (1, 1/2)") {
    BoundSpec s;
    s.kind = BoundKind::Thm3;
    s.alpha = 1.0;
    s.beta = 0.5;
    s.c0alpha = 2.5;
    s.g = DriftEnvelope::affine(1.0, 1.0, 0.5);
    auto b = arm_bound(s);
    CHECK(b.value(3.0) / b.value(0.0) ==
          doctest::Approx(std::pow(4.0, 2.0 / 3.0)).epsilon(1e-12));
  }
  SUBCASE("nondecreasing in t for nondecreasing g") {
    BoundSpec s;
    s.kind = BoundKind::Thm4Crit;
    s.alpha = 1.0;
    s.beta = 0.5;
    s.B = 2.0;
    s.C = 1.5;
    s.g = DriftEnvelope::affine(1.0, 2.0, 0.5);
    auto b = arm_bound(s);
    double prev = 0.0;
    for (double t = 0.0; t <= 1.0; t += 0.1) {
      CHECK(b.value(t) >= prev);
      prev = b.value(t);
    }
  }
}

TEST_CASE("burgers experiment stays under the rescaled bound") {
  auto w = viscous_burgers_modulus(0.25);
  const double lam = rescale_for_data(w, 1.0, 1.0);

  ExperimentConfig cfg;
  cfg.eq = Equation::Burgers;
  cfg.N = 128;
  cfg.solver.nu = 1.0;
  cfg.solver.dt = 1e-3;
  cfg.solver.T = 0.5;
  cfg.record_dt = 0.1;
  BoundSpec bs;
  bs.kind = BoundKind::Burgers;
  bs.lambda0 = lam;
  cfg.bounds.push_back(arm_bound(bs));
  cfg.modulus = rescaled_burgers_modulus(lam, lam);

  auto trace = run_experiment(cfg);
  REQUIRE_FALSE(trace.blowup);
  CHECK_FALSE(trace.bound_exceeded);
  CHECK_FALSE(trace.breakthrough.has_value());
  for (size_t i = 0; i < trace.times.size(); ++i)
    CHECK(trace.lipschitz[i] <= lam * lam);
  // viscous decay from sin data: the Lipschitz trace is nonincreasing
  for (size_t i = 0; i + 1 < trace.times.size(); ++i)
    CHECK(trace.lipschitz[i + 1] <= trace.lipschitz[i] + 1e-9);
}

TEST_CASE("pure fractional heat: lipschitz nonincreasing") {
  ExperimentConfig cfg;
  cfg.eq = Equation::DriftDiffusion;
  cfg.N = 64;
  cfg.solver.alpha = 0.6;
  cfg.solver.dt = 2e-3;
  cfg.solver.T = 0.3;
  cfg.record_dt = 0.05;
  cfg.scan_every = 0;
  cfg.drift = [&](double) { return SpectralField(1, 64, 2.0 * M_PI, 1); };
  auto trace = run_experiment(cfg);
  for (size_t i = 0; i + 1 < trace.times.size(); ++i)
    CHECK(trace.lipschitz[i + 1] <= trace.lipschitz[i] * (1.0 + 1e-10));
}

TEST_CASE("fractal burgers without viscosity blows up and is flagged") {
  ExperimentConfig cfg;
  cfg.eq = Equation::FractalBurgers;
  cfg.N = 128;
  cfg.solver.nu = 0.0;
  cfg.solver.alpha = 0.2;
  cfg.solver.dt = 2e-3;
  cfg.solver.T = 3.0;
  cfg.record_dt = 0.25;
  cfg.scan_every = 0;
  auto trace = run_experiment(cfg);
  // inviscid steepening: either a detected blowup or an exploding gradient
  const double last = trace.lipschitz.back();
  CHECK((trace.blowup || last > 50.0));
}

TEST_CASE("trace csv shapes and determinism") {
  ExperimentConfig cfg;
  cfg.eq = Equation::Burgers;
  cfg.N = 64;
  cfg.solver.dt = 2e-3;
  cfg.solver.T = 0.1;
  cfg.record_dt = 0.02;
  cfg.scan_every = 0;
  auto t1 = run_experiment(cfg);
  auto t2 = run_experiment(cfg);
  t1.write_csv("/tmp/mocert_t1.csv");
  t2.write_csv("/tmp/mocert_t2.csv");
  std::ifstream a("/tmp/mocert_t1.csv"), b("/tmp/mocert_t2.csv");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind("t,lipschitz,sup_norm", 0) == 0);
  std::remove("/tmp/mocert_t1.csv");
  std::remove("/tmp/mocert_t2.csv");
}

TEST_CASE("empirical envelope dominates the field increments") {
  auto u = random_low_mode_field(2, 32, 2.0 * M_PI, 1, 3, 5, false);
  auto env = empirical_modulus_envelope(u, 4000, 9);
  const auto vals = u.to_physical();
  const double h = 2.0 * M_PI / 32;
  // envelope evaluated at bin positions dominates axis increments there
  for (int s = 1; s < 16; ++s) {
    double worst = 0.0;
    for (int i = 0; i < 32; ++i)
      for (int j = 0; j < 32; ++j) {
        const int idx = i * 32 + j;
        const int idx2 = ((i + s) % 32) * 32 + j;
        worst = std::max(worst, std::abs(vals[0][idx2] - vals[0][idx]));
      }
    CHECK(env.value(s * h) >= worst * (1.0 - 1e-9));
  }
}

TEST_CASE("pressure lemma desk check") {
  const int N = 16;
  auto u = random_low_mode_field(3, N, 2.0 * M_PI, 3, 2, 100, true);
  auto b = random_low_mode_field(3, N, 2.0 * M_PI, 3, 2, 200, true);

  SUBCASE("degenerate inputs are skipped") {
    SpectralField z(3, N, 2.0 * M_PI, 3);
    CHECK(pressure_lemma_check(z, b, 100).skipped);
  }
  SUBCASE("finite constant, invariant under joint amplitude scaling") {
    auto r1 = pressure_lemma_check(u, b, 3000);
    REQUIRE_FALSE(r1.skipped);
    CHECK(r1.c_hat > 0.0);
    CHECK(std::isfinite(r1.c_hat));

    SpectralField u2 = u, b2 = b;
    for (int c = 0; c < 3; ++c) {
      u2.coeff(c) *= 2.0;
      b2.coeff(c) *= 2.0;
    }
    auto r2 = pressure_lemma_check(u2, b2, 3000);
    CHECK(r2.c_hat == doctest::Approx(r1.c_hat).epsilon(1e-6));
  }
}
