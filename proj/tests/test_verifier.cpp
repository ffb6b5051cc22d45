#include "mocert/verifier.hpp"

#include <cmath>

#include "doctest.h"

using namespace mocert;

TEST_CASE("feasible_delta formulas and errors") {
  auto [r1, d1] = feasible_delta(1.0, 0.5, 1.0, InequalityKind::Thm3);
  CHECK(r1 == doctest::Approx(0.25));
  CHECK(d1 > 0.0);
  CHECK(d1 <= 1.0 / 3.0);
  // smallness condition delta^(beta+r+2alpha-2) <= (2-r)(1-r) C_bound at
  // the Laplacian convention C = 4
  CHECK(std::pow(d1, 0.75) <= 0.5 * (2.0 - r1) * (1.0 - r1) * 4.0);

  auto [r2, d2] = feasible_delta(0.5, 0.9, 1.0, InequalityKind::Thm3);
  CHECK(r2 == doctest::Approx(0.55));
  CHECK(d2 > 0.0);

  CHECK_THROWS_WITH_AS(feasible_delta(0.25, 0.4, 1.0, InequalityKind::Thm3),
                       "beta+2alpha-1 must be positive", ParameterError);
}

TEST_CASE("thm3 certification across the acceptance pairs") {
  const std::pair<double, double> pairs[] = {
      {1.0, 0.5}, {1.0, 0.25}, {0.75, 0.25}, {0.6, 0.5}, {0.5, 0.9}};
  auto g = DriftEnvelope::constant(1.0, 0.5);
  for (auto [alpha, beta] : pairs) {
    auto gb = DriftEnvelope::constant(1.0, beta);
    auto tdm = build_thm3_modulus(alpha, beta, 1.0, gb);
    VerifierParams p;
    GridSpec grid;  // sigma in [1e-6, 1e3]
    auto rep = check_inequality(InequalityKind::Thm3, tdm, &gb, p, grid);
    INFO("alpha=", alpha, " beta=", beta, " min_margin=", rep.min_margin,
         " failed=", rep.failed_points);
    CHECK(rep.certified);
    CHECK(rep.min_margin > rep.budget_at_argmin);
  }
}

TEST_CASE("thm3 margins: conservative mode below exact mode") {
  auto g = DriftEnvelope::constant(1.0, 0.25);
  auto tdm = build_thm3_modulus(0.75, 0.25, 1.0, g);
  VerifierParams pe, pc;
  pc.conservative = true;
  GridSpec grid;
  grid.sigma_count = 61;
  auto re = check_inequality(InequalityKind::Thm3, tdm, &g, pe, grid);
  auto rc = check_inequality(InequalityKind::Thm3, tdm, &g, pc, grid);
  CHECK(rc.certified);
  CHECK(re.certified);
  CHECK(rc.min_margin <= re.min_margin + 1e-12);
}

TEST_CASE("thm3 certificate independent of B and g scale") {
  VerifierParams p;
  GridSpec grid;
  grid.sigma_count = 81;
  auto g1 = DriftEnvelope::constant(1.0, 0.5);
  auto g10 = DriftEnvelope::constant(10.0, 0.5);
  auto a = check_inequality(InequalityKind::Thm3,
                            build_thm3_modulus(0.75, 0.5, 1.0, g1), &g1, p, grid);
  auto b = check_inequality(InequalityKind::Thm3,
                            build_thm3_modulus(0.75, 0.5, 10.0, g10), &g10, p, grid);
  CHECK(a.certified);
  CHECK(b.certified);
  // the reduced inequality does not see B or g
  CHECK(a.min_margin == doctest::Approx(b.min_margin).epsilon(1e-12));
  CHECK(a.constants.at("delta") == b.constants.at("delta"));
}

TEST_CASE("grid refinement stability of the thm3 margin") {
  auto g = DriftEnvelope::constant(1.0, 0.5);
  auto tdm = build_thm3_modulus(0.6, 0.5, 1.0, g);
  VerifierParams p;
  GridSpec coarse, fine;
  coarse.sigma_count = 91;
  fine.sigma_count = 181;
  auto rc = check_inequality(InequalityKind::Thm3, tdm, &g, p, coarse);
  auto rf = check_inequality(InequalityKind::Thm3, tdm, &g, p, fine);
  CHECK(std::abs(rf.min_margin - rc.min_margin) <=
        rc.slack_at_argmin + rc.budget_at_argmin + rf.budget_at_argmin + 1e-12);
}

TEST_CASE("thm2: stationary surplus identity on the tanh piece") {
  // with the lambda' terms zeroed and sigma > delta, the margin reduces to
  // -4 lambda^3 w'' - lambda^3 w w' = lambda^3 * 7 tanh sech^2 >= 0
  auto w = viscous_burgers_modulus(0.25);
  for (double s : {0.3, 0.7, 1.5, 4.0}) {
    const double u = s - 0.25 + w.pieces()[1].shift;
    const double sur = -4.0 * w.eval(s, 2) - w(s) * w.eval(s, 1);
    const double c = std::cosh(u);
    const double expect = 7.0 * std::tanh(u) / (c * c);
    CHECK(sur == doctest::Approx(expect).epsilon(1e-12));
    CHECK(sur >= 0.0);
  }
}

TEST_CASE("thm2 certification with a certified C0") {
  CertifyRequest req;
  req.kind = InequalityKind::Thm2;
  req.lambda0 = 106.0;  // typical rescale output for unit-size data
  req.params.L = 2.0 * M_PI;
  req.params.dim = 1;
  req.grid.sigma_min = 1e-6;
  req.grid.sigma_count = 121;
  req.grid.t_min = 0.0;
  req.grid.t_max = 5.0;
  req.grid.t_count = 11;
  auto res = certify_constant(req);
  REQUIRE(res.found);
  CHECK(res.constant <= 1e4);
  CHECK(res.report.certified);

  // the certified modulus also passes a denser grid
  auto tdm = build_thm2_modulus(res.report.constants.at("delta"), std::nan(""),
                                req.lambda0, res.constant * 1.02);
  GridSpec dense = req.grid;
  dense.sigma_count = 241;
  dense.t_count = 21;
  auto rep = check_inequality(InequalityKind::Thm2, tdm, nullptr, req.params, dense);
  CHECK(rep.certified);
}

TEST_CASE("certify_constant fails when the bracket top cannot absorb the term") {
  CertifyRequest req;
  req.kind = InequalityKind::Thm2;
  req.lambda0 = 106.0;
  req.grid.t_max = 1.0;
  req.grid.t_count = 3;
  req.grid.sigma_count = 61;
  req.hi = 0.0;  // C0 = 0: no growth available
  auto res = certify_constant(req);
  CHECK_FALSE(res.found);
}

TEST_CASE("thm4 critical certification and the delta^(beta-1) constant shape") {
  auto g = DriftEnvelope::constant(1.0, 0.5);
  CertifyRequest req;
  req.kind = InequalityKind::Thm4Crit;
  req.alpha = 1.0;
  req.beta = 0.5;
  req.B = 2.0;
  req.drift = g;
  req.grid.sigma_count = 91;
  req.grid.t_min = 0.0;
  req.grid.t_max = 1.0;
  req.grid.t_count = 5;

  auto [r, delta] = feasible_delta(1.0, 0.5, 1.0, InequalityKind::Thm4Crit);
  req.delta = delta;
  auto res1 = certify_constant(req);
  REQUIRE(res1.found);
  CHECK(res1.report.certified);

  req.delta = delta / 2.0;
  auto res2 = certify_constant(req);
  REQUIRE(res2.found);
  // C scales like delta^(beta-1): halving delta multiplies it by 2^(1-beta)
  const double ratio = res2.constant / res1.constant;
  CHECK(ratio == doctest::Approx(std::pow(2.0, 1.0 - 0.5)).epsilon(0.2));
}

TEST_CASE("hyp1 margins for the stationary tanh profile with c_d = 0") {
  TimeDependentModulus tdm;
  tdm.omega = tanh_modulus();
  tdm.law = ScalingLaw::constant(1.0, 1.0);
  tdm.form = ModulusForm::LambdaOmegaMu;
  VerifierParams p;
  p.c_d = 0.0;
  GridSpec grid;
  grid.sigma_min = 1e-4;
  grid.sigma_max = 50.0;
  grid.sigma_count = 101;
  auto rep = check_inequality(InequalityKind::Hyp1, tdm, nullptr, p, grid);
  CHECK(rep.min_margin >= 0.0);
  CHECK(rep.certified);
}

TEST_CASE("hypothesis march") {
  SUBCASE("stationary burgers profile stays put with c_d = 0") {
    auto w0 = burgers_stationary_profile(2.0);  // 4 tanh(xi/2)
    MarchGrid g;
    g.xi_min = 1e-3;
    g.xi_max = 60.0;
    g.nodes = 6000;
    g.dt = 5e-4;
    g.T = 1.0;
    auto res = hypothesis_march(w0, 1.0, 1.0, 0.0, g);
    REQUIRE(res.completed);
    double drift = 0.0;
    for (int j = 0; j < res.xi.size(); ++j)
      drift = std::max(drift, std::abs(res.profile[j] - 4.0 * std::tanh(res.xi[j] / 2.0)));
    CHECK(drift <= 1e-6);
    // slope trace stays near 2
    for (double sl : res.slope_at_zero) CHECK(std::abs(sl - 2.0) < 1e-3);
  }
  SUBCASE("viscous-burgers modulus: slope trace settles monotonically") {
    auto w0 = viscous_burgers_modulus(0.25);
    MarchGrid g;
    g.nodes = 1500;
    g.dt = 5e-4;
    g.T = 0.5;
    auto res = hypothesis_march(w0, 1.0, 1.0, 0.0, g);
    REQUIRE(res.completed);
    // after the initial transient the origin slope is nonincreasing
    for (size_t i = res.slope_at_zero.size() / 4; i + 1 < res.slope_at_zero.size(); ++i)
      CHECK(res.slope_at_zero[i + 1] <= res.slope_at_zero[i] + 1e-9);
  }
  SUBCASE("nonlocal term on: run completes or reports a violation time") {
    auto w0 = burgers_stationary_profile(2.0);
    MarchGrid g;
    g.nodes = 800;
    g.dt = 5e-4;
    g.T = 0.25;
    auto res = hypothesis_march(w0, 1.0, 1.0, 1.0, g);
    if (!res.completed) {
      CHECK(!res.stop_reason.empty());
      CHECK(res.stop_time >= 0.0);
    } else {
      CHECK(res.stop_time == doctest::Approx(0.25));
    }
    // boundary value pinned at zero throughout: slope finite, profile >= 0
    CHECK(res.profile.minCoeff() >= -1e-9);
  }
}

TEST_CASE("verification report serializes to JSON") {
  auto g = DriftEnvelope::constant(1.0, 0.5);
  auto tdm = build_thm3_modulus(1.0, 0.5, 1.0, g);
  VerifierParams p;
  GridSpec grid;
  grid.sigma_count = 41;
  auto rep = check_inequality(InequalityKind::Thm3, tdm, &g, p, grid);
  const std::string js = rep.to_json();
  CHECK(js.find("\"kind\": \"THM3\"") != std::string::npos);
  CHECK(js.find("min_margin") != std::string::npos);
  CHECK(js.find("certified") != std::string::npos);
}
