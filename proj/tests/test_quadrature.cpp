#include "mocert/quadrature.hpp"

#include <cmath>

#include "doctest.h"

using namespace mocert;

TEST_CASE("polynomial panels are exact") {
  auto q = integrate([](double x) { return x * x; }, 0.0, 1.0);
  CHECK(q.value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(q.converged);
}

TEST_CASE("adaptive refinement handles mild endpoint singularities") {
  // int_0^1 x^(-1/2) dx = 2
  auto q = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0,
                     1e-12, 1e-10, 20000);
  CHECK(q.value == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("kink-aware splitting converges fast") {
  auto f = [](double x) { return std::abs(x - 0.3); };
  auto q = integrate_split(f, 0.0, 1.0, {0.3});
  const double exact = 0.5 * (0.3 * 0.3 + 0.7 * 0.7);
  CHECK(q.value == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("log substitution integrates across decades") {
  // int_a^b 1/eta d eta = log(b/a)
  auto q = integrate_log([](double eta) { return 1.0 / eta; }, 1e-12, 1e12);
  CHECK(q.value == doctest::Approx(std::log(1e24)).epsilon(1e-12));
}

TEST_CASE("power tails match a brute-force reference") {
  const double H = 3.5, s = 1.25;
  // reference: large finite trapezoid in log coordinates
  auto ref = [&](auto f) {
    const int n = 2000000;
    const double smax = std::log(1e18);
    const double ds = (smax - std::log(H)) / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double eta = std::exp(std::log(H) + i * ds);
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      acc += w * f(eta) * std::pow(eta, -1.0 - s) * eta * ds;
    }
    return acc;
  };
  CHECK(power_tail_const(H, s) ==
        doctest::Approx(ref([](double) { return 1.0; })).epsilon(1e-6));
  CHECK(power_tail_log(H, s) ==
        doctest::Approx(ref([](double e) { return std::log(e); })).epsilon(1e-6));
  CHECK(power_tail_linear(H, s) ==
        doctest::Approx(ref([](double e) { return e; })).epsilon(2e-4));
  CHECK(std::isinf(power_tail_quadratic(H, s)));
}
