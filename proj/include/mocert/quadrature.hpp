#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace mocert {

/// Result of an adaptive quadrature: value, an absolute error estimate and
/// a convergence flag. The estimate is the usual Gauss--Kronrod difference
/// heuristic summed over accepted panels.
struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  bool converged = true;

  QuadResult& operator+=(const QuadResult& o) {
    value += o.value;
    abs_error += o.abs_error;
    converged = converged && o.converged;
    return *this;
  }
};

namespace detail {

// G7-K15 nodes and weights on [-1, 1]. Rows: |node|, Gauss weight
// (zero on Kronrod-only nodes), Kronrod weight.
inline constexpr double kGk15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0,               0.204432940075298},
    {0.586087235467691, 0.0,               0.169004726639267},
    {0.864864423359769, 0.0,               0.104790010322250},
    {0.991455371120813, 0.0,               0.022935322010529},
};

template <class F>
double gk15_panel(const F& f, double a, double b, double& err) {
  const double mid = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  const double f0 = f(mid);
  double g7 = kGk15[0][1] * f0;
  double k15 = kGk15[0][2] * f0;
  for (int i = 1; i < 8; ++i) {
    const double dx = hw * kGk15[i][0];
    const double fi = f(mid + dx) + f(mid - dx);
    g7 += kGk15[i][1] * fi;
    k15 += kGk15[i][2] * fi;
  }
  g7 *= hw;
  k15 *= hw;
  const double diff = std::abs(g7 - k15);
  err = 200.0 * diff * std::sqrt(std::max(diff, 0.0));
  if (!std::isfinite(err)) err = std::abs(k15);
  return k15;
}

}  // namespace detail

/// Adaptive G7-K15 integration of f on the finite interval [a, b].
/// Panels are bisected worst-first until every panel satisfies the mixed
/// tolerance abs_tol + rel_tol * |integral|.
template <class F>
QuadResult integrate(const F& f, double a, double b, double abs_tol = 1e-12,
                     double rel_tol = 1e-10, int max_panels = 4000) {
  QuadResult out;
  if (!(b > a)) return out;

  struct Panel {
    double a, b, value, err;
  };
  std::vector<Panel> heap;
  auto push = [&](double lo, double hi) {
    Panel p{lo, hi, 0.0, 0.0};
    p.value = detail::gk15_panel(f, lo, hi, p.err);
    heap.push_back(p);
    std::push_heap(heap.begin(), heap.end(),
                   [](const Panel& x, const Panel& y) { return x.err < y.err; });
  };
  push(a, b);

  double total = heap.front().value;
  double total_err = heap.front().err;
  int panels = 1;
  while (total_err > abs_tol + rel_tol * std::abs(total)) {
    if (panels >= max_panels) {
      out.converged = false;
      break;
    }
    std::pop_heap(heap.begin(), heap.end(),
                  [](const Panel& x, const Panel& y) { return x.err < y.err; });
    Panel worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // interval at rounding resolution; accept as-is
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end(),
                     [](const Panel& x, const Panel& y) { return x.err < y.err; });
      break;
    }
    push(worst.a, mid);
    push(mid, worst.b);
    ++panels;
    total = 0.0;
    total_err = 0.0;
    for (const Panel& p : heap) {
      total += p.value;
      total_err += p.err;
    }
  }
  out.value = total;
  out.abs_error = total_err;
  return out;
}

/// Same as integrate() but splits first at the supplied interior points
/// (integrand kinks); points outside (a, b) are ignored.
template <class F>
QuadResult integrate_split(const F& f, double a, double b,
                           const std::vector<double>& interior,
                           double abs_tol = 1e-12, double rel_tol = 1e-10,
                           int max_panels = 4000) {
  std::vector<double> cuts;
  cuts.push_back(a);
  for (double c : interior)
    if (c > a && c < b) cuts.push_back(c);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  QuadResult out;
  for (size_t i = 0; i + 1 < cuts.size(); ++i)
    out += integrate(f, cuts[i], cuts[i + 1], abs_tol / double(cuts.size()),
                     rel_tol, max_panels);
  return out;
}

/// Integrates f over [a, b] with 0 < a < b after the substitution
/// eta = exp(s), i.e. computes int f(eta)/eta * eta d(log eta). Suited for
/// integrands smooth in log eta over many decades.
template <class F>
QuadResult integrate_log(const F& f, double a, double b, double abs_tol = 1e-12,
                         double rel_tol = 1e-10, int max_panels = 4000) {
  auto g = [&](double s) {
    const double eta = std::exp(s);
    return f(eta) * eta;
  };
  return integrate(g, std::log(a), std::log(b), abs_tol, rel_tol, max_panels);
}

/// Closed forms of int_H^inf eta^(-1-s) * {1, log(eta), eta, eta^2} d(eta).
/// Returns +inf when the integral diverges. Used by the analytic tail
/// remainder bounds.
inline double power_tail_const(double H, double s) {
  if (s <= 0.0) return std::numeric_limits<double>::infinity();
  return std::pow(H, -s) / s;
}
inline double power_tail_log(double H, double s) {
  if (s <= 0.0 || H <= 0.0) return std::numeric_limits<double>::infinity();
  return std::pow(H, -s) * (std::log(H) / s + 1.0 / (s * s));
}
inline double power_tail_linear(double H, double s) {
  if (s <= 1.0) return std::numeric_limits<double>::infinity();
  return std::pow(H, 1.0 - s) / (s - 1.0);
}
inline double power_tail_quadratic(double H, double s) {
  if (s <= 2.0) return std::numeric_limits<double>::infinity();
  return std::pow(H, 2.0 - s) / (s - 2.0);
}
inline double power_tail_power(double H, double s, double p) {
  if (s <= p) return std::numeric_limits<double>::infinity();
  return std::pow(H, p - s) / (s - p);
}

}  // namespace mocert
