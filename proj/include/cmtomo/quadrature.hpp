#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cmtomo {

/// Gauss-Legendre nodes and weights on [-1, 1], computed once by Newton
/// iteration on the Legendre recurrence.
struct GaussLegendre {
  std::vector<double> node;
  std::vector<double> weight;

  explicit GaussLegendre(int n) : node(n), weight(n) {
    if (n < 1) throw std::invalid_argument("GaussLegendre: order must be >= 1");
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(pi * (i + 0.75) / (n + 0.5));
      double dp = 0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      node[i] = -x;
      node[n - 1 - i] = x;
      weight[i] = weight[n - 1 - i] = 2.0 / ((1 - x * x) * dp * dp);
    }
  }
};

/// Fixed-order Gauss-Legendre on [a, b].
template <class F>
double gauss_legendre(F&& f, double a, double b, const GaussLegendre& gl) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0;
  for (std::size_t i = 0; i < gl.node.size(); ++i)
    s += gl.weight[i] * f(mid + half * gl.node[i]);
  return s * half;
}

/// Composite Gauss-Legendre over uniform panels of [a, b].
template <class F>
double composite_gauss(F&& f, double a, double b, int panels,
                       const GaussLegendre& gl) {
  if (panels < 1) panels = 1;
  const double w = (b - a) / panels;
  double s = 0;
  for (int p = 0; p < panels; ++p)
    s += gauss_legendre(f, a + p * w, a + (p + 1) * w, gl);
  return s;
}

/// Tanh-sinh (double exponential) quadrature on (a, b) for integrands given
/// as f(x, dist_a, dist_b), where the distances to the interval endpoints are
/// computed without cancellation. Singular factors such as 1/sqrt(x - a) must
/// be evaluated through dist_a, otherwise the endpoint tail saturates around
/// sqrt(machine-eps) accuracy.
template <class F>
double tanh_sinh_endpoint(F&& f, double a, double b, double rel_tol = 1e-13,
                          int max_level = 12) {
  const double pi_half = 1.57079632679489661923;
  const double half = 0.5 * (b - a);
  if (half == 0) return 0;

  // node at |u|: with q = exp(-pi sinh u) the near-endpoint distance is
  // half * 2q/(1+q), the far one half * 2/(1+q), and the transformed weight
  // pi cosh(u) * 2q/(1+q)^2
  auto add_pair = [&](double u) -> double {
    const double sh = std::sinh(u);
    const double q = std::exp(-2 * pi_half * sh);
    if (q <= 0) return 0;  // underflowed past the endpoint
    const double near_d = half * 2 * q / (1 + q);
    const double far_d = half * 2 / (1 + q);
    const double w = 2 * pi_half * std::cosh(u) * 2 * q / ((1 + q) * (1 + q));
    return w * (f(b - near_d, far_d, near_d) + f(a + near_d, near_d, far_d));
  };

  const double umax = 3.9;
  double h = umax;
  double sum = pi_half * f(a + half, half, half);  // u = 0 node
  double prev = sum * h * half;
  double result = prev;
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    double add = 0;
    for (double u = h; u <= umax; u += 2 * h) add += add_pair(u);
    sum += add;
    result = sum * h * half;
    if (level >= 5) {
      const double err = std::abs(result - prev);
      if (err <= rel_tol * (std::abs(result) + 1e-300) || err == 0) break;
    }
    prev = result;
  }
  return result;
}

/// Tanh-sinh quadrature for plain integrands f(x); fine for logarithmic
/// endpoint singularities. Inverse-power singular factors need the
/// endpoint-distance form above for full accuracy.
template <class F>
double tanh_sinh(F&& f, double a, double b, double rel_tol = 1e-13,
                 int max_level = 12) {
  return tanh_sinh_endpoint(
      [&](double x, double, double) {
        // drop nodes that collapse onto an endpoint in floating point
        return (x > a && x < b) ? f(x) : 0.0;
      },
      a, b, rel_tol, max_level);
}

}  // namespace cmtomo
