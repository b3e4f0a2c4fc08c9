#pragma once

#include <algorithm>
#include <cmath>

#include "cmtomo/parallel.hpp"
#include "cmtomo/quadrature.hpp"
#include "cmtomo/types.hpp"

namespace cmtomo {

/// Closed form of the finite-time reconstruction kernel
///   K(t, rbar) = integral_t^{2R0} r log|r^2 - rbar^2| / sqrt(r^2 - t^2) dr.
/// Substituting r = sqrt(t^2 + xi^2) turns this into
/// integral_0^L log|xi^2 + (t^2 - rbar^2)| dxi with L = sqrt(4R0^2 - t^2),
/// whose antiderivative splits by the sign of t^2 - rbar^2:
///   t <= rbar:  (L+B) log(L+B) + (L-B) log|L-B| - 2L,  B = sqrt(rbar^2 - t^2)
///   t >  rbar:  L log(L^2+E^2) - 2L + 2E atan(L/E),    E = sqrt(t^2 - rbar^2)
/// Both branches vanish together at t = 2R0 and agree at t = rbar.
template <class Scalar>
Scalar wave_kernel_K(Scalar t, Scalar rbar, Scalar r0) {
  const Scalar two_r0 = Scalar(2) * r0;
  const Scalar l2 = (two_r0 - t) * (two_r0 + t);
  const Scalar L = std::sqrt(std::max(l2, Scalar(0)));
  if (t <= rbar) {
    const Scalar B = std::sqrt((rbar - t) * (rbar + t));
    return xlogabs(L + B) + xlogabs(L - B) - Scalar(2) * L;
  }
  const Scalar E = std::sqrt((t - rbar) * (t + rbar));
  const Scalar lead = (L > Scalar(0)) ? L * std::log(L * L + E * E) : Scalar(0);
  return lead - Scalar(2) * L + Scalar(2) * E * std::atan(L / E);
}

/// Quadrature knobs for the adjoint trace integral.
struct AdjointQuadrature {
  int gl_order = 4;
  double panels_per_sample = 0.5;  // panels per time step covered
  int min_panels = 16;
  int profile_samples = -1;  // inner-integral tabulation nodes; -1: 2*max(n, 64)
};

namespace detail {

// inner integral of the adjoint: integral_c^{Tmax} G(t) / sqrt(t^2 - c^2) dt
// with t = c cosh(psi); G is the piecewise-linear interpolant of one detector
// row, zero beyond the horizon.
template <class Scalar, class Row>
Scalar adjoint_inner_integral(const Row& samples, Scalar ht, Scalar horizon,
                              Scalar c, const GaussLegendre& gl,
                              const AdjointQuadrature& q) {
  if (c >= horizon) return Scalar(0);
  if (c <= Scalar(0)) {
    // degenerate centre: integral_0^T G(t)/t dt; G(0) = 0 for trace-derived
    // integrands, so integrate G(t)/t with the first segment's limit value
    const auto n = static_cast<Eigen::Index>(samples.size()) - 1;
    Scalar acc = Scalar(0);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar t0 = Scalar(j) * ht, t1 = Scalar(j + 1) * ht;
      const Scalar g0 = samples[j], g1 = samples[j + 1];
      const Scalar b = (g1 - g0) / ht;
      const Scalar a = g0 - b * t0;
      // integral (a + b t)/t dt = a log(t1/t0) + b (t1 - t0)
      acc += (j == 0) ? b * (t1 - t0)  // a = G(0) = 0 on the first segment
                      : a * std::log(t1 / t0) + b * (t1 - t0);
    }
    return acc;
  }
  const double psi_max = std::acosh(double(horizon / c));
  const int panels = std::max<int>(
      q.min_panels, static_cast<int>(std::ceil(q.panels_per_sample *
                                               double((horizon - c) / ht))));
  auto g = [&](double psi) {
    const Scalar t = c * Scalar(std::cosh(psi));
    return double(lerp_uniform(samples, ht, t));
  };
  return Scalar(composite_gauss(g, 0.0, psi_max, panels, gl));
}

}  // namespace detail

/// Formal adjoint of the trace map with initial data (0, f):
///   (P* G)(y) = 1/(2 pi) integral_S integral_{|y-p|}^{Tmax}
///               G(p, t) / sqrt(t^2 - |y-p|^2) dt ds(p).
/// The inner integral uses the cosh substitution with composite
/// Gauss-Legendre on the interpolated samples; the outer integral is the
/// trapezoidal rule with arc-length weight R0 h_phi. For speed the inner
/// integral is tabulated per detector on a uniform centre-distance grid and
/// interpolated per pixel (set profile_samples = 0 to integrate per pixel).
template <class Scalar>
ImageData<Scalar> adjoint_P_star(const WaveTraceData<Scalar>& trace,
                                 const ImageGrid<Scalar>& grid,
                                 const AdjointQuadrature& q = {}) {
  detail::require(trace.tgrid.horizon() >= Scalar(2) * trace.ring.r0,
                  "adjoint_P_star: trace horizon must reach 2*R0");
  detail::require(trace.ring.r0 == grid.r0,
                  "adjoint_P_star: ring and image grid disagree on R0");

  const int nk = trace.ring.count();
  const Scalar ht = trace.tgrid.ht;
  const Scalar horizon = trace.tgrid.horizon();
  const GaussLegendre gl(q.gl_order);
  const int n1 = grid.count();
  const Scalar rmax = Scalar(2) * grid.r0;

  int nc = q.profile_samples;
  if (nc < 0) nc = 2 * std::max(grid.n, 64);

  std::vector<Vec2<Scalar>> det(nk);
  for (int k = 0; k < nk; ++k) det[k] = trace.ring.position(k);

  ImageData<Scalar> out(grid);

  if (nc == 0) {
    // direct per-pixel evaluation
    parallel_for(0, n1, [&](int i1) {
      for (int i2 = 0; i2 < n1; ++i2) {
        if (!grid.inside_disk(i1, i2)) continue;
        const Vec2<Scalar> x = grid.point(i1, i2);
        Scalar acc = Scalar(0);
        for (int k = 0; k < nk; ++k)
          acc += detail::adjoint_inner_integral(trace.values.row(k), ht, horizon,
                                                (x - det[k]).norm(), gl, q);
        out.values(i1, i2) = acc * trace.ring.r0 / Scalar(nk);
      }
    });
    return out;
  }

  // tabulate the inner integral on c in [0, 2R0] per detector
  const Scalar hc = rmax / Scalar(nc);
  MatrixX<Scalar> profile(nk, nc + 1);
  parallel_for(0, nk, [&](int k) {
    const auto row = trace.values.row(k);
    for (int iq = 0; iq <= nc; ++iq)
      profile(k, iq) =
          detail::adjoint_inner_integral(row, ht, horizon, Scalar(iq) * hc, gl, q);
  });

  parallel_for(0, n1, [&](int i1) {
    for (int i2 = 0; i2 < n1; ++i2) {
      if (!grid.inside_disk(i1, i2)) continue;
      const Vec2<Scalar> x = grid.point(i1, i2);
      Scalar acc = Scalar(0);
      for (int k = 0; k < nk; ++k) {
        Scalar c = (x - det[k]).norm();
        if (c > rmax) c = rmax;
        acc += lerp_uniform(profile.row(k), hc, c);
      }
      out.values(i1, i2) = acc * trace.ring.r0 / Scalar(nk);
    }
  });
  return out;
}

}  // namespace cmtomo
