#pragma once

#include <algorithm>
#include <cstdint>
#include <random>

#include "cmtomo/parallel.hpp"
#include "cmtomo/phantom.hpp"
#include "cmtomo/quadrature.hpp"
#include "cmtomo/types.hpp"

namespace cmtomo {

/// Fraction of the circle of radius r about p that lies inside the disk.
/// Total function: the non-intersecting configurations return exactly 0 or 1,
/// the generic case uses the law-of-cosines arc angle with a clamped arccos.
template <class Scalar>
Scalar disk_arc_fraction(const UniformDisk<Scalar>& disk, const Vec2<Scalar>& p,
                         Scalar r) {
  const Scalar d = (p - disk.center).norm();
  const Scalar a = disk.radius;
  if (r == Scalar(0)) return d < a ? Scalar(1) : Scalar(0);
  if (d + r <= a) return Scalar(1);                      // circle inside disk
  if (d >= a + r || r >= d + a) return Scalar(0);        // circle misses disk
  const Scalar c = (d * d + r * r - a * a) / (Scalar(2) * d * r);
  const Scalar half_angle =
      std::acos(std::clamp(c, Scalar(-1), Scalar(1)));
  return half_angle / std::numbers::pi_v<Scalar>;
}

/// Mean of a Gaussian blob over the circle of radius r about p, by quad_n
/// point periodic trapezoidal quadrature (spectrally accurate here).
template <class Scalar>
Scalar gaussian_circle_mean(const GaussianBlob<Scalar>& blob, const Vec2<Scalar>& p,
                            Scalar r, int quad_n) {
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  const Scalar inv_2s2 = Scalar(1) / (Scalar(2) * blob.sigma * blob.sigma);
  Scalar sum = Scalar(0);
  for (int j = 0; j < quad_n; ++j) {
    const Scalar th = two_pi * Scalar(j) / Scalar(quad_n);
    const Vec2<Scalar> z{p.x() + r * std::cos(th), p.y() + r * std::sin(th)};
    sum += std::exp(-(z - blob.center).squaredNorm() * inv_2s2);
  }
  return blob.amplitude * sum / Scalar(quad_n);
}

/// Circular mean transform of the phantom sampled at every detector/radius
/// pair: F[k][m] = mean of f over the circle of radius r^m about p^k.
/// Disk primitives use the closed-form arc fraction, Gaussian primitives the
/// periodic trapezoid.
template <class Scalar>
MeansData<Scalar> circular_mean(const Phantom<Scalar>& phantom,
                                const DetectorRing<Scalar>& ring,
                                const RadialGrid<Scalar>& rgrid,
                                int quad_n = 512) {
  detail::require(ring.r0 == rgrid.r0,
                  "circular_mean: ring and radial grid disagree on R0");
  detail::require(quad_n >= 16, "circular_mean: quad_n must be >= 16");
  validate_support(phantom, ring.r0);

  MeansData<Scalar> out(ring, rgrid);
  parallel_for(0, ring.count(), [&](int k) {
    const Vec2<Scalar> p = ring.position(k);
    for (int m = 0; m < rgrid.count(); ++m) {
      const Scalar r = rgrid.node(m);
      Scalar v = Scalar(0);
      for (const auto& d : phantom.disks)
        v += d.amplitude * disk_arc_fraction(d, p, r);
      for (const auto& g : phantom.blobs)
        v += gaussian_circle_mean(g, p, r, quad_n);
      out.values(k, m) = v;
    }
  });
  return out;
}

/// Quadrature knob for the Abel-type trace integrals. The composite panels
/// are aligned with the sample nodes, so the order only controls the exactness
/// of the per-panel trigonometric integrand.
struct TraceQuadrature {
  int gl_order = 4;
};

namespace detail {

// integral_0^t r F(r) / sqrt(t^2 - r^2) dr with the endpoint singularity
// removed by r = t sin(psi); F is the piecewise-linear radial interpolant,
// zero beyond its grid. Panel boundaries sit on the interpolant's kinks
// (psi_m = asin(r^m / t)), so the per-panel integrand is a trigonometric
// polynomial and Gauss-Legendre is exact up to rounding.
template <class Scalar, class Row>
Scalar abel_forward_integral(const Row& samples, Scalar hr, Scalar rmax, Scalar t,
                             const GaussLegendre& gl) {
  if (t <= Scalar(0)) return Scalar(0);
  const Scalar r_upper = std::min(t, rmax);
  const Scalar psi_max = (r_upper >= t)
                             ? std::numbers::pi_v<Scalar> / Scalar(2)
                             : std::asin(r_upper / t);
  auto g = [&](double psi) {
    const Scalar r = t * std::sin(Scalar(psi));
    return double(r * lerp_uniform(samples, hr, r));
  };
  const int nodes_crossed = static_cast<int>(std::floor(double(r_upper / hr)));
  double acc = 0;
  double psi_prev = 0;
  for (int m = 1; m <= nodes_crossed; ++m) {
    const double psi_m = std::asin(std::min(double(Scalar(m) * hr / t), 1.0));
    if (psi_m > psi_prev) acc += gauss_legendre(g, psi_prev, psi_m, gl);
    psi_prev = psi_m;
  }
  if (double(psi_max) > psi_prev)
    acc += gauss_legendre(g, psi_prev, double(psi_max), gl);
  return Scalar(acc);
}

// second-order time derivative of each row: centered inside, 3-point
// one-sided at the ends
template <class Scalar>
MatrixX<Scalar> time_derivative(const MatrixX<Scalar>& u, Scalar ht) {
  const auto rows = u.rows();
  const auto cols = u.cols();
  MatrixX<Scalar> d(rows, cols);
  const Scalar inv2h = Scalar(1) / (Scalar(2) * ht);
  for (Eigen::Index k = 0; k < rows; ++k) {
    d(k, 0) = (Scalar(-3) * u(k, 0) + Scalar(4) * u(k, 1) - u(k, 2)) * inv2h;
    for (Eigen::Index j = 1; j + 1 < cols; ++j)
      d(k, j) = (u(k, j + 1) - u(k, j - 1)) * inv2h;
    d(k, cols - 1) = (Scalar(3) * u(k, cols - 1) - Scalar(4) * u(k, cols - 2) +
                      u(k, cols - 3)) *
                     inv2h;
  }
  return d;
}

}  // namespace detail

/// Boundary trace of the wave solution with initial data (0, f), computed from
/// the circular means by the Abel-type integral
///   u(p, t) = integral_0^t r (M f)(p, r) / sqrt(t^2 - r^2) dr.
template <class Scalar>
WaveTraceData<Scalar> wave_trace_P(const MeansData<Scalar>& means,
                                   const TimeGrid<Scalar>& tgrid,
                                   const TraceQuadrature& q = {}) {
  detail::require(tgrid.ht > Scalar(0), "wave_trace_P: time step must be positive");
  detail::require(tgrid.horizon() >= tgrid.ht, "wave_trace_P: empty time grid");

  WaveTraceData<Scalar> out(means.ring, tgrid, TraceKind::p);
  const Scalar hr = means.rgrid.step();
  const Scalar rmax = means.rgrid.extent();
  const GaussLegendre gl(q.gl_order);
  parallel_for(0, means.ring.count(), [&](int k) {
    const auto row = means.values.row(k);
    for (int j = 1; j < tgrid.count(); ++j)
      out.values(k, j) =
          detail::abel_forward_integral(row, hr, rmax, tgrid.node(j), gl);
  });
  return out;
}

/// Boundary trace of the wave solution with initial data (f, 0): the time
/// derivative of the (0, f) trace, by centered differences (one-sided at the
/// first and last sample).
template <class Scalar>
WaveTraceData<Scalar> wave_trace_W(const MeansData<Scalar>& means,
                                   const TimeGrid<Scalar>& tgrid,
                                   const TraceQuadrature& q = {}) {
  WaveTraceData<Scalar> p = wave_trace_P(means, tgrid, q);
  WaveTraceData<Scalar> out(means.ring, tgrid, TraceKind::w);
  out.values = detail::time_derivative(p.values, tgrid.ht);
  return out;
}

/// Time derivative of an existing trace (P-trace in, W-trace out).
template <class Scalar>
WaveTraceData<Scalar> trace_time_derivative(const WaveTraceData<Scalar>& trace) {
  WaveTraceData<Scalar> out(trace.ring, trace.tgrid,
                            trace.kind == TraceKind::p ? TraceKind::w
                                                       : trace.kind);
  out.values = detail::time_derivative(trace.values, trace.tgrid.ht);
  return out;
}

/// Recover circular means from the W-trace by the Abel inversion
///   (M f)(p, r) = (2/pi) integral_0^r u(p, t) / sqrt(r^2 - t^2) dt,
/// with the singularity removed by t = r sin(psi).
template <class Scalar>
MeansData<Scalar> abel_invert_p2m(const WaveTraceData<Scalar>& trace,
                                  const RadialGrid<Scalar>& rgrid,
                                  const TraceQuadrature& q = {}) {
  detail::require(trace.kind == TraceKind::w,
                  "abel_invert_p2m: expects a W-trace");
  detail::require(trace.tgrid.horizon() >= rgrid.extent(),
                  "abel_invert_p2m: trace horizon must reach 2*R0");
  detail::require(trace.ring.r0 == rgrid.r0,
                  "abel_invert_p2m: ring and radial grid disagree on R0");

  MeansData<Scalar> out(trace.ring, rgrid);
  const Scalar ht = trace.tgrid.ht;
  const GaussLegendre gl(q.gl_order);
  const double psi_max = std::numbers::pi / 2;
  parallel_for(0, trace.ring.count(), [&](int k) {
    const auto row = trace.values.row(k);
    for (int m = 1; m < rgrid.count(); ++m) {
      const Scalar r = rgrid.node(m);
      auto g = [&](double psi) {
        const Scalar t = r * std::sin(Scalar(psi));
        return double(lerp_uniform(row, ht, t));
      };
      // panels between the time-node crossings psi_j = asin(t^j / r)
      const int nodes_crossed = static_cast<int>(std::floor(double(r / ht)));
      double acc = 0, psi_prev = 0;
      for (int j = 1; j <= nodes_crossed; ++j) {
        const double psi_j = std::asin(std::min(double(Scalar(j) * ht / r), 1.0));
        if (psi_j > psi_prev) acc += gauss_legendre(g, psi_prev, psi_j, gl);
        psi_prev = psi_j;
      }
      if (psi_max > psi_prev) acc += gauss_legendre(g, psi_prev, psi_max, gl);
      out.values(k, m) = Scalar(2) / std::numbers::pi_v<Scalar> * Scalar(acc);
    }
  });
  return out;
}

namespace detail {

template <class Scalar>
void perturb_uniform(MatrixX<Scalar>& values, Scalar level, std::uint64_t seed) {
  detail::require(level >= Scalar(0), "add_noise: level must be >= 0");
  if (level == Scalar(0) || values.size() == 0) return;
  const Scalar amp = level * values.cwiseAbs().maxCoeff();
  if (amp == Scalar(0)) return;
  std::mt19937_64 rng(seed);
  // map the top 53 bits to [0, 1); implementation-independent, unlike
  // std::uniform_real_distribution
  auto unit = [&rng]() {
    return Scalar((rng() >> 11) * 0x1.0p-53);
  };
  for (Eigen::Index k = 0; k < values.rows(); ++k)
    for (Eigen::Index m = 0; m < values.cols(); ++m)
      values(k, m) += amp * (Scalar(2) * unit() - Scalar(1));
}

}  // namespace detail

/// Additive uniform noise on [-level*max|data|, +level*max|data|], fully
/// determined by the seed.
template <class Scalar>
MeansData<Scalar> add_noise(const MeansData<Scalar>& data, Scalar level,
                            std::uint64_t seed) {
  MeansData<Scalar> out = data;
  detail::perturb_uniform(out.values, level, seed);
  return out;
}

template <class Scalar>
WaveTraceData<Scalar> add_noise(const WaveTraceData<Scalar>& data, Scalar level,
                                std::uint64_t seed) {
  WaveTraceData<Scalar> out = data;
  detail::perturb_uniform(out.values, level, seed);
  return out;
}

}  // namespace cmtomo
