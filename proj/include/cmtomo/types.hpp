#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cmtomo {

template <class Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}
}  // namespace detail

/// x * log|x| with the removable singularity closed: 0 at x = 0.
template <class Scalar>
inline Scalar xlogabs(Scalar x) {
  return x == Scalar(0) ? Scalar(0) : x * std::log(std::abs(x));
}

/// Uniformly spaced detector positions p^k = R0 (cos k h, sin k h) on the
/// circle of radius R0, with h = 2*pi/(nphi+1). Index k runs 0..nphi, so the
/// angular endpoint is never duplicated.
template <class Scalar>
struct DetectorRing {
  Scalar r0 = Scalar(1);
  int nphi = 0;

  DetectorRing() = default;
  DetectorRing(Scalar radius, int nphi_) : r0(radius), nphi(nphi_) {
    detail::require(r0 > Scalar(0), "DetectorRing: radius must be positive");
    detail::require(nphi >= 0, "DetectorRing: detector count must be >= 1");
  }

  int count() const { return nphi + 1; }
  Scalar angular_step() const {
    return Scalar(2) * std::numbers::pi_v<Scalar> / Scalar(nphi + 1);
  }
  Vec2<Scalar> position(int k) const {
    const Scalar a = Scalar(k) * angular_step();
    return {r0 * std::cos(a), r0 * std::sin(a)};
  }
};

/// Radial samples r^m = m h, m = 0..nr, with h = 2 R0 / nr. The last node
/// always sits at 2 R0, the diameter of the reconstruction disk.
template <class Scalar>
struct RadialGrid {
  Scalar r0 = Scalar(1);
  int nr = 1;

  RadialGrid() = default;
  RadialGrid(Scalar radius, int nr_) : r0(radius), nr(nr_) {
    detail::require(r0 > Scalar(0), "RadialGrid: radius must be positive");
    detail::require(nr >= 1, "RadialGrid: need nr >= 1");
  }

  int count() const { return nr + 1; }
  Scalar step() const { return Scalar(2) * r0 / Scalar(nr); }
  Scalar node(int m) const { return Scalar(m) * step(); }
  Scalar extent() const { return Scalar(2) * r0; }
};

/// Time samples t^j = j ht, j = 0..nt.
template <class Scalar>
struct TimeGrid {
  Scalar ht = Scalar(1);
  int nt = 1;

  TimeGrid() = default;
  TimeGrid(Scalar step, int nt_) : ht(step), nt(nt_) {
    detail::require(ht > Scalar(0), "TimeGrid: step must be positive");
    detail::require(nt >= 1, "TimeGrid: need nt >= 1");
  }

  int count() const { return nt + 1; }
  Scalar node(int j) const { return Scalar(j) * ht; }
  Scalar horizon() const { return Scalar(nt) * ht; }
};

/// Cartesian reconstruction grid on [-R0, R0]^2 with n+1 points per axis,
/// x^i = (-R0, -R0) + (i1, i2) hx. Points with |x| >= R0 count as outside the
/// open reconstruction disk.
template <class Scalar>
struct ImageGrid {
  Scalar r0 = Scalar(1);
  int n = 1;

  ImageGrid() = default;
  ImageGrid(Scalar radius, int n_) : r0(radius), n(n_) {
    detail::require(r0 > Scalar(0), "ImageGrid: radius must be positive");
    detail::require(n >= 1, "ImageGrid: need n >= 1");
  }

  int count() const { return n + 1; }
  Scalar step() const { return Scalar(2) * r0 / Scalar(n); }
  Vec2<Scalar> point(int i1, int i2) const {
    const Scalar h = step();
    return {-r0 + Scalar(i1) * h, -r0 + Scalar(i2) * h};
  }
  bool inside_disk(int i1, int i2) const {
    return point(i1, i2).norm() < r0;
  }
};

/// Sampled circular means F[k][m] = (M f)(p^k, r^m). Row k = detector,
/// column m = radius.
template <class Scalar>
struct MeansData {
  DetectorRing<Scalar> ring;
  RadialGrid<Scalar> rgrid;
  MatrixX<Scalar> values;

  MeansData() = default;
  MeansData(const DetectorRing<Scalar>& ring_, const RadialGrid<Scalar>& rgrid_)
      : ring(ring_), rgrid(rgrid_),
        values(MatrixX<Scalar>::Zero(ring_.count(), rgrid_.count())) {
    detail::require(ring.r0 == rgrid.r0,
                    "MeansData: ring and radial grid disagree on R0");
  }
};

enum class TraceKind { p, w };

/// Boundary trace U[k][j] of the wave solution at detector p^k, time t^j.
/// kind::p is the trace of the solution with initial data (0, f); kind::w its
/// time derivative (initial data (f, 0)).
template <class Scalar>
struct WaveTraceData {
  DetectorRing<Scalar> ring;
  TimeGrid<Scalar> tgrid;
  TraceKind kind = TraceKind::p;
  MatrixX<Scalar> values;

  WaveTraceData() = default;
  WaveTraceData(const DetectorRing<Scalar>& ring_, const TimeGrid<Scalar>& tgrid_,
                TraceKind kind_)
      : ring(ring_), tgrid(tgrid_), kind(kind_),
        values(MatrixX<Scalar>::Zero(ring_.count(), tgrid_.count())) {}
};

/// Real values on the Cartesian reconstruction grid; values(i1, i2) belongs to
/// the point x^i = (-R0, -R0) + (i1, i2) hx.
template <class Scalar>
struct ImageData {
  ImageGrid<Scalar> grid;
  MatrixX<Scalar> values;

  ImageData() = default;
  explicit ImageData(const ImageGrid<Scalar>& grid_)
      : grid(grid_), values(MatrixX<Scalar>::Zero(grid_.count(), grid_.count())) {}
};

/// Zero every sample at grid points outside the open disk (|x| >= R0).
template <class Scalar>
void zero_outside_disk(ImageData<Scalar>& img) {
  const int n1 = img.grid.count();
  for (int i1 = 0; i1 < n1; ++i1)
    for (int i2 = 0; i2 < n1; ++i2)
      if (!img.grid.inside_disk(i1, i2)) img.values(i1, i2) = Scalar(0);
}

/// Zero every sample at grid points with |x| > radius.
template <class Scalar>
void zero_outside_radius(ImageData<Scalar>& img, Scalar radius) {
  const int n1 = img.grid.count();
  for (int i1 = 0; i1 < n1; ++i1)
    for (int i2 = 0; i2 < n1; ++i2)
      if (img.grid.point(i1, i2).norm() > radius) img.values(i1, i2) = Scalar(0);
}

/// Piecewise-linear interpolation of uniformly spaced samples v[0..n] at
/// coordinates j*step, extended by zero beyond the last node. Negative
/// arguments clamp to the first node.
template <class Scalar, class Row>
Scalar lerp_uniform(const Row& v, Scalar step, Scalar x) {
  const auto n = static_cast<Eigen::Index>(v.size()) - 1;
  if (x <= Scalar(0)) return v[0];
  const Scalar pos = x / step;
  if (pos >= Scalar(n)) {
    // exact hit on the last node still counts; beyond it the data is zero
    return pos == Scalar(n) ? v[n] : Scalar(0);
  }
  const auto m = static_cast<Eigen::Index>(pos);
  const Scalar w = pos - Scalar(m);
  return v[m] + w * (v[m + 1] - v[m]);
}

}  // namespace cmtomo
