#pragma once

#include <vector>

#include "cmtomo/parallel.hpp"
#include "cmtomo/types.hpp"

namespace cmtomo {

/// Discrete back-projection: the detector average of the piecewise-linear
/// radial interpolant evaluated at |x^i - p^k|,
///   out[i] = 1/(nphi+1) * sum_k T^k[G](|x^i - p^k|),
/// which realises the (1/2piR0) integral over the detector circle by the
/// periodic trapezoidal rule, with zero at grid points outside the open disk.
/// Accumulation runs in ascending k for every pixel, so the result is
/// independent of the worker count.
template <class Scalar>
ImageData<Scalar> back_project(const MeansData<Scalar>& g,
                               const ImageGrid<Scalar>& grid) {
  ImageData<Scalar> out(grid);
  const int nk = g.ring.count();
  const Scalar hr = g.rgrid.step();
  const Scalar rmax = g.rgrid.extent();
  const int n1 = grid.count();
  const Scalar inv_count = Scalar(1) / Scalar(nk);

  std::vector<Vec2<Scalar>> det(nk);
  for (int k = 0; k < nk; ++k) det[k] = g.ring.position(k);

  parallel_for(0, n1, [&](int i1) {
    for (int i2 = 0; i2 < n1; ++i2) {
      if (!grid.inside_disk(i1, i2)) continue;
      const Vec2<Scalar> x = grid.point(i1, i2);
      Scalar acc = Scalar(0);
      for (int k = 0; k < nk; ++k) {
        Scalar s = (x - det[k]).norm();
        if (s > rmax) s = rmax;  // rounding guard; |x - p| <= 2R0 on the disk
        acc += lerp_uniform(g.values.row(k), hr, s);
      }
      out.values(i1, i2) = acc * inv_count;
    }
  });
  return out;
}

}  // namespace cmtomo
