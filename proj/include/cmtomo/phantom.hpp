#pragma once

#include <vector>

#include "cmtomo/types.hpp"

namespace cmtomo {

template <class Scalar>
struct UniformDisk {
  Vec2<Scalar> center{Scalar(0), Scalar(0)};
  Scalar radius = Scalar(0);
  Scalar amplitude = Scalar(0);
};

template <class Scalar>
struct GaussianBlob {
  Vec2<Scalar> center{Scalar(0), Scalar(0)};
  Scalar sigma = Scalar(0);
  Scalar amplitude = Scalar(0);
};

/// Analytic scene: superposition of uniform disks and Gaussian blobs. Disks
/// must lie inside the reconstruction disk; Gaussians must satisfy the
/// effective-support rule |center| + 4 sigma <= R0 (the tail beyond the disk
/// is treated as zero).
template <class Scalar>
struct Phantom {
  std::vector<UniformDisk<Scalar>> disks;
  std::vector<GaussianBlob<Scalar>> blobs;

  bool empty() const { return disks.empty() && blobs.empty(); }
};

template <class Scalar>
void validate_support(const Phantom<Scalar>& phantom, Scalar r0) {
  for (const auto& d : phantom.disks) {
    detail::require(d.radius > Scalar(0), "Phantom: disk radius must be positive");
    detail::require(d.center.norm() + d.radius <= r0,
                    "Phantom: disk escapes the reconstruction disk");
  }
  for (const auto& g : phantom.blobs) {
    detail::require(g.sigma > Scalar(0), "Phantom: blob sigma must be positive");
    detail::require(g.center.norm() + Scalar(4) * g.sigma <= r0,
                    "Phantom: blob effective support escapes the disk");
  }
}

template <class Scalar>
Scalar phantom_value(const Phantom<Scalar>& phantom, const Vec2<Scalar>& x) {
  Scalar v = Scalar(0);
  for (const auto& d : phantom.disks)
    if ((x - d.center).norm() < d.radius) v += d.amplitude;
  for (const auto& g : phantom.blobs)
    v += g.amplitude *
         std::exp(-(x - g.center).squaredNorm() / (Scalar(2) * g.sigma * g.sigma));
  return v;
}

/// Pointwise samples of the phantom on the image grid; zero outside the disk.
template <class Scalar>
ImageData<Scalar> sample_phantom(const Phantom<Scalar>& phantom,
                                 const ImageGrid<Scalar>& grid) {
  validate_support(phantom, grid.r0);
  ImageData<Scalar> img(grid);
  const int n1 = grid.count();
  for (int i1 = 0; i1 < n1; ++i1)
    for (int i2 = 0; i2 < n1; ++i2)
      if (grid.inside_disk(i1, i2))
        img.values(i1, i2) = phantom_value(phantom, grid.point(i1, i2));
  return img;
}

}  // namespace cmtomo
