#include <doctest.h>

#include <cmath>
#include <random>

#include "cmtomo/backprojection.hpp"

using namespace cmtomo;

TEST_CASE("back_project: constant data averages to the constant inside D") {
  const DetectorRing<double> ring(1.0, 23);
  const RadialGrid<double> rgrid(1.0, 32);
  MeansData<double> g(ring, rgrid);
  g.values.setConstant(2.5);
  const ImageGrid<double> grid(1.0, 30);
  const ImageData<double> img = back_project(g, grid);
  for (int i1 = 0; i1 <= 30; ++i1)
    for (int i2 = 0; i2 <= 30; ++i2) {
      if (grid.inside_disk(i1, i2))
        CHECK(img.values(i1, i2) == doctest::Approx(2.5).epsilon(1e-14));
      else
        CHECK(img.values(i1, i2) == 0.0);
    }
}

TEST_CASE("back_project: single-detector data contributes v/(nphi+1)") {
  const DetectorRing<double> ring(1.0, 15);
  const RadialGrid<double> rgrid(1.0, 16);
  MeansData<double> g(ring, rgrid);
  g.values.row(4).setConstant(3.0);
  const ImageGrid<double> grid(1.0, 21);
  const ImageData<double> img = back_project(g, grid);
  for (int i1 = 0; i1 <= 21; ++i1)
    for (int i2 = 0; i2 <= 21; ++i2)
      if (grid.inside_disk(i1, i2))
        CHECK(img.values(i1, i2) == doctest::Approx(3.0 / 16).epsilon(1e-14));
}

TEST_CASE("back_project: G = r^2 matches |x|^2 + R0^2 at second order") {
  // (B G)(x) = (1/2pi) integral |x - p(phi)|^2 dphi = |x|^2 + R0^2
  double err[2];
  for (int pass = 0; pass < 2; ++pass) {
    const int n = pass == 0 ? 60 : 120;
    const DetectorRing<double> ring(1.0, n);
    const RadialGrid<double> rgrid(1.0, n);
    MeansData<double> g(ring, rgrid);
    for (int m = 0; m <= n; ++m)
      g.values.col(m).setConstant(rgrid.node(m) * rgrid.node(m));
    const ImageGrid<double> grid(1.0, n);
    const ImageData<double> img = back_project(g, grid);
    double e = 0;
    for (int i1 = 0; i1 <= n; ++i1)
      for (int i2 = 0; i2 <= n; ++i2) {
        if (!grid.inside_disk(i1, i2)) continue;
        const double want = grid.point(i1, i2).squaredNorm() + 1.0;
        e = std::max(e, std::abs(img.values(i1, i2) - want));
      }
    err[pass] = e;
  }
  CHECK(err[1] < err[0]);
  const double order = std::log2(err[0] / err[1]);
  CHECK(order > 1.5);
  CHECK(order < 2.6);
}

TEST_CASE("back_project of detector-independent data equals the direct average") {
  const DetectorRing<double> ring(1.0, 12);
  const RadialGrid<double> rgrid(1.0, 40);
  MeansData<double> g(ring, rgrid);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int m = 0; m <= 40; ++m) g.values.col(m).setConstant(u(rng));
  const ImageGrid<double> grid(1.0, 15);
  const ImageData<double> img = back_project(g, grid);
  for (int i1 = 0; i1 <= 15; ++i1)
    for (int i2 = 0; i2 <= 15; ++i2) {
      if (!grid.inside_disk(i1, i2)) continue;
      double avg = 0;
      for (int k = 0; k < ring.count(); ++k) {
        const double s = (grid.point(i1, i2) - ring.position(k)).norm();
        avg += lerp_uniform(g.values.row(k), rgrid.step(), s);
      }
      avg /= ring.count();
      CHECK(img.values(i1, i2) == doctest::Approx(avg).epsilon(1e-14));
    }
}

TEST_CASE("back_project is linear and deterministic across worker counts") {
  const DetectorRing<double> ring(1.0, 14);
  const RadialGrid<double> rgrid(1.0, 24);
  const ImageGrid<double> grid(1.0, 19);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1, 1);
  MeansData<double> a(ring, rgrid), b(ring, rgrid);
  for (int k = 0; k < ring.count(); ++k)
    for (int m = 0; m <= 24; ++m) {
      a.values(k, m) = u(rng);
      b.values(k, m) = u(rng);
    }
  MeansData<double> combo(ring, rgrid);
  combo.values = 2.0 * a.values + 0.5 * b.values;
  const MatrixX<double> lhs = back_project(combo, grid).values;
  const MatrixX<double> rhs =
      2.0 * back_project(a, grid).values + 0.5 * back_project(b, grid).values;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);

  set_num_threads(1);
  const MatrixX<double> serial = back_project(combo, grid).values;
  set_num_threads(3);
  const MatrixX<double> threaded = back_project(combo, grid).values;
  set_num_threads(0);
  CHECK(serial == threaded);
  CHECK(serial == lhs);
}

TEST_CASE("back_project zeroes the boundary circle and beyond") {
  const DetectorRing<double> ring(1.0, 9);
  const RadialGrid<double> rgrid(1.0, 8);
  MeansData<double> g(ring, rgrid);
  g.values.setConstant(1.0);
  const ImageGrid<double> grid(1.0, 8);
  const ImageData<double> img = back_project(g, grid);
  // (8, 4) sits at |x| = R0 exactly and counts as outside the open disk
  REQUIRE(grid.point(8, 4).norm() == 1.0);
  CHECK(img.values(8, 4) == 0.0);
  CHECK(img.values(0, 0) == 0.0);
}
