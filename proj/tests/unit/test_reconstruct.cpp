#include <doctest.h>

#include <cmath>
#include <random>

#include "cmtomo/reconstruct.hpp"
#include "cmtomo/verify.hpp"

using namespace cmtomo;

namespace {

Phantom<double> gaussian_phantom() {
  Phantom<double> p;
  p.blobs.push_back({{0.1, -0.05}, 0.18, 1.0});
  return p;
}

struct Setup {
  DetectorRing<double> ring;
  RadialGrid<double> rgrid;
  ImageGrid<double> grid;
  MeansData<double> means;
  ImageData<double> reference;
};

Setup make_setup(const Phantom<double>& phantom, int n) {
  Setup s{DetectorRing<double>(1.0, n), RadialGrid<double>(1.0, n),
          ImageGrid<double>(1.0, n), MeansData<double>(), ImageData<double>()};
  s.means = circular_mean(phantom, s.ring, s.rgrid);
  s.reference = sample_phantom(phantom, s.grid);
  return s;
}

}  // namespace

TEST_CASE("all means reconstructors map zero data to the zero image") {
  const DetectorRing<double> ring(1.0, 31);
  const RadialGrid<double> rgrid(1.0, 32);
  const ImageGrid<double> grid(1.0, 24);
  const MeansData<double> zero(ring, rgrid);
  for (Method m : {Method::mlap, Method::minv, Method::hilbert, Method::filbac})
    CHECK(reconstruct_from_means(m, zero, grid).values.cwiseAbs().maxCoeff() ==
          0.0);

  WaveTraceData<double> zw(ring, TimeGrid<double>(2.0 / 64, 64), TraceKind::w);
  CHECK(recon_wavefinite(zw, grid).values.cwiseAbs().maxCoeff() == 0.0);
  WaveTraceData<double> zp(ring, TimeGrid<double>(20.0 / 256, 256), TraceKind::p);
  CHECK(recon_adjoint_p(zp, grid).values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(recon_adjoint_w(zp, grid).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("means pipelines recover a Gaussian phantom at N = 128") {
  const Setup s = make_setup(gaussian_phantom(), 128);
  for (Method m : {Method::mlap, Method::minv, Method::hilbert, Method::filbac}) {
    const ImageData<double> recon = reconstruct_from_means(m, s.means, s.grid);
    const ImageMetrics metrics = image_metrics(recon, s.reference);
    CAPTURE(int(m));
    CHECK(metrics.rel_l2 <= 0.04);
  }
}

TEST_CASE("mlap agrees with minv on smooth data") {
  const Setup s = make_setup(gaussian_phantom(), 128);
  const ImageData<double> a = recon_mlap(s.means, s.grid);
  const ImageData<double> b = recon_minv(s.means, s.grid);
  CHECK(image_metrics(a, b).rel_l2 <= 0.04);
}

TEST_CASE("wavefinite recovers the Gaussian phantom from the short trace") {
  const Phantom<double> phantom = gaussian_phantom();
  const int n = 128;
  const Setup s = make_setup(phantom, n);
  const WaveTraceData<double> w =
      wave_trace_W(s.means, TimeGrid<double>(2.0 / n, n));
  const ImageData<double> recon = recon_wavefinite(w, s.grid);
  CHECK(image_metrics(recon, s.reference).rel_l2 <= 0.05);
}

TEST_CASE("wavefinite rejects wrong kind and short horizon") {
  const DetectorRing<double> ring(1.0, 15);
  const ImageGrid<double> grid(1.0, 16);
  WaveTraceData<double> p(ring, TimeGrid<double>(2.0 / 64, 64), TraceKind::p);
  CHECK_THROWS_AS(recon_wavefinite(p, grid), std::invalid_argument);
  WaveTraceData<double> shortw(ring, TimeGrid<double>(0.05, 20), TraceKind::w);
  CHECK_THROWS_AS(recon_wavefinite(shortw, grid), std::invalid_argument);
}

TEST_CASE("adjoint pipelines recover the Gaussian and agree with each other") {
  const Phantom<double> phantom = gaussian_phantom();
  const int n = 96;
  const Setup s = make_setup(phantom, n);
  const int nt = 10 * n;
  const WaveTraceData<double> p =
      wave_trace_P(s.means, TimeGrid<double>(20.0 / nt, nt));
  const ImageData<double> ra = recon_adjoint_p(p, s.grid);
  const ImageData<double> rw = recon_adjoint_w(p, s.grid);
  CHECK(image_metrics(ra, s.reference).rel_l2 <= 0.06);
  CHECK(image_metrics(rw, s.reference).rel_l2 <= 0.06);
  // cross-formula consistency, forced by the exact identity
  const double cross =
      (ra.values - rw.values).norm() / std::max(ra.values.norm(), 1e-30);
  CHECK(cross <= 0.02);
}

TEST_CASE("reconstruction pipelines are linear in the data") {
  const DetectorRing<double> ring(1.0, 24);
  const RadialGrid<double> rgrid(1.0, 24);
  const ImageGrid<double> grid(1.0, 20);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1, 1);
  MeansData<double> a(ring, rgrid), b(ring, rgrid);
  for (int k = 0; k < ring.count(); ++k)
    for (int m = 0; m < rgrid.count(); ++m) {
      a.values(k, m) = u(rng);
      b.values(k, m) = u(rng);
    }
  // keep the supported-data convention: nothing at the outermost radius
  a.values.col(24).setZero();
  b.values.col(24).setZero();
  MeansData<double> combo(ring, rgrid);
  combo.values = 1.5 * a.values - 0.25 * b.values;
  for (Method m : {Method::mlap, Method::minv, Method::hilbert, Method::filbac}) {
    const MatrixX<double> lhs = reconstruct_from_means(m, combo, grid).values;
    const MatrixX<double> rhs =
        1.5 * reconstruct_from_means(m, a, grid).values -
        0.25 * reconstruct_from_means(m, b, grid).values;
    CAPTURE(int(m));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <=
          1e-10 * (1 + rhs.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("support fidelity: compact phantom stays put") {
  Phantom<double> p;
  p.blobs.push_back({{0.05, 0.08}, 0.1, 1.0});  // supported within 0.5 R0
  const Setup s = make_setup(p, 128);
  const ImageData<double> recon = recon_minv(s.means, s.grid);
  double outside2 = 0, ref2 = 0;
  for (int i1 = 0; i1 <= 128; ++i1)
    for (int i2 = 0; i2 <= 128; ++i2) {
      if (!s.grid.inside_disk(i1, i2)) continue;
      ref2 += s.reference.values(i1, i2) * s.reference.values(i1, i2);
      if (s.grid.point(i1, i2).norm() > 0.6)
        outside2 += recon.values(i1, i2) * recon.values(i1, i2);
    }
  CHECK(std::sqrt(outside2 / ref2) <= 0.02);
}

TEST_CASE("cross-method consistency on smooth data") {
  const Setup s = make_setup(gaussian_phantom(), 128);
  const WaveTraceData<double> w =
      wave_trace_W(s.means, TimeGrid<double>(2.0 / 128, 128));
  std::vector<ImageData<double>> recons;
  for (Method m : {Method::mlap, Method::minv, Method::hilbert, Method::filbac})
    recons.push_back(reconstruct_from_means(m, s.means, s.grid));
  recons.push_back(recon_wavefinite(w, s.grid));
  for (std::size_t i = 0; i < recons.size(); ++i)
    for (std::size_t j = i + 1; j < recons.size(); ++j) {
      const double rel = (recons[i].values - recons[j].values).norm() /
                         recons[j].values.norm();
      CAPTURE(i);
      CAPTURE(j);
      CHECK(rel <= 0.045);
    }
}

TEST_CASE("radial Laplacian of an even profile matches the analytic value") {
  // H(r) = g(r^2) with g(u) = exp(-u) + 0.3 cos(2u):
  //   H'' + H'/r = 4 g'(u) + 4 u g''(u)
  auto g1 = [](double u) { return -std::exp(-u) - 0.6 * std::sin(2 * u); };
  auto g2 = [](double u) { return std::exp(-u) - 1.2 * std::cos(2 * u); };
  double err[2];
  for (int pass = 0; pass < 2; ++pass) {
    const int n = pass == 0 ? 128 : 256;
    const double h = 2.0 / n;
    MatrixX<double> samples(1, n + 1);
    for (int m = 0; m <= n; ++m) {
      const double u = (m * h) * (m * h);
      samples(0, m) = std::exp(-u) + 0.3 * std::cos(2 * u);
    }
    const MatrixX<double> lap = detail::radial_laplacian(samples, h);
    double e = 0;
    for (int m = 0; m <= n; ++m) {
      const double u = (m * h) * (m * h);
      e = std::max(e, std::abs(lap(0, m) - (4 * g1(u) + 4 * u * g2(u))));
    }
    err[pass] = e;
  }
  const double order = std::log2(err[0] / err[1]);
  CHECK(err[1] < 1e-2);
  CHECK(order > 1.6);
  CHECK(order < 2.6);
}

TEST_CASE("mlap plateau on the concentric disk away from the jump") {
  Phantom<double> p;
  p.disks.push_back({{0.0, 0.0}, 0.5, 1.0});
  const int n = 300;
  const Setup s = make_setup(p, n);
  const ImageData<double> recon = recon_mlap(s.means, s.grid);
  for (int i1 = 0; i1 <= n; ++i1)
    for (int i2 = 0; i2 <= n; ++i2) {
      const double rho = s.grid.point(i1, i2).norm();
      if (rho <= 0.35)  // interior plateau, clear of the discontinuity
        CHECK(recon.values(i1, i2) == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("wavefinite consumes only t <= 2R0 of a longer trace") {
  const Phantom<double> phantom = gaussian_phantom();
  const int n = 96;
  const Setup s = make_setup(phantom, n);
  // horizon 3 R0 with nodes landing exactly on t = 2 R0
  const TimeGrid<double> tlong(2.0 / n, (3 * n) / 2);
  const WaveTraceData<double> longtrace = wave_trace_W(s.means, tlong);
  WaveTraceData<double> cut(s.ring, TimeGrid<double>(2.0 / n, n), TraceKind::w);
  cut.values = longtrace.values.leftCols(n + 1);
  const ImageData<double> a = recon_wavefinite(longtrace, s.grid);
  const ImageData<double> b = recon_wavefinite(cut, s.grid);
  CHECK(a.values == b.values);
}
