#pragma once

#include <chrono>
#include <vector>

#include "cmtomo/forward.hpp"
#include "cmtomo/phantom.hpp"
#include "cmtomo/quadrature.hpp"
#include "cmtomo/reconstruct.hpp"
#include "cmtomo/types.hpp"

namespace cmtomo {

struct KeyIdentityResult {
  double lhs = 0;  // quadrature of the circle integral
  double rhs = 0;  // 2 pi R0 (log|x-y| + log R0)
};

/// Checks the key integral identity
///   integral_S log| |x-p|^2 - |y-p|^2 | ds(p) = 2 pi R0 log|x-y| + 2 pi R0 log R0.
/// The integrand has two integrable log singularities where the perpendicular
/// bisector of x, y crosses the circle; the quadrature splits the circle
/// there and applies the trapezoidal rule under an endpoint-clustering change
/// of variables (quad_n nodes total), which restores fast convergence.
inline KeyIdentityResult verify_key_identity(const Vec2<double>& x,
                                             const Vec2<double>& y, double r0,
                                             int quad_n) {
  detail::require(x.norm() < r0 && y.norm() < r0,
                  "verify_key_identity: points must lie inside the disk");
  detail::require((x - y).norm() > 0, "verify_key_identity: x and y coincide");
  detail::require(quad_n >= 64, "verify_key_identity: quad_n too small");

  const double two_pi = 2 * std::numbers::pi;
  auto integrand = [&](double phi) {
    const Vec2<double> p{r0 * std::cos(phi), r0 * std::sin(phi)};
    return std::log(std::abs((x - p).squaredNorm() - (y - p).squaredNorm()));
  };

  // singular angles: p.(x - y) = (|x|^2 - |y|^2)/2
  const Vec2<double> d = x - y;
  const double phi_e = std::atan2(d.y(), d.x());
  const double a = (x.squaredNorm() - y.squaredNorm()) / (2 * r0 * d.norm());
  const double gamma = std::acos(std::clamp(a, -1.0, 1.0));
  double a1 = phi_e + gamma, a2 = phi_e - gamma;
  if (a1 > a2) std::swap(a1, a2);
  const double arcs[2][2] = {{a1, a2}, {a2, a1 + two_pi}};

  double lhs = 0;
  const int n_arc = std::max(quad_n / 2, 32);
  for (const auto& arc : arcs) {
    const double lo = arc[0], len = arc[1] - arc[0];
    if (len <= 0) continue;
    double s = 0;
    for (int i = 1; i < n_arc; ++i) {
      const double u = double(i) / n_arc;
      const double w = u - std::sin(two_pi * u) / two_pi;
      const double dw = 1.0 - std::cos(two_pi * u);
      s += integrand(lo + len * w) * dw;
    }
    lhs += s * len / n_arc;
  }
  lhs *= r0;  // ds = R0 dphi

  const double rhs = two_pi * r0 * (std::log((x - y).norm()) + std::log(r0));
  return {lhs, rhs};
}

struct TraceIdentityResult {
  double lhs_l2 = 0;
  double rhs_asymm = 0;
  double rhs_symm = 0;
};

/// Evaluates both trace identities against the L2 pairing of the initial data:
///   <f, g> = -(2/R0) integral t u_tt v   and   <f, g> = (2/R0) integral t u_t v_t
/// over S x [0, Tmax], where u, v are the traces of the solutions with initial
/// data (0, f) and (0, g).
inline TraceIdentityResult verify_trace_identity(
    const Phantom<double>& f, const Phantom<double>& g, double r0, int nphi,
    int nr, const TimeGrid<double>& tgrid, int quad_n = 512,
    int l2_grid_n = 1024) {
  detail::require(tgrid.horizon() >= 20.0 * r0 * (1 - 1e-12),
                  "verify_trace_identity: horizon must reach 20*R0");
  validate_support(f, r0);
  validate_support(g, r0);

  TraceIdentityResult res;

  {  // <f, g> over the disk by tensor trapezoid (integrands vanish at the rim)
    const ImageGrid<double> grid(r0, l2_grid_n);
    const ImageData<double> fi = sample_phantom(f, grid);
    const ImageData<double> gi = sample_phantom(g, grid);
    const double h = grid.step();
    res.lhs_l2 = (fi.values.array() * gi.values.array()).sum() * h * h;
  }

  const DetectorRing<double> ring(r0, nphi);
  const RadialGrid<double> rgrid(r0, nr);
  const WaveTraceData<double> u =
      wave_trace_P(circular_mean(f, ring, rgrid, quad_n), tgrid);
  const WaveTraceData<double> v =
      wave_trace_P(circular_mean(g, ring, rgrid, quad_n), tgrid);

  const double ht = tgrid.ht;
  const MatrixX<double> ut = detail::time_derivative(u.values, ht);
  const MatrixX<double> vt = detail::time_derivative(v.values, ht);
  const MatrixX<double> utt = detail::second_time_derivative(u.values, ht);

  double asymm = 0, symm = 0;
  for (int k = 0; k < ring.count(); ++k) {
    double sa = 0, ss = 0;
    for (int j = 0; j <= tgrid.nt; ++j) {
      const double w = (j == 0 || j == tgrid.nt) ? ht / 2 : ht;
      const double t = tgrid.node(j);
      sa += w * t * utt(k, j) * v.values(k, j);
      ss += w * t * ut(k, j) * vt(k, j);
    }
    asymm += sa;
    symm += ss;
  }
  // ds(p) = R0 h_phi and the prefactor 2/R0 cancel the R0
  const double hphi = ring.angular_step();
  res.rhs_asymm = -2.0 * hphi * asymm;
  res.rhs_symm = 2.0 * hphi * symm;
  return res;
}

struct DiffAbelCheck {
  double derivative_coarse = 0;  // centered difference, step delta
  double derivative_fine = 0;    // centered difference, step delta/2
  double rhs = 0;                // (1/t) integral r (r h)' / sqrt(t^2-r^2) dr
};

/// Differentiation formula for the Abel-type fractional integral, checked on
/// a fixed smooth profile h(r) = exp(-r^2)(1 + r/2):
///   d/dt integral_0^t r h / sqrt(t^2-r^2) dr
///     = (1/t) integral_0^t r (d/dr (r h)) / sqrt(t^2-r^2) dr.
inline DiffAbelCheck verify_diff_abel(double t = 1.0, double delta = 1e-3,
                                      int gl_order = 48) {
  auto h = [](double r) { return std::exp(-r * r) * (1 + 0.5 * r); };
  auto drh = [](double r) {  // d/dr of r*h(r)
    return std::exp(-r * r) * (1 + r - 2 * r * r - r * r * r);
  };
  const GaussLegendre gl(gl_order);
  const double pi_half = std::numbers::pi / 2;
  auto abel = [&](double tt, auto&& profile) {
    auto g = [&](double psi) {
      const double r = tt * std::sin(psi);
      return r * profile(r);
    };
    return gauss_legendre(g, 0.0, pi_half, gl);
  };
  DiffAbelCheck out;
  out.derivative_coarse = (abel(t + delta, h) - abel(t - delta, h)) / (2 * delta);
  out.derivative_fine =
      (abel(t + delta / 2, h) - abel(t - delta / 2, h)) / delta;
  out.rhs = abel(t, drh) / t;
  return out;
}

struct ImageMetrics {
  double rel_l2 = 0;   // L2 of the difference over a zero reference is absolute
  double max_abs = 0;
};

/// Relative L2 and maximum absolute error over the grid points inside the disk.
inline ImageMetrics image_metrics(const ImageData<double>& recon,
                                  const ImageData<double>& reference) {
  detail::require(recon.grid.n == reference.grid.n &&
                      recon.grid.r0 == reference.grid.r0,
                  "image_metrics: image grids differ");
  double d2 = 0, r2 = 0, mx = 0;
  const int n1 = recon.grid.count();
  for (int i1 = 0; i1 < n1; ++i1)
    for (int i2 = 0; i2 < n1; ++i2) {
      if (!recon.grid.inside_disk(i1, i2)) continue;
      const double d = recon.values(i1, i2) - reference.values(i1, i2);
      d2 += d * d;
      r2 += reference.values(i1, i2) * reference.values(i1, i2);
      mx = std::max(mx, std::abs(d));
    }
  ImageMetrics m;
  m.max_abs = mx;
  m.rel_l2 = (r2 > 0) ? std::sqrt(d2 / r2) : std::sqrt(d2);
  return m;
}

struct StudyRow {
  int n = 0;
  double max_err = 0;
  double l2_err = 0;
  double recon_seconds = 0;
  double observed_order = 0;  // log2(prev_max_err / max_err); 0 for the first row
};

inline bool phantom_is_smooth(const Phantom<double>& p) {
  return p.disks.empty();
}

/// Runs the full pipeline at each N = Nphi = Nr and reports errors against the
/// sampled phantom plus pairwise observed orders of the max-norm error.
/// Indicator phantoms are reported but their observed order carries no
/// second-order expectation. Exact (noise-free) data only.
inline std::vector<StudyRow> convergence_study(const Phantom<double>& phantom,
                                               Method method,
                                               const std::vector<int>& sizes,
                                               int quad_n = 512) {
  detail::require(!sizes.empty(), "convergence_study: no sizes");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    detail::require(sizes[i] >= 32, "convergence_study: sizes must be >= 32");
    if (i) detail::require(sizes[i] > sizes[i - 1],
                           "convergence_study: sizes must ascend");
  }
  const double r0 = 1.0;
  validate_support(phantom, r0);

  std::vector<StudyRow> rows;
  for (int n : sizes) {
    const DetectorRing<double> ring(r0, n);
    const RadialGrid<double> rgrid(r0, n);
    const ImageGrid<double> grid(r0, n);

    MeansData<double> means;
    WaveTraceData<double> trace;
    const bool from_trace = (method == Method::wavefinite ||
                             method == Method::adjoint_p ||
                             method == Method::adjoint_w);
    means = circular_mean(phantom, ring, rgrid, quad_n);
    if (method == Method::wavefinite) {
      trace = wave_trace_W(means, TimeGrid<double>(2 * r0 / n, n));
    } else if (from_trace) {
      trace = wave_trace_P(means, TimeGrid<double>(2 * r0 / n, 10 * n));
    }

    ReconConfig cfg;
    cfg.method = method;
    cfg.r0 = r0;
    if (from_trace) cfg.t_max = trace.tgrid.horizon();

    const auto t0 = std::chrono::steady_clock::now();
    const ImageData<double> recon = from_trace ? reconstruct(cfg, trace, grid)
                                               : reconstruct(cfg, means, grid);
    const auto t1 = std::chrono::steady_clock::now();

    const ImageMetrics m = image_metrics(recon, sample_phantom(phantom, grid));
    StudyRow row;
    row.n = n;
    row.max_err = m.max_abs;
    row.l2_err = m.rel_l2;
    row.recon_seconds = std::chrono::duration<double>(t1 - t0).count();
    if (!rows.empty() && m.max_abs > 0 && rows.back().max_err > 0)
      row.observed_order = std::log2(rows.back().max_err / m.max_abs);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace cmtomo
