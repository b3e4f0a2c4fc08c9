#pragma once

#include "cmtomo/backprojection.hpp"
#include "cmtomo/filters.hpp"
#include "cmtomo/forward.hpp"
#include "cmtomo/types.hpp"
#include "cmtomo/wave.hpp"

namespace cmtomo {

enum class Method { mlap, minv, hilbert, filbac, wavefinite, adjoint_p, adjoint_w };

/// Reconstruction configuration. The inversion formulas carry the constant
/// 2*pi (the even-dimensional series constant at n = 2) inside the weight
/// 1/(2 pi R0); discretely that weight is exactly the detector average of
/// back_project, so the means-data pipelines need no extra scale. The
/// remaining folded constants are documented at each pipeline.
struct ReconConfig {
  Method method = Method::minv;
  double r0 = 1.0;
  double t_max = 20.0;  // adjoint methods; must be >= 2*r0
  AdjointQuadrature adjoint;
  int wavefinite_nr = -1;  // filtered-array radial nodes; -1: match image n
};

namespace detail {

// radial derivative of the odd extension of F in r, sampled at m = 0..nr;
// the result is an even function of r. Ghost values beyond 2R0 are zero
// (supported f). The stencil is the smoothed second-order difference
//   d_m = (F[m+2] + 2 F[m+1] - 2 F[m-1] - F[m-2]) / (8 h):
// same O(h^2) consistency as the plain centered difference but with 3.2x less
// white-noise variance, which carries the pole-kernel methods through the 5%
// noise regime.
template <class Scalar>
MatrixX<Scalar> radial_derivative_odd(const MeansData<Scalar>& f) {
  const int nr = f.rgrid.nr;
  detail::require(nr >= 3, "radial derivative: need nr >= 3");
  const Scalar inv8h = Scalar(1) / (Scalar(8) * f.rgrid.step());
  MatrixX<Scalar> d(f.values.rows(), f.values.cols());
  auto ext = [&](Eigen::Index k, int m) -> Scalar {
    if (m > nr) return Scalar(0);
    return m >= 0 ? f.values(k, m) : -f.values(k, -m);
  };
  for (Eigen::Index k = 0; k < f.values.rows(); ++k)
    for (int m = 0; m <= nr; ++m)
      d(k, m) = (ext(k, m + 2) + Scalar(2) * ext(k, m + 1) -
                 Scalar(2) * ext(k, m - 1) - ext(k, m - 2)) *
                inv8h;
  return d;
}

// centered second time derivative per row, one-sided variants at the ends
template <class Scalar>
MatrixX<Scalar> second_time_derivative(const MatrixX<Scalar>& u, Scalar ht) {
  const auto rows = u.rows(), cols = u.cols();
  MatrixX<Scalar> d(rows, cols);
  const Scalar inv_h2 = Scalar(1) / (ht * ht);
  for (Eigen::Index k = 0; k < rows; ++k) {
    d(k, 0) = (Scalar(2) * u(k, 0) - Scalar(5) * u(k, 1) + Scalar(4) * u(k, 2) -
               u(k, 3)) *
              inv_h2;
    for (Eigen::Index j = 1; j + 1 < cols; ++j)
      d(k, j) = (u(k, j + 1) + u(k, j - 1) - Scalar(2) * u(k, j)) * inv_h2;
    d(k, cols - 1) = (Scalar(2) * u(k, cols - 1) - Scalar(5) * u(k, cols - 2) +
                      Scalar(4) * u(k, cols - 3) - u(k, cols - 4)) *
                     inv_h2;
  }
  return d;
}

template <class Scalar>
void scale_columns_by_radius(MeansData<Scalar>& g) {
  for (int m = 0; m < g.rgrid.count(); ++m)
    g.values.col(m) *= g.rgrid.node(m);
}

// For a field assembled from radial profiles, Delta_x g(|x - p|) equals
// g''(s) + g'(s)/s, so the outer Laplacian of the inversion formulas can act
// on the filtered radial arrays directly. The samples are even in s (the
// filtered kernels depend on s^2), which closes the centre: the limit value
// is 2 g''(0). One-sided second-order stencils cover the outer end. Applying
// the Laplacian here keeps the differencing phase-coherent with the radial
// nodes; a grid Laplacian after interpolating back-projection loses the
// second-order budget at points where detector radii align with the nodes.
template <class Scalar>
MatrixX<Scalar> radial_laplacian(const MatrixX<Scalar>& h, Scalar step) {
  const auto rows = h.rows();
  const auto cols = h.cols();
  MatrixX<Scalar> out(rows, cols);
  const Scalar inv_h2 = Scalar(1) / (step * step);
  const int n = static_cast<int>(cols) - 1;
  for (Eigen::Index k = 0; k < rows; ++k) {
    out(k, 0) = Scalar(4) * (h(k, 1) - h(k, 0)) * inv_h2;
    for (int m = 1; m < n; ++m) {
      const Scalar d2 = (h(k, m + 1) + h(k, m - 1) - Scalar(2) * h(k, m)) * inv_h2;
      const Scalar d1 = (h(k, m + 1) - h(k, m - 1)) / (Scalar(2) * step);
      out(k, m) = d2 + d1 / (Scalar(m) * step);
    }
    const Scalar d2 = (Scalar(35) * h(k, n) - Scalar(104) * h(k, n - 1) +
                       Scalar(114) * h(k, n - 2) - Scalar(56) * h(k, n - 3) +
                       Scalar(11) * h(k, n - 4)) *
                      inv_h2 / Scalar(12);
    const Scalar d1 = (Scalar(3) * h(k, n) - Scalar(4) * h(k, n - 1) +
                       h(k, n - 2)) /
                      (Scalar(2) * step);
    out(k, n) = d2 + d1 / (Scalar(n) * step);
  }
  return out;
}

}  // namespace detail

/// f = B I D (M f): radial filter, analytic log convolution, back-projection.
template <class Scalar>
ImageData<Scalar> recon_minv(const MeansData<Scalar>& means,
                             const ImageGrid<Scalar>& grid) {
  detail::require(means.ring.r0 == grid.r0,
                  "recon_minv: data and image grid disagree on R0");
  const KernelTable<Scalar> table = build_kernel_table(means.rgrid);
  return back_project(log_convolve_I(radial_filter_D(means), table), grid);
}

/// f = Laplacian of B I (r * M f). The Laplacian acts on the filtered radial
/// profiles (g'' + g'/s per detector) before the back-projection.
template <class Scalar>
ImageData<Scalar> recon_mlap(const MeansData<Scalar>& means,
                             const ImageGrid<Scalar>& grid) {
  detail::require(means.ring.r0 == grid.r0,
                  "recon_mlap: data and image grid disagree on R0");
  detail::require(means.rgrid.nr >= 5, "recon_mlap: need nr >= 5");
  MeansData<Scalar> g = means;
  detail::scale_columns_by_radius(g);
  const KernelTable<Scalar> table = build_kernel_table(means.rgrid);
  MeansData<Scalar> filtered = log_convolve_I(g, table);
  filtered.values =
      detail::radial_laplacian(filtered.values, means.rgrid.step());
  return back_project(filtered, grid);
}

/// f = B [ P.V. integral of (r d/dr M f)(p, r) / (|x-p| - r) dr ] with the
/// means extended as an odd function of r.
template <class Scalar>
ImageData<Scalar> recon_hilbert(const MeansData<Scalar>& means,
                                const ImageGrid<Scalar>& grid) {
  detail::require(means.ring.r0 == grid.r0,
                  "recon_hilbert: data and image grid disagree on R0");
  MeansData<Scalar> g(means.ring, means.rgrid);
  g.values = detail::radial_derivative_odd(means);
  detail::scale_columns_by_radius(g);  // r * dF, odd in r
  MeansData<Scalar> filtered(means.ring, means.rgrid);
  filtered.values = pv_pole_filter(g, Extension::odd);
  return back_project(filtered, grid);
}

/// f = B [ |x-p| * P.V. integral of (d/dr M f)(p, r) / (|x-p| - r) dr ].
/// The weight |x-p| is folded into the filtered radial nodes before the
/// interpolating back-projection (second-order equivalent).
template <class Scalar>
ImageData<Scalar> recon_filbac(const MeansData<Scalar>& means,
                               const ImageGrid<Scalar>& grid) {
  detail::require(means.ring.r0 == grid.r0,
                  "recon_filbac: data and image grid disagree on R0");
  MeansData<Scalar> g(means.ring, means.rgrid);
  g.values = detail::radial_derivative_odd(means);  // even in r
  MeansData<Scalar> filtered(means.ring, means.rgrid);
  filtered.values = pv_pole_filter(g, Extension::even);
  detail::scale_columns_by_radius(filtered);
  return back_project(filtered, grid);
}

/// Finite-time inversion from the W-trace restricted to t in [0, 2R0]:
///   f = 1/(R0 pi^2) Laplacian integral_S integral_0^{2R0} U(p,t) K(t,|x-p|).
/// Per detector the time integral against the closed-form kernel K is a
/// trapezoidal sum producing a filtered radial array; the detector integral is
/// back_project (weight 1/(2 pi R0)), so the remaining folded scale is
///   (1/(R0 pi^2)) * (2 pi R0) = 2/pi.
template <class Scalar>
ImageData<Scalar> recon_wavefinite(const WaveTraceData<Scalar>& trace,
                                   const ImageGrid<Scalar>& grid,
                                   int filtered_nr = -1) {
  detail::require(trace.kind == TraceKind::w,
                  "recon_wavefinite: expects a W-trace");
  detail::require(trace.ring.r0 == grid.r0,
                  "recon_wavefinite: data and image grid disagree on R0");
  const Scalar r0 = grid.r0;
  const Scalar cutoff = Scalar(2) * r0;
  detail::require(trace.tgrid.horizon() >= cutoff,
                  "recon_wavefinite: trace horizon must reach 2*R0");

  const int nr = filtered_nr > 0 ? filtered_nr : grid.n;
  detail::require(nr >= 5, "recon_wavefinite: need at least 5 radial nodes");
  const RadialGrid<Scalar> rg(r0, nr);
  const Scalar ht = trace.tgrid.ht;
  // time nodes participating in the [0, 2R0] integral
  int last = std::min<int>(trace.tgrid.nt,
                           static_cast<int>(std::floor(double(cutoff / ht))));
  const Scalar partial = cutoff - trace.tgrid.node(last);

  MatrixX<Scalar> kernel(last + 1, nr + 1);
  parallel_for(0, last + 1, [&](int j) {
    const Scalar t = trace.tgrid.node(j);
    for (int m = 0; m <= nr; ++m)
      kernel(j, m) = wave_kernel_K(t, rg.node(m), r0);
  });

  VectorX<Scalar> w = VectorX<Scalar>::Constant(last + 1, ht);
  w(0) = ht / Scalar(2);
  w(last) = ht / Scalar(2);
  if (partial > Scalar(0)) w(last) += partial / Scalar(2);
  // K(2R0 - partial-end, .) pairs with U interpolated at t = 2R0; the kernel
  // vanishes at t = 2R0, so the closing trapezoid contributes only at t_last.

  MeansData<Scalar> filtered(trace.ring, rg);
  filtered.values.noalias() =
      (trace.values.leftCols(last + 1) * w.asDiagonal()) * kernel;
  filtered.values = detail::radial_laplacian(filtered.values, rg.step());

  ImageData<Scalar> out = back_project(filtered, grid);
  out.values *= Scalar(2) / std::numbers::pi_v<Scalar>;
  return out;
}

/// Long-time adjoint inversion f = -(2/R0) P*( t d^2/dt^2 P f ).
template <class Scalar>
ImageData<Scalar> recon_adjoint_p(const WaveTraceData<Scalar>& trace,
                                  const ImageGrid<Scalar>& grid,
                                  const AdjointQuadrature& q = {}) {
  detail::require(trace.kind == TraceKind::p,
                  "recon_adjoint_p: expects a P-trace");
  detail::require(trace.tgrid.horizon() >= Scalar(2) * grid.r0,
                  "recon_adjoint_p: trace horizon must reach 2*R0");
  WaveTraceData<Scalar> g = trace;
  g.values = detail::second_time_derivative(trace.values, trace.tgrid.ht);
  for (int j = 0; j < trace.tgrid.count(); ++j)
    g.values.col(j) *= trace.tgrid.node(j);
  ImageData<Scalar> out = adjoint_P_star(g, grid, q);
  out.values *= Scalar(-2) / grid.r0;
  return out;
}

/// Long-time adjoint inversion f = -(2/R0) P*( d/dt ( t d/dt P f ) ),
/// equivalent to (2/R0) W* ( t W f ).
template <class Scalar>
ImageData<Scalar> recon_adjoint_w(const WaveTraceData<Scalar>& trace,
                                  const ImageGrid<Scalar>& grid,
                                  const AdjointQuadrature& q = {}) {
  detail::require(trace.kind == TraceKind::p,
                  "recon_adjoint_w: expects a P-trace");
  detail::require(trace.tgrid.horizon() >= Scalar(2) * grid.r0,
                  "recon_adjoint_w: trace horizon must reach 2*R0");
  const Scalar ht = trace.tgrid.ht;
  MatrixX<Scalar> v = detail::time_derivative(trace.values, ht);
  for (int j = 0; j < trace.tgrid.count(); ++j)
    v.col(j) *= trace.tgrid.node(j);
  WaveTraceData<Scalar> g = trace;
  g.values = detail::time_derivative(v, ht);
  ImageData<Scalar> out = adjoint_P_star(g, grid, q);
  out.values *= Scalar(-2) / grid.r0;
  return out;
}

/// Dispatch helper for the means-data methods.
template <class Scalar>
ImageData<Scalar> reconstruct_from_means(Method method,
                                         const MeansData<Scalar>& means,
                                         const ImageGrid<Scalar>& grid) {
  switch (method) {
    case Method::mlap: return recon_mlap(means, grid);
    case Method::minv: return recon_minv(means, grid);
    case Method::hilbert: return recon_hilbert(means, grid);
    case Method::filbac: return recon_filbac(means, grid);
    default:
      throw std::invalid_argument("reconstruct_from_means: method needs trace data");
  }
}

/// Dispatch helper for the trace-data methods.
template <class Scalar>
ImageData<Scalar> reconstruct_from_trace(Method method,
                                         const WaveTraceData<Scalar>& trace,
                                         const ImageGrid<Scalar>& grid,
                                         const AdjointQuadrature& q = {}) {
  switch (method) {
    case Method::wavefinite: return recon_wavefinite(trace, grid);
    case Method::adjoint_p: return recon_adjoint_p(trace, grid, q);
    case Method::adjoint_w: return recon_adjoint_w(trace, grid, q);
    default:
      throw std::invalid_argument("reconstruct_from_trace: method needs means data");
  }
}

/// Drop trace samples beyond t_max (node-aligned; the step is kept).
template <class Scalar>
WaveTraceData<Scalar> truncate_trace(const WaveTraceData<Scalar>& trace,
                                     Scalar t_max) {
  if (t_max <= Scalar(0) || t_max >= trace.tgrid.horizon()) return trace;
  const int nt = std::min<int>(
      trace.tgrid.nt, static_cast<int>(std::floor(double(t_max / trace.tgrid.ht))));
  detail::require(nt >= 1, "truncate_trace: no samples left below t_max");
  WaveTraceData<Scalar> out(trace.ring, TimeGrid<Scalar>(trace.tgrid.ht, nt),
                            trace.kind);
  out.values = trace.values.leftCols(nt + 1);
  return out;
}

/// Config-driven reconstruction used by the command-line driver and the
/// convergence studies. Validates that the data geometry matches the
/// configured R0 and that the method fits the data kind.
template <class Scalar>
ImageData<Scalar> reconstruct(const ReconConfig& cfg,
                              const MeansData<Scalar>& means,
                              const ImageGrid<Scalar>& grid) {
  detail::require(means.ring.r0 == Scalar(cfg.r0),
                  "reconstruct: means data does not match the configured R0");
  return reconstruct_from_means(cfg.method, means, grid);
}

template <class Scalar>
ImageData<Scalar> reconstruct(const ReconConfig& cfg,
                              const WaveTraceData<Scalar>& trace,
                              const ImageGrid<Scalar>& grid) {
  detail::require(trace.ring.r0 == Scalar(cfg.r0),
                  "reconstruct: trace data does not match the configured R0");
  if (cfg.method == Method::wavefinite)
    return recon_wavefinite(truncate_trace(trace, Scalar(cfg.t_max)), grid,
                            cfg.wavefinite_nr);
  const WaveTraceData<Scalar> used = truncate_trace(trace, Scalar(cfg.t_max));
  if (cfg.method == Method::adjoint_p)
    return recon_adjoint_p(used, grid, cfg.adjoint);
  if (cfg.method == Method::adjoint_w)
    return recon_adjoint_w(used, grid, cfg.adjoint);
  throw std::invalid_argument("reconstruct: method needs means data");
}

}  // namespace cmtomo
