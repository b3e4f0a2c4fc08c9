#pragma once

#include "cmtomo/parallel.hpp"
#include "cmtomo/types.hpp"

namespace cmtomo {

/// Discrete radial filter approximating d/dr ( r d/dr ), the composition of
/// centered first and second differences with pointwise multiplication by r:
///   out[k][m] = ((m+1/2) G[k][m+1] + (m-1/2) G[k][m-1] - 2m G[k][m]) / hr,
/// with ghost values G[k][-1] = G[k][nr+1] = 0. Annihilates constants and maps
/// the linear ramp r^m to 1 at interior indices; exact on quadratics.
template <class Scalar>
MeansData<Scalar> radial_filter_D(const MeansData<Scalar>& means) {
  detail::require(means.rgrid.nr >= 2, "radial_filter_D: need nr >= 2");
  MeansData<Scalar> out(means.ring, means.rgrid);
  const auto& g = means.values;
  const Scalar inv_h = Scalar(1) / means.rgrid.step();
  const int nr = means.rgrid.nr;
  for (Eigen::Index k = 0; k < g.rows(); ++k) {
    for (int m = 0; m <= nr; ++m) {
      const Scalar up = (m + 1 <= nr) ? g(k, m + 1) : Scalar(0);
      const Scalar dn = (m - 1 >= 0) ? g(k, m - 1) : Scalar(0);
      // difference form of (m+1/2) up + (m-1/2) dn - 2m g: annihilates
      // constants exactly instead of to rounding
      out.values(k, m) = inv_h * ((Scalar(m) + Scalar(0.5)) * (up - g(k, m)) +
                                  (Scalar(m) - Scalar(0.5)) * (dn - g(k, m)));
    }
  }
  return out;
}

/// Analytic integrals of the log kernel against the piecewise-linear basis:
///   a[m][m'] = integral_{r^m'}^{r^m'+1} log|r^2 - (r^m)^2| dr
///   b[m][m'] = integral_{r^m'}^{r^m'+1} (r - r^m') log|r^2 - (r^m)^2| dr
/// evaluated in closed form with the 0*log0 = 0 convention at coincident
/// nodes. Rows are indexed by the evaluation node m, columns by the segment.
template <class Scalar>
struct KernelTable {
  RadialGrid<Scalar> rgrid;
  MatrixX<Scalar> a;
  MatrixX<Scalar> b;
};

template <class Scalar>
KernelTable<Scalar> build_kernel_table(const RadialGrid<Scalar>& rgrid) {
  detail::require(rgrid.nr >= 1, "build_kernel_table: need nr >= 1");
  const int nr = rgrid.nr;
  KernelTable<Scalar> table{rgrid, MatrixX<Scalar>(nr + 1, nr),
                            MatrixX<Scalar>(nr + 1, nr)};
  for (int m = 0; m <= nr; ++m) {
    const Scalar rm = rgrid.node(m);
    auto anti_a = [rm](Scalar r) {
      return xlogabs(r - rm) + xlogabs(r + rm) - Scalar(2) * r;
    };
    auto anti_b = [rm](Scalar r) {
      return xlogabs(r * r - rm * rm) - r * r;
    };
    for (int mp = 0; mp < nr; ++mp) {
      const Scalar lo = rgrid.node(mp);
      const Scalar hi = rgrid.node(mp + 1);
      const Scalar am = anti_a(hi) - anti_a(lo);
      table.a(m, mp) = am;
      table.b(m, mp) = -lo * am + Scalar(0.5) * (anti_b(hi) - anti_b(lo));
    }
  }
  return table;
}

/// Exact integral of the piecewise-linear interpolant of G against the
/// log kernel, evaluated at every radial node:
///   out[k][m] = sum_m' a[m][m'] G[k][m'] + (1/hr) sum_m' b[m][m'] (G[k][m'+1]-G[k][m']).
template <class Scalar>
MeansData<Scalar> log_convolve_I(const MeansData<Scalar>& means,
                                 const KernelTable<Scalar>& table) {
  detail::require(means.rgrid.nr == table.rgrid.nr &&
                      means.rgrid.r0 == table.rgrid.r0,
                  "log_convolve_I: kernel table built for a different grid");
  const int nr = means.rgrid.nr;
  const auto& g = means.values;
  MeansData<Scalar> out(means.ring, means.rgrid);
  const MatrixX<Scalar> left = g.leftCols(nr);
  const MatrixX<Scalar> diff = g.rightCols(nr) - g.leftCols(nr);
  out.values.noalias() = left * table.a.transpose();
  out.values.noalias() +=
      (Scalar(1) / means.rgrid.step()) * (diff * table.b.transpose());
  return out;
}

enum class Extension { odd, even };

/// Principal-value convolution against the pole kernel 1/(s - r) over the
/// extended grid r in [-2R0, 2R0], evaluated at the nodes s = r^m, m = 0..nr.
/// The per-detector samples are extended to negative radii as an odd or even
/// function and the piecewise-linear interpolant is integrated exactly; the
/// node-log terms carry the coefficient (b_j - b_{j-1})(s - r_j), so the
/// 0*log0 convention closes the coincident-node case.
template <class Scalar>
MatrixX<Scalar> pv_pole_filter(const MeansData<Scalar>& g, Extension ext) {
  const int nr = g.rgrid.nr;
  detail::require(nr >= 2, "pv_pole_filter: need nr >= 2");
  const Scalar h = g.rgrid.step();
  const int nk = g.ring.count();
  const int ext_nodes = 2 * nr + 1;  // j = -nr .. nr stored at j + nr
  MatrixX<Scalar> out(nk, nr + 1);

  parallel_for(0, nk, [&](int k) {
    VectorX<Scalar> e(ext_nodes);
    for (int j = -nr; j <= nr; ++j) {
      const Scalar v = g.values(k, std::abs(j));
      e(j + nr) = (j < 0 && ext == Extension::odd) ? -v : v;
    }
    VectorX<Scalar> slope(ext_nodes - 1);
    for (int j = 0; j + 1 < ext_nodes; ++j) slope(j) = (e(j + 1) - e(j)) / h;

    for (int mbar = 0; mbar <= nr; ++mbar) {
      const Scalar s = Scalar(mbar) * h;
      Scalar acc = -(e(ext_nodes - 1) - e(0));  // -h * sum of slopes
      for (int j = -nr; j <= nr; ++j) {
        const Scalar rj = Scalar(j) * h;
        if (s == rj) continue;  // coefficient vanishes with the node distance
        Scalar coeff;
        if (j == -nr)
          coeff = e(0) + slope(0) * (s - rj);
        else if (j == nr)
          coeff = -(e(ext_nodes - 1) + slope(ext_nodes - 2) * (s - rj));
        else
          coeff = (slope(j + nr) - slope(j + nr - 1)) * (s - rj);
        acc += coeff * std::log(std::abs(s - rj));
      }
      out(k, mbar) = acc;
    }
  });
  return out;
}

/// Standard 5-point discrete Laplacian at interior grid points; the outer
/// ring of the grid is set to zero. Exact on quadratics.
template <class Scalar>
ImageData<Scalar> discrete_laplacian(const ImageData<Scalar>& img) {
  detail::require(img.grid.n >= 2, "discrete_laplacian: need n >= 2");
  ImageData<Scalar> out(img.grid);
  const Scalar inv_h2 = Scalar(1) / (img.grid.step() * img.grid.step());
  const int n1 = img.grid.count();
  const auto& f = img.values;
  for (int i1 = 1; i1 + 1 < n1; ++i1)
    for (int i2 = 1; i2 + 1 < n1; ++i2)
      out.values(i1, i2) = inv_h2 * (f(i1 + 1, i2) + f(i1 - 1, i2) +
                                     f(i1, i2 + 1) + f(i1, i2 - 1) -
                                     Scalar(4) * f(i1, i2));
  return out;
}

}  // namespace cmtomo
