#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "cmtomo/forward.hpp"
#include "cmtomo/io.hpp"
#include "cmtomo/reconstruct.hpp"
#include "cmtomo/verify.hpp"

namespace {

using namespace cmtomo;

struct VerifyFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Method parse_method(const std::string& name) {
  if (name == "mlap") return Method::mlap;
  if (name == "minv") return Method::minv;
  if (name == "hilbert") return Method::hilbert;
  if (name == "filbac") return Method::filbac;
  if (name == "wavefinite") return Method::wavefinite;
  if (name == "adjoint-p") return Method::adjoint_p;
  if (name == "adjoint-w") return Method::adjoint_w;
  throw std::invalid_argument("unknown method: " + name);
}

Phantom<double> load_phantom(const std::string& path, double r0) {
  Phantom<double> p = read_phantom_spec(path);
  validate_support(p, r0);
  return p;
}

void run_phantom(const std::string& spec, int n, double r0,
                 const std::string& out) {
  const ImageGrid<double> grid(r0, n);
  write_rgf(out, sample_phantom(load_phantom(spec, r0), grid));
}

void run_forward(const std::string& spec, const std::string& kind, int nphi,
                 int nr, int nt, double tmax, double r0, int quad,
                 const std::string& out) {
  const Phantom<double> phantom = load_phantom(spec, r0);
  const DetectorRing<double> ring(r0, nphi);
  const RadialGrid<double> rgrid(r0, nr);
  const MeansData<double> means = circular_mean(phantom, ring, rgrid, quad);
  if (kind == "means") {
    write_rgf(out, means);
    return;
  }
  detail::require(nt > 0 && tmax > 0,
                  "forward: trace kinds need --nt and --tmax");
  const TimeGrid<double> tgrid(tmax / nt, nt);
  if (kind == "traceP")
    write_rgf(out, wave_trace_P(means, tgrid));
  else if (kind == "traceW")
    write_rgf(out, wave_trace_W(means, tgrid));
  else
    throw std::invalid_argument("forward: unknown --kind " + kind);
}

void run_noise(const std::string& in, double level, std::uint64_t seed,
               const std::string& out) {
  GridFile data = read_rgf(in);
  std::visit(
      [&](auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ImageData<double>>) {
          throw std::invalid_argument("noise: expects means or trace data");
        } else {
          write_rgf(out, add_noise(d, level, seed));
        }
      },
      data);
}

void run_recon(const std::string& in, const std::string& method_name, int n,
               double tmax, const std::string& out, const std::string& pgm) {
  ReconConfig cfg;
  cfg.method = parse_method(method_name);
  GridFile data = read_rgf(in);
  ImageData<double> img;
  if (auto* means = std::get_if<MeansData<double>>(&data)) {
    cfg.r0 = means->ring.r0;
    img = reconstruct(cfg, *means, ImageGrid<double>(cfg.r0, n));
  } else if (auto* trace = std::get_if<WaveTraceData<double>>(&data)) {
    const bool want_p =
        (cfg.method == Method::adjoint_p || cfg.method == Method::adjoint_w);
    if (cfg.method == Method::wavefinite)
      detail::require(trace->kind == TraceKind::w,
                      "recon: wavefinite needs a traceW file");
    else if (want_p)
      detail::require(trace->kind == TraceKind::p,
                      "recon: adjoint methods need a traceP file");
    else
      throw std::invalid_argument("recon: method " + method_name +
                                  " needs a means file");
    cfg.r0 = trace->ring.r0;
    cfg.t_max = tmax > 0 ? tmax : trace->tgrid.horizon();
    img = reconstruct(cfg, *trace, ImageGrid<double>(cfg.r0, n));
  } else {
    throw std::invalid_argument("recon: input file holds an image");
  }
  write_rgf(out, img);
  if (!pgm.empty()) export_pgm(img, pgm);
}

void run_verify_keyident(double r0, std::vector<double> xs,
                         std::vector<double> ys, int quad, double tol) {
  detail::require(xs.size() == 2 && ys.size() == 2,
                  "verify keyident: --x and --y take two coordinates");
  const auto res = verify_key_identity({xs[0], xs[1]}, {ys[0], ys[1]}, r0, quad);
  const double rel = std::abs(res.lhs - res.rhs) / (1 + std::abs(res.rhs));
  std::printf("keyident lhs %.12e rhs %.12e rel %.3e\n", res.lhs, res.rhs, rel);
  if (!(rel <= tol)) throw VerifyFailure("keyident residual above tolerance");
}

void run_verify_trace(const std::string& fspec, const std::string& gspec,
                      double r0, int nphi, int nr, int nt, double tmax,
                      int quad, double tol) {
  const Phantom<double> f = load_phantom(fspec, r0);
  const Phantom<double> g = load_phantom(gspec, r0);
  const auto res = verify_trace_identity(f, g, r0, nphi, nr,
                                         TimeGrid<double>(tmax / nt, nt), quad);
  const double scale = 1 + std::abs(res.lhs_l2);
  const double ra = std::abs(res.rhs_asymm - res.lhs_l2) / scale;
  const double rs = std::abs(res.rhs_symm - res.lhs_l2) / scale;
  std::printf("trace lhs %.12e asymm %.12e symm %.12e rel %.3e %.3e\n",
              res.lhs_l2, res.rhs_asymm, res.rhs_symm, ra, rs);
  if (!(ra <= tol && rs <= tol))
    throw VerifyFailure("trace identity residual above tolerance");
}

void run_verify_diffabel(double tol) {
  const auto res = verify_diff_abel();
  const double rel =
      std::abs(res.derivative_fine - res.rhs) / std::abs(res.rhs);
  std::printf("diffabel lhs %.12e rhs %.12e rel %.3e\n", res.derivative_fine,
              res.rhs, rel);
  if (!(rel <= tol)) throw VerifyFailure("diffabel residual above tolerance");
}

void run_study(const std::string& spec, const std::string& method_name,
               const std::vector<int>& sizes, int quad,
               const std::string& out) {
  const Phantom<double> phantom = load_phantom(spec, 1.0);
  const auto rows = convergence_study(phantom, parse_method(method_name), sizes, quad);
  std::ofstream o(out);
  if (!o) throw DataFormatError("cannot open for writing: " + out);
  o << "n\tmax_err\tl2_err\trecon_seconds\tobserved_order\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d\t%.9e\t%.9e\t%.3f\t%.3f\n", r.n,
                  r.max_err, r.l2_err, r.recon_seconds, r.observed_order);
    o << buf;
  }
  if (!phantom_is_smooth(phantom))
    o << "# indicator primitives present: observed_order carries no "
         "second-order expectation\n";
}

void run_metrics(const std::string& recon_path, const std::string& ref_path) {
  const GridFile a = read_rgf(recon_path);
  const GridFile b = read_rgf(ref_path);
  const auto* recon = std::get_if<ImageData<double>>(&a);
  const auto* ref = std::get_if<ImageData<double>>(&b);
  detail::require(recon && ref, "metrics: both files must hold images");
  const ImageMetrics m = image_metrics(*recon, *ref);
  std::printf("rel_l2 %.9e\nmax_abs %.9e\n", m.rel_l2, m.max_abs);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Circular-mean and wave-trace tomography on the disk"};
  app.require_subcommand(1);

  // phantom
  std::string ph_spec, ph_out;
  int ph_n = 300;
  double ph_r0 = 1.0;
  auto* ph = app.add_subcommand("phantom", "Sample a phantom onto an image grid");
  ph->add_option("--spec", ph_spec)->required();
  ph->add_option("--n", ph_n)->required();
  ph->add_option("--r0", ph_r0);
  ph->add_option("--out", ph_out)->required();
  ph->callback([&] { run_phantom(ph_spec, ph_n, ph_r0, ph_out); });

  // forward
  std::string fw_spec, fw_kind = "means", fw_out;
  int fw_nphi = 300, fw_nr = 300, fw_nt = 0, fw_quad = 512;
  double fw_tmax = 0, fw_r0 = 1.0;
  auto* fw = app.add_subcommand("forward", "Simulate measurement data");
  fw->add_option("--spec", fw_spec)->required();
  fw->add_option("--nphi", fw_nphi)->required();
  fw->add_option("--nr", fw_nr)->required();
  fw->add_option("--kind", fw_kind)->check(CLI::IsMember({"means", "traceP", "traceW"}));
  fw->add_option("--nt", fw_nt);
  fw->add_option("--tmax", fw_tmax);
  fw->add_option("--r0", fw_r0);
  fw->add_option("--quad", fw_quad);
  fw->add_option("--out", fw_out)->required();
  fw->callback([&] {
    run_forward(fw_spec, fw_kind, fw_nphi, fw_nr, fw_nt, fw_tmax, fw_r0,
                fw_quad, fw_out);
  });

  // noise
  std::string nz_in, nz_out;
  double nz_level = 0.05;
  std::uint64_t nz_seed = 0;
  auto* nz = app.add_subcommand("noise", "Add seeded uniform noise to data");
  nz->add_option("--in", nz_in)->required();
  nz->add_option("--level", nz_level)->required();
  nz->add_option("--seed", nz_seed)->required();
  nz->add_option("--out", nz_out)->required();
  nz->callback([&] { run_noise(nz_in, nz_level, nz_seed, nz_out); });

  // recon
  std::string rc_in, rc_method, rc_out, rc_pgm;
  int rc_n = 300;
  double rc_tmax = 0;
  auto* rc = app.add_subcommand("recon", "Reconstruct an image from data");
  rc->add_option("--in", rc_in)->required();
  rc->add_option("--method", rc_method)
      ->required()
      ->check(CLI::IsMember({"mlap", "minv", "hilbert", "filbac", "wavefinite",
                             "adjoint-p", "adjoint-w"}));
  rc->add_option("--n", rc_n)->required();
  rc->add_option("--tmax", rc_tmax);
  rc->add_option("--out", rc_out)->required();
  rc->add_option("--pgm", rc_pgm);
  rc->callback([&] { run_recon(rc_in, rc_method, rc_n, rc_tmax, rc_out, rc_pgm); });

  // verify
  auto* vf = app.add_subcommand("verify", "Run analytic identity checks");
  vf->require_subcommand(1);

  std::vector<double> ki_x{0.5, 0.0}, ki_y{-0.5, 0.0};
  double ki_r0 = 1.0, ki_tol = 1e-6;
  int ki_quad = 1 << 16;
  auto* ki = vf->add_subcommand("keyident", "Circle log-kernel identity");
  ki->add_option("--x", ki_x)->expected(2);
  ki->add_option("--y", ki_y)->expected(2);
  ki->add_option("--r0", ki_r0);
  ki->add_option("--quad", ki_quad);
  ki->add_option("--tol", ki_tol);
  ki->callback([&] { run_verify_keyident(ki_r0, ki_x, ki_y, ki_quad, ki_tol); });

  std::string tr_f, tr_g;
  double tr_r0 = 1.0, tr_tmax = 0, tr_tol = 0.01;
  int tr_nphi = 191, tr_nr = 512, tr_nt = 4096, tr_quad = 512;
  auto* tr = vf->add_subcommand("trace", "Wave-trace inner-product identities");
  tr->add_option("--f", tr_f)->required();
  tr->add_option("--g", tr_g)->required();
  tr->add_option("--r0", tr_r0);
  tr->add_option("--nphi", tr_nphi);
  tr->add_option("--nr", tr_nr);
  tr->add_option("--nt", tr_nt);
  tr->add_option("--tmax", tr_tmax);
  tr->add_option("--quad", tr_quad);
  tr->add_option("--tol", tr_tol);
  tr->callback([&] {
    const double tmax = tr_tmax > 0 ? tr_tmax : 20.0 * tr_r0;
    run_verify_trace(tr_f, tr_g, tr_r0, tr_nphi, tr_nr, tr_nt, tmax, tr_quad,
                     tr_tol);
  });

  double da_tol = 1e-4;
  auto* da = vf->add_subcommand("diffabel", "Fractional-integral differentiation");
  da->add_option("--tol", da_tol);
  da->callback([&] { run_verify_diffabel(da_tol); });

  // study
  std::string st_spec, st_method, st_out;
  std::vector<int> st_sizes{64, 128, 256};
  int st_quad = 512;
  auto* st = app.add_subcommand("study", "Grid-refinement convergence study");
  st->add_option("--spec", st_spec)->required();
  st->add_option("--method", st_method)->required();
  st->add_option("--sizes", st_sizes)->delimiter(',');
  st->add_option("--quad", st_quad);
  st->add_option("--out", st_out)->required();
  st->callback([&] { run_study(st_spec, st_method, st_sizes, st_quad, st_out); });

  // metrics
  std::string mt_recon, mt_ref;
  auto* mt = app.add_subcommand("metrics", "Compare two images");
  mt->add_option("--recon", mt_recon)->required();
  mt->add_option("--ref", mt_ref)->required();
  mt->callback([&] { run_metrics(mt_recon, mt_ref); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const VerifyFailure& e) {
    std::cerr << "verification failed: " << e.what() << '\n';
    return 4;
  } catch (const DataFormatError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
