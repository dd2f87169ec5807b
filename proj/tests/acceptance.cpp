// End-to-end acceptance checks. `acceptance` runs all of them, `acceptance 4 7`
// runs a subset. One line per criterion; exit status is nonzero on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "apnn/acoustic.hpp"
#include "apnn/collision.hpp"
#include "apnn/config.hpp"
#include "apnn/exact_bgk.hpp"
#include "apnn/gpc.hpp"
#include "apnn/loss.hpp"
#include "apnn/lyapunov.hpp"
#include "apnn/micro_macro.hpp"
#include "apnn/network.hpp"
#include "apnn/reference.hpp"
#include "apnn/runner.hpp"
#include "common.hpp"

using namespace apnn;
using apnn::testing::Setup;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [FAILED]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("apnn_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

// ---------------------------------------------------------------- 1

void hypocoercivity(Outcome& o) {
  std::mt19937_64 rng(11);
  struct G {
    int dim, nv;
    double vmax;
  };
  for (const G g : {G{1, 32, 8.0}, G{2, 16, 6.0}, G{3, 12, 5.5}}) {
    Setup s(g.dim, g.nv, g.vmax, 1);
    const CollisionMatrix L = assemble_bgk_surrogate(*s.basis);
    const HypoReport r = verify_hypocoercivity(L, *s.basis, 0.0);
    const std::string tag = "bgk d" + std::to_string(g.dim);
    o.check(r.sym_defect <= 1e-12, tag + " sym_defect " + fmt("%.2e", r.sym_defect));
    o.check(r.kernel_dim == g.dim + 2, tag + " kernel_dim " + std::to_string(r.kernel_dim));
    o.check(std::abs(r.lambda_gap - 1.0) <= 1e-10, tag + " gap-1 " + fmt("%.2e", r.lambda_gap - 1.0));
    // nu^Lambda_0 |h|^2 <= nu_1 |h|_Lambda^2 <= <Lambda h, h> <= nu_2 |h|_Lambda^2
    const Vec& w = s.vg->weights();
    const Vec lw = Vec::Ones(w.size());  // gamma = 0
    const Vec lam = L.Lambda.diagonal();
    int bad = 0;
    for (int t = 0; t < 1000; ++t) {
      const Vec h = testing::random_mat(w.size(), 1, rng).col(0);
      const double n2 = w.dot(h.cwiseAbs2());
      const double nl = w.dot(lw.cwiseProduct(h.cwiseAbs2()));
      const double lh = w.dot(lam.cwiseProduct(h.cwiseAbs2()));
      const double tol = 1e-12 * nl;
      if (!(r.nu[0] * n2 <= r.nu[1] * nl + tol && r.nu[1] * nl <= lh + tol && lh <= r.nu[2] * nl + tol)) ++bad;
    }
    o.check(bad == 0, tag + " nu sandwich violations " + std::to_string(bad) + "/1000");
  }

  // quadrature backend
  auto gap = [](int nv, HypoReport* out, CollisionMatrix* Lout) {
    Setup s(1, nv, 8.0, 1, Backend::bgk, 0.0);
    CollisionMatrix L = assemble_boltzmann_matrix(s.spec, *s.basis, 0.0);
    HypoReport r = verify_hypocoercivity(L, *s.basis, 0.0);
    if (out) *out = r;
    if (Lout) *Lout = L;
    return r.lambda_gap;
  };
  HypoReport r48;
  CollisionMatrix L48;
  const double g48 = gap(48, &r48, &L48);
  const double g96 = gap(96, nullptr, nullptr);
  o.check(r48.kernel_residual <= 1e-6, "boltzmann kernel residual " + fmt("%.2e", r48.kernel_residual));
  {
    auto vg = std::make_shared<const VelocityGrid>(1, 48, 8.0);
    const Vec& w = vg->weights();
    int bad = 0;
    double worst = -INFINITY;
    for (int t = 0; t < 100; ++t) {
      const Vec h = vg->root_maxwellian().cwiseProduct(testing::random_mat(w.size(), 1, rng).col(0));
      const double q = w.dot((L48.L * h).cwiseProduct(h)) / w.dot(h.cwiseAbs2());
      worst = std::max(worst, q);
      if (q > 1e-12) ++bad;
    }
    o.check(bad == 0, "boltzmann <Lh,h> max ratio " + fmt("%.3e", worst));
  }
  const double change = std::abs(g96 - g48) / std::abs(g96);
  o.check(change <= 0.05, "boltzmann gap n_v 48->96 " + fmt("%.5f", g48) + "->" + fmt("%.5f", g96) + " change " +
                              fmt("%.2e", change));
}

// ---------------------------------------------------------------- 2

void sg_structure(Outcome& o) {
  for (const Backend be : {Backend::bgk, Backend::boltzmann}) {
    Setup s(1, 24, 8.0, 6, be, 0.05);
    bool tri = true;
    for (int i = 0; i < 6; ++i)
      for (int k = 0; k < 6; ++k) tri = tri && (s.coupling.chi(i, k) == (std::abs(i - k) <= 1));
    o.check(tri, std::string("chi tridiagonal (") + (be == Backend::bgk ? "bgk" : "boltzmann") + ")");
  }
  {
    KernelSpec spec = KernelSpec::maxwell(3);
    spec.b0 = {0.05, 0.02, 0.01};
    spec.b1 = {0.004, -0.002};
    const GpcBasis gpc = build_gpc_basis(7, spec.C_z);
    double err = 0;
    for (int i = 0; i < 7; ++i)
      for (int k = 0; k < 7; ++k)
        for (double eta = -1; eta <= 1.0001; eta += 0.125)
          err = std::max(err, std::abs(sg_kernel_analytic(spec, gpc, i, k, eta) - sg_kernel_quadrature(spec, gpc, i, k, eta)));
    o.check(err <= 1e-10, "S_ik analytic vs quadrature " + fmt("%.2e", err));
  }
  {
    Setup s(1, 32, 8.0, 1, Backend::bgk, 0.0);
    const double e1 = (s.coupling.block(0, 0) - assemble_bgk_surrogate(*s.basis).L).cwiseAbs().maxCoeff();
    Setup b(1, 32, 8.0, 1, Backend::boltzmann, 0.0);
    const Mat Ld = assemble_boltzmann_matrix(b.spec, *b.basis, 0.0).L;
    const double e2 = (b.coupling.block(0, 0) - Ld).cwiseAbs().maxCoeff() / Ld.cwiseAbs().maxCoeff();
    o.check(std::max(e1, e2) <= 1e-12, "K=1 vs deterministic " + fmt("%.2e", std::max(e1, e2)));
  }
}

// ---------------------------------------------------------------- 3

void micro_macro_identities(Outcome& o) {
  std::mt19937_64 rng(5);
  double rec = 0, proj = 0, pyth = 0;
  for (const int dim : {1, 2}) {
    for (const Backend be : {Backend::bgk, Backend::boltzmann}) {
      Setup s(dim, dim == 1 ? 24 : 13, 6.0, 3, be);
      const double eps = 0.3;
      MicroMacro mm(*s.basis, s.coupling, eps);
      const VelocitySet grid = make_grid_set(*s.basis);
      const int P = 7, nm = s.basis->count();
      std::vector<MacroBlock> m;
      std::vector<MicroBlock> g;
      for (int i = 0; i < 3; ++i) {
        m.push_back(testing::random_macro(nm, P, dim, rng));
        g.push_back(testing::random_micro(*s.vg, P, dim, rng));
      }
      std::vector<const MicroBlock*> gp;
      for (auto& gi : g) gp.push_back(&gi);
      // h = E m + eps (g - pi g), with its derivatives
      const Mat& E = s.basis->values();
      std::vector<Mat> h, h_dt;
      std::vector<std::vector<Mat>> h_dx;
      for (int i = 0; i < 3; ++i) {
        h.push_back(E * m[i].val + eps * mm.postprocess(g[i].val));
        h_dt.push_back(E * m[i].dt + eps * mm.postprocess(g[i].dt));
        h_dx.emplace_back();
        for (int a = 0; a < dim; ++a) h_dx.back().push_back(E * m[i].dx[a] + eps * mm.postprocess(g[i].dx[a]));
      }
      for (int i = 0; i < 3; ++i) {
        const Mat d1 = mm.macro_residual(m[i], g[i]);
        const Mat d2 = mm.micro_residual(i, m[i], gp, gp, grid);
        const Mat A = full_residual(i, h_dt, h_dx, h, *s.basis, s.coupling, eps);
        rec = std::max(rec, (recombine_residual(d1, d2, *s.basis) + A).norm() / A.norm());
        const Mat post = mm.postprocess(g[i].val);
        proj = std::max(proj, (s.basis->weighted().transpose() * post).cwiseAbs().maxCoeff());
      }
      auto xg = std::make_shared<const SpatialGrid>(dim, 8);
      for (int t = 0; t < 20; ++t) {
        const GridFunction f = testing::random_field(xg, s.vg, rng);
        const Projection pr = project_pi_L(f, *s.basis);
        const double lhs = inner(f, f);
        pyth = std::max(pyth, std::abs(lhs - inner(pr.fluid, pr.fluid) - inner(pr.perp, pr.perp)) / lhs);
      }
    }
  }
  o.check(rec <= 1e-12, "recombination " + fmt("%.2e", rec));
  o.check(proj <= 1e-10, "pi_L(g) after post-processing " + fmt("%.2e", proj));
  o.check(pyth <= 1e-10, "Pythagoras " + fmt("%.2e", pyth));
}

// ---------------------------------------------------------------- 4

void ap_limit(Outcome& o) {
  Setup s(1, 32, 8.0, 2);
  auto xg = std::make_shared<const SpatialGrid>(1, 128);
  const auto init = FourierHermiteInit::fluid(1, 2, 0.1);
  const AcousticSystem sys = AcousticSystem::from_basis(*s.basis);
  std::vector<double> errs;
  std::vector<Mat> fluid;
  for (const double eps : {1.0, 1e-2, 1e-4, 1e-6}) {
    SolverConfig sc;
    sc.eps = eps;
    sc.t_end = 0.5;
    sc.n_snapshots = 1;
    const Trajectory tr = solve_sg_micromacro(*s.basis, s.coupling, xg, init, sc);
    if (fluid.empty())
      for (int i = 0; i < 2; ++i) fluid.push_back(solve_acoustic(sys, *xg, tr.m[0][i], {0.5}).back());
    errs.push_back(relative_moment_error(tr.m.back(), fluid));
  }
  o.check(errs.back() <= 1e-3, "eps=1e-6 vs acoustic " + fmt("%.2e", errs.back()));
  bool mono = true;
  for (std::size_t k = 0; k + 1 < errs.size(); ++k) mono = mono && errs[k + 1] <= errs[k];
  std::string list;
  for (double e : errs) list += fmt("%.3e ", e);
  o.check(mono, "monotone over eps: " + list);

  // plane sound wave of the dim-3 system restricted to one axis
  Setup s3(3, 12, 5.5, 1);
  const AcousticSystem red = AcousticSystem::reduced(*s3.basis, 0);
  const Vec sp = red.speeds(0);
  const double c = sp.cwiseAbs().maxCoeff();
  const double want = std::sqrt(5.0 / 3.0);
  o.check(std::abs(c - want) <= 1e-3 * want, "dim-3 reduced speed " + fmt("%.10f", c));
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (red.A[0] + red.A[0].transpose()));
  Eigen::Index jmax;
  es.eigenvalues().maxCoeff(&jmax);
  const Vec r = es.eigenvectors().col(jmax);
  SpatialGrid g1(1, 256);
  Mat m0(3, 256);
  for (int ix = 0; ix < 256; ++ix) m0.col(ix) = r * std::sin(g1.coord(static_cast<std::size_t>(ix), 0));
  const double T = 0.5;
  for (const AcousticMethod meth : {AcousticMethod::spectral, AcousticMethod::upwind}) {
    const Mat mt = solve_acoustic(red, g1, m0, {T}, meth, 0.25).back();
    // phase of the first Fourier coefficient of the projection on r
    std::complex<double> a0 = 0, a1 = 0;
    for (int ix = 0; ix < 256; ++ix) {
      const double x = g1.coord(static_cast<std::size_t>(ix), 0);
      const std::complex<double> e = std::exp(std::complex<double>(0, -x));
      a0 += r.dot(m0.col(ix)) * e;
      a1 += r.dot(mt.col(ix)) * e;
    }
    const double shift = -std::arg(a1 / a0);  // sin(x - c t): phase lags by c t
    const double perr = std::abs(shift - want * T);
    o.check(perr <= 1e-3, std::string(meth == AcousticMethod::spectral ? "spectral" : "upwind") + " phase error " +
                              fmt("%.2e", perr));
  }
}

// ---------------------------------------------------------------- 5

void mms(Outcome& o) {
  Setup s(1, 24, 7.0, 2);
  const MmsReport r = run_mms(*s.basis, s.coupling, 1.0, 0.25, 32, 4, 0.4);
  std::string list;
  bool ok = r.ratios.size() >= 3;
  for (double q : r.ratios) {
    list += fmt("%.3f ", q);
    ok = ok && q >= 1.9;
  }
  o.check(ok, "error ratios per dt halving: " + list);
}

// ---------------------------------------------------------------- 6

void differentiation(Outcome& o) {
  std::mt19937_64 rng(3);
  const int dim = 2;
  NetworkSpec ns;
  ns.width = 12;
  NetworkBundle net(dim, 2, ns);
  net.init(4);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  double worst = 0;
  const double h = 1e-5;
  for (int p = 0; p < 100; ++p) {
    Mat tx(1 + dim, 1), vel(dim, 1);
    tx(0, 0) = 0.25 * (u(rng) + 2.5);
    for (int a = 0; a < dim; ++a) {
      tx(1 + a, 0) = u(rng);
      vel(a, 0) = u(rng);
    }
    const int mode = p % 2;
    MacroBlock m;
    MicroBlock g;
    net.macro(mode, tx, kDt | kDx, m, false);
    net.micro(mode, tx, vel, kDt | kDx | kDv, g, false);
    std::vector<double> ad, fd;
    auto push = [&](const Mat& a, const Mat& b) {
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        ad.push_back(a(i));
        fd.push_back(b(i));
      }
    };
    auto fd_tx = [&](int row) {
      Mat p1 = tx, p2 = tx;
      p1(row, 0) += h;
      p2(row, 0) -= h;
      MacroBlock a, b;
      MicroBlock c, d;
      net.macro(mode, p1, 0, a, false);
      net.macro(mode, p2, 0, b, false);
      net.micro(mode, p1, vel, 0, c, false);
      net.micro(mode, p2, vel, 0, d, false);
      return std::make_pair(Mat((a.val - b.val) / (2 * h)), Mat((c.val - d.val) / (2 * h)));
    };
    auto [mt, gt] = fd_tx(0);
    push(m.dt, mt);
    push(g.dt, gt);
    for (int a = 0; a < dim; ++a) {
      auto [mx, gx] = fd_tx(1 + a);
      push(m.dx[a], mx);
      push(g.dx[a], gx);
      Mat v1 = vel, v2 = vel;
      v1(a, 0) += h;
      v2(a, 0) -= h;
      MicroBlock c, d;
      net.micro(mode, tx, v1, 0, c, false);
      net.micro(mode, tx, v2, 0, d, false);
      push(g.dv[a], Mat((c.val - d.val) / (2 * h)));
    }
    double num = 0, den = 0;
    for (std::size_t i = 0; i < ad.size(); ++i) {
      num += (ad[i] - fd[i]) * (ad[i] - fd[i]);
      den += fd[i] * fd[i];
    }
    worst = std::max(worst, std::sqrt(num / std::max(den, 1e-300)));
  }
  o.check(worst <= 1e-5, "input derivatives vs FD, worst of 100 probes " + fmt("%.2e", worst));

  // directional derivative of the loss
  Setup s(1, 16, 6.0, 2);
  MicroMacro mm(*s.basis, s.coupling, 0.5);
  const auto init = FourierHermiteInit::standard(1, 2, 0.1);
  LossAssembler la(mm, init, 3);
  NetworkSpec n1;
  n1.width = 10;
  NetworkBundle nb(1, 2, n1);
  nb.init(9);
  CollocationConfig cc;
  cc.n_interior = 12;
  cc.n_initial = 8;
  cc.n_boundary = 4;
  cc.v_max = 6.0;
  const CollocationBatch batch = sample_collocation(cc, 17);
  Vec grad = Vec::Zero(static_cast<Eigen::Index>(nb.num_params()));
  la.evaluate(nb, batch, &grad);
  nb.clear_records();
  const Vec theta = nb.params();
  double worst_dir = 0;
  for (int k = 0; k < 10; ++k) {
    const Vec dir = testing::random_mat(theta.size(), 1, rng).col(0).normalized();
    const double step = 1e-5;
    nb.params() = theta + step * dir;
    const double lp = la.evaluate(nb, batch).total;
    nb.params() = theta - step * dir;
    const double lm = la.evaluate(nb, batch).total;
    const double fd = (lp - lm) / (2 * step);
    const double an = grad.dot(dir);
    worst_dir = std::max(worst_dir, std::abs(fd - an) / std::max(std::abs(an), 1e-12));
  }
  nb.params() = theta;
  o.check(worst_dir <= 1e-4, "loss gradient directional check, worst of 10 " + fmt("%.2e", worst_dir));
}

// ---------------------------------------------------------------- 7, 8

ExperimentConfig desk_config(const std::string& mode, const fs::path& out) {
  return load_config("", {"mode=\"" + mode + "\"", "out=\"" + out.string() + "\""});
}

void desk_problem(Outcome& o) {
  const ExperimentConfig cfg = desk_config("train", scratch("desk"));
  o.check(cfg.grid.dim == 1 && cfg.K == 2 && cfg.backend == Backend::bgk && cfg.eps == 1.0 && cfg.train.steps <= 20000,
          "desk setup (dim 1, K 2, BGK, eps 1, " + std::to_string(cfg.train.steps) + " steps)");
  const RunResult r = run_experiment(cfg);
  if (r.exit_code != 0) {
    o.check(false, "run failed: " + r.summary.dump());
    return;
  }
  const double loss = r.summary["final_eval_loss"].get<double>();
  const double exact = r.summary["exact_solution_eval_loss"].get<double>();
  o.check(loss < 1e-3, "trained loss on a fresh batch " + fmt("%.3e", loss) + " (untrained " +
                           fmt("%.3e", r.summary["zero_network_eval_loss"].get<double>()) + ")");
  o.check(exact < 1e-6, "exact solution injected " + fmt("%.2e", exact));
}

void theorem2(Outcome& o) {
  const ExperimentConfig cfg = desk_config("theorem2-study", scratch("theorem2"));
  const RunResult r = run_experiment(cfg);
  if (r.exit_code != 0) {
    o.check(false, "run failed: " + r.summary.dump());
    return;
  }
  const auto& s = r.summary;
  const long n = s["checkpoints"].get<long>();
  const double rho = s["spearman_loss_vs_ek"].get<double>();
  o.check(n >= 10 && rho >= 0.9, "Spearman(loss, avg E^K) over " + std::to_string(n) + " checkpoints " + fmt("%.3f", rho));
  const auto& ly = s["lyapunov"];
  o.check(ly["non_increasing"].get<bool>(), "Lyapunov max rise " + fmt("%.2e", ly["max_rise"].get<double>()) +
                                                " vs tolerance " + fmt("%.2e", ly["tolerance"].get<double>()));
  const double rate = ly["decay_rate"].get<double>();
  o.check(std::isfinite(rate), "fitted decay rate " + fmt("%.4f", rate));
  const auto E = s["remark_ek_at_target_loss"].get<std::vector<double>>();
  const double eps_min = cfg.theorem2.remark_eps.back();
  const double ratio = E.back() / E.front();
  o.check(ratio <= 0.1 / eps_min, "E^K at fixed loss, eps " + fmt("%g", eps_min) + " over eps 1: " + fmt("%.3f", ratio));
}

// ---------------------------------------------------------------- 9

void norm_equivalence(Outcome& o) {
  std::mt19937_64 rng(21);
  Setup s(1, 16, 6.0, 1);
  auto xg = std::make_shared<const SpatialGrid>(1, 16);
  const double C = projection_gradient_constant(*s.basis);
  const LyapunovWeights w = LyapunovWeights::defaults(C);
  const Bracket b = equivalence_bracket(w, C);
  std::vector<LyapunovTerms> terms;
  for (int t = 0; t < 1000; ++t) {
    const GridFunction h = t % 2 ? testing::random_field(xg, s.vg, rng) : testing::smooth_random_field(xg, s.vg, rng);
    terms.push_back(lyapunov_terms(h, *s.basis));
  }
  bool ok = true;
  std::string list;
  for (const double eps : {1.0, 0.1, 0.01}) {
    double lo = INFINITY, hi = 0;
    for (const auto& t : terms) {
      const double r = t.value(w, eps) / t.h1();
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    ok = ok && lo >= b.c1 && hi <= b.c2;
    list += "eps " + fmt("%g", eps) + " [" + fmt("%.3f", lo) + ", " + fmt("%.3f", hi) + "] ";
  }
  o.check(ok, "ratios within bracket [" + fmt("%.3f", b.c1) + ", " + fmt("%.3f", b.c2) + "]: " + list);
}

// ---------------------------------------------------------------- 10

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

void determinism(Outcome& o) {
  struct Case {
    std::string mode;
    std::vector<std::string> ov;
  };
  const std::vector<Case> cases = {
      {"solve", {}},
      {"train", {"train.steps=40", "train.log_every=10", "train.checkpoints=[20]"}},
      {"ap-study", {"init.kind=\"fluid\"", "grid.n_x=32"}},
      {"verify-hypo", {"backend=\"boltzmann\"", "grid.n_v=24"}},
      {"tails", {}}};
  for (const Case& c : cases) {
    std::vector<fs::path> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      dirs.push_back(scratch("det_" + c.mode + std::to_string(rep)));
      std::vector<std::string> ov = c.ov;
      ov.push_back("mode=\"" + c.mode + "\"");
      ov.push_back("out=\"" + dirs.back().string() + "\"");
      ov.push_back("seed=5");
      const RunResult r = run_experiment(load_config("", ov));
      if (r.exit_code != 0) o.check(false, c.mode + " run failed");
    }
    int files = 0, diff = 0;
    for (const auto& e : fs::recursive_directory_iterator(dirs[0])) {
      if (!e.is_regular_file() || e.path().filename() == "train_log.jsonl") continue;
      ++files;
      if (slurp(e.path()) != slurp(dirs[1] / fs::relative(e.path(), dirs[0]))) ++diff;
    }
    o.check(diff == 0 && files > 0, c.mode + " " + std::to_string(files - diff) + "/" + std::to_string(files) +
                                        " files identical");
  }
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<void(Outcome&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "hypocoercivity", 60, hypocoercivity},
      {2, "sg-structure", 10, sg_structure},
      {3, "micro-macro identities", 10, micro_macro_identities},
      {4, "ap limit", 300, ap_limit},
      {5, "mms order", 300, mms},
      {6, "differentiation", 60, differentiation},
      {7, "desk problem", 1800, desk_problem},
      {8, "loss vs error", 1800, theorem2},
      {9, "norm equivalence", 60, norm_equivalence},
      {10, "determinism", 300, determinism},
  };
  std::vector<int> pick;
  for (int a = 1; a < argc; ++a) pick.push_back(std::atoi(argv[a]));
  int failed = 0;
  for (const auto& c : all) {
    if (!pick.empty() && std::find(pick.begin(), pick.end(), c.id) == pick.end()) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.fn(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(dt <= c.budget_s, "runtime " + fmt("%.1f s", dt) + " (budget " + fmt("%.0f s", c.budget_s) + ")");
    std::printf("criterion %2d %-24s %s  %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
