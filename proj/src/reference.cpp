#include "apnn/reference.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "apnn/errors.hpp"

namespace apnn {

GridFunction Trajectory::h(std::size_t snap, int mode, const FluidBasis& basis) const {
  const auto i = static_cast<std::size_t>(mode);
  return GridFunction(xg, vg, basis.values() * m.at(snap).at(i) + eps * g.at(snap).at(i));
}

void Trajectory::write_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write " + path);
  std::fprintf(f, "time,mode,x_index,component,value\n");
  for (std::size_t s = 0; s < times.size(); ++s)
    for (int i = 0; i < K; ++i) {
      const Mat& mm = m[s][static_cast<std::size_t>(i)];
      for (Eigen::Index x = 0; x < mm.cols(); ++x)
        for (Eigen::Index c = 0; c < mm.rows(); ++c)
          std::fprintf(f, "%.17g,%d,%ld,%ld,%.17g\n", times[s], i + 1, static_cast<long>(x), static_cast<long>(c),
                       mm(c, x));
    }
  std::fclose(f);
}

Mat spatial_nodes(const SpatialGrid& xg) {
  Mat X(xg.dim(), static_cast<Eigen::Index>(xg.size()));
  for (std::size_t j = 0; j < xg.size(); ++j)
    for (int a = 0; a < xg.dim(); ++a) X(a, static_cast<Eigen::Index>(j)) = xg.coord(j, a);
  return X;
}

namespace {

struct Shifts {
  std::vector<std::vector<Eigen::Index>> plus, minus;
  explicit Shifts(const SpatialGrid& xg) {
    for (int a = 0; a < xg.dim(); ++a) {
      std::vector<Eigen::Index> p(xg.size()), m(xg.size());
      for (std::size_t j = 0; j < xg.size(); ++j) {
        p[j] = static_cast<Eigen::Index>(xg.shift(j, a, 1));
        m[j] = static_cast<Eigen::Index>(xg.shift(j, a, -1));
      }
      plus.push_back(std::move(p));
      minus.push_back(std::move(m));
    }
  }
};

Mat gather(const Mat& f, const std::vector<Eigen::Index>& idx) {
  Mat r(f.rows(), f.cols());
  for (Eigen::Index j = 0; j < f.cols(); ++j) r.col(j) = f.col(idx[static_cast<std::size_t>(j)]);
  return r;
}

}  // namespace

Trajectory solve_sg_micromacro(const FluidBasis& basis, const SgCoupling& coupling,
                               std::shared_ptr<const SpatialGrid> xg, const InitialData& init,
                               const SolverConfig& cfg, const SourceFn& source) {
  if (init.modes() != coupling.K) throw InvalidArgument("initial data and coupling disagree on K");
  const Mat X = spatial_nodes(*xg);
  std::vector<Mat> h0;
  for (int i = 0; i < coupling.K; ++i) h0.push_back(init.eval(i, 0, X, basis.grid().nodes()));
  return solve_sg_micromacro(basis, coupling, std::move(xg), h0, cfg, source);
}

Trajectory solve_sg_micromacro(const FluidBasis& basis, const SgCoupling& coupling,
                               std::shared_ptr<const SpatialGrid> xg, const std::vector<Mat>& h0,
                               const SolverConfig& cfg, const SourceFn& source) {
  const int d = basis.dim();
  const int K = coupling.K;
  const VelocityGrid& vg = basis.grid();
  if (xg->dim() != d) throw GridMismatch("spatial and velocity dimensions differ");
  if (static_cast<int>(h0.size()) != K) throw InvalidArgument("need one initial state per mode");
  if (!(cfg.eps > 0)) throw InvalidArgument("solver needs eps > 0");
  if (!(cfg.t_end >= 0) || cfg.n_snapshots < 1) throw InvalidArgument("bad time range");
  const double hx = xg->spacing();
  const double dt_max = cfg.cfl * hx / vg.vmax();
  double dt = cfg.dt;
  if (dt <= 0) dt = dt_max;
  else if (dt > dt_max * (1 + 1e-12))
    throw CflViolation("dt " + std::to_string(dt) + " exceeds cfl * dx / v_max = " + std::to_string(dt_max));
  const long n_steps = cfg.t_end > 0 ? static_cast<long>(std::ceil(cfg.t_end / dt - 1e-9)) : 0;
  if (n_steps > 0) dt = cfg.t_end / static_cast<double>(n_steps);

  const auto N = static_cast<Eigen::Index>(vg.size());
  const auto Nx = static_cast<Eigen::Index>(xg->size());
  const double eps = cfg.eps;
  const Mat& E = basis.values();
  const Mat& WE = basis.weighted();
  const auto& A = basis.flux_matrices();
  std::vector<Mat> A2, F, VE;
  std::vector<Vec> vpos, vneg;
  for (int a = 0; a < d; ++a) {
    const auto k = static_cast<std::size_t>(a);
    const Vec va = vg.nodes().row(a).transpose();
    A2.push_back(A[k] * A[k]);
    F.push_back((va.asDiagonal() * WE).transpose());
    VE.push_back(va.asDiagonal() * E);
    vpos.push_back(va.cwiseMax(0.0));
    vneg.push_back(va.cwiseMin(0.0));
  }
  for (const Mat& h : h0)
    if (h.rows() != N || h.cols() != Nx) throw GridMismatch("initial state does not match the grids");

  // I - (dt/eps^2) L on the stacked modes
  Mat M = Mat::Identity(K * N, K * N);
  for (int i = 0; i < K; ++i)
    for (int k = 0; k < K; ++k)
      if (coupling.chi(i, k)) M.block(i * N, k * N, N, N) -= (dt / (eps * eps)) * coupling.block(i, k);
  Eigen::PartialPivLU<Mat> lu(M);
  {
    const double det_scale = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(det_scale > 0) || !std::isfinite(det_scale)) throw SingularImplicitSolve("implicit collision matrix is singular");
  }

  const Shifts sh(*xg);
  auto Dc = [&](const Mat& f, int a) {
    const auto k = static_cast<std::size_t>(a);
    return Mat((gather(f, sh.plus[k]) - gather(f, sh.minus[k])) / (2 * hx));
  };
  auto D2 = [&](const Mat& f, int a) {
    const auto k = static_cast<std::size_t>(a);
    return Mat((gather(f, sh.plus[k]) - 2 * f + gather(f, sh.minus[k])) / (hx * hx));
  };
  auto perp = [&](const Mat& g) { return Mat(g - E * (WE.transpose() * g)); };

  Trajectory tr;
  tr.xg = xg;
  tr.vg = basis.grid_ptr();
  tr.eps = eps;
  tr.dt = dt;
  tr.K = K;
  std::vector<Mat> m(static_cast<std::size_t>(K)), g(static_cast<std::size_t>(K));
  for (int i = 0; i < K; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    m[ii] = WE.transpose() * h0[ii];
    g[ii] = (h0[ii] - E * m[ii]) / eps;
  }
  auto store = [&](double t) {
    tr.times.push_back(t);
    tr.m.push_back(m);
    tr.g.push_back(g);
  };
  store(0.0);
  std::vector<long> snap_steps;
  for (int s = 1; s <= cfg.n_snapshots; ++s)
    snap_steps.push_back(static_cast<long>(std::llround(static_cast<double>(n_steps) * s / cfg.n_snapshots)));

  Mat R(K * N, Nx);
  std::size_t next = 0;
  while (next < snap_steps.size() && snap_steps[next] == 0) {
    store(0.0);
    ++next;
  }
  for (long n = 0; n < n_steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    std::vector<Mat> S;
    if (source)
      for (int i = 0; i < K; ++i) S.push_back(source(i, t));
    for (int i = 0; i < K; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      Mat tr_m = Mat::Zero(N, Nx), tr_g = Mat::Zero(N, Nx);
      for (int a = 0; a < d; ++a) {
        const auto k = static_cast<std::size_t>(a);
        tr_m.noalias() += VE[k] * Dc(m[ii], a);
        const Mat& f = g[ii];
        const Mat Dp = (gather(f, sh.plus[k]) - f) / hx;
        const Mat Dm = (f - gather(f, sh.minus[k])) / hx;
        tr_g.noalias() += vpos[k].asDiagonal() * Dm + vneg[k].asDiagonal() * Dp;
      }
      Mat rhs = g[ii] - dt * perp(tr_m / eps + tr_g);
      if (source) rhs += (dt / eps) * perp(S[ii]);
      R.middleRows(i * N, N) = rhs;
    }
    const Mat G = lu.solve(R);
    if (!G.allFinite()) throw SingularImplicitSolve("implicit collision solve produced non-finite values");
    for (int i = 0; i < K; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      g[ii] = perp(G.middleRows(i * N, N));
      Mat dm = Mat::Zero(m[ii].rows(), Nx);
      for (int a = 0; a < d; ++a) {
        const auto k = static_cast<std::size_t>(a);
        dm.noalias() -= dt * (A[k] * Dc(m[ii], a));
        dm.noalias() += 0.5 * dt * dt * (A2[k] * D2(m[ii], a));
        dm.noalias() -= dt * eps * (F[k] * Dc(g[ii], a));
      }
      if (source) dm.noalias() += dt * (WE.transpose() * S[ii]);
      m[ii] += dm;
    }
    while (next < snap_steps.size() && snap_steps[next] == n + 1) {
      store(static_cast<double>(n + 1) * dt);
      ++next;
    }
  }
  return tr;
}

Trajectory sample_trajectory(FieldSource& src, const MicroMacro& mm, std::shared_ptr<const SpatialGrid> xg,
                             const std::vector<double>& times) {
  const FluidBasis& basis = mm.basis();
  if (src.dim() != basis.dim() || xg->dim() != basis.dim()) throw GridMismatch("dimension mismatch");
  const Mat X = spatial_nodes(*xg);
  Trajectory tr;
  tr.xg = xg;
  tr.vg = basis.grid_ptr();
  tr.eps = mm.eps();
  tr.K = src.modes();
  Mat tx(1 + basis.dim(), X.cols());
  tx.bottomRows(basis.dim()) = X;
  for (double t : times) {
    tx.row(0).setConstant(t);
    std::vector<Mat> ms, gs;
    for (int i = 0; i < tr.K; ++i) {
      MacroBlock m;
      MicroBlock g;
      src.macro(i, tx, 0, m, false);
      src.micro(i, tx, basis.grid().nodes(), 0, g, false);
      ms.push_back(m.val);
      gs.push_back(mm.postprocess(g.val));
    }
    tr.times.push_back(t);
    tr.m.push_back(ms);
    tr.g.push_back(gs);
  }
  return tr;
}

std::vector<double> error_EK(const Trajectory& a, const Trajectory& b, const FluidBasis& basis, int q) {
  if (!(*a.xg == *b.xg) || !(*a.vg == *b.vg) || !(*a.vg == basis.grid()))
    throw GridMismatch("trajectories live on different grids");
  if (a.K != b.K || a.times.size() != b.times.size()) throw GridMismatch("trajectories differ in modes or times");
  std::vector<double> out;
  for (std::size_t s = 0; s < a.times.size(); ++s) {
    if (std::abs(a.times[s] - b.times[s]) > 1e-12 * (1 + std::abs(a.times[s])))
      throw GridMismatch("snapshot times differ");
    std::vector<H1Parts> parts;
    for (int i = 0; i < a.K; ++i) {
      GridFunction d = a.h(s, i, basis);
      d.data() -= b.h(s, i, basis).data();
      parts.push_back(h1_norm_sq(d));
    }
    out.push_back(energy_EK(parts, q));
  }
  return out;
}

std::vector<double> error_EK(FieldSource& src, const MicroMacro& mm, const Trajectory& traj, int q) {
  if (src.modes() != traj.K) throw GridMismatch("network and trajectory differ in K");
  if (!(*traj.vg == mm.basis().grid())) throw GridMismatch("trajectory velocity grid differs from the basis grid");
  if (std::abs(traj.eps - mm.eps()) > 1e-15 * std::max(1.0, traj.eps)) throw GridMismatch("trajectory eps differs");
  const Trajectory net = sample_trajectory(src, mm, traj.xg, traj.times);
  return error_EK(traj, net, mm.basis(), q);
}

double relative_moment_error(const std::vector<Mat>& m, const std::vector<Mat>& ref) {
  if (m.size() != ref.size()) throw GridMismatch("mode counts differ");
  double num = 0, den = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].rows() != ref[i].rows() || m[i].cols() != ref[i].cols()) throw GridMismatch("moment shapes differ");
    num += (m[i] - ref[i]).squaredNorm();
    den += ref[i].squaredNorm();
  }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

std::string MmsReport::to_json() const {
  nlohmann::ordered_json j;
  j["levels"] = nlohmann::ordered_json::array();
  for (const auto& l : levels) j["levels"].push_back({{"n_x", l.n_x}, {"dt", l.dt}, {"error", l.error}});
  j["ratios"] = ratios;
  return j.dump(2);
}

MmsReport run_mms(const FluidBasis& basis, const SgCoupling& coupling, double eps, double t_end, int n_x0,
                  int levels, double cfl) {
  if (basis.dim() != 1) throw InvalidArgument("manufactured solution is one-dimensional");
  if (levels < 2) throw InvalidArgument("need at least two refinement levels");
  const VelocityGrid& vg = basis.grid();
  const Mat& V = vg.nodes();
  const Vec Mv = vg.root_maxwellian();
  const Vec v = V.row(0).transpose();
  const Vec p1 = Mv.cwiseProduct(Vec::Ones(v.size()) + v);
  const Vec p2 = 0.5 * Mv.cwiseProduct(v.cwiseProduct(v).cwiseProduct(v));
  const int K = coupling.K;
  // h*_i = a(t) (sin x p1 + cos x p2) / (i+1)
  auto state = [&](int i, double t, const Mat& X, int which) {
    const double at = which == 0 ? 1 + 0.5 * std::sin(t) : 0.5 * std::cos(t);
    Mat h(v.size(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double x = X(0, j);
      if (which == 2)
        h.col(j) = (1 + 0.5 * std::sin(t)) * (std::cos(x) * p1 - std::sin(x) * p2);
      else
        h.col(j) = at * (std::sin(x) * p1 + std::cos(x) * p2);
    }
    return Mat(h / (i + 1.0));
  };
  MmsReport rep;
  double dt0 = 0;
  for (int l = 0; l < levels; ++l) {
    const int nx = n_x0 << l;
    auto xg = std::make_shared<const SpatialGrid>(1, nx);
    const Mat X = spatial_nodes(*xg);
    if (l == 0) dt0 = cfl * xg->spacing() / vg.vmax();
    SolverConfig cfg;
    cfg.eps = eps;
    cfg.t_end = t_end;
    cfg.cfl = cfl;
    cfg.dt = dt0 / std::pow(2.0, l);
    cfg.n_snapshots = 1;
    std::vector<Mat> h0;
    for (int i = 0; i < K; ++i) h0.push_back(state(i, 0.0, X, 0));
    SourceFn src = [&](int i, double t) {
      Mat S = state(i, t, X, 1) + v.asDiagonal() * state(i, t, X, 2);
      for (int k = 0; k < K; ++k)
        if (coupling.chi(i, k)) S.noalias() -= (1.0 / eps) * (coupling.block(i, k) * state(k, t, X, 0));
      return S;
    };
    const Trajectory tr = solve_sg_micromacro(basis, coupling, xg, h0, cfg, src);
    double num = 0, den = 0;
    const std::size_t last = tr.times.size() - 1;
    for (int i = 0; i < K; ++i) {
      const Mat ex = state(i, tr.times[last], X, 0);
      const Mat h = tr.h(last, i, basis).data();
      num += (vg.weights().transpose() * (ex - h).cwiseAbs2()).sum();
      den += (vg.weights().transpose() * ex.cwiseAbs2()).sum();
    }
    rep.levels.push_back({nx, tr.dt, std::sqrt(num / den)});
  }
  for (std::size_t l = 0; l + 1 < rep.levels.size(); ++l)
    rep.ratios.push_back(rep.levels[l].error / rep.levels[l + 1].error);
  return rep;
}

std::string TailReport::to_json() const {
  nlohmann::ordered_json j;
  j["boxes"] = boxes;
  j["c"] = c;
  j["c_dx"] = c_dx;
  j["c_dv"] = c_dv;
  j["c_lambda"] = c_lambda;
  j["r_tilde"] = r_tilde;
  return j.dump(2);
}

TailReport tail_report(const Trajectory& traj, const FluidBasis& basis, const std::vector<double>& boxes,
                       double gamma) {
  if (!(*traj.vg == basis.grid())) throw GridMismatch("trajectory velocity grid differs from the basis grid");
  const VelocityGrid& vg = basis.grid();
  const int d = vg.dim();
  const auto N = static_cast<Eigen::Index>(vg.size());
  TailReport rep;
  rep.boxes = boxes;
  for (double r : boxes) {
    Vec w = Vec::Zero(N), wl = Vec::Zero(N);
    for (Eigen::Index j = 0; j < N; ++j) {
      bool outside = false;
      for (int a = 0; a < d; ++a) outside = outside || std::abs(vg.node(static_cast<std::size_t>(j), a)) > r;
      if (outside) {
        w(j) = vg.weights()(j);
        wl(j) = w(j) * std::pow(1.0 + vg.speed()(j), gamma);
      }
    }
    const double cv = traj.xg->cell_volume();
    auto integral = [&](const Mat& f, const Vec& ww) { return cv * (ww.transpose() * f.cwiseAbs2()).sum(); };
    std::vector<double> c(static_cast<std::size_t>(traj.K), 0.0), cx = c, cvv = c, cl = c, rt = c;
    for (std::size_t s = 0; s < traj.times.size(); ++s)
      for (int i = 0; i < traj.K; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        GridFunction g(traj.xg, traj.vg, traj.g[s][ii]);
        double gx = 0, gv = 0;
        for (int a = 0; a < d; ++a) {
          gx += integral(grad_x(g, a).data(), w);
          gv += integral(grad_v(g, a).data(), w);
        }
        c[ii] = std::max(c[ii], integral(g.data(), w));
        cx[ii] = std::max(cx[ii], gx);
        cvv[ii] = std::max(cvv[ii], gv);
        cl[ii] = std::max(cl[ii], integral(g.data(), wl));
        rt[ii] = std::max(rt[ii], integral(basis.values() * traj.m[s][ii], w));
      }
    rep.c.push_back(c);
    rep.c_dx.push_back(cx);
    rep.c_dv.push_back(cvv);
    rep.c_lambda.push_back(cl);
    rep.r_tilde.push_back(rt);
  }
  return rep;
}

}  // namespace apnn
