#include "apnn/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <Eigen/Core>

#include "apnn/acoustic.hpp"
#include "apnn/errors.hpp"
#include "apnn/loss.hpp"
#include "apnn/stats.hpp"
#include "apnn/train.hpp"

namespace apnn {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string library_version() { return "0.3.0"; }

// ---------------------------------------------------------------- Problem

Problem::Problem(const ExperimentConfig& cfg) : cfg_(cfg) {
  const int d = cfg.grid.dim;
  vg_ = std::make_shared<const VelocityGrid>(d, cfg.grid.n_v, cfg.grid.v_max, cfg.grid.tol_mass);
  basis_ = std::make_unique<FluidBasis>(vg_, cfg.grid.tol_gram);
  xg_ = std::make_shared<const SpatialGrid>(d, cfg.grid.n_x);
  gpc_ = build_gpc_basis(cfg.K, cfg.kernel.C_z);
  coupling_ = assemble_sg_coupling(cfg.kernel, gpc_, *basis_, cfg.backend);
  mm_ = std::make_unique<MicroMacro>(*basis_, coupling_, cfg.eps);
  init_ = std::make_unique<FourierHermiteInit>(cfg.init.kind == "fluid"
                                                   ? FourierHermiteInit::fluid(d, cfg.K, cfg.init.amp)
                                                   : FourierHermiteInit::standard(d, cfg.K, cfg.init.amp));
}

std::unique_ptr<MicroMacro> Problem::with_eps(double eps) const {
  return std::make_unique<MicroMacro>(*basis_, coupling_, eps);
}

std::unique_ptr<ExactBgkSolution> Problem::exact(double eps) const {
  if (cfg_.backend != Backend::bgk) throw InvalidArgument("closed-form reference exists for the BGK backend only");
  return std::make_unique<ExactBgkSolution>(*basis_, coupling_, eps, *init_);
}

Trajectory Problem::imex(double eps) const {
  SolverConfig sc = cfg_.solver;
  sc.eps = eps;
  return solve_sg_micromacro(*basis_, coupling_, xg_, *init_, sc);
}

Trajectory Problem::reference(double eps, double t_end, int n) const {
  if (cfg_.backend == Backend::bgk) {
    auto ex = exact(eps);
    auto mm = with_eps(eps);
    std::vector<double> times;
    for (int s = 0; s <= n; ++s) times.push_back(t_end * s / n);
    return sample_trajectory(*ex, *mm, xg_, times);
  }
  SolverConfig sc = cfg_.solver;
  sc.eps = eps;
  sc.t_end = t_end;
  sc.n_snapshots = n;
  return solve_sg_micromacro(*basis_, coupling_, xg_, *init_, sc);
}

LyapunovWeights Problem::lyapunov_weights() const {
  const LyapunovSection& l = cfg_.lyapunov;
  LyapunovWeights w = LyapunovWeights::defaults(projection_gradient_constant(*basis_), l.a3, l.a4, l.margin);
  if (l.a1 > 0) w.a1 = l.a1;
  if (l.a2 > 0) w.a2 = l.a2;
  return w;
}

// ---------------------------------------------------------------- SumSource

int SumSource::macro(int mode, const Mat& tx, unsigned flags, MacroBlock& out, bool) {
  MacroBlock b;
  a_.macro(mode, tx, flags, out, false);
  b_.macro(mode, tx, flags, b, false);
  out.val += scale_ * b.val;
  if (flags & kDt) out.dt += scale_ * b.dt;
  if (flags & kDx)
    for (std::size_t a = 0; a < out.dx.size(); ++a) out.dx[a] += scale_ * b.dx[a];
  return -1;
}

int SumSource::micro(int mode, const Mat& tx, const Mat& vel, unsigned flags, MicroBlock& out, bool) {
  MicroBlock b;
  a_.micro(mode, tx, vel, flags, out, false);
  b_.micro(mode, tx, vel, flags, b, false);
  out.val += scale_ * b.val;
  if (flags & kDt) out.dt += scale_ * b.dt;
  if (flags & kDx)
    for (std::size_t a = 0; a < out.dx.size(); ++a) out.dx[a] += scale_ * b.dx[a];
  if (flags & kDv)
    for (std::size_t a = 0; a < out.dv.size(); ++a) out.dv[a] += scale_ * b.dv[a];
  return -1;
}

// ---------------------------------------------------------------- output helpers

namespace {

/// Minimal CSV writer; doubles in round-trip precision so reruns compare byte for byte.
class Csv {
 public:
  Csv(const fs::path& path, const std::string& header) : path_(path), f_(path) {
    if (!f_) throw IoError("cannot write " + path.string());
    f_ << header << '\n';
  }
  Csv& operator<<(double v) {
    sep();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    f_ << buf;
    return *this;
  }
  Csv& operator<<(long v) {
    sep();
    f_ << v;
    return *this;
  }
  Csv& operator<<(int v) { return *this << static_cast<long>(v); }
  Csv& operator<<(const std::string& s) {
    sep();
    f_ << s;
    return *this;
  }
  void endl() {
    f_ << '\n';
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) f_ << ',';
    first_ = false;
  }
  fs::path path_;
  std::ofstream f_;
  bool first_ = true;
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw IoError("cannot write " + p.string());
  f << text << '\n';
}

std::string read_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

ojson parse_obj(const std::string& s) { return ojson::parse(s); }

TrainConfig make_train_config(const ExperimentConfig& c) {
  TrainConfig tc;
  tc.steps = c.train.steps;
  tc.adam = c.train.adam;
  tc.seed = c.seed;
  tc.resample_every = c.train.resample_every;
  tc.log_every = c.train.log_every;
  tc.checkpoint_steps = c.train.checkpoints;
  tc.config_hash = c.hash();
  tc.collocation = c.collocation;
  return tc;
}

CollocationBatch eval_batch(const ExperimentConfig& c) {
  CollocationConfig big = c.collocation;
  big.n_interior = c.train.eval_interior;
  big.n_initial = c.train.eval_initial;
  big.n_boundary = c.train.eval_boundary;
  return sample_collocation(big, c.train.eval_seed);
}

std::vector<GridFunction> modes_at(const Trajectory& tr, std::size_t s, const FluidBasis& basis) {
  std::vector<GridFunction> out;
  for (int i = 0; i < tr.K; ++i) out.push_back(tr.h(s, i, basis));
  return out;
}

/// Lyapunov functional and weighted H1 along a trajectory; writes lyapunov.csv.
ojson lyapunov_study(const Problem& pb, const Trajectory& tr, const fs::path& csv_path) {
  const ExperimentConfig& c = pb.config();
  const LyapunovWeights w = pb.lyapunov_weights();
  std::vector<double> E, H;
  Csv csv(csv_path, "t,lyapunov,weighted_h1");
  for (std::size_t s = 0; s < tr.times.size(); ++s) {
    const auto modes = modes_at(tr, s, pb.basis());
    E.push_back(lyapunov_functional(modes, pb.basis(), tr.eps, c.kernel.q, w));
    H.push_back(weighted_h1(modes, pb.basis(), c.kernel.q));
    csv << tr.times[s] << E.back() << H.back();
    csv.endl();
  }
  const double rise = max_rise(E);
  const double tol = tr.dt * E.front();
  const DecayFit fit = fit_exponential_decay(tr.times, E);
  ojson j;
  j["weights"] = {{"a1", w.a1}, {"a2", w.a2}, {"a3", w.a3}, {"a4", w.a4}};
  j["E0"] = E.front();
  j["E_end"] = E.back();
  j["max_rise"] = rise;
  j["tolerance"] = tol;
  j["non_increasing"] = rise <= tol;
  j["decay_rate"] = fit.rate;
  j["decay_log_c"] = fit.log_c;
  j["decay_r2"] = fit.r2;
  try {
    j["bracket"] = parse_obj(equivalence_bracket(w, projection_gradient_constant(pb.basis())).to_json());
  } catch (const InvalidArgument& e) {
    j["bracket"] = e.what();
  }
  return j;
}

void write_ek_csv(const fs::path& p, const std::vector<double>& t, const std::vector<double>& ek) {
  Csv csv(p, "t,EK");
  for (std::size_t s = 0; s < t.size(); ++s) {
    csv << t[s] << ek[s];
    csv.endl();
  }
}

// ---------------------------------------------------------------- modes

ojson run_verify_hypo(const Problem& pb, const fs::path& out) {
  const ExperimentConfig& c = pb.config();
  const CollisionMatrix L = c.backend == Backend::bgk ? assemble_bgk_surrogate(pb.basis())
                                                      : assemble_boltzmann_matrix(c.kernel, pb.basis(), c.hypo.z);
  HypoOptions opt;
  opt.tol_kernel = c.hypo.tol_kernel;
  const HypoReport r = verify_hypocoercivity(L, pb.basis(), c.hypo.gamma, opt);
  write_text(out / "hypo_report.json", r.to_json());
  write_coupling_csv(pb.coupling(), (out / "coupling.csv").string());
  ojson j;
  j["hypo"] = parse_obj(r.to_json());
  j["kernel_dim_expected"] = c.grid.dim + 2;
  return j;
}

ojson run_solve(const Problem& pb, const fs::path& out) {
  const ExperimentConfig& c = pb.config();
  const Trajectory tr = pb.imex(c.eps);
  tr.write_csv((out / "trajectory.csv").string());
  ojson j;
  j["dt"] = tr.dt;
  j["steps"] = std::llround(c.solver.t_end / tr.dt);
  j["lyapunov"] = lyapunov_study(pb, tr, out / "lyapunov.csv");
  if (c.backend == Backend::bgk) {
    auto ex = pb.exact(c.eps);
    const Trajectory ref = sample_trajectory(*ex, pb.mm(), pb.xgrid(), tr.times);
    const auto ek = error_EK(ref, tr, pb.basis(), c.kernel.q);
    write_ek_csv(out / "ek.csv", tr.times, ek);
    j["ek_vs_exact_end"] = ek.back();
    j["moment_error_vs_exact_end"] = relative_moment_error(tr.m.back(), ref.m.back());
  }
  return j;
}

ojson run_train(const Problem& pb, const fs::path& out) {
  const ExperimentConfig& c = pb.config();
  LossAssembler la(pb.mm(), pb.init(), c.kernel.q, c.loss);
  NetworkBundle net(c.grid.dim, c.K, c.network);
  net.init(c.seed);
  TrainConfig tc = make_train_config(c);
  tc.log_path = (out / "train_log.jsonl").string();
  if (!tc.checkpoint_steps.empty()) tc.checkpoint_dir = (out / "checkpoints").string();

  Csv loss_csv(out / "loss.csv", [] {
    std::string h = "step,total";
    for (const char* n : ModeLoss::names()) h += std::string(",") + n;
    return h;
  }());
  const TrainState st = train(net, la, tc, [&](int step, const LossBreakdown& lb) {
    loss_csv << step << lb.total;
    for (int p = 0; p < ModeLoss::kParts; ++p) {
      double s = 0;
      for (std::size_t i = 0; i < lb.raw.size(); ++i) s += lb.weight[i] * lb.raw[i].values()[static_cast<std::size_t>(p)];
      loss_csv << s;
    }
    loss_csv.endl();
  });

  const CollocationBatch eb = eval_batch(c);
  const LossBreakdown final_eval = la.evaluate(net, eb);
  ojson j;
  j["params"] = static_cast<long>(net.num_params());
  j["steps"] = c.train.steps;
  j["final_train_loss"] = st.last.total;
  j["final_eval_loss"] = final_eval.total;
  j["final_eval"] = parse_obj(final_eval.to_json());
  NetworkBundle untrained(c.grid.dim, c.K, c.network);
  j["zero_network_eval_loss"] = la.evaluate(untrained, eb).total;

  const int n_snap = c.solver.n_snapshots;
  const Trajectory ref = pb.reference(c.eps, c.collocation.t_end, n_snap);
  if (c.backend == Backend::bgk) {
    auto ex = pb.exact(c.eps);
    j["exact_solution_eval_loss"] = la.evaluate(*ex, eb).total;
  }
  const auto ek = error_EK(net, pb.mm(), ref, c.kernel.q);
  write_ek_csv(out / "ek.csv", ref.times, ek);
  j["ek_time_average"] = time_average(ref.times, ek);
  j["ek_reference"] = c.backend == Backend::bgk ? "closed-form" : "imex";
  return j;
}

ojson run_ap_study(const Problem& pb, const fs::path& out) {
  const ExperimentConfig& c = pb.config();
  const AcousticSystem sys = AcousticSystem::from_basis(pb.basis());
  Csv csv(out / "ap.csv", "eps,relative_error,dt,t_end");
  std::vector<double> errs;
  std::vector<Mat> fluid;
  for (double eps : c.ap.eps_list) {
    const Trajectory tr = pb.imex(eps);
    if (fluid.empty())
      for (int i = 0; i < c.K; ++i) fluid.push_back(solve_acoustic(sys, *pb.xgrid(), tr.m[0][static_cast<std::size_t>(i)],
                                                                   {tr.times.back()})
                                                        .back());
    errs.push_back(relative_moment_error(tr.m.back(), fluid));
    csv << eps << errs.back() << tr.dt << tr.times.back();
    csv.endl();
  }
  bool monotone = true;
  for (std::size_t k = 0; k + 1 < errs.size(); ++k)
    if (c.ap.eps_list[k + 1] < c.ap.eps_list[k] && errs[k + 1] > errs[k]) monotone = false;
  ojson j;
  j["eps"] = c.ap.eps_list;
  j["relative_error"] = errs;
  j["monotone"] = monotone;
  j["loglog_slope"] = loglog_slope(c.ap.eps_list, errs);
  ojson sp = ojson::array();
  for (int a = 0; a < c.grid.dim; ++a) {
    const Vec s = sys.speeds(a);
    sp.push_back(std::vector<double>(s.data(), s.data() + s.size()));
  }
  j["acoustic_speeds"] = sp;
  return j;
}

ojson run_theorem2(const Problem& pb, const fs::path& out) {
  const ExperimentConfig& c = pb.config();
  const int q = c.kernel.q;
  LossAssembler la(pb.mm(), pb.init(), q, c.loss);
  NetworkBundle net(c.grid.dim, c.K, c.network);
  net.init(c.seed);
  TrainConfig tc = make_train_config(c);
  tc.steps = c.theorem2.steps;
  tc.checkpoint_steps.clear();
  const int nc = c.theorem2.n_checkpoints;
  for (int k = 0; k < nc; ++k)
    tc.checkpoint_steps.push_back(static_cast<int>(std::llround(static_cast<double>(tc.steps) * k / (nc - 1))));
  tc.checkpoint_dir = (out / "checkpoints").string();
  tc.log_path = (out / "train_log.jsonl").string();
  const TrainState st = train(net, la, tc);
  {
    Csv loss_csv(out / "loss.csv", "step,total");
    for (std::size_t s = 0; s < st.loss_history.size(); ++s) {
      loss_csv << static_cast<long>(s) << st.loss_history[s];
      loss_csv.endl();
    }
  }

  // loss vs error over checkpoints
  const CollocationBatch eb = eval_batch(c);
  const Trajectory ref = pb.reference(c.eps, c.collocation.t_end, c.solver.n_snapshots);
  std::vector<double> losses, ek_avg;
  {
    Csv csv(out / "checkpoints.csv", "step,eval_loss,ek_time_average");
    Csv ekc(out / "ek.csv", "step,t,EK");
    for (const Checkpoint& cp : st.checkpoints) {
      net.params() = cp.params;
      losses.push_back(la.evaluate(net, eb).total);
      const auto ek = error_EK(net, pb.mm(), ref, q);
      ek_avg.push_back(time_average(ref.times, ek));
      csv << cp.step << losses.back() << ek_avg.back();
      csv.endl();
      for (std::size_t s = 0; s < ek.size(); ++s) {
        ekc << cp.step << ref.times[s] << ek[s];
        ekc.endl();
      }
    }
  }
  ojson j;
  j["checkpoints"] = static_cast<long>(losses.size());
  j["spearman_loss_vs_ek"] = spearman(losses, ek_avg);
  j["pearson_log_loss_vs_log_ek"] = [&] {
    std::vector<double> a, b;
    for (std::size_t k = 0; k < losses.size(); ++k) {
      a.push_back(std::log(losses[k]));
      b.push_back(std::log(ek_avg[k]));
    }
    return pearson(a, b);
  }();
  j["loglog_slope_ek_vs_loss"] = loglog_slope(losses, ek_avg);

  // Lyapunov functional along the solver reference
  const Trajectory imex = pb.imex(c.eps);
  j["lyapunov"] = lyapunov_study(pb, imex, out / "lyapunov.csv");

  // error at fixed loss as eps decreases: exact solution plus a scaled random net
  if (c.backend == Backend::bgk && !c.theorem2.remark_eps.empty()) {
    NetworkBundle phi(c.grid.dim, c.K, c.network);
    phi.init(c.seed + 7);
    Csv csv(out / "remark.csv", "eps,loss_unit,ek_unit,ek_at_target_loss");
    std::vector<double> E;
    for (double eps : c.theorem2.remark_eps) {
      auto mm = pb.with_eps(eps);
      auto ex = pb.exact(eps);
      LossAssembler le(*mm, pb.init(), q, c.loss);
      SumSource s(*ex, phi, 1.0);
      const double L1 = le.evaluate(s, eb).total;
      const Trajectory r = pb.reference(eps, c.collocation.t_end, c.solver.n_snapshots);
      const double ek1 = time_average(r.times, error_EK(s, *mm, r, q));
      // the residual is linear in the perturbation, so loss and error scale alike
      E.push_back(c.theorem2.remark_loss * ek1 / L1);
      csv << eps << L1 << ek1 << E.back();
      csv.endl();
    }
    j["remark_eps"] = c.theorem2.remark_eps;
    j["remark_ek_at_target_loss"] = E;
    j["remark_ratio_min_eps_over_max_eps"] = E.back() / E.front();
  }
  return j;
}

ojson run_tails(const Problem& pb, const fs::path& out) {
  const ExperimentConfig& c = pb.config();
  const Trajectory tr = pb.imex(c.eps);
  const TailReport r = tail_report(tr, pb.basis(), c.tails.boxes, c.kernel.gamma);
  write_text(out / "tails.json", r.to_json());
  Csv csv(out / "tails.csv", "box,mode,c,c_dx,c_dv,c_lambda,r_tilde");
  for (std::size_t b = 0; b < r.boxes.size(); ++b)
    for (std::size_t i = 0; i < r.c[b].size(); ++i) {
      csv << r.boxes[b] << static_cast<long>(i + 1) << r.c[b][i] << r.c_dx[b][i] << r.c_dv[b][i] << r.c_lambda[b][i]
          << r.r_tilde[b][i];
      csv.endl();
    }
  return parse_obj(r.to_json());
}

void write_manifest(const ExperimentConfig& c, const fs::path& out, const std::string& status) {
  ojson m;
  m["status"] = status;
  m["mode"] = c.mode;
  m["config_hash"] = hex64(c.hash());
  m["config"] = c.to_json();
  m["config"].erase("out");
  m["seeds"] = {{"seed", c.seed}, {"eval_seed", c.train.eval_seed}};
  m["versions"] = {{"apnn", library_version()},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                   {"compiler", __VERSION__},
                   {"cxx", static_cast<long>(__cplusplus)}};
  // wall-clock logs are listed but not hashed
  ojson files = ojson::array();
  std::vector<fs::path> paths;
  for (const auto& e : fs::recursive_directory_iterator(out))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    const std::string rel = fs::relative(p, out).generic_string();
    if (p.filename() == "train_log.jsonl")
      files.push_back({{"file", rel}, {"fnv1a", nullptr}, {"note", "contains wall-clock times"}});
    else
      files.push_back({{"file", rel}, {"fnv1a", hex64(fnv1a(read_bytes(p)))}});
  }
  m["outputs"] = files;
  write_text(out / "manifest.json", m.dump(2));
}

}  // namespace

void write_error_record(const std::string& dir, const std::string& kind, const std::string& key,
                        const std::string& message) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  ojson j;
  j["status"] = "error";
  j["kind"] = kind;
  j["key"] = key.empty() ? ojson(nullptr) : ojson(key);
  j["message"] = message;
  std::ofstream f(fs::path(dir) / "error.json");
  if (f) f << j.dump(2) << '\n';
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  RunResult res;
  const fs::path out(cfg.out);
  try {
    fs::create_directories(out);
    fs::remove(out / "error.json");
    {
      ojson cj = cfg.to_json();
      cj.erase("out");  // keeps reruns into different directories byte-identical
      write_text(out / "config.json", cj.dump(2));
    }
    Problem pb(cfg);
    ojson summary;
    if (cfg.mode == "verify-hypo") summary = run_verify_hypo(pb, out);
    else if (cfg.mode == "solve") summary = run_solve(pb, out);
    else if (cfg.mode == "train") summary = run_train(pb, out);
    else if (cfg.mode == "ap-study") summary = run_ap_study(pb, out);
    else if (cfg.mode == "theorem2-study") summary = run_theorem2(pb, out);
    else if (cfg.mode == "tails") summary = run_tails(pb, out);
    else throw ConfigError("mode", "unknown mode '" + cfg.mode + "'");
    res.summary = summary;
    write_text(out / "report.json", summary.dump(2));
    write_manifest(cfg, out, "ok");
  } catch (const ConfigError& e) {
    res.exit_code = 2;
    res.summary = {{"status", "error"}, {"kind", e.kind()}, {"key", e.key()}, {"message", e.what()}};
    write_error_record(cfg.out, e.kind(), e.key(), e.what());
  } catch (const Error& e) {
    res.exit_code = 1;
    res.summary = {{"status", "error"}, {"kind", e.kind()}, {"message", e.what()}};
    write_error_record(cfg.out, e.kind(), "", e.what());
  } catch (const std::exception& e) {
    res.exit_code = 1;
    res.summary = {{"status", "error"}, {"kind", "std::exception"}, {"message", e.what()}};
    write_error_record(cfg.out, "std::exception", "", e.what());
  }
  if (res.exit_code != 0) {
    std::error_code ec;
    if (fs::exists(out, ec)) try {
        write_manifest(cfg, out, "error");
      } catch (const std::exception&) {
      }
  }
  return res;
}

}  // namespace apnn
