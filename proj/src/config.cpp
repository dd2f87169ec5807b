#include "apnn/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "apnn/errors.hpp"

namespace apnn {

using json = nlohmann::json;

const std::vector<std::string>& experiment_modes() {
  static const std::vector<std::string> m = {"train", "solve", "verify-hypo", "ap-study", "theorem2-study", "tails"};
  return m;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

/// Reads one JSON object, remembering which keys were consumed.
class Section {
 public:
  Section(const json& j, std::string path) : path_(std::move(path)) {
    if (j.is_null()) return;
    if (!j.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    obj_ = &j;
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  template <class T>
  void get(const std::string& k, T& out) {
    seen_.insert(k);
    if (!obj_ || !obj_->contains(k)) return;
    const json& v = obj_->at(k);
    try {
      if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_integer()) throw ConfigError(key(k), "expected an integer");
        if constexpr (std::is_same_v<T, std::uint64_t>) {
          if (v.is_number_unsigned()) out = v.get<std::uint64_t>();
          else if (v.get<long long>() < 0) throw ConfigError(key(k), "expected a nonnegative integer");
          else out = static_cast<std::uint64_t>(v.get<long long>());
        } else {
          out = v.get<int>();
        }
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(key(k), "expected a number");
        out = v.get<double>();
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(key(k), "expected true or false");
        out = v.get<bool>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(key(k), "expected a string");
        out = v.get<std::string>();
      } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        if (!v.is_array()) throw ConfigError(key(k), "expected an array of numbers");
        out.clear();
        for (const auto& e : v) {
          if (!e.is_number()) throw ConfigError(key(k), "expected an array of numbers");
          out.push_back(e.get<double>());
        }
      } else if constexpr (std::is_same_v<T, std::vector<int>>) {
        if (!v.is_array()) throw ConfigError(key(k), "expected an array of integers");
        out.clear();
        for (const auto& e : v) {
          if (!e.is_number_integer()) throw ConfigError(key(k), "expected an array of integers");
          out.push_back(e.get<int>());
        }
      }
    } catch (const json::exception& e) {
      throw ConfigError(key(k), e.what());
    }
  }

  const json& sub(const std::string& k) {
    seen_.insert(k);
    static const json null_json;
    if (!obj_ || !obj_->contains(k)) return null_json;
    return obj_->at(k);
  }

  void finish() const {
    if (!obj_) return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
  }

 private:
  std::string path_;
  const json* obj_ = nullptr;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Section root(j, "");
  root.get("mode", c.mode);
  require(std::find(experiment_modes().begin(), experiment_modes().end(), c.mode) != experiment_modes().end(), "mode",
          "unknown mode '" + c.mode + "'");
  root.get("seed", c.seed);
  root.get("out", c.out);
  root.get("eps", c.eps);
  require(c.eps > 0 && c.eps <= 1, "eps", "eps must lie in (0, 1]");
  std::string backend = "bgk";
  root.get("backend", backend);
  if (backend == "bgk") c.backend = Backend::bgk;
  else if (backend == "boltzmann") c.backend = Backend::boltzmann;
  else throw ConfigError("backend", "expected 'bgk' or 'boltzmann'");

  {
    Section s(root.sub("grid"), "grid");
    s.get("dim", c.grid.dim);
    s.get("n_x", c.grid.n_x);
    s.get("n_v", c.grid.n_v);
    s.get("v_max", c.grid.v_max);
    s.get("tol_mass", c.grid.tol_mass);
    s.get("tol_gram", c.grid.tol_gram);
    s.finish();
    require(c.grid.dim >= 1 && c.grid.dim <= 3, "grid.dim", "dim must be 1, 2 or 3");
    require(c.grid.n_x >= 4, "grid.n_x", "n_x must be at least 4");
    require(c.grid.n_v >= 8, "grid.n_v", "n_v must be at least 8");
    require(c.grid.v_max > 0, "grid.v_max", "v_max must be positive");
    require(c.grid.tol_mass > 0 && c.grid.tol_mass < 1, "grid.tol_mass", "tol_mass must lie in (0, 1)");
    require(c.grid.tol_gram > 0, "grid.tol_gram", "tol_gram must be positive");
  }
  const int d = c.grid.dim;
  c.kernel = KernelSpec::maxwell(d);
  c.kernel.b1 = {c.kernel.b0[0] / 20};
  {
    Section s(root.sub("kernel"), "kernel");
    s.get("gamma", c.kernel.gamma);
    s.get("C", c.kernel.C);
    s.get("b0", c.kernel.b0);
    s.get("b1", c.kernel.b1);
    s.get("C_z", c.kernel.C_z);
    s.get("n_angles", c.kernel.n_angles);
    s.finish();
    require(c.kernel.gamma >= 0 && c.kernel.gamma <= 1, "kernel.gamma", "gamma must lie in [0, 1]");
    require(c.kernel.C > 0, "kernel.C", "C must be positive");
    require(!c.kernel.b0.empty(), "kernel.b0", "b0 needs at least one coefficient");
    require(c.kernel.C_z > 0, "kernel.C_z", "C_z must be positive");
    require(c.kernel.n_angles >= 2, "kernel.n_angles", "n_angles must be at least 2");
  }
  {
    Section s(root.sub("gpc"), "gpc");
    s.get("K", c.K);
    s.get("q", c.kernel.q);
    s.finish();
    require(c.K >= 1 && c.K <= 12, "gpc.K", "K must lie in 1..12");
    require(c.kernel.q >= 0, "gpc.q", "q must be nonnegative");
  }
  {
    Section s(root.sub("init"), "init");
    s.get("kind", c.init.kind);
    s.get("amp", c.init.amp);
    s.finish();
    require(c.init.kind == "standard" || c.init.kind == "fluid", "init.kind", "expected 'standard' or 'fluid'");
  }
  c.network.v_scale = c.grid.v_max;
  {
    Section s(root.sub("network"), "network");
    s.get("width", c.network.width);
    s.get("depth", c.network.depth);
    std::string act = "tanh";
    s.get("activation", act);
    if (act == "tanh") c.network.activation = Activation::tanh;
    else if (act == "identity") c.network.activation = Activation::identity;
    else throw ConfigError("network.activation", "expected 'tanh' or 'identity'");
    s.get("periodic", c.network.periodic);
    s.get("n_freq", c.network.n_freq);
    s.get("maxwellian_output", c.network.maxwellian_output);
    s.get("t_scale", c.network.t_scale);
    s.get("v_scale", c.network.v_scale);
    s.finish();
    require(c.network.width >= 1, "network.width", "width must be positive");
    require(c.network.depth >= 1, "network.depth", "depth must be positive");
    require(c.network.n_freq >= 1, "network.n_freq", "n_freq must be positive");
    require(c.network.t_scale > 0, "network.t_scale", "t_scale must be positive");
    require(c.network.v_scale > 0, "network.v_scale", "v_scale must be positive");
  }
  c.collocation.dim = d;
  c.collocation.v_max = c.grid.v_max;
  {
    Section s(root.sub("collocation"), "collocation");
    s.get("t_end", c.collocation.t_end);
    s.get("n_interior", c.collocation.n_interior);
    s.get("n_initial", c.collocation.n_initial);
    s.get("n_boundary", c.collocation.n_boundary);
    std::string vm = "grid";
    s.get("v_mode", vm);
    try {
      c.collocation.v_mode = parse_velocity_sampling(vm);
    } catch (const Error& e) {
      throw ConfigError("collocation.v_mode", e.what());
    }
    s.get("n_velocity", c.collocation.n_velocity);
    s.finish();
    require(c.collocation.t_end > 0, "collocation.t_end", "t_end must be positive");
    require(c.collocation.n_interior >= 1, "collocation.n_interior", "must be positive");
    require(c.collocation.n_initial >= 1, "collocation.n_initial", "must be positive");
    require(c.collocation.n_boundary >= 1, "collocation.n_boundary", "must be positive");
    require(c.collocation.n_velocity >= 1, "collocation.n_velocity", "must be positive");
  }
  {
    Section s(root.sub("loss"), "loss");
    s.get("fd_step", c.loss.fd_step);
    s.finish();
    require(c.loss.fd_step > 0 && c.loss.fd_step < 0.1, "loss.fd_step", "fd_step must lie in (0, 0.1)");
  }
  {
    Section s(root.sub("train"), "train");
    s.get("steps", c.train.steps);
    s.get("lr", c.train.adam.lr);
    s.get("beta1", c.train.adam.beta1);
    s.get("beta2", c.train.adam.beta2);
    s.get("adam_eps", c.train.adam.eps);
    s.get("lr_decay", c.train.adam.lr_decay);
    s.get("decay_every", c.train.adam.decay_every);
    s.get("resample_every", c.train.resample_every);
    s.get("log_every", c.train.log_every);
    s.get("checkpoints", c.train.checkpoints);
    s.get("eval_interior", c.train.eval_interior);
    s.get("eval_initial", c.train.eval_initial);
    s.get("eval_boundary", c.train.eval_boundary);
    s.get("eval_seed", c.train.eval_seed);
    s.finish();
    require(c.train.steps >= 0, "train.steps", "steps must be nonnegative");
    require(c.train.adam.lr >= 0, "train.lr", "lr must be nonnegative");
    require(c.train.adam.beta1 >= 0 && c.train.adam.beta1 < 1, "train.beta1", "beta1 must lie in [0, 1)");
    require(c.train.adam.beta2 >= 0 && c.train.adam.beta2 < 1, "train.beta2", "beta2 must lie in [0, 1)");
    require(c.train.adam.eps > 0, "train.adam_eps", "adam_eps must be positive");
    require(c.train.adam.lr_decay > 0 && c.train.adam.lr_decay <= 1, "train.lr_decay", "lr_decay must lie in (0, 1]");
    require(c.train.adam.decay_every >= 1, "train.decay_every", "decay_every must be positive");
    require(c.train.resample_every >= 0, "train.resample_every", "resample_every must be nonnegative");
    require(c.train.log_every >= 1, "train.log_every", "log_every must be positive");
    require(c.train.eval_interior >= 1 && c.train.eval_initial >= 1 && c.train.eval_boundary >= 1, "train.eval_interior",
            "evaluation batch sizes must be positive");
  }
  {
    Section s(root.sub("solver"), "solver");
    s.get("dt", c.solver.dt);
    s.get("t_end", c.solver.t_end);
    s.get("cfl", c.solver.cfl);
    s.get("n_snapshots", c.solver.n_snapshots);
    s.finish();
    c.solver.eps = c.eps;
    require(c.solver.dt >= 0, "solver.dt", "dt must be nonnegative (0 derives it from cfl)");
    require(c.solver.t_end > 0, "solver.t_end", "t_end must be positive");
    require(c.solver.cfl > 0 && c.solver.cfl <= 1, "solver.cfl", "cfl must lie in (0, 1]");
    require(c.solver.n_snapshots >= 1, "solver.n_snapshots", "n_snapshots must be positive");
  }
  {
    Section s(root.sub("hypo"), "hypo");
    s.get("gamma", c.hypo.gamma);
    s.get("tol_kernel", c.hypo.tol_kernel);
    s.get("z", c.hypo.z);
    s.finish();
    require(c.hypo.gamma >= 0 && c.hypo.gamma <= 1, "hypo.gamma", "gamma must lie in [0, 1]");
    require(std::abs(c.hypo.z) <= c.kernel.C_z, "hypo.z", "z must lie in [-C_z, C_z]");
  }
  {
    Section s(root.sub("ap"), "ap");
    s.get("eps_list", c.ap.eps_list);
    s.finish();
    require(!c.ap.eps_list.empty(), "ap.eps_list", "needs at least one value");
    for (double e : c.ap.eps_list) require(e > 0 && e <= 1, "ap.eps_list", "values must lie in (0, 1]");
  }
  {
    Section s(root.sub("theorem2"), "theorem2");
    s.get("steps", c.theorem2.steps);
    s.get("n_checkpoints", c.theorem2.n_checkpoints);
    s.get("remark_eps", c.theorem2.remark_eps);
    s.get("remark_loss", c.theorem2.remark_loss);
    s.finish();
    require(c.theorem2.steps >= 1, "theorem2.steps", "steps must be positive");
    require(c.theorem2.n_checkpoints >= 2, "theorem2.n_checkpoints", "need at least two checkpoints");
    require(c.theorem2.remark_loss > 0, "theorem2.remark_loss", "must be positive");
    for (double e : c.theorem2.remark_eps) require(e > 0 && e <= 1, "theorem2.remark_eps", "values must lie in (0, 1]");
  }
  {
    Section s(root.sub("lyapunov"), "lyapunov");
    s.get("a1", c.lyapunov.a1);
    s.get("a2", c.lyapunov.a2);
    s.get("a3", c.lyapunov.a3);
    s.get("a4", c.lyapunov.a4);
    s.get("margin", c.lyapunov.margin);
    s.finish();
    require(c.lyapunov.a3 > 0, "lyapunov.a3", "a3 must be positive");
    require(c.lyapunov.a4 > 0, "lyapunov.a4", "a4 must be positive");
    require(c.lyapunov.margin > 0, "lyapunov.margin", "margin must be positive");
    require(c.lyapunov.a1 >= 0, "lyapunov.a1", "a1 must be nonnegative (0 selects the default)");
    require(c.lyapunov.a2 >= 0, "lyapunov.a2", "a2 must be nonnegative (0 selects the default)");
  }
  {
    Section s(root.sub("tails"), "tails");
    s.get("boxes", c.tails.boxes);
    s.finish();
    for (double b : c.tails.boxes) require(b > 0, "tails.boxes", "box half-widths must be positive");
  }
  root.finish();

  // cross-field consistency
  if (c.backend == Backend::boltzmann) {
    require(!(c.grid.dim == 3 && c.grid.n_v > 16), "grid.n_v", "Boltzmann backend in dim 3 supports n_v <= 16");
    require(!(c.grid.dim == 2 && c.grid.n_v > 48), "grid.n_v", "Boltzmann backend in dim 2 supports n_v <= 48");
  }
  if (c.K > 1) {
    try {
      c.kernel.check_margin();
    } catch (const Error& e) {
      throw ConfigError("kernel.b1", e.what());
    }
  }
  return c;
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = mode;
  j["seed"] = seed;
  j["out"] = out;
  j["eps"] = eps;
  j["backend"] = backend == Backend::bgk ? "bgk" : "boltzmann";
  j["grid"] = {{"dim", grid.dim}, {"n_x", grid.n_x}, {"n_v", grid.n_v}, {"v_max", grid.v_max},
               {"tol_mass", grid.tol_mass}, {"tol_gram", grid.tol_gram}};
  j["kernel"] = {{"gamma", kernel.gamma}, {"C", kernel.C}, {"b0", kernel.b0}, {"b1", kernel.b1},
                 {"C_z", kernel.C_z}, {"n_angles", kernel.n_angles}};
  j["gpc"] = {{"K", K}, {"q", kernel.q}};
  j["init"] = {{"kind", init.kind}, {"amp", init.amp}};
  j["network"] = {{"width", network.width},
                  {"depth", network.depth},
                  {"activation", network.activation == Activation::tanh ? "tanh" : "identity"},
                  {"periodic", network.periodic},
                  {"n_freq", network.n_freq},
                  {"maxwellian_output", network.maxwellian_output},
                  {"t_scale", network.t_scale},
                  {"v_scale", network.v_scale}};
  const char* vm = collocation.v_mode == VelocitySampling::grid      ? "grid"
                   : collocation.v_mode == VelocitySampling::uniform ? "uniform"
                                                                     : "maxwellian";
  j["collocation"] = {{"t_end", collocation.t_end},           {"n_interior", collocation.n_interior},
                      {"n_initial", collocation.n_initial},   {"n_boundary", collocation.n_boundary},
                      {"v_mode", vm},                         {"n_velocity", collocation.n_velocity}};
  j["loss"] = {{"fd_step", loss.fd_step}};
  j["train"] = {{"steps", train.steps},
                {"lr", train.adam.lr},
                {"beta1", train.adam.beta1},
                {"beta2", train.adam.beta2},
                {"adam_eps", train.adam.eps},
                {"lr_decay", train.adam.lr_decay},
                {"decay_every", train.adam.decay_every},
                {"resample_every", train.resample_every},
                {"log_every", train.log_every},
                {"checkpoints", train.checkpoints},
                {"eval_interior", train.eval_interior},
                {"eval_initial", train.eval_initial},
                {"eval_boundary", train.eval_boundary},
                {"eval_seed", train.eval_seed}};
  j["solver"] = {{"dt", solver.dt}, {"t_end", solver.t_end}, {"cfl", solver.cfl}, {"n_snapshots", solver.n_snapshots}};
  j["hypo"] = {{"gamma", hypo.gamma}, {"tol_kernel", hypo.tol_kernel}, {"z", hypo.z}};
  j["ap"] = {{"eps_list", ap.eps_list}};
  j["theorem2"] = {{"steps", theorem2.steps},
                   {"n_checkpoints", theorem2.n_checkpoints},
                   {"remark_eps", theorem2.remark_eps},
                   {"remark_loss", theorem2.remark_loss}};
  j["lyapunov"] = {{"a1", lyapunov.a1}, {"a2", lyapunov.a2}, {"a3", lyapunov.a3}, {"a4", lyapunov.a4},
                   {"margin", lyapunov.margin}};
  j["tails"] = {{"boxes", tails.boxes}};
  return j;
}

std::uint64_t ExperimentConfig::hash() const {
  nlohmann::ordered_json j = to_json();
  j.erase("out");  // where results go does not change them
  return fnv1a(j.dump());
}

void apply_override(json& j, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(kv, "override must look like key=value");
  const std::string key = kv.substr(0, eq);
  const std::string val = kv.substr(eq + 1);
  json parsed;
  try {
    parsed = json::parse(val);
  } catch (const json::exception&) {
    parsed = val;
  }
  json* cur = &j;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty()) throw ConfigError(key, "empty path component");
    if (!cur->is_object()) {
      if (cur->is_null()) *cur = json::object();
      else throw ConfigError(key, "path crosses a non-object value");
    }
    cur = &(*cur)[parts[i]];
  }
  *cur = parsed;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  json j = json::object();
  if (!path.empty()) {
    std::ifstream f(path);
    if (!f) throw ConfigError("<file>", "cannot open config file " + path);
    try {
      j = json::parse(f, nullptr, true, true);
    } catch (const json::parse_error& e) {
      throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
    }
  }
  for (const auto& o : overrides) apply_override(j, o);
  return parse_config(j);
}

}  // namespace apnn
