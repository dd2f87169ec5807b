#pragma once

#include <random>
#include <string>
#include <vector>

#include "apnn/micro_macro.hpp"
#include "apnn/mlp.hpp"

namespace apnn {

enum DerivFlags : unsigned { kDt = 1u, kDx = 2u, kDv = 4u };

/// Anything that can provide macro and micro fields with first derivatives:
/// trained networks or closed-form solutions.
class FieldSource {
 public:
  virtual ~FieldSource() = default;
  virtual int modes() const = 0;
  virtual int dim() const = 0;
  /// tx: (1+dim) x P rows (t, x). Fills val and requested derivatives.
  /// Returns a handle for the adjoint pass when `record` is set, else -1.
  virtual int macro(int mode, const Mat& tx, unsigned flags, MacroBlock& out, bool record) = 0;
  /// vel: dim x S. Output rows are velocities, columns points.
  virtual int micro(int mode, const Mat& tx, const Mat& vel, unsigned flags, MicroBlock& out, bool record) = 0;
  virtual bool trainable() const { return false; }
  virtual void macro_adjoint(int, const MacroBlock&, double*) {}
  virtual void micro_adjoint(int, const MicroBlock&, double*) {}
  virtual void clear_records() {}
};

/// Closed-form initial data per mode.
class InitialData {
 public:
  virtual ~InitialData() = default;
  virtual int modes() const = 0;
  /// kind 0: value, 1+a: d/dx_a, 1+dim+b: d/dv_b. Returns S x P.
  virtual Mat eval(int mode, int kind, const Mat& x, const Mat& vel) const = 0;
};

struct NetworkSpec {
  int width = 24;
  int depth = 2;
  Activation activation = Activation::tanh;
  bool periodic = true;  ///< sin/cos features in x
  int n_freq = 1;
  bool maxwellian_output = true;  ///< micro output multiplied by M(v)
  double t_scale = 1.0;           ///< t enters as t / t_scale
  double v_scale = 8.0;           ///< v enters as v / v_scale
};

/// One macro net (t,x) -> m and one micro net (t,x,v) -> g per gPC mode.
class NetworkBundle : public FieldSource {
 public:
  NetworkBundle(int dim, int K, const NetworkSpec& spec);

  int modes() const override { return K_; }
  int dim() const override { return dim_; }
  const NetworkSpec& spec() const { return spec_; }

  Vec& params() { return params_; }
  const Vec& params() const { return params_; }
  std::size_t num_params() const { return static_cast<std::size_t>(params_.size()); }
  void init(std::uint64_t seed);

  int macro(int mode, const Mat& tx, unsigned flags, MacroBlock& out, bool record) override;
  int micro(int mode, const Mat& tx, const Mat& vel, unsigned flags, MicroBlock& out, bool record) override;
  bool trainable() const override { return true; }
  void macro_adjoint(int handle, const MacroBlock& bar, double* grad) override;
  void micro_adjoint(int handle, const MicroBlock& bar, double* grad) override;
  void clear_records() override { records_.clear(); }

  /// Raw access to a single net for tests: net 2*mode (macro) or 2*mode+1 (micro).
  const Mlp& net(int idx) const { return nets_[static_cast<std::size_t>(idx)]; }
  std::size_t offset(int idx) const { return offsets_[static_cast<std::size_t>(idx)]; }

 private:
  struct Record {
    int net;
    unsigned flags;
    Mlp::Cache cache;
    Vec mweight;             ///< M(v) per column (micro with maxwellian output)
    Mat vel;                 ///< velocities per column (dim x B), micro only
    Eigen::Index S = 0, P = 0;
  };
  int features_tx() const;
  void embed(const Mat& tx, const Mat* vel, unsigned flags, Mat& X, std::vector<Mat>& Xdot) const;

  int dim_, K_;
  NetworkSpec spec_;
  std::vector<Mlp> nets_;
  std::vector<std::size_t> offsets_;
  Vec params_;
  std::vector<Record> records_;
};

}  // namespace apnn
