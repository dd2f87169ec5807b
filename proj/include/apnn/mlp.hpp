#pragma once

#include <random>
#include <vector>

#include "apnn/phase_space.hpp"

namespace apnn {

enum class Activation { tanh, identity };

/// Fully connected network y = W_L s(... s(W_1 x + b_1) ...) + b_L on column
/// batches. Input tangents are pushed forward alongside the values so that
/// first derivatives with respect to the inputs come out of one pass; the
/// parameter gradient of any linear functional of values and tangents is
/// obtained by a reverse sweep over the cached pass.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int n_in, int width, int depth, int n_out, Activation act = Activation::tanh);

  int n_in() const { return n_in_; }
  int n_out() const { return n_out_; }
  std::size_t num_params() const { return num_params_; }

  /// Glorot-uniform weights, zero biases.
  void init(std::mt19937_64& rng, double* params) const;

  struct Cache {
    std::vector<Mat> a;                 ///< layer inputs a_0 = x, a_1, ...
    std::vector<std::vector<Mat>> ad;   ///< tangents of a_l
    std::vector<std::vector<Mat>> zd;   ///< tangents of pre-activations
  };

  void forward(const double* params, const Mat& X, const std::vector<Mat>& Xdot, Mat& Y,
               std::vector<Mat>& Ydot, Cache* cache) const;

  /// grad += d/dparams of <Ybar, Y> + sum_t <Ydotbar_t, Ydot_t>.
  void backward(const double* params, const Cache& cache, const Mat& Ybar,
                const std::vector<Mat>& Ydotbar, double* grad) const;

 private:
  struct Layer {
    int in, out;
    std::size_t w_off, b_off;
  };
  int n_in_ = 0, n_out_ = 0;
  Activation act_ = Activation::tanh;
  std::vector<Layer> layers_;
  std::size_t num_params_ = 0;
};

}  // namespace apnn
