#include "apnn/mlp.hpp"

#include <cmath>

#include "apnn/errors.hpp"

namespace apnn {

namespace {
using CMap = Eigen::Map<const Mat>;
using MMap = Eigen::Map<Mat>;
using CVMap = Eigen::Map<const Vec>;
using VMap = Eigen::Map<Vec>;
}  // namespace

Mlp::Mlp(int n_in, int width, int depth, int n_out, Activation act)
    : n_in_(n_in), n_out_(n_out), act_(act) {
  if (n_in < 1 || n_out < 1 || width < 1 || depth < 0) throw InvalidArgument("bad network shape");
  int prev = n_in;
  for (int l = 0; l <= depth; ++l) {
    const int out = l == depth ? n_out : width;
    Layer L{prev, out, num_params_, num_params_ + static_cast<std::size_t>(prev * out)};
    num_params_ += static_cast<std::size_t>(prev * out + out);
    layers_.push_back(L);
    prev = out;
  }
}

void Mlp::init(std::mt19937_64& rng, double* params) const {
  for (const Layer& L : layers_) {
    const double r = std::sqrt(6.0 / (L.in + L.out));
    std::uniform_real_distribution<double> U(-r, r);
    for (int i = 0; i < L.in * L.out; ++i) params[L.w_off + static_cast<std::size_t>(i)] = U(rng);
    for (int i = 0; i < L.out; ++i) params[L.b_off + static_cast<std::size_t>(i)] = 0.0;
  }
}

void Mlp::forward(const double* p, const Mat& X, const std::vector<Mat>& Xdot, Mat& Y,
                  std::vector<Mat>& Ydot, Cache* cache) const {
  const std::size_t nt = Xdot.size();
  Mat a = X;
  std::vector<Mat> ad = Xdot;
  if (cache) {
    cache->a.clear();
    cache->ad.clear();
    cache->zd.clear();
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& L = layers_[l];
    CMap W(p + L.w_off, L.out, L.in);
    CVMap b(p + L.b_off, L.out);
    const bool last = l + 1 == layers_.size();
    Mat z = W * a;
    z.colwise() += b;
    std::vector<Mat> zd(nt);
    for (std::size_t t = 0; t < nt; ++t) zd[t].noalias() = W * ad[t];
    if (cache) {
      cache->a.push_back(std::move(a));
      cache->ad.push_back(std::move(ad));
    }
    if (last) {
      Y = std::move(z);
      Ydot = std::move(zd);
      if (cache) cache->zd.emplace_back();
      break;
    }
    if (act_ == Activation::tanh) {
      a = z.array().tanh().matrix();
      ad.assign(nt, Mat());
      const Mat sp = (1.0 - a.array().square()).matrix();
      for (std::size_t t = 0; t < nt; ++t) ad[t] = sp.cwiseProduct(zd[t]);
    } else {
      a = z;
      ad = zd;
    }
    if (cache) cache->zd.push_back(std::move(zd));
  }
  if (!Y.allFinite()) throw NonFiniteOutput("network produced a non-finite value");
}

void Mlp::backward(const double* p, const Cache& c, const Mat& Ybar, const std::vector<Mat>& Ydotbar,
                   double* grad) const {
  const std::size_t nt = Ydotbar.size();
  Mat zbar = Ybar;
  std::vector<Mat> zdbar = Ydotbar;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Layer& L = layers_[li];
    CMap W(p + L.w_off, L.out, L.in);
    MMap gW(grad + L.w_off, L.out, L.in);
    VMap gb(grad + L.b_off, L.out);
    const Mat& a = c.a[li];
    gW.noalias() += zbar * a.transpose();
    for (std::size_t t = 0; t < nt; ++t) gW.noalias() += zdbar[t] * c.ad[li][t].transpose();
    gb += zbar.rowwise().sum();
    if (li == 0) break;
    Mat abar = W.transpose() * zbar;
    std::vector<Mat> adbar(nt);
    for (std::size_t t = 0; t < nt; ++t) adbar[t].noalias() = W.transpose() * zdbar[t];
    // a = s(z), ad = s'(z) zd
    const Mat& an = c.a[li];  // output of the previous activation
    if (act_ == Activation::tanh) {
      const Mat sp = (1.0 - an.array().square()).matrix();
      zbar = sp.cwiseProduct(abar);
      const Mat spp = (-2.0 * an.array() * sp.array()).matrix();
      for (std::size_t t = 0; t < nt; ++t) {
        zbar.noalias() += spp.cwiseProduct(c.zd[li - 1][t].cwiseProduct(adbar[t]));
        zdbar[t] = sp.cwiseProduct(adbar[t]);
      }
    } else {
      zbar = std::move(abar);
      zdbar = std::move(adbar);
    }
  }
}

}  // namespace apnn
