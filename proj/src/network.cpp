#include "apnn/network.hpp"

#include <cmath>
#include <numbers>

#include "apnn/errors.hpp"

namespace apnn {

NetworkBundle::NetworkBundle(int dim, int K, const NetworkSpec& spec) : dim_(dim), K_(K), spec_(spec) {
  if (K < 1) throw InvalidArgument("network bundle needs K >= 1");
  const int ftx = features_tx();
  std::size_t off = 0;
  for (int i = 0; i < K; ++i) {
    nets_.emplace_back(ftx, spec.width, spec.depth, dim + 2, spec.activation);
    nets_.emplace_back(ftx + dim, spec.width, spec.depth, 1, spec.activation);
  }
  for (const Mlp& n : nets_) {
    offsets_.push_back(off);
    off += n.num_params();
  }
  params_ = Vec::Zero(static_cast<Eigen::Index>(off));
}

void NetworkBundle::init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t n = 0; n < nets_.size(); ++n) nets_[n].init(rng, params_.data() + offsets_[n]);
}

int NetworkBundle::features_tx() const { return 1 + dim_ * (spec_.periodic ? 2 * spec_.n_freq : 1); }

void NetworkBundle::embed(const Mat& tx, const Mat* vel, unsigned flags, Mat& X, std::vector<Mat>& Xdot) const {
  const Eigen::Index P = tx.cols();
  const Eigen::Index S = vel ? vel->cols() : 1;
  const Eigen::Index B = P * S;
  const int ftx = features_tx();
  const int nin = ftx + (vel ? dim_ : 0);
  X.resize(nin, B);
  std::vector<int> tangent_kind;  // 0 dt, 1+a dx_a, 1+dim+b dv_b
  if (flags & kDt) tangent_kind.push_back(0);
  if (flags & kDx)
    for (int a = 0; a < dim_; ++a) tangent_kind.push_back(1 + a);
  if (vel && (flags & kDv))
    for (int b = 0; b < dim_; ++b) tangent_kind.push_back(1 + dim_ + b);
  Xdot.assign(tangent_kind.size(), Mat::Zero(nin, B));
  Mat ftr(ftx, P);
  std::vector<Mat> fdx(static_cast<std::size_t>(dim_), Mat::Zero(ftx, P));
  for (Eigen::Index p = 0; p < P; ++p) {
    ftr(0, p) = tx(0, p) / spec_.t_scale;
    int r = 1;
    for (int a = 0; a < dim_; ++a) {
      const double x = tx(1 + a, p);
      if (spec_.periodic) {
        for (int k = 1; k <= spec_.n_freq; ++k) {
          ftr(r, p) = std::sin(k * x);
          fdx[static_cast<std::size_t>(a)](r, p) = k * std::cos(k * x);
          ftr(r + 1, p) = std::cos(k * x);
          fdx[static_cast<std::size_t>(a)](r + 1, p) = -k * std::sin(k * x);
          r += 2;
        }
      } else {
        ftr(r, p) = x / std::numbers::pi;
        fdx[static_cast<std::size_t>(a)](r, p) = 1.0 / std::numbers::pi;
        r += 1;
      }
    }
  }
  for (Eigen::Index p = 0; p < P; ++p)
    for (Eigen::Index s = 0; s < S; ++s) {
      const Eigen::Index c = p * S + s;
      X.col(c).head(ftx) = ftr.col(p);
      if (vel) X.col(c).tail(dim_) = vel->col(s) / spec_.v_scale;
      for (std::size_t t = 0; t < tangent_kind.size(); ++t) {
        const int kind = tangent_kind[t];
        if (kind == 0)
          Xdot[t](0, c) = 1.0 / spec_.t_scale;
        else if (kind <= dim_)
          Xdot[t].col(c).head(ftx) = fdx[static_cast<std::size_t>(kind - 1)].col(p);
        else
          Xdot[t](ftx + (kind - 1 - dim_), c) = 1.0 / spec_.v_scale;
      }
    }
}

int NetworkBundle::macro(int mode, const Mat& tx, unsigned flags, MacroBlock& out, bool record) {
  flags &= ~kDv;
  const int idx = 2 * mode;
  Mat X, Y;
  std::vector<Mat> Xdot, Ydot;
  embed(tx, nullptr, flags, X, Xdot);
  Record rec;
  const Mlp& net = nets_[static_cast<std::size_t>(idx)];
  net.forward(params_.data() + offsets_[static_cast<std::size_t>(idx)], X, Xdot, Y, Ydot,
              record ? &rec.cache : nullptr);
  out.val = std::move(Y);
  std::size_t t = 0;
  out.dt = (flags & kDt) ? std::move(Ydot[t++]) : Mat();
  out.dx.clear();
  if (flags & kDx)
    for (int a = 0; a < dim_; ++a) out.dx.push_back(std::move(Ydot[t++]));
  if (!record) return -1;
  rec.net = idx;
  rec.flags = flags;
  rec.P = tx.cols();
  records_.push_back(std::move(rec));
  return static_cast<int>(records_.size()) - 1;
}

int NetworkBundle::micro(int mode, const Mat& tx, const Mat& vel, unsigned flags, MicroBlock& out, bool record) {
  const int idx = 2 * mode + 1;
  const Eigen::Index P = tx.cols(), S = vel.cols();
  Mat X, Y;
  std::vector<Mat> Xdot, Ydot;
  embed(tx, &vel, flags, X, Xdot);
  Record rec;
  const Mlp& net = nets_[static_cast<std::size_t>(idx)];
  net.forward(params_.data() + offsets_[static_cast<std::size_t>(idx)], X, Xdot, Y, Ydot,
              record ? &rec.cache : nullptr);
  Vec Mv = Vec::Ones(S);
  if (spec_.maxwellian_output)
    for (Eigen::Index s = 0; s < S; ++s) Mv(s) = root_maxwellian(vel.col(s).data(), dim_);
  auto shape = [&](const Mat& row) {
    Mat m = Eigen::Map<const Mat>(row.data(), S, P);
    return Mat(Mv.asDiagonal() * m);
  };
  out.val = shape(Y);
  std::size_t t = 0;
  out.dt = (flags & kDt) ? shape(Ydot[t++]) : Mat();
  out.dx.clear();
  out.dv.clear();
  if (flags & kDx)
    for (int a = 0; a < dim_; ++a) out.dx.push_back(shape(Ydot[t++]));
  if (flags & kDv)
    for (int b = 0; b < dim_; ++b) {
      Mat gv = shape(Ydot[t++]);
      if (spec_.maxwellian_output) gv -= 0.5 * (vel.row(b).transpose().asDiagonal() * out.val);
      out.dv.push_back(std::move(gv));
    }
  if (!record) return -1;
  rec.net = idx;
  rec.flags = flags;
  rec.mweight = Mv;
  rec.vel = vel;
  rec.S = S;
  rec.P = P;
  records_.push_back(std::move(rec));
  return static_cast<int>(records_.size()) - 1;
}

void NetworkBundle::macro_adjoint(int handle, const MacroBlock& bar, double* grad) {
  const Record& r = records_.at(static_cast<std::size_t>(handle));
  std::vector<Mat> ydb;
  if (r.flags & kDt) ydb.push_back(bar.dt.size() ? bar.dt : Mat::Zero(dim_ + 2, r.P));
  if (r.flags & kDx)
    for (int a = 0; a < dim_; ++a) ydb.push_back(bar.dx[static_cast<std::size_t>(a)]);
  const auto n = static_cast<std::size_t>(r.net);
  nets_[n].backward(params_.data() + offsets_[n], r.cache, bar.val, ydb, grad + offsets_[n]);
}

void NetworkBundle::micro_adjoint(int handle, const MicroBlock& bar, double* grad) {
  const Record& r = records_.at(static_cast<std::size_t>(handle));
  const Eigen::Index S = r.S, P = r.P;
  auto flat = [&](const Mat& m) {
    Mat w = r.mweight.asDiagonal() * m;
    return Mat(Eigen::Map<const Mat>(w.data(), 1, S * P));
  };
  Mat vbar = bar.val;
  std::vector<Mat> ydb;
  if (r.flags & kDt) ydb.push_back(flat(bar.dt));
  if (r.flags & kDx)
    for (int a = 0; a < dim_; ++a) ydb.push_back(flat(bar.dx[static_cast<std::size_t>(a)]));
  if (r.flags & kDv)
    for (int b = 0; b < dim_; ++b) {
      const Mat& db = bar.dv[static_cast<std::size_t>(b)];
      ydb.push_back(flat(db));
      if (spec_.maxwellian_output) vbar -= 0.5 * (r.vel.row(b).transpose().asDiagonal() * db);
    }
  const auto n = static_cast<std::size_t>(r.net);
  nets_[n].backward(params_.data() + offsets_[n], r.cache, flat(vbar), ydb, grad + offsets_[n]);
}

}  // namespace apnn
