#include "apnn/loss.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "apnn/errors.hpp"

namespace apnn {

const std::array<const char*, ModeLoss::kParts>& ModeLoss::names() {
  static const std::array<const char*, kParts> n = {"R1",   "R2",   "R_ini",   "R_b",   "R1_dx", "R2_dx",
                                                    "R_ini_dx", "R_b_dx", "R1_dv", "R2_dv", "R_ini_dv", "R_b_dv"};
  return n;
}

std::array<double, ModeLoss::kParts> ModeLoss::values() const {
  return {r1, r2, rini, rb, r1x, r2x, rinix, rbx, r1v, r2v, riniv, rbv};
}

double ModeLoss::sum() const {
  double s = 0;
  for (double v : values()) s += v;
  return s;
}

double LossBreakdown::recomputed_total() const {
  double t = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) t += weight[i] * raw[i].sum();
  return t;
}

std::string LossBreakdown::to_json() const {
  nlohmann::ordered_json j;
  j["total"] = total;
  nlohmann::ordered_json modes = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < raw.size(); ++i) {
    nlohmann::ordered_json m;
    m["mode"] = i + 1;
    m["weight"] = weight[i];
    const auto v = raw[i].values();
    for (int k = 0; k < ModeLoss::kParts; ++k) m[ModeLoss::names()[static_cast<std::size_t>(k)]] = v[static_cast<std::size_t>(k)];
    modes.push_back(m);
  }
  j["modes"] = modes;
  return j.dump(2);
}

LossAssembler::LossAssembler(const MicroMacro& mm, const InitialData& init, int q, const LossConfig& cfg)
    : mm_(mm), init_(init), q_(q), cfg_(cfg) {
  if (!(cfg.fd_step > 0)) throw InvalidArgument("fd_step must be positive");
  grid_ = make_grid_set(mm.basis());
  const bool interp = mm.coupling().backend == Backend::boltzmann;
  for (int b = 0; b < mm.dim(); ++b)
    for (int s : {1, -1}) grid_shifted_.push_back(shifted_set(mm.basis(), grid_, b, s * cfg.fd_step, interp));
}

namespace {

struct Fields {
  MacroBlock m;
  MicroBlock gg, gs;
  int hm = -1, hg = -1, hs = -1;
};

struct Bars {
  MacroBlock m;
  MicroBlock gg, gs;
};

/// sum_p wp_p sum_s ws_s X(s,p)^2 ; ws may be empty (unit weights).
double wsq(const Mat& X, const Vec* ws, const Vec& wp) {
  const Mat X2 = X.cwiseAbs2();
  const Vec col = ws ? Vec(X2.transpose() * (*ws)) : Vec(X2.colwise().sum().transpose());
  return col.dot(wp);
}

/// bar += c * 2 * ws_s wp_p X(s,p)
void wsq_bar(const Mat& X, const Vec* ws, const Vec& wp, double c, Mat& bar) {
  if (ws)
    bar.noalias() += (2.0 * c) * (ws->asDiagonal() * X * wp.asDiagonal());
  else
    bar.noalias() += (2.0 * c) * (X * wp.asDiagonal());
}

}  // namespace

LossBreakdown LossAssembler::evaluate(FieldSource& src, const CollocationBatch& batch, Vec* grad) const {
  const int d = mm_.dim();
  const int K = mm_.coupling().K;
  if (src.modes() != K || src.dim() != d) throw InvalidArgument("field source does not match the Galerkin system");
  const int nm = mm_.basis().count();
  const double delta = cfg_.fd_step;
  const bool rec = grad != nullptr && src.trainable();
  if (rec) src.clear_records();
  const bool interp = mm_.coupling().backend == Backend::boltzmann;
  const bool on_grid = batch.velocity_on_grid;

  VelocitySet sampled;
  std::vector<VelocitySet> sampled_shifted;
  if (!on_grid) {
    sampled = make_velocity_set(mm_.basis(), batch.velocity, batch.w_velocity, interp);
    for (int b = 0; b < d; ++b)
      for (int s : {1, -1}) sampled_shifted.push_back(shifted_set(mm_.basis(), sampled, b, s * delta, interp));
  }
  const VelocitySet& I = on_grid ? grid_ : sampled;
  const std::vector<VelocitySet>& Ish = on_grid ? grid_shifted_ : sampled_shifted;
  const Mat& vgrid = grid_.v;
  const Vec* ws = &I.w;

  LossBreakdown out;
  out.raw.assign(static_cast<std::size_t>(K), ModeLoss{});
  for (int i = 0; i < K; ++i) out.weight.push_back(std::pow(static_cast<double>(i + 1), 2 * q_));

  auto eval_fields = [&](int i, const Mat& tx, unsigned flags, Fields& f) {
    f.hm = src.macro(i, tx, flags & ~kDv, f.m, rec);
    f.hg = src.micro(i, tx, vgrid, flags, f.gg, rec);
    if (!on_grid) f.hs = src.micro(i, tx, I.v, flags, f.gs, rec);
  };
  auto zero_bars = [&](Bars& b, Eigen::Index P) {
    b.m.resize_zero(nm, P, d);
    b.gg.resize_zero(vgrid.cols(), P, d, true);
    if (!on_grid) b.gs.resize_zero(I.size(), P, d, true);
  };
  auto gs_of = [&](Fields& f) -> const MicroBlock& { return on_grid ? f.gg : f.gs; };
  auto gsbar_of = [&](Bars& b) -> MicroBlock& { return on_grid ? b.gg : b.gs; };
  auto push_adjoint = [&](Fields& f, Bars& b) {
    if (!rec) return;
    src.macro_adjoint(f.hm, b.m, grad->data());
    src.micro_adjoint(f.hg, b.gg, grad->data());
    if (!on_grid) src.micro_adjoint(f.hs, b.gs, grad->data());
  };

  // ---------------- interior: residuals and their finite-difference gradients
  {
    const Mat& tx0 = batch.interior;
    const Vec& wp = batch.w_interior;
    const Eigen::Index P = tx0.cols();
    const int nloc = 1 + 2 * d;
    std::vector<Mat> tx(static_cast<std::size_t>(nloc), tx0);
    for (int a = 0; a < d; ++a) {
      tx[static_cast<std::size_t>(1 + 2 * a)].row(1 + a).array() += delta;
      tx[static_cast<std::size_t>(2 + 2 * a)].row(1 + a).array() -= delta;
    }
    std::vector<std::vector<Fields>> F(static_cast<std::size_t>(K), std::vector<Fields>(static_cast<std::size_t>(nloc)));
    std::vector<std::vector<MicroBlock>> SV(static_cast<std::size_t>(K), std::vector<MicroBlock>(static_cast<std::size_t>(2 * d)));
    std::vector<std::vector<int>> hSV(static_cast<std::size_t>(K), std::vector<int>(static_cast<std::size_t>(2 * d), -1));
    for (int i = 0; i < K; ++i) {
      for (int l = 0; l < nloc; ++l) eval_fields(i, tx[static_cast<std::size_t>(l)], kDt | kDx, F[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)]);
      for (int j = 0; j < 2 * d; ++j)
        hSV[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            src.micro(i, tx0, Ish[static_cast<std::size_t>(j)].v, kDt | kDx, SV[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], rec);
    }
    auto ggl = [&](int l) {
      std::vector<const MicroBlock*> v;
      for (int k = 0; k < K; ++k) v.push_back(&F[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)].gg);
      return v;
    };
    auto gsl = [&](int l) {
      std::vector<const MicroBlock*> v;
      for (int k = 0; k < K; ++k) v.push_back(&gs_of(F[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]));
      return v;
    };
    auto svl = [&](int j) {
      std::vector<const MicroBlock*> v;
      for (int k = 0; k < K; ++k) v.push_back(&SV[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]);
      return v;
    };
    std::vector<std::vector<Mat>> d1(static_cast<std::size_t>(K)), d2(static_cast<std::size_t>(K)), d2v(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      for (int l = 0; l < nloc; ++l) {
        Fields& f = F[ii][static_cast<std::size_t>(l)];
        d1[ii].push_back(mm_.macro_residual(f.m, f.gg));
        d2[ii].push_back(mm_.micro_residual(i, f.m, ggl(l), gsl(l), I));
      }
      for (int j = 0; j < 2 * d; ++j)
        d2v[ii].push_back(mm_.micro_residual(i, F[ii][0].m, ggl(0), svl(j), Ish[static_cast<std::size_t>(j)]));
      for (const auto& m : d1[ii]) if (!m.allFinite()) throw NonFiniteOutput("non-finite macro residual");
      for (const auto& m : d2[ii]) if (!m.allFinite()) throw NonFiniteOutput("non-finite micro residual");
    }
    std::vector<std::vector<Mat>> d1b, d2b, d2vb;
    if (rec) {
      d1b.resize(static_cast<std::size_t>(K));
      d2b.resize(static_cast<std::size_t>(K));
      d2vb.resize(static_cast<std::size_t>(K));
      for (int i = 0; i < K; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        for (int l = 0; l < nloc; ++l) {
          d1b[ii].push_back(Mat::Zero(nm, P));
          d2b[ii].push_back(Mat::Zero(I.size(), P));
        }
        for (int j = 0; j < 2 * d; ++j) d2vb[ii].push_back(Mat::Zero(I.size(), P));
      }
    }
    const double inv2d = 0.5 / delta;
    for (int i = 0; i < K; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      ModeLoss& L = out.raw[ii];
      const double W = out.weight[ii];
      L.r1 = wsq(d1[ii][0], nullptr, wp);
      L.r2 = wsq(d2[ii][0], ws, wp);
      if (rec) {
        wsq_bar(d1[ii][0], nullptr, wp, W, d1b[ii][0]);
        wsq_bar(d2[ii][0], ws, wp, W, d2b[ii][0]);
      }
      for (int a = 0; a < d; ++a) {
        const auto lp = static_cast<std::size_t>(1 + 2 * a), lm = static_cast<std::size_t>(2 + 2 * a);
        const Mat g1 = (d1[ii][lp] - d1[ii][lm]) * inv2d;
        const Mat g2 = (d2[ii][lp] - d2[ii][lm]) * inv2d;
        L.r1x += wsq(g1, nullptr, wp);
        L.r2x += wsq(g2, ws, wp);
        if (rec) {
          Mat t1 = Mat::Zero(nm, P), t2 = Mat::Zero(I.size(), P);
          wsq_bar(g1, nullptr, wp, W * inv2d, t1);
          wsq_bar(g2, ws, wp, W * inv2d, t2);
          d1b[ii][lp] += t1;
          d1b[ii][lm] -= t1;
          d2b[ii][lp] += t2;
          d2b[ii][lm] -= t2;
        }
      }
      for (int b = 0; b < d; ++b) {
        const auto jp = static_cast<std::size_t>(2 * b), jm = static_cast<std::size_t>(2 * b + 1);
        const Mat g2 = (d2v[ii][jp] - d2v[ii][jm]) * inv2d;
        L.r2v += wsq(g2, ws, wp);
        if (rec) {
          Mat t2 = Mat::Zero(I.size(), P);
          wsq_bar(g2, ws, wp, W * inv2d, t2);
          d2vb[ii][jp] += t2;
          d2vb[ii][jm] -= t2;
        }
      }
      L.r1v = 0.0;  // the macro residual does not depend on v
    }
    if (rec) {
      std::vector<std::vector<Bars>> B(static_cast<std::size_t>(K), std::vector<Bars>(static_cast<std::size_t>(nloc)));
      std::vector<std::vector<MicroBlock>> SVb(static_cast<std::size_t>(K), std::vector<MicroBlock>(static_cast<std::size_t>(2 * d)));
      for (int i = 0; i < K; ++i) {
        for (int l = 0; l < nloc; ++l) zero_bars(B[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)], P);
        for (int j = 0; j < 2 * d; ++j) SVb[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].resize_zero(I.size(), P, d, false);
      }
      auto ggb = [&](int l) {
        std::vector<MicroBlock*> v;
        for (int k = 0; k < K; ++k) v.push_back(&B[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)].gg);
        return v;
      };
      auto gsb = [&](int l) {
        std::vector<MicroBlock*> v;
        for (int k = 0; k < K; ++k) v.push_back(&gsbar_of(B[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)]));
        return v;
      };
      auto svb = [&](int j) {
        std::vector<MicroBlock*> v;
        for (int k = 0; k < K; ++k) v.push_back(&SVb[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]);
        return v;
      };
      for (int i = 0; i < K; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        for (int l = 0; l < nloc; ++l) {
          const auto ll = static_cast<std::size_t>(l);
          mm_.macro_residual_adjoint(d1b[ii][ll], B[ii][ll].m, B[ii][ll].gg);
          mm_.micro_residual_adjoint(i, d2b[ii][ll], I, B[ii][ll].m, ggb(l), gsb(l));
        }
        for (int j = 0; j < 2 * d; ++j)
          mm_.micro_residual_adjoint(i, d2vb[ii][static_cast<std::size_t>(j)], Ish[static_cast<std::size_t>(j)], B[ii][0].m, ggb(0), svb(j));
      }
      for (int i = 0; i < K; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        for (int l = 0; l < nloc; ++l) push_adjoint(F[ii][static_cast<std::size_t>(l)], B[ii][static_cast<std::size_t>(l)]);
        for (int j = 0; j < 2 * d; ++j) src.micro_adjoint(hSV[ii][static_cast<std::size_t>(j)], SVb[ii][static_cast<std::size_t>(j)], grad->data());
      }
    }
  }

  // ---------------- initial slice
  {
    const Mat& x = batch.initial;
    const Vec& wp = batch.w_initial;
    const Eigen::Index P = x.cols();
    Mat tx(1 + d, P);
    tx.row(0).setZero();
    tx.bottomRows(d) = x;
    for (int i = 0; i < K; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      Fields f;
      eval_fields(i, tx, kDx | kDv, f);
      Bars b;
      if (rec) zero_bars(b, P);
      ModeLoss& L = out.raw[ii];
      for (int kind = 0; kind <= 2 * d; ++kind) {
        const Mat H = mm_.assemble_h(kind, f.m, f.gg, gs_of(f), I) - init_.eval(i, kind, x, I.v);
        const double r = wsq(H, ws, wp);
        (kind == 0 ? L.rini : kind <= d ? L.rinix : L.riniv) += r;
        if (rec) {
          Mat Hb = Mat::Zero(H.rows(), H.cols());
          wsq_bar(H, ws, wp, out.weight[ii], Hb);
          mm_.assemble_h_adjoint(kind, Hb, I, b.m, b.gg, gsbar_of(b));
        }
      }
      push_adjoint(f, b);
    }
  }

  // ---------------- periodic faces
  {
    const Mat& tb = batch.boundary;
    const Vec& wp = batch.w_boundary;
    const Eigen::Index P = tb.cols();
    const double pi = std::numbers::pi;
    for (int i = 0; i < K; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      std::vector<Fields> fp(static_cast<std::size_t>(d)), fm(static_cast<std::size_t>(d));
      std::vector<std::vector<Mat>> Delta(static_cast<std::size_t>(d));
      for (int a = 0; a < d; ++a) {
        Mat txp = tb, txm = tb;
        txp.row(1 + a).setConstant(pi);
        txm.row(1 + a).setConstant(-pi);
        Fields& p = fp[static_cast<std::size_t>(a)];
        Fields& m = fm[static_cast<std::size_t>(a)];
        eval_fields(i, txp, kDx | kDv, p);
        eval_fields(i, txm, kDx | kDv, m);
        for (int kind = 0; kind <= 2 * d; ++kind)
          Delta[static_cast<std::size_t>(a)].push_back(mm_.assemble_h(kind, p.m, p.gg, gs_of(p), I) -
                                                       mm_.assemble_h(kind, m.m, m.gg, gs_of(m), I));
      }
      // group 0: values, 1: x-gradients, 2: v-gradients
      auto group = [&](int kind) { return kind == 0 ? 0 : kind <= d ? 1 : 2; };
      std::array<Mat, 3> db;
      for (auto& m : db) m = Mat::Zero(I.size(), P);
      for (int a = 0; a < d; ++a)
        for (int kind = 0; kind <= 2 * d; ++kind)
          db[static_cast<std::size_t>(group(kind))] += Delta[static_cast<std::size_t>(a)][static_cast<std::size_t>(kind)].cwiseAbs2();
      ModeLoss& L = out.raw[ii];
      L.rb = wsq(db[0], ws, wp);
      L.rbx = wsq(db[1], ws, wp);
      L.rbv = wsq(db[2], ws, wp);
      if (rec) {
        std::array<Mat, 3> dbb;
        for (int g = 0; g < 3; ++g) {
          dbb[static_cast<std::size_t>(g)] = Mat::Zero(I.size(), P);
          wsq_bar(db[static_cast<std::size_t>(g)], ws, wp, out.weight[ii], dbb[static_cast<std::size_t>(g)]);
        }
        for (int a = 0; a < d; ++a) {
          Bars bp, bm;
          zero_bars(bp, P);
          zero_bars(bm, P);
          Fields& p = fp[static_cast<std::size_t>(a)];
          Fields& m = fm[static_cast<std::size_t>(a)];
          for (int kind = 0; kind <= 2 * d; ++kind) {
            const Mat& D = Delta[static_cast<std::size_t>(a)][static_cast<std::size_t>(kind)];
            const Mat Db = 2.0 * dbb[static_cast<std::size_t>(group(kind))].cwiseProduct(D);
            mm_.assemble_h_adjoint(kind, Db, I, bp.m, bp.gg, gsbar_of(bp));
            mm_.assemble_h_adjoint(kind, -Db, I, bm.m, bm.gg, gsbar_of(bm));
          }
          push_adjoint(p, bp);
          push_adjoint(m, bm);
        }
      }
    }
  }

  out.total = out.recomputed_total();
  if (!std::isfinite(out.total)) throw NonFiniteOutput("loss is not finite");
  if (rec) src.clear_records();
  return out;
}

}  // namespace apnn
