#include "apnn/micro_macro.hpp"

#include "apnn/collision.hpp"
#include "apnn/errors.hpp"

namespace apnn {

namespace {

void fill_set(const FluidBasis& basis, VelocitySet& s, bool need_interp) {
  const int d = basis.dim();
  s.E = basis.eval(s.v);
  s.Egrad.clear();
  s.T.clear();
  for (int b = 0; b < d; ++b) s.Egrad.push_back(basis.eval_grad(s.v, b));
  for (int a = 0; a < d; ++a)
    s.T.push_back(s.v.row(a).transpose().asDiagonal() * s.E - s.E * basis.flux_matrices()[static_cast<std::size_t>(a)]);
  s.interp = need_interp && !s.is_grid ? interpolation_matrix(basis.grid(), s.v) : Mat();
}

}  // namespace

VelocitySet make_grid_set(const FluidBasis& basis) {
  VelocitySet s;
  s.v = basis.grid().nodes();
  s.w = basis.grid().weights();
  s.is_grid = true;
  fill_set(basis, s, false);
  return s;
}

VelocitySet make_velocity_set(const FluidBasis& basis, const Mat& v, const Vec& w, bool need_interp) {
  VelocitySet s;
  s.v = v;
  s.w = w;
  fill_set(basis, s, need_interp);
  return s;
}

VelocitySet shifted_set(const FluidBasis& basis, const VelocitySet& s, int b, double delta, bool need_interp) {
  VelocitySet r;
  r.v = s.v;
  r.v.row(b).array() += delta;
  r.w = s.w;
  fill_set(basis, r, need_interp);
  return r;
}

void MacroBlock::resize_zero(Eigen::Index rows, Eigen::Index cols, int dim) {
  val = Mat::Zero(rows, cols);
  dt = Mat::Zero(rows, cols);
  dx.assign(static_cast<std::size_t>(dim), Mat::Zero(rows, cols));
}

void MicroBlock::resize_zero(Eigen::Index rows, Eigen::Index cols, int dim, bool with_dv) {
  val = Mat::Zero(rows, cols);
  dt = Mat::Zero(rows, cols);
  dx.assign(static_cast<std::size_t>(dim), Mat::Zero(rows, cols));
  dv.assign(with_dv ? static_cast<std::size_t>(dim) : 0u, Mat::Zero(rows, cols));
}

MicroMacro::MicroMacro(const FluidBasis& basis, const SgCoupling& coupling, double eps)
    : basis_(basis), coupling_(coupling), eps_(eps) {
  if (eps < 0) throw InvalidArgument("eps must be non-negative");
  for (int a = 0; a < basis.dim(); ++a) {
    const Vec va = basis.grid().nodes().row(a).transpose();
    F_.push_back((va.asDiagonal() * basis.weighted()).transpose());
  }
}

Mat MicroMacro::postprocess(const Mat& g) const {
  return g - basis_.values() * (basis_.weighted().transpose() * g);
}

void MicroMacro::check_projected(const Mat& g, double tol) const {
  const double p = (basis_.weighted().transpose() * g).cwiseAbs().maxCoeff();
  if (p > tol) throw ProjectionNotApplied("micro field has fluid moment " + std::to_string(p));
}

Mat MicroMacro::macro_residual(const MacroBlock& m, const MicroBlock& gg) const {
  const auto& A = basis_.flux_matrices();
  const Mat& WE = basis_.weighted();
  Mat d1 = m.dt;
  for (int a = 0; a < dim(); ++a) {
    const auto k = static_cast<std::size_t>(a);
    d1.noalias() += A[k] * m.dx[k];
    if (eps_ != 0.0) {
      const Mat& Y = gg.dx[k];
      d1.noalias() += eps_ * (F_[k] * Y - A[k] * (WE.transpose() * Y));
    }
  }
  return d1;
}

void MicroMacro::macro_residual_adjoint(const Mat& D, MacroBlock& mbar, MicroBlock& ggbar) const {
  const auto& A = basis_.flux_matrices();
  const Mat& WE = basis_.weighted();
  mbar.dt += D;
  for (int a = 0; a < dim(); ++a) {
    const auto k = static_cast<std::size_t>(a);
    const Mat AtD = A[k].transpose() * D;
    mbar.dx[k] += AtD;
    if (eps_ != 0.0) ggbar.dx[k].noalias() += eps_ * (F_[k].transpose() * D - WE * AtD);
  }
}

Mat MicroMacro::micro_residual(int i, const MacroBlock& m, const std::vector<const MicroBlock*>& gg,
                               const std::vector<const MicroBlock*>& gs, const VelocitySet& set) const {
  const auto& A = basis_.flux_matrices();
  const Mat& WE = basis_.weighted();
  const Mat& E = basis_.values();
  const auto ii = static_cast<std::size_t>(i);
  const MicroBlock& gi = *gg[ii];
  const MicroBlock& si = *gs[ii];
  Mat d2 = Mat::Zero(set.size(), m.val.cols());
  if (eps_ != 0.0) d2.noalias() += eps_ * (si.dt - set.E * (WE.transpose() * gi.dt));
  for (int a = 0; a < dim(); ++a) {
    const auto k = static_cast<std::size_t>(a);
    d2.noalias() += set.T[k] * m.dx[k];
    if (eps_ != 0.0) {
      const Mat& Y = gi.dx[k];
      const Mat muY = WE.transpose() * Y;
      d2.noalias() += eps_ * (set.v.row(a).transpose().asDiagonal() * (si.dx[k] - set.E * muY));
      d2.noalias() -= eps_ * (set.E * (F_[k] * Y - A[k] * muY));
    }
  }
  const SgCoupling& c = coupling_;
  for (int k = 0; k < c.K; ++k) {
    if (!c.chi(i, k)) continue;
    const auto kk = static_cast<std::size_t>(k);
    const Mat mu = WE.transpose() * gg[kk]->val;
    if (c.backend == Backend::bgk) {
      const double s = c.scalar(i, k);
      const Mat mu_g = mu - basis_.gram() * mu;
      d2.noalias() -= s * (set.E * mu_g - (gs[kk]->val - set.E * mu));
    } else {
      Mat Cg = Mat::Zero(E.rows(), m.val.cols());
      c.apply(i, k, gg[kk]->val - E * mu, Cg);
      if (set.is_grid)
        d2 -= Cg;
      else
        d2.noalias() -= set.interp * Cg;
    }
  }
  return d2;
}

void MicroMacro::micro_residual_adjoint(int i, const Mat& D, const VelocitySet& set, MacroBlock& mbar,
                                        const std::vector<MicroBlock*>& ggbar,
                                        const std::vector<MicroBlock*>& gsbar) const {
  const auto& A = basis_.flux_matrices();
  const Mat& WE = basis_.weighted();
  const auto ii = static_cast<std::size_t>(i);
  MicroBlock& gi = *ggbar[ii];
  MicroBlock& si = *gsbar[ii];
  const Mat EtD = set.E.transpose() * D;
  if (eps_ != 0.0) {
    si.dt += eps_ * D;
    gi.dt.noalias() -= eps_ * (WE * EtD);
  }
  for (int a = 0; a < dim(); ++a) {
    const auto k = static_cast<std::size_t>(a);
    mbar.dx[k].noalias() += set.T[k].transpose() * D;
    if (eps_ != 0.0) {
      const Mat Z = set.v.row(a).transpose().asDiagonal() * D;
      si.dx[k] += eps_ * Z;
      gi.dx[k].noalias() += eps_ * (-WE * (set.E.transpose() * Z) - F_[k].transpose() * EtD +
                                    WE * (A[k].transpose() * EtD));
    }
  }
  const SgCoupling& c = coupling_;
  const Mat& E = basis_.values();
  for (int k = 0; k < c.K; ++k) {
    if (!c.chi(i, k)) continue;
    const auto kk = static_cast<std::size_t>(k);
    if (c.backend == Backend::bgk) {
      // forward: -s E_set (2I - Gram) WE^T g + s g_set
      const double s = c.scalar(i, k);
      const Mat twoMinusG = 2.0 * Mat::Identity(basis_.count(), basis_.count()) - basis_.gram();
      ggbar[kk]->val.noalias() -= s * (WE * (twoMinusG.transpose() * EtD));
      gsbar[kk]->val += s * D;
    } else {
      // forward: -J L_ik (I - E WE^T) g
      const Mat JtD = set.is_grid ? D : Mat(set.interp.transpose() * D);
      Mat Lt = Mat::Zero(JtD.rows(), JtD.cols());
      if (i == k) Lt.noalias() += c.L0.transpose() * JtD;
      if (c.zf(i, k) != 0.0) Lt.noalias() += c.zf(i, k) * (c.L1.transpose() * JtD);
      ggbar[kk]->val.noalias() -= Lt - WE * (E.transpose() * Lt);
    }
  }
}

Mat MicroMacro::assemble_h(int kind, const MacroBlock& m, const MicroBlock& gg, const MicroBlock& gs,
                           const VelocitySet& set) const {
  const Mat& WE = basis_.weighted();
  const int d = dim();
  if (kind == 0) return set.E * m.val + eps_ * (gs.val - set.E * (WE.transpose() * gg.val));
  if (kind <= d) {
    const auto a = static_cast<std::size_t>(kind - 1);
    return set.E * m.dx[a] + eps_ * (gs.dx[a] - set.E * (WE.transpose() * gg.dx[a]));
  }
  const auto b = static_cast<std::size_t>(kind - 1 - d);
  return set.Egrad[b] * m.val + eps_ * (gs.dv[b] - set.Egrad[b] * (WE.transpose() * gg.val));
}

void MicroMacro::assemble_h_adjoint(int kind, const Mat& H, const VelocitySet& set, MacroBlock& mbar,
                                    MicroBlock& ggbar, MicroBlock& gsbar) const {
  const Mat& WE = basis_.weighted();
  const int d = dim();
  const Mat& Ek = kind <= d ? set.E : set.Egrad[static_cast<std::size_t>(kind - 1 - d)];
  const Mat EtH = Ek.transpose() * H;
  if (kind == 0) {
    mbar.val += EtH;
    gsbar.val += eps_ * H;
    ggbar.val.noalias() -= eps_ * (WE * EtH);
  } else if (kind <= d) {
    const auto a = static_cast<std::size_t>(kind - 1);
    mbar.dx[a] += EtH;
    gsbar.dx[a] += eps_ * H;
    ggbar.dx[a].noalias() -= eps_ * (WE * EtH);
  } else {
    const auto b = static_cast<std::size_t>(kind - 1 - d);
    mbar.val += EtH;
    gsbar.dv[b] += eps_ * H;
    ggbar.val.noalias() -= eps_ * (WE * EtH);
  }
}

Mat acoustic_rhs(const FluidBasis& basis, const std::vector<Mat>& m_dx) {
  Mat r = Mat::Zero(basis.count(), m_dx.at(0).cols());
  for (int a = 0; a < basis.dim(); ++a)
    r.noalias() -= basis.flux_matrices()[static_cast<std::size_t>(a)] * m_dx[static_cast<std::size_t>(a)];
  return r;
}

Mat recombine_residual(const Mat& d1, const Mat& d2, const FluidBasis& basis) {
  return -(basis.values() * d1) - d2;
}

Mat full_residual(int i, const std::vector<Mat>& h_dt, const std::vector<std::vector<Mat>>& h_dx,
                  const std::vector<Mat>& h, const FluidBasis& basis, const SgCoupling& c, double eps) {
  const auto ii = static_cast<std::size_t>(i);
  Mat r = h_dt[ii];
  for (int a = 0; a < basis.dim(); ++a)
    r.noalias() += basis.grid().nodes().row(a).transpose().asDiagonal() * h_dx[ii][static_cast<std::size_t>(a)];
  for (int k = 0; k < c.K; ++k) {
    const Mat B = c.block(i, k);
    r.noalias() -= (1.0 / eps) * (B * h[static_cast<std::size_t>(k)]);
  }
  return r;
}

}  // namespace apnn
