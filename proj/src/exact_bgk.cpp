#include "apnn/exact_bgk.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "apnn/errors.hpp"

namespace apnn {

using cd = std::complex<double>;

FourierHermiteInit::FourierHermiteInit(int dim, int K, std::vector<Term> terms)
    : dim_(dim), K_(K), terms_(std::move(terms)) {
  if (dim < 1 || dim > 3) throw InvalidArgument("dim must be 1..3");
  for (const Term& t : terms_) {
    if (t.mode < 0 || t.mode >= K) throw InvalidArgument("initial term refers to a missing mode");
    for (int a = dim; a < 3; ++a)
      if (t.k[static_cast<std::size_t>(a)] != 0) throw InvalidArgument("wave vector exceeds dimension");
  }
}

namespace {

double mono(const FourierHermiteInit::Monomial& m, const double* v, int dim, int skip = -1) {
  double r = m.c;
  for (int a = 0; a < dim; ++a) {
    int p = m.pw[static_cast<std::size_t>(a)];
    if (a == skip) {
      if (p == 0) return 0.0;
      r *= p;
      --p;
    }
    for (int e = 0; e < p; ++e) r *= v[a];
  }
  return r;
}

double poly(const FourierHermiteInit::Term& t, const double* v, int dim) {
  double s = 0;
  for (const auto& m : t.profile) s += mono(m, v, dim);
  return s;
}

double kdotx(const FourierHermiteInit::Term& t, const double* x, int dim) {
  double s = t.phase;
  for (int a = 0; a < dim; ++a) s += t.k[static_cast<std::size_t>(a)] * x[a];
  return s;
}

}  // namespace

Vec FourierHermiteInit::profile(const Term& t, const Mat& vel) const {
  Vec r(vel.cols());
  for (Eigen::Index s = 0; s < vel.cols(); ++s) {
    const double* v = vel.col(s).data();
    r(s) = poly(t, v, dim_) * root_maxwellian(v, dim_);
  }
  return r;
}

Vec FourierHermiteInit::profile_grad(const Term& t, const Mat& vel, int b) const {
  Vec r(vel.cols());
  for (Eigen::Index s = 0; s < vel.cols(); ++s) {
    const double* v = vel.col(s).data();
    double dp = 0;
    for (const auto& m : t.profile) dp += mono(m, v, dim_, b);
    r(s) = (dp - 0.5 * v[b] * poly(t, v, dim_)) * root_maxwellian(v, dim_);
  }
  return r;
}

Mat FourierHermiteInit::eval(int mode, int kind, const Mat& x, const Mat& vel) const {
  Mat out = Mat::Zero(vel.cols(), x.cols());
  for (const Term& t : terms_) {
    if (t.mode != mode) continue;
    const Vec prof = kind <= dim_ ? profile(t, vel) : profile_grad(t, vel, kind - 1 - dim_);
    Eigen::RowVectorXd xf(x.cols());
    for (Eigen::Index p = 0; p < x.cols(); ++p) {
      const double arg = kdotx(t, x.col(p).data(), dim_);
      xf(p) = kind >= 1 && kind <= dim_ ? -t.k[static_cast<std::size_t>(kind - 1)] * std::sin(arg) : std::cos(arg);
    }
    out.noalias() += t.amp * prof * xf;
  }
  return out;
}

FourierHermiteInit FourierHermiteInit::standard(int dim, int K, double amp) {
  std::vector<Term> terms;
  Term t;
  t.mode = 0;
  t.k = {1, 0, 0};
  t.amp = amp;
  t.phase = -0.5 * std::numbers::pi;
  t.profile = {{{0, 0, 0}, 1.0}, {{1, 0, 0}, 0.5}};
  terms.push_back(t);
  for (int i = 1; i < K; ++i) {
    Term s;
    s.mode = i;
    s.k = {1, 0, 0};
    s.amp = 0.1 * amp / i;
    s.profile = {{{0, 0, 0}, 1.0}, {{3, 0, 0}, 0.2}};
    terms.push_back(s);
  }
  return FourierHermiteInit(dim, K, terms);
}

FourierHermiteInit FourierHermiteInit::fluid(int dim, int K, double amp) {
  std::vector<Term> terms;
  Term t;
  t.mode = 0;
  t.k = {1, 0, 0};
  t.amp = amp;
  t.phase = -0.5 * std::numbers::pi;
  // rho + 0.5 u_1 + 0.3 T with T the normalized energy coordinate
  const double cT = 0.3 / std::sqrt(2.0 * dim);
  t.profile = {{{0, 0, 0}, 1.0 - cT * dim}, {{1, 0, 0}, 0.5}};
  for (int a = 0; a < dim; ++a) {
    Monomial m;
    m.pw[static_cast<std::size_t>(a)] = 2;
    m.c = cT;
    t.profile.push_back(m);
  }
  terms.push_back(t);
  for (int i = 1; i < K; ++i) {
    Term s;
    s.mode = i;
    s.k = {1, 0, 0};
    s.amp = 0.2 * amp / i;
    s.profile = {{{0, 0, 0}, 1.0}};
    terms.push_back(s);
  }
  return FourierHermiteInit(dim, K, terms);
}

namespace {

// psi = int_0^t e^{lambda s} e^{a (t-s)} ds and its a-derivative.
void psi_pair(cd lambda, cd a, double t, cd ea, cd el, cd& psi, cd& dpsi) {
  const cd z = lambda - a;
  const cd w = z * t;
  if (std::abs(w) >= 0.5) {
    psi = (el - ea) / z;
    dpsi = (el - ea * (1.0 + w)) / (z * z);
    return;
  }
  cd p1 = 0, p2 = 0, term = 1.0;  // term = w^n / n!
  for (int n = 0; n < 24; ++n) {
    p1 += term / (n + 1.0);
    p2 += term / ((n + 1.0) * (n + 2.0));
    term *= w / (n + 1.0);
  }
  psi = t * ea * p1;
  dpsi = t * t * ea * p2;
}

cd rowdot(const CMat& A, Eigen::Index s, const CVec& x) { return (A.row(s).transpose().cwiseProduct(x)).sum(); }

}  // namespace

ExactBgkSolution::ExactBgkSolution(const FluidBasis& basis, const SgCoupling& coupling, double eps,
                                   const FourierHermiteInit& init)
    : basis_(basis), eps_(eps), dim_(basis.dim()), K_(coupling.K), init_(init) {
  if (coupling.backend != Backend::bgk) throw InvalidArgument("closed-form solution needs the BGK backend");
  if (!(eps > 0)) throw InvalidArgument("closed-form solution needs eps > 0");
  if (init.modes() != K_ || init.dim() != dim_) throw InvalidArgument("initial data does not match the system");
  Mat S(K_, K_);
  for (int i = 0; i < K_; ++i)
    for (int k = 0; k < K_; ++k) S(i, k) = coupling.scalar(i, k);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (S + S.transpose()));
  Q_ = es.eigenvectors();
  const Vec sig = es.eigenvalues();
  if (sig.minCoeff() < -1e-14) throw InvalidArgument("Galerkin collision matrix is not nonnegative");

  const VelocityGrid& vg = basis.grid();
  const Mat& vn = vg.nodes();
  const auto N = static_cast<Eigen::Index>(vg.size());
  const Mat Pm = basis.values() * basis.weighted().transpose() - Mat::Identity(N, N);

  std::map<std::array<int, 3>, std::vector<std::size_t>> groups;
  for (std::size_t t = 0; t < init.terms().size(); ++t) groups[init.terms()[t].k].push_back(t);

  for (const auto& [kk, idx] : groups) {
    Vec k(dim_);
    for (int a = 0; a < dim_; ++a) k(a) = kk[static_cast<std::size_t>(a)];
    const Vec kv = vn.transpose() * k;
    for (int j = 0; j < K_; ++j) {
      Comp c;
      c.k = k;
      c.j = j;
      c.sigma = std::max(0.0, sig(j));
      for (std::size_t t : idx) {
        const auto& term = init.terms()[t];
        const cd coef = Q_(term.mode, j) * term.amp * std::exp(cd(0, term.phase));
        if (std::abs(coef) > 0) c.init.emplace_back(t, coef);
      }
      if (c.init.empty()) continue;
      CMat B = (c.sigma / eps) * Pm.cast<cd>();
      B.diagonal() += cd(0, -1) * kv.cast<cd>();
      Eigen::ComplexEigenSolver<CMat> ces(B);
      if (ces.info() != Eigen::Success) throw SingularImplicitSolve("eigendecomposition failed");
      c.lambda = ces.eigenvalues();
      c.V = ces.eigenvectors();
      CVec h0 = CVec::Zero(N);
      for (const auto& [t, coef] : c.init) h0 += coef * init.profile(init.terms()[t], vn).cast<cd>();
      Eigen::PartialPivLU<CMat> lu(c.V);
      c.alpha = lu.solve(h0);
      if (!c.alpha.allFinite() || (c.V * c.alpha - h0).norm() > 1e-8 * (1.0 + h0.norm()))
        throw SingularImplicitSolve("ill-conditioned eigenbasis of the velocity operator");
      c.Cm = basis.weighted().transpose().cast<cd>() * c.V * c.alpha.asDiagonal();
      comps_.push_back(std::move(c));
    }
  }
}

void ExactBgkSolution::field(int mode, const Mat& tx, const Mat* vel, unsigned flags, MicroBlock* h,
                             MacroBlock& m) const {
  if (mode < 0 || mode >= K_) throw InvalidArgument("mode out of range");
  const int d = dim_;
  const int nm = basis_.count();
  const Eigen::Index P = tx.cols();
  const Eigen::Index S = vel ? vel->cols() : 0;
  m.resize_zero(nm, P, d);
  if (h) h->resize_zero(S, P, d, (flags & kDv) != 0);
  const bool want_v = h && (flags & kDv);
  const double ie = 1.0 / eps_;

  for (const Comp& c : comps_) {
    const double q = Q_(mode, c.j);
    if (q == 0.0) continue;
    const auto N = c.lambda.size();
    const double se = c.sigma * ie;
    // per-velocity data, independent of the point
    CMat Phi, H0;
    std::vector<CMat> Phig, H0v;
    Eigen::VectorXcd av;
    if (h) {
      Phi = basis_.eval(*vel).cast<cd>() * c.Cm;  // S x N
      if (want_v)
        for (int b = 0; b < d; ++b) Phig.push_back(basis_.eval_grad(*vel, b).cast<cd>() * c.Cm);
      H0 = CMat::Zero(S, 1);
      H0v.assign(static_cast<std::size_t>(d), CMat::Zero(S, 1));
      for (const auto& [t, coef] : c.init) {
        const auto& term = init_.terms()[t];
        H0.col(0) += coef * init_.profile(term, *vel).cast<cd>();
        if (want_v)
          for (int b = 0; b < d; ++b)
            H0v[static_cast<std::size_t>(b)].col(0) += coef * init_.profile_grad(term, *vel, b).cast<cd>();
      }
      av.resize(S);
      for (Eigen::Index s = 0; s < S; ++s) av(s) = cd(-se, -vel->col(s).dot(c.k));
    }
    CVec el(N), psi(N), dpsi(N);
    for (Eigen::Index p = 0; p < P; ++p) {
      const double t = tx(0, p);
      double kx = 0;
      for (int a = 0; a < d; ++a) kx += c.k(a) * tx(1 + a, p);
      const cd ph = q * std::exp(cd(0, kx));
      for (Eigen::Index l = 0; l < N; ++l) el(l) = std::exp(c.lambda(l) * t);
      const CVec mu = c.Cm * el;
      m.val.col(p) += (mu * ph).real();
      if (flags & kDt) m.dt.col(p) += (c.Cm * c.lambda.cwiseProduct(el) * ph).real();
      if (flags & kDx)
        for (int a = 0; a < d; ++a) m.dx[static_cast<std::size_t>(a)].col(p) += (mu * (ph * cd(0, c.k(a)))).real();
      if (!h) continue;
      for (Eigen::Index s = 0; s < S; ++s) {
        const cd a = av(s);
        const cd ea = std::exp(a * t);
        for (Eigen::Index l = 0; l < N; ++l) {
          cd ps, dps;
          psi_pair(c.lambda(l), a, t, ea, el(l), ps, dps);
          psi(l) = ps;
          dpsi(l) = dps;
        }
        const cd val = ea * H0(s, 0) + se * rowdot(Phi, s, psi);
        h->val(s, p) += (val * ph).real();
        if (flags & kDt) {
          const cd vt = a * val + se * rowdot(Phi, s, el);
          h->dt(s, p) += (vt * ph).real();
        }
        if (flags & kDx)
          for (int b = 0; b < d; ++b) h->dx[static_cast<std::size_t>(b)](s, p) += (val * ph * cd(0, c.k(b))).real();
        if (want_v)
          for (int b = 0; b < d; ++b) {
            const auto bb = static_cast<std::size_t>(b);
            const cd ikb(0, c.k(b));
            cd vv = ea * (-ikb * t * H0(s, 0) + H0v[bb](s, 0));
            vv += se * (rowdot(Phig[bb], s, psi) - ikb * rowdot(Phi, s, dpsi));
            h->dv[bb](s, p) += (vv * ph).real();
          }
      }
    }
  }
}

int ExactBgkSolution::macro(int mode, const Mat& tx, unsigned flags, MacroBlock& out, bool) {
  field(mode, tx, nullptr, flags, nullptr, out);
  return -1;
}

int ExactBgkSolution::micro(int mode, const Mat& tx, const Mat& vel, unsigned flags, MicroBlock& out, bool) {
  MacroBlock m;
  field(mode, tx, &vel, flags, &out, m);
  // g = (h - E m) / eps with matching derivatives
  const double ie = 1.0 / eps_;
  const Mat E = basis_.eval(vel);
  out.val = ie * (out.val - E * m.val);
  if (flags & kDt) out.dt = ie * (out.dt - E * m.dt);
  else out.dt = Mat();
  if (flags & kDx)
    for (int a = 0; a < dim_; ++a) {
      const auto aa = static_cast<std::size_t>(a);
      out.dx[aa] = ie * (out.dx[aa] - E * m.dx[aa]);
    }
  else
    out.dx.clear();
  if (flags & kDv)
    for (int b = 0; b < dim_; ++b) {
      const auto bb = static_cast<std::size_t>(b);
      out.dv[bb] = ie * (out.dv[bb] - basis_.eval_grad(vel, b) * m.val);
    }
  return -1;
}

Mat ExactBgkSolution::h_grid(int mode, const Mat& tx) const {
  MacroBlock m;
  MicroBlock h;
  field(mode, tx, &basis_.grid().nodes(), 0, &h, m);
  return h.val;
}

}  // namespace apnn
