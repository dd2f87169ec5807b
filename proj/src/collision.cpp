#include "apnn/collision.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "apnn/errors.hpp"
#include "apnn/quadrature.hpp"

namespace apnn {

namespace {

double poly(const std::vector<double>& c, double x) {
  double r = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
  return r;
}

double angular_mass(const std::vector<double>& c, int dim) {
  if (c.empty()) return 0.0;
  if (dim == 3) {
    const Rule1D gl = gauss_legendre(std::max<int>(8, static_cast<int>(c.size()) + 2));
    double s = 0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) s += gl.weights[i] * poly(c, gl.nodes[i]);
    return 2.0 * std::numbers::pi * s;
  }
  const Rule1D r = circle_rule(std::max<int>(64, 2 * static_cast<int>(c.size()) + 2));
  double s = 0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * poly(c, std::cos(r.nodes[i]));
  return s;
}

}  // namespace

double angular_measure(int dim) { return dim == 3 ? 4.0 * std::numbers::pi : 2.0 * std::numbers::pi; }

double KernelSpec::b0_at(double eta) const { return poly(b0, eta); }
double KernelSpec::b1_at(double eta) const { return poly(b1, eta); }
double KernelSpec::angular_mass_b0(int dim) const { return angular_mass(b0, dim); }
double KernelSpec::angular_mass_b1(int dim) const { return angular_mass(b1, dim); }

void KernelSpec::check_margin(int n_check) const {
  const double factor = std::pow(2.0, q) + 2.0;
  for (int i = 0; i < n_check; ++i) {
    const double eta = -1.0 + 2.0 * i / (n_check - 1);
    const double lhs = b0_at(eta), rhs = factor * std::abs(b1_at(eta)) * C_z;
    if (lhs < rhs)
      throw KernelMarginViolated("b0(" + std::to_string(eta) + ") = " + std::to_string(lhs) +
                                 " below (2^q+2)|b1|C_z = " + std::to_string(rhs));
  }
}

KernelSpec KernelSpec::maxwell(int dim) {
  KernelSpec s;
  s.b0 = {1.0 / angular_measure(dim)};
  s.b1 = {0.0};
  return s;
}

std::string to_string(Backend b) { return b == Backend::bgk ? "bgk-surrogate" : "boltzmann-quadrature"; }

GridFunction CollisionMatrix::apply(const GridFunction& h) const {
  if (L.rows() != h.data().rows()) throw GridMismatch("collision matrix does not match velocity grid");
  return GridFunction(h.xgrid_ptr(), h.vgrid_ptr(), L * h.data());
}

bool quadratic_stencil(const VelocityGrid& vg, const double* v, Stencil& st) {
  const int n = vg.n(), d = vg.dim();
  const double vmax = vg.vmax(), dv = vg.spacing();
  int base[3];
  double c[3][3];
  for (int a = 0; a < d; ++a) {
    if (std::abs(v[a]) > vmax * (1.0 + 1e-12)) return false;
    const double s = (v[a] + vmax) / dv;
    int i = static_cast<int>(std::lround(s));
    i = std::clamp(i, 1, n - 2);
    const double t = s - i;
    base[a] = i - 1;
    c[a][0] = 0.5 * t * (t - 1.0);
    c[a][1] = 1.0 - t * t;
    c[a][2] = 0.5 * t * (t + 1.0);
  }
  st.count = 0;
  const int m1 = d > 1 ? 3 : 1, m2 = d > 2 ? 3 : 1;
  for (int k2 = 0; k2 < m2; ++k2)
    for (int k1 = 0; k1 < m1; ++k1)
      for (int k0 = 0; k0 < 3; ++k0) {
        int idx = base[0] + k0;
        double w = c[0][k0];
        if (d > 1) {
          idx += n * (base[1] + k1);
          w *= c[1][k1];
        }
        if (d > 2) {
          idx += n * n * (base[2] + k2);
          w *= c[2][k2];
        }
        st.idx[st.count] = idx;
        st.coef[st.count] = w;
        ++st.count;
      }
  return true;
}

Mat interpolation_matrix(const VelocityGrid& vg, const Mat& vel) {
  Mat I = Mat::Zero(vel.cols(), static_cast<Eigen::Index>(vg.size()));
  Stencil st;
  for (Eigen::Index s = 0; s < vel.cols(); ++s) {
    if (!quadratic_stencil(vg, vel.col(s).data(), st)) continue;  // extension by zero
    for (int k = 0; k < st.count; ++k) I(s, st.idx[k]) += st.coef[k];
  }
  return I;
}

Mat velocity_gradient_matrix(const VelocityGrid& vg, int axis) {
  const auto N = static_cast<Eigen::Index>(vg.size());
  Mat D = Mat::Zero(N, N);
  const double c = 0.5 / vg.spacing();
  for (std::size_t j = 0; j < vg.size(); ++j) {
    const int i = vg.index_along(j, axis);
    const auto r = static_cast<Eigen::Index>(j);
    auto col = [&](int off) { return static_cast<Eigen::Index>(vg.shift(j, axis, off)); };
    if (i == 0) {
      D(r, r) = -3 * c; D(r, col(1)) = 4 * c; D(r, col(2)) = -c;
    } else if (i == vg.n() - 1) {
      D(r, r) = 3 * c; D(r, col(-1)) = -4 * c; D(r, col(-2)) = c;
    } else {
      D(r, col(1)) = c; D(r, col(-1)) = -c;
    }
  }
  return D;
}

namespace {

double rel_power(double r, double gamma) { return gamma == 0.0 ? 1.0 : std::pow(r, gamma); }

/// nu for the b0 or b1 part (angular mass supplied).
Vec frequency_part(const KernelSpec& spec, const VelocityGrid& vg, double mass) {
  const auto N = static_cast<Eigen::Index>(vg.size());
  Vec nu = Vec::Zero(N);
  const Vec& w = vg.weights();
  const Vec& M = vg.maxwellian();
  if (vg.dim() == 1) {
    for (Eigen::Index j = 0; j < N; ++j) {
      double s = 0;
      const double v = vg.node(j, 0);
      for (Eigen::Index k = 0; k < N; ++k)
        for (Eigen::Index l = 0; l < N; ++l) {
          const double a = vg.node(k, 0), b = vg.node(l, 0);
          const double V = (v + a + b) / 3.0;
          const double e = std::sqrt((v - V) * (v - V) + (a - V) * (a - V) + (b - V) * (b - V));
          s += w(k) * w(l) * M(k) * M(l) * rel_power(e, spec.gamma);
        }
      nu(j) = spec.C * mass * s;
    }
  } else {
    for (Eigen::Index j = 0; j < N; ++j) {
      double s = 0;
      for (Eigen::Index k = 0; k < N; ++k)
        s += w(k) * M(k) * rel_power((vg.nodes().col(j) - vg.nodes().col(k)).norm(), spec.gamma);
      nu(j) = spec.C * mass * s;
    }
  }
  return nu;
}

struct Accumulator {
  Mat G0, G1;
  long dropped = 0, sampled = 0;
  std::vector<int> idx;
  std::vector<double> val;

  void add(double w0, double w1) {
    const std::size_t n = idx.size();
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        const double p = val[a] * val[b];
        G0(idx[a], idx[b]) += w0 * p;
        G1(idx[a], idx[b]) += w1 * p;
      }
  }
};

// Three-particle collisions on the line: the relative vector of a triple lives
// in the plane orthogonal to (1,1,1) and is rotated by theta, which conserves
// total momentum and energy.
void assemble_ternary(const KernelSpec& spec, const VelocityGrid& vg, Accumulator& acc) {
  const int n = static_cast<int>(vg.size());
  const Vec& w = vg.weights();
  const Vec& M = vg.maxwellian();
  const Rule1D ang = circle_rule(spec.n_angles);
  const double f1[3] = {1 / std::sqrt(2.0), -1 / std::sqrt(2.0), 0};
  const double f2[3] = {1 / std::sqrt(6.0), 1 / std::sqrt(6.0), -2 / std::sqrt(6.0)};
  std::vector<double> b0v, b1v, cs, sn;
  for (std::size_t m = 0; m < ang.nodes.size(); ++m) {
    const double ct = std::cos(ang.nodes[m]);
    b0v.push_back(spec.b0_at(ct) * ang.weights[m]);
    b1v.push_back(spec.b1_at(ct) * ang.weights[m]);
    cs.push_back(ct);
    sn.push_back(std::sin(ang.nodes[m]));
  }
  Stencil st[3];
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) {
        if (i == k) continue;
        const int mult = (i == j || j == k) ? 3 : 6;
        const int ids[3] = {i, j, k};
        const double v[3] = {vg.node(i, 0), vg.node(j, 0), vg.node(k, 0)};
        const double V = (v[0] + v[1] + v[2]) / 3.0;
        double alpha = 0, beta = 0;
        for (int a = 0; a < 3; ++a) {
          alpha += (v[a] - V) * f1[a];
          beta += (v[a] - V) * f2[a];
        }
        const double e = std::hypot(alpha, beta);
        const double base = mult * w(i) * w(j) * w(k) * M(i) * M(j) * M(k) * spec.C * rel_power(e, spec.gamma);
        for (std::size_t m = 0; m < cs.size(); ++m) {
          if (b0v[m] == 0.0 && b1v[m] == 0.0) continue;
          ++acc.sampled;
          const double a2 = cs[m] * alpha - sn[m] * beta;
          const double b2 = sn[m] * alpha + cs[m] * beta;
          bool ok = true;
          for (int a = 0; a < 3 && ok; ++a) {
            const double vp = V + a2 * f1[a] + b2 * f2[a];
            ok = quadratic_stencil(vg, &vp, st[a]);
          }
          if (!ok) {
            ++acc.dropped;
            continue;
          }
          acc.idx.clear();
          acc.val.clear();
          for (int a = 0; a < 3; ++a) {
            for (int s = 0; s < st[a].count; ++s) {
              acc.idx.push_back(st[a].idx[s]);
              acc.val.push_back(st[a].coef[s]);
            }
            acc.idx.push_back(ids[a]);
            acc.val.push_back(-1.0);
          }
          acc.add(base * b0v[m], base * b1v[m]);
        }
      }
}

void assemble_binary(const KernelSpec& spec, const VelocityGrid& vg, Accumulator& acc) {
  const int N = static_cast<int>(vg.size());
  const int d = vg.dim();
  const Vec& w = vg.weights();
  const Vec& M = vg.maxwellian();
  // Angular nodes in a frame aligned with the relative velocity.
  struct Ang {
    double eta, c1, c2, wb0, wb1;
  };
  std::vector<Ang> angs;
  if (d == 2) {
    const Rule1D r = circle_rule(spec.n_angles);
    for (std::size_t m = 0; m < r.nodes.size(); ++m) {
      const double ct = std::cos(r.nodes[m]);
      angs.push_back({ct, std::sin(r.nodes[m]), 0.0, spec.b0_at(ct) * r.weights[m],
                      spec.b1_at(ct) * r.weights[m]});
    }
  } else {
    const Rule1D gl = gauss_legendre(std::max(2, spec.n_angles / 2));
    const Rule1D r = circle_rule(spec.n_angles);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i)
      for (std::size_t m = 0; m < r.nodes.size(); ++m) {
        const double ct = gl.nodes[i], st = std::sqrt(1 - ct * ct);
        const double wt = gl.weights[i] * r.weights[m];
        angs.push_back({ct, st * std::cos(r.nodes[m]), st * std::sin(r.nodes[m]),
                        spec.b0_at(ct) * wt, spec.b1_at(ct) * wt});
      }
  }
  Stencil s1, s2;
  double e[3], p1[3], p2[3], vp[3], vq[3];
  for (int j = 0; j < N; ++j)
    for (int k = j + 1; k < N; ++k) {
      double r = 0;
      for (int a = 0; a < d; ++a) {
        e[a] = vg.node(j, a) - vg.node(k, a);
        r += e[a] * e[a];
      }
      r = std::sqrt(r);
      for (int a = 0; a < d; ++a) e[a] /= r;
      // Orthonormal complement of e.
      if (d == 2) {
        p1[0] = -e[1];
        p1[1] = e[0];
      } else {
        const double t[3] = {std::abs(e[0]) < 0.9 ? 1.0 : 0.0, std::abs(e[0]) < 0.9 ? 0.0 : 1.0, 0.0};
        const double dt = t[0] * e[0] + t[1] * e[1];
        double nn = 0;
        for (int a = 0; a < 3; ++a) {
          p1[a] = t[a] - dt * e[a];
          nn += p1[a] * p1[a];
        }
        nn = std::sqrt(nn);
        for (int a = 0; a < 3; ++a) p1[a] /= nn;
        p2[0] = e[1] * p1[2] - e[2] * p1[1];
        p2[1] = e[2] * p1[0] - e[0] * p1[2];
        p2[2] = e[0] * p1[1] - e[1] * p1[0];
      }
      const double base = 2.0 * w(j) * w(k) * M(j) * M(k) * spec.C * rel_power(r, spec.gamma);
      for (const Ang& g : angs) {
        ++acc.sampled;
        bool ok = true;
        for (int a = 0; a < d; ++a) {
          double sig = g.eta * e[a] + g.c1 * p1[a];
          if (d == 3) sig += g.c2 * p2[a];
          const double mid = 0.5 * (vg.node(j, a) + vg.node(k, a));
          vp[a] = mid + 0.5 * r * sig;
          vq[a] = mid - 0.5 * r * sig;
        }
        ok = quadratic_stencil(vg, vp, s1) && quadratic_stencil(vg, vq, s2);
        if (!ok) {
          ++acc.dropped;
          continue;
        }
        acc.idx.clear();
        acc.val.clear();
        for (int s = 0; s < s1.count; ++s) {
          acc.idx.push_back(s1.idx[s]);
          acc.val.push_back(s1.coef[s]);
        }
        for (int s = 0; s < s2.count; ++s) {
          acc.idx.push_back(s2.idx[s]);
          acc.val.push_back(s2.coef[s]);
        }
        acc.idx.push_back(j);
        acc.val.push_back(-1.0);
        acc.idx.push_back(k);
        acc.val.push_back(-1.0);
        acc.add(base * g.wb0, base * g.wb1);
      }
    }
}

double weighted_sym_defect(const Mat& L, const Vec& w) {
  const Vec s = w.cwiseSqrt();
  const Mat S = s.asDiagonal() * L * s.cwiseInverse().asDiagonal();
  return (S - S.transpose()).norm();
}

void symmetrize(CollisionMatrix& c, const Vec& w) {
  c.sym_defect_raw = weighted_sym_defect(c.L, w);
  const Mat WL = w.asDiagonal() * c.L;
  c.L = w.cwiseInverse().asDiagonal() * (0.5 * (WL + WL.transpose()));
  c.Lambda = c.nu.asDiagonal();
  c.K = c.L + c.Lambda;
}

}  // namespace

Vec collision_frequency(const KernelSpec& spec, const VelocityGrid& vgrid, double z) {
  if (std::abs(z) > spec.C_z * (1 + 1e-12)) throw InvalidArgument("|z| exceeds C_z");
  const int d = vgrid.dim();
  Vec nu = frequency_part(spec, vgrid, spec.angular_mass_b0(d) + z * spec.angular_mass_b1(d));
  if (nu.minCoeff() <= 0.0) throw NonPositiveFrequency("collision frequency is not positive");
  return nu;
}

CollisionMatrix assemble_bgk_surrogate(const FluidBasis& basis) {
  CollisionMatrix c;
  c.backend = Backend::bgk;
  const auto N = static_cast<Eigen::Index>(basis.grid().size());
  c.K = basis.projector();
  c.Lambda = Mat::Identity(N, N);
  c.L = c.K - c.Lambda;
  c.nu = Vec::Ones(N);
  c.sym_defect_raw = weighted_sym_defect(c.L, basis.grid().weights());
  return c;
}

BoltzmannParts assemble_boltzmann_parts(const KernelSpec& spec, const FluidBasis& basis) {
  const VelocityGrid& vg = basis.grid();
  const int d = vg.dim();
  const auto N = static_cast<Eigen::Index>(vg.size());
  Accumulator acc;
  acc.G0 = Mat::Zero(N, N);
  acc.G1 = Mat::Zero(N, N);
  double cnorm;
  if (d == 1) {
    assemble_ternary(spec, vg, acc);
    cnorm = 1.0 / 6.0;
  } else {
    assemble_binary(spec, vg, acc);
    cnorm = 1.0 / 4.0;
  }
  const Vec& w = vg.weights();
  const Vec& R = vg.root_maxwellian();
  const Vec scale_r = (w.cwiseProduct(R)).cwiseInverse();
  const Vec scale_c = R.cwiseInverse();
  BoltzmannParts p;
  CollisionMatrix* parts[2] = {&p.part0, &p.part1};
  const Mat* G[2] = {&acc.G0, &acc.G1};
  const double mass[2] = {spec.angular_mass_b0(d), spec.angular_mass_b1(d)};
  for (int s = 0; s < 2; ++s) {
    CollisionMatrix& c = *parts[s];
    c.backend = Backend::boltzmann;
    c.L = -cnorm * (scale_r.asDiagonal() * (*G[s]) * scale_c.asDiagonal());
    c.nu = frequency_part(spec, vg, mass[s]);
    c.dropped = acc.dropped;
    c.sampled = acc.sampled;
    symmetrize(c, w);
  }
  return p;
}

CollisionMatrix combine(const CollisionMatrix& a, double ca, const CollisionMatrix& b, double cb) {
  CollisionMatrix c;
  c.backend = a.backend;
  c.L = ca * a.L + cb * b.L;
  c.K = ca * a.K + cb * b.K;
  c.Lambda = ca * a.Lambda + cb * b.Lambda;
  c.nu = ca * a.nu + cb * b.nu;
  c.sym_defect_raw = std::abs(ca) * a.sym_defect_raw + std::abs(cb) * b.sym_defect_raw;
  c.dropped = a.dropped;
  c.sampled = a.sampled;
  return c;
}

CollisionMatrix assemble_boltzmann_matrix(const KernelSpec& spec, const FluidBasis& basis, double z) {
  if (std::abs(z) > spec.C_z * (1 + 1e-12)) throw InvalidArgument("|z| exceeds C_z");
  spec.check_margin();
  const BoltzmannParts p = assemble_boltzmann_parts(spec, basis);
  CollisionMatrix c = combine(p.part0, 1.0, p.part1, z);
  if (c.nu.minCoeff() <= 0.0) throw NonPositiveFrequency("collision frequency is not positive");
  return c;
}

namespace {

/// Largest eigenvalue of the symmetric part of A relative to the diagonal weight w.
double gen_max(const Mat& A, const Vec& w) {
  const Vec s = w.cwiseSqrt().cwiseInverse();
  const Mat B = s.asDiagonal() * (0.5 * (A + A.transpose())) * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> es(B, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

HypoReport verify_hypocoercivity(const CollisionMatrix& c, const FluidBasis& basis, double gamma,
                                 const HypoOptions& opt) {
  const VelocityGrid& vg = basis.grid();
  const int d = vg.dim();
  const auto N = static_cast<Eigen::Index>(vg.size());
  const int nm = basis.count();
  const Vec& w = vg.weights();
  const Vec sw = w.cwiseSqrt();
  HypoReport r;
  r.backend = to_string(c.backend);
  r.gamma = gamma;
  r.sym_defect_raw = c.sym_defect_raw;
  r.dropped = c.dropped;
  r.sampled = c.sampled;

  const Mat S = sw.asDiagonal() * c.L * sw.cwiseInverse().asDiagonal();
  r.sym_defect = (S - S.transpose()).norm();
  const Mat Ssym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(Ssym, Eigen::EigenvaluesOnly);
  for (Eigen::Index i = 0; i < N; ++i)
    if (std::abs(es.eigenvalues()(i)) < opt.tol_kernel) ++r.kernel_dim;
  const Mat LE = c.L * basis.values();
  for (int i = 0; i < nm; ++i)
    r.kernel_residual = std::max(r.kernel_residual, std::sqrt(w.dot(LE.col(i).cwiseAbs2())));

  // Spectral gap on the orthogonal complement of the fluid span.
  const Vec lw = (1.0 + vg.speed().array()).pow(gamma).matrix();
  const Mat B0 = sw.asDiagonal() * basis.values();
  Eigen::HouseholderQR<Mat> qr(B0);
  const Mat Q = qr.householderQ();
  const Mat Z = Q.rightCols(N - nm);
  const Mat A = Z.transpose() * (-Ssym) * Z;
  const Mat Bm = Z.transpose() * lw.asDiagonal() * Z;
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(A, Bm, Eigen::EigenvaluesOnly);
  r.lambda_gap = ges.eigenvalues().minCoeff();

  // H1-type constants for the diagonal Lambda.
  const Vec nu = c.Lambda.diagonal();
  const Vec ratio = nu.cwiseQuotient(lw);
  r.nu[1] = ratio.minCoeff();
  r.nu[2] = ratio.maxCoeff();
  r.nu[0] = r.nu[1] * lw.minCoeff();
  r.nu[3] = 0.5 * r.nu[1];
  {
    // nu4 = max over h of [nu3 |grad h|_Lambda^2 - <grad Lambda h, grad h>] / |h|_Lambda^2
    Mat A4 = Mat::Zero(N, N);
    for (int b = 0; b < d; ++b) {
      const Mat D = velocity_gradient_matrix(vg, b);
      A4 += r.nu[3] * D.transpose() * (w.cwiseProduct(lw)).asDiagonal() * D -
            D.transpose() * w.asDiagonal() * D * c.Lambda;
    }
    r.nu[4] = std::max(0.0, gen_max(A4, w.cwiseProduct(lw)));
  }
  {
    Mat GK = Mat::Zero(N, N), GG = Mat::Zero(N, N);
    for (int b = 0; b < d; ++b) {
      const Mat D = velocity_gradient_matrix(vg, b);
      GK += D.transpose() * w.asDiagonal() * D * c.K;
      GG += D.transpose() * w.asDiagonal() * D;
    }
    for (double delta : opt.deltas)
      r.K_reg.emplace_back(delta, std::max(0.0, gen_max(GK - delta * GG, w)));
  }

  // Projection constants from analytic basis gradients.
  const Mat& V = vg.nodes();
  std::vector<Mat> grads;
  for (int b = 0; b < d; ++b) grads.push_back(basis.eval_grad(V, b));
  Mat Gg = Mat::Zero(nm, nm), Gvg = Mat::Zero(nm, nm), GgL = Mat::Zero(nm, nm);
  Mat vdotg = Mat::Zero(N, nm);
  for (int b = 0; b < d; ++b) {
    Gg += grads[b].transpose() * w.asDiagonal() * grads[b];
    GgL += grads[b].transpose() * (w.cwiseProduct(lw)).asDiagonal() * grads[b];
    vdotg += V.row(b).transpose().asDiagonal() * grads[b];
  }
  Gvg = vdotg.transpose() * w.asDiagonal() * vdotg;
  auto lmax = [](const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> e(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return e.eigenvalues().maxCoeff();
  };
  // grad_v pi(v_a h): operator norm of h -> sum_a grad(E E^T W v_a h_a) against |h|.
  double c3 = 0;
  for (int a = 0; a < d; ++a) {
    const Mat Ma = basis.weighted().transpose() * V.row(a).transpose().asDiagonal();  // nm x N
    // |grad pi(v_a h)|^2 = h^T Ma^T Gg Ma h, relative to h^T W h
    const Mat Top = Ma.transpose() * Gg * Ma;
    c3 += gen_max(Top, w);
  }
  r.C_pi1 = std::max({lmax(Gg), lmax(Gvg), c3});
  const Mat EL = basis.values().transpose() * (w.cwiseProduct(lw)).asDiagonal() * basis.values();
  r.C_pi = std::max(lmax(EL), lmax(GgL));
  r.C_p = 1.0;
  if (!(r.lambda_gap > 0)) throw GapNonPositive("spectral gap estimate " + std::to_string(r.lambda_gap));
  return r;
}

std::string HypoReport::to_json() const {
  nlohmann::ordered_json j;
  j["backend"] = backend;
  j["gamma"] = gamma;
  j["sym_defect"] = sym_defect;
  j["sym_defect_raw"] = sym_defect_raw;
  j["kernel_dim"] = kernel_dim;
  j["kernel_residual"] = kernel_residual;
  j["lambda_gap"] = lambda_gap;
  j["nu_constants"] = std::vector<double>(nu, nu + 5);
  nlohmann::ordered_json kr = nlohmann::ordered_json::array();
  for (auto& [dlt, cd] : K_reg) kr.push_back({{"delta", dlt}, {"C", cd}});
  j["K_reg"] = kr;
  j["C_pi"] = C_pi;
  j["C_pi1"] = C_pi1;
  j["C_p"] = C_p;
  j["dropped_collisions"] = dropped;
  j["sampled_collisions"] = sampled;
  return j.dump(2);
}

void write_matrix_binary(const Mat& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  const std::int64_t hdr[2] = {m.rows(), m.cols()};
  out.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
}

}  // namespace apnn
