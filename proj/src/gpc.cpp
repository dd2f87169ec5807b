#include "apnn/gpc.hpp"

#include <cmath>
#include <cstdio>

#include "apnn/errors.hpp"

namespace apnn {

double GpcBasis::eval(int i, double z) const {
  const double s = z / C_z;
  double r = 0;
  for (int p = K - 1; p >= 0; --p) r = r * s + coeffs(i, p);
  return r;
}

Mat GpcBasis::zfactor() const {
  Mat z = Mat::Zero(K, K);
  for (std::size_t n = 0; n < quad.nodes.size(); ++n) {
    const double x = quad.nodes[n];
    for (int i = 0; i < K; ++i)
      for (int k = 0; k < K; ++k) z(i, k) += quad.weights[n] * x * eval(i, x) * eval(k, x);
  }
  return z;
}

GpcBasis build_gpc_basis(int K, double C_z) {
  if (K < 1) throw InvalidArgument("gPC order K must be >= 1");
  if (!(C_z > 0)) throw InvalidArgument("C_z must be positive");
  GpcBasis b;
  b.K = K;
  b.C_z = C_z;
  b.quad = gauss_legendre(std::max(K + 2, 32), -C_z, C_z);
  for (double& w : b.quad.weights) w /= 2.0 * C_z;
  // Gram-Schmidt on monomials in s = z / C_z, coefficients carried exactly.
  const std::size_t nq = b.quad.nodes.size();
  auto ip = [&](const Vec& p, const Vec& r) {
    double acc = 0;
    for (std::size_t n = 0; n < nq; ++n) {
      const double s = b.quad.nodes[n] / C_z;
      double pv = 0, rv = 0;
      for (int k = K - 1; k >= 0; --k) {
        pv = pv * s + p(k);
        rv = rv * s + r(k);
      }
      acc += b.quad.weights[n] * pv * rv;
    }
    return acc;
  };
  b.coeffs = Mat::Zero(K, K);
  for (int i = 0; i < K; ++i) {
    Vec p = Vec::Zero(K);
    p(i) = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < i; ++j) {
        const Vec pj = b.coeffs.row(j).transpose();
        p -= ip(p, pj) * pj;
      }
    p /= std::sqrt(ip(p, p));
    b.coeffs.row(i) = p.transpose();
  }
  // Growth exponent of the sup norms.
  std::vector<double> lx, ly;
  const int lo = K >= 3 ? 2 : 1;
  for (int i = lo; i <= K; ++i) {
    double m = 0;
    for (int s = 0; s <= 2000; ++s) m = std::max(m, std::abs(b.eval(i - 1, C_z * (-1.0 + s / 1000.0))));
    lx.push_back(std::log(static_cast<double>(i)));
    ly.push_back(std::log(m));
  }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t n = 0; n < lx.size(); ++n) {
      mx += lx[n];
      my += ly[n];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t n = 0; n < lx.size(); ++n) {
      sxy += (lx[n] - mx) * (ly[n] - my);
      sxx += (lx[n] - mx) * (lx[n] - mx);
    }
    b.p_growth = sxy / sxx;
  }
  return b;
}

Mat SgCoupling::block(int i, int k) const {
  Mat m = zf(i, k) * L1;
  if (i == k) m += L0;
  return m;
}

void SgCoupling::apply(int i, int k, const Mat& g, Mat& out, double alpha) const {
  if (!chi(i, k)) return;
  if (i == k) out.noalias() += alpha * (L0 * g);
  if (zf(i, k) != 0.0) out.noalias() += (alpha * zf(i, k)) * (L1 * g);
}

SgCoupling assemble_sg_coupling(const KernelSpec& spec, const GpcBasis& gpc, const FluidBasis& basis,
                                Backend backend) {
  SgCoupling c;
  c.K = gpc.K;
  c.q = spec.q;
  c.backend = backend;
  c.zf = gpc.zfactor();
  // Off-band entries vanish by orthogonality; clear quadrature round-off.
  for (int i = 0; i < c.K; ++i)
    for (int k = 0; k < c.K; ++k)
      if (std::abs(c.zf(i, k)) < 1e-13) c.zf(i, k) = 0.0;
  const int d = basis.dim();
  if (backend == Backend::bgk) {
    const CollisionMatrix L = assemble_bgk_surrogate(basis);
    c.c0 = spec.C * spec.angular_mass_b0(d);
    c.c1 = spec.C * spec.angular_mass_b1(d);
    c.L0 = c.c0 * L.L;
    c.L1 = c.c1 * L.L;
  } else {
    if (gpc.K > 1) spec.check_margin();
    const BoltzmannParts p = assemble_boltzmann_parts(spec, basis);
    c.L0 = p.part0.L;
    c.L1 = p.part1.L;
  }
  const bool has1 = c.L1.cwiseAbs().maxCoeff() > 0.0;
  c.chi.resize(c.K, c.K);
  for (int i = 0; i < c.K; ++i)
    for (int k = 0; k < c.K; ++k) {
      c.chi(i, k) = (i == k) || (has1 && c.zf(i, k) != 0.0);
      if (c.chi(i, k) && std::abs(i - k) > 1)
        throw BandwidthViolation("coupling pattern is not tridiagonal at (" + std::to_string(i + 1) + "," +
                                 std::to_string(k + 1) + ")");
    }
  return c;
}

double sg_kernel_quadrature(const KernelSpec& spec, const GpcBasis& gpc, int i, int k, double eta) {
  double s = 0;
  for (std::size_t n = 0; n < gpc.quad.nodes.size(); ++n) {
    const double z = gpc.quad.nodes[n];
    s += gpc.quad.weights[n] * (spec.b0_at(eta) + z * spec.b1_at(eta)) * gpc.eval(i, z) * gpc.eval(k, z);
  }
  return s;
}

double sg_kernel_analytic(const KernelSpec& spec, const GpcBasis& gpc, int i, int k, double eta) {
  return (i == k ? spec.b0_at(eta) : 0.0) + spec.b1_at(eta) * gpc.zfactor()(i, k);
}

std::vector<GridFunction> sg_apply(const SgCoupling& c, const std::vector<GridFunction>& h) {
  if (static_cast<int>(h.size()) != c.K) throw InvalidArgument("sg_apply needs K mode fields");
  std::vector<GridFunction> out;
  for (int i = 0; i < c.K; ++i) {
    GridFunction o(h[0].xgrid_ptr(), h[0].vgrid_ptr());
    for (int k = 0; k < c.K; ++k) c.apply(i, k, h[static_cast<std::size_t>(k)].data(), o.data());
    out.push_back(std::move(o));
  }
  return out;
}

double energy_EK(const std::vector<H1Parts>& parts, int q) {
  double e = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) e += std::pow(static_cast<double>(i + 1), 2 * q) * parts[i].total();
  return e;
}

bool q_admissible(int q, double p_growth) { return q > p_growth + 2.0; }

void write_coupling_csv(const SgCoupling& c, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open " + path);
  std::fprintf(f, "i,k,chi,zfactor\n");
  for (int i = 0; i < c.K; ++i)
    for (int k = 0; k < c.K; ++k)
      std::fprintf(f, "%d,%d,%d,%.17g\n", i + 1, k + 1, c.chi(i, k) ? 1 : 0, c.zf(i, k));
  std::fclose(f);
}

}  // namespace apnn
