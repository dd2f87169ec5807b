#include "apnn/phase_space.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "apnn/errors.hpp"

namespace apnn {

namespace {

std::size_t ipow(int base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

}  // namespace

SpatialGrid::SpatialGrid(int dim, int n) : dim_(dim), n_(n) {
  if (dim < 1 || dim > 3) throw InvalidArgument("spatial dimension must be 1..3");
  if (n < 4) throw InvalidArgument("spatial grid needs n_x >= 4");
  h_ = 2.0 * std::numbers::pi / n;
  size_ = ipow(n, dim);
}

double SpatialGrid::cell_volume() const { return std::pow(h_, dim_); }
double SpatialGrid::measure() const { return std::pow(2.0 * std::numbers::pi, dim_); }

int SpatialGrid::index_along(std::size_t idx, int axis) const {
  for (int a = 0; a < axis; ++a) idx /= static_cast<std::size_t>(n_);
  return static_cast<int>(idx % static_cast<std::size_t>(n_));
}

double SpatialGrid::coord(std::size_t idx, int axis) const {
  return -std::numbers::pi + index_along(idx, axis) * h_;
}

std::size_t SpatialGrid::shift(std::size_t idx, int axis, int offset) const {
  const std::size_t stride = ipow(n_, axis);
  const int i = index_along(idx, axis);
  const int j = ((i + offset) % n_ + n_) % n_;
  return idx + (static_cast<std::ptrdiff_t>(j) - i) * static_cast<std::ptrdiff_t>(stride);
}

double maxwellian(const double* v, int dim) {
  double s = 0;
  for (int a = 0; a < dim; ++a) s += v[a] * v[a];
  return std::exp(-0.5 * s) / std::pow(2.0 * std::numbers::pi, 0.5 * dim);
}

double root_maxwellian(const double* v, int dim) {
  double s = 0;
  for (int a = 0; a < dim; ++a) s += v[a] * v[a];
  return std::exp(-0.25 * s) / std::pow(2.0 * std::numbers::pi, 0.25 * dim);
}

VelocityGrid::VelocityGrid(int dim, int n, double vmax, double tol_mass)
    : dim_(dim), n_(n), vmax_(vmax) {
  if (dim < 1 || dim > 3) throw InvalidArgument("velocity dimension must be 1..3");
  if (n < 8) throw InvalidArgument("velocity grid needs n_v >= 8");
  if (!(vmax > 0)) throw InvalidArgument("v_max must be positive");
  dv_ = 2.0 * vmax / (n - 1);
  const std::size_t N = ipow(n, dim);
  nodes_.resize(dim, static_cast<Eigen::Index>(N));
  weights_.resize(static_cast<Eigen::Index>(N));
  maxw_.resize(weights_.size());
  root_.resize(weights_.size());
  speed_.resize(weights_.size());
  for (std::size_t j = 0; j < N; ++j) {
    double w = 1.0;
    std::size_t r = j;
    for (int a = 0; a < dim; ++a) {
      const int i = static_cast<int>(r % static_cast<std::size_t>(n));
      r /= static_cast<std::size_t>(n);
      nodes_(a, static_cast<Eigen::Index>(j)) = -vmax + i * dv_;
      w *= (i == 0 || i == n - 1) ? 0.5 * dv_ : dv_;
    }
    const auto jj = static_cast<Eigen::Index>(j);
    weights_(jj) = w;
    const double* v = nodes_.col(jj).data();
    maxw_(jj) = apnn::maxwellian(v, dim);
    root_(jj) = apnn::root_maxwellian(v, dim);
    speed_(jj) = nodes_.col(jj).norm();
  }
  const double mass = weights_.dot(maxw_);
  if (mass < 1.0 - tol_mass || mass > 1.0 + 1e-12)
    throw InvalidArgument("velocity grid Maxwellian mass " + std::to_string(mass) +
                          " outside tolerance");
}

int VelocityGrid::index_along(std::size_t j, int axis) const {
  for (int a = 0; a < axis; ++a) j /= static_cast<std::size_t>(n_);
  return static_cast<int>(j % static_cast<std::size_t>(n_));
}

std::size_t VelocityGrid::shift(std::size_t j, int axis, int offset) const {
  return j + static_cast<std::ptrdiff_t>(offset) * static_cast<std::ptrdiff_t>(ipow(n_, axis));
}

double FluidBasis::phi(int a, const double* v, int dim) {
  if (a == 0) return 1.0;
  if (a <= dim) return v[a - 1];
  double s = 0;
  for (int b = 0; b < dim; ++b) s += v[b] * v[b];
  return (s - dim) / std::sqrt(2.0 * dim);
}

FluidBasis::FluidBasis(std::shared_ptr<const VelocityGrid> vgrid, double tol_gram)
    : vgrid_(std::move(vgrid)), dim_(vgrid_->dim()) {
  const int m = count();
  orth_ = Mat::Identity(m, m);
  const Mat E0 = eval(vgrid_->nodes());
  const Mat G0 = E0.transpose() * vgrid_->weights().asDiagonal() * E0;
  double worst = 0;
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k)
      if (i != k) worst = std::max(worst, std::abs(G0(i, k)));
  if (worst > tol_gram) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "fluid basis Gram off-diagonal %.3e exceeds %.1e; refine or enlarge the velocity grid",
                  worst, tol_gram);
    throw GramNotOrthonormal(buf);
  }
  // symmetric orthonormalization against the discrete weights, so that the
  // grid projector is exact while staying within tol of the analytic basis
  orth_ = Eigen::SelfAdjointEigenSolver<Mat>(G0).operatorInverseSqrt();
  E_ = E0 * orth_;
  WE_ = vgrid_->weights().asDiagonal() * E_;
  gram_ = E_.transpose() * WE_;
  for (int a = 0; a < dim_; ++a) {
    const Vec va = vgrid_->nodes().row(a).transpose();
    flux_.push_back(E_.transpose() * (va.asDiagonal() * WE_));
  }
}

Mat FluidBasis::eval(const Mat& vel) const {
  const Eigen::Index S = vel.cols();
  Mat out(S, count());
  for (Eigen::Index s = 0; s < S; ++s) {
    const double* v = vel.col(s).data();
    const double M = root_maxwellian(v, dim_);
    for (int a = 0; a < count(); ++a) out(s, a) = phi(a, v, dim_) * M;
  }
  return out * orth_;
}

Mat FluidBasis::eval_grad(const Mat& vel, int b) const {
  const Eigen::Index S = vel.cols();
  Mat out(S, count());
  const double c = 1.0 / std::sqrt(2.0 * dim_);
  for (Eigen::Index s = 0; s < S; ++s) {
    const double* v = vel.col(s).data();
    const double M = root_maxwellian(v, dim_);
    for (int a = 0; a < count(); ++a) {
      double dphi = 0;
      if (a == b + 1) dphi = 1.0;
      if (a == dim_ + 1) dphi = 2.0 * v[b] * c;
      out(s, a) = (dphi - 0.5 * v[b] * phi(a, v, dim_)) * M;
    }
  }
  return out * orth_;
}

Mat FluidBasis::projector() const { return E_ * WE_.transpose(); }

GridFunction::GridFunction(std::shared_ptr<const SpatialGrid> xg,
                           std::shared_ptr<const VelocityGrid> vg)
    : xg_(std::move(xg)), vg_(std::move(vg)) {
  values_ = Mat::Zero(static_cast<Eigen::Index>(vg_->size()), static_cast<Eigen::Index>(xg_->size()));
}

GridFunction::GridFunction(std::shared_ptr<const SpatialGrid> xg,
                           std::shared_ptr<const VelocityGrid> vg, Mat values)
    : xg_(std::move(xg)), vg_(std::move(vg)), values_(std::move(values)) {
  if (values_.rows() != static_cast<Eigen::Index>(vg_->size()) ||
      values_.cols() != static_cast<Eigen::Index>(xg_->size()))
    throw GridMismatch("grid function values do not match grid sizes");
}

bool GridFunction::same_grids(const GridFunction& o) const {
  return *xg_ == *o.xg_ && *vg_ == *o.vg_;
}

namespace {

void require_same(const GridFunction& a, const GridFunction& b) {
  if (!a.same_grids(b)) throw GridMismatch("grid functions live on different grids");
}

void require_basis(const GridFunction& h, const FluidBasis& basis) {
  if (!(h.vgrid() == basis.grid())) throw GridMismatch("fluid basis built on another velocity grid");
}

}  // namespace

Projection project_pi_L(const GridFunction& h, const FluidBasis& basis) {
  require_basis(h, basis);
  Projection p;
  p.moments.dim = basis.dim();
  p.moments.coeffs = basis.weighted().transpose() * h.data();
  p.fluid = GridFunction(h.xgrid_ptr(), h.vgrid_ptr(), basis.values() * p.moments.coeffs);
  p.perp = GridFunction(h.xgrid_ptr(), h.vgrid_ptr(), h.data() - p.fluid.data());
  return p;
}

GridFunction reconstruct(const FluidMoments& m, const FluidBasis& basis,
                         std::shared_ptr<const SpatialGrid> xg) {
  if (m.coeffs.cols() != static_cast<Eigen::Index>(xg->size()) || m.coeffs.rows() != basis.count())
    throw GridMismatch("moment array does not match grids");
  return GridFunction(std::move(xg), basis.grid_ptr(), basis.values() * m.coeffs);
}

double inner(const GridFunction& a, const GridFunction& b) {
  require_same(a, b);
  const Vec col = (a.data().cwiseProduct(b.data())).rowwise().sum();
  return a.xgrid().cell_volume() * a.vgrid().weights().dot(col);
}

double l2_norm(const GridFunction& h) { return std::sqrt(inner(h, h)); }

double lambda_norm(const GridFunction& h, double gamma) {
  const Vec col = h.data().cwiseAbs2().rowwise().sum();
  const Vec wl = h.vgrid().weights().cwiseProduct(
      (1.0 + h.vgrid().speed().array()).pow(gamma).matrix());
  return std::sqrt(h.xgrid().cell_volume() * wl.dot(col));
}

MacroFlux macro_flux(const GridFunction& h, const FluidBasis& basis) {
  require_basis(h, basis);
  MacroFlux f;
  f.count = basis.count();
  f.dim = basis.dim();
  f.data.resize(f.count * f.dim, h.data().cols());
  for (int a = 0; a < f.dim; ++a) {
    const Vec va = h.vgrid().nodes().row(a).transpose();
    f.data.middleRows(f.count * a, f.count) =
        (va.asDiagonal() * basis.weighted()).transpose() * h.data();
  }
  return f;
}

GridFunction grad_x(const GridFunction& h, int axis) {
  const SpatialGrid& xg = h.xgrid();
  GridFunction out(h.xgrid_ptr(), h.vgrid_ptr());
  const double c = 0.5 / xg.spacing();
  for (std::size_t i = 0; i < xg.size(); ++i) {
    const auto p = static_cast<Eigen::Index>(xg.shift(i, axis, 1));
    const auto m = static_cast<Eigen::Index>(xg.shift(i, axis, -1));
    out.data().col(static_cast<Eigen::Index>(i)) = c * (h.data().col(p) - h.data().col(m));
  }
  return out;
}

GridFunction grad_v(const GridFunction& h, int axis) {
  const VelocityGrid& vg = h.vgrid();
  GridFunction out(h.xgrid_ptr(), h.vgrid_ptr());
  const double c = 0.5 / vg.spacing();
  const int n = vg.n();
  for (std::size_t j = 0; j < vg.size(); ++j) {
    const int i = vg.index_along(j, axis);
    const auto r = static_cast<Eigen::Index>(j);
    auto row = [&](int off) { return h.data().row(static_cast<Eigen::Index>(vg.shift(j, axis, off))); };
    if (i == 0)
      out.data().row(r) = c * (-3.0 * h.data().row(r) + 4.0 * row(1) - row(2));
    else if (i == n - 1)
      out.data().row(r) = c * (3.0 * h.data().row(r) - 4.0 * row(-1) + row(-2));
    else
      out.data().row(r) = c * (row(1) - row(-1));
  }
  return out;
}

H1Parts h1_norm_sq(const GridFunction& h) {
  std::vector<GridFunction> gx, gv;
  for (int a = 0; a < h.xgrid().dim(); ++a) gx.push_back(grad_x(h, a));
  for (int a = 0; a < h.vgrid().dim(); ++a) gv.push_back(grad_v(h, a));
  return h1_norm_sq(h, gx, gv);
}

H1Parts h1_norm_sq(const GridFunction& h, const std::vector<GridFunction>& gx,
                   const std::vector<GridFunction>& gv) {
  H1Parts p;
  p.l2 = inner(h, h);
  for (const auto& g : gx) p.grad_x += inner(g, g);
  for (const auto& g : gv) p.grad_v += inner(g, g);
  return p;
}

void write_csv(const GridFunction& h, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open " + path);
  std::fprintf(f, "x_index,v_index,value\n");
  for (Eigen::Index ix = 0; ix < h.data().cols(); ++ix)
    for (Eigen::Index iv = 0; iv < h.data().rows(); ++iv)
      std::fprintf(f, "%ld,%ld,%.17g\n", static_cast<long>(ix), static_cast<long>(iv), h.data()(iv, ix));
  std::fclose(f);
}

namespace {
constexpr char kMagic[4] = {'A', 'P', 'G', 'F'};
}

void write_binary(const GridFunction& h, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  out.write(kMagic, 4);
  const std::int32_t hdr[4] = {h.xgrid().dim(), h.xgrid().n(), h.vgrid().n(), 0};
  out.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
  const double vmax = h.vgrid().vmax();
  out.write(reinterpret_cast<const char*>(&vmax), sizeof vmax);
  out.write(reinterpret_cast<const char*>(h.data().data()),
            static_cast<std::streamsize>(sizeof(double) * h.data().size()));
}

GridFunction read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(kMagic, 4)) throw IoError("bad grid function file " + path);
  std::int32_t hdr[4];
  double vmax = 0;
  in.read(reinterpret_cast<char*>(hdr), sizeof hdr);
  in.read(reinterpret_cast<char*>(&vmax), sizeof vmax);
  auto xg = std::make_shared<SpatialGrid>(hdr[0], hdr[1]);
  auto vg = std::make_shared<VelocityGrid>(hdr[0], hdr[2], vmax, 1.0);
  GridFunction h(xg, vg);
  in.read(reinterpret_cast<char*>(h.data().data()),
          static_cast<std::streamsize>(sizeof(double) * h.data().size()));
  if (!in) throw IoError("truncated grid function file " + path);
  return h;
}

}  // namespace apnn
