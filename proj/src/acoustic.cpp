#include "apnn/acoustic.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "apnn/errors.hpp"

namespace apnn {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;

AcousticSystem AcousticSystem::from_basis(const FluidBasis& basis) {
  AcousticSystem s;
  s.dim = basis.dim();
  s.A = basis.flux_matrices();
  return s;
}

AcousticSystem AcousticSystem::reduced(const FluidBasis& basis, int axis) {
  const int d = basis.dim();
  if (axis < 0 || axis >= d) throw InvalidArgument("axis out of range");
  const int idx[3] = {0, 1 + axis, d + 1};
  const Mat& Af = basis.flux_matrices()[static_cast<std::size_t>(axis)];
  Mat r(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = Af(idx[i], idx[j]);
  AcousticSystem s;
  s.dim = 1;
  s.A = {r};
  return s;
}

Vec AcousticSystem::speeds(int axis) const {
  const Mat& a = A.at(static_cast<std::size_t>(axis));
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
  return es.eigenvalues();
}

double acoustic_energy(const Mat& m, const SpatialGrid& xg) { return xg.cell_volume() * m.squaredNorm(); }

namespace {

// In-place DFT along one axis of a count x N_x complex array (sign -1 forward).
void dft_axis(CMat& f, const SpatialGrid& xg, int axis, int sign) {
  const int n = xg.n();
  CMat Wm(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) Wm(k, j) = std::polar(1.0, sign * 2.0 * std::numbers::pi * j * k / n);
  std::size_t stride = 1;
  for (int a = 0; a < axis; ++a) stride *= static_cast<std::size_t>(n);
  CMat line(f.rows(), n);
  for (std::size_t base = 0; base < xg.size(); ++base) {
    if (xg.index_along(base, axis) != 0) continue;
    for (int j = 0; j < n; ++j) line.col(j) = f.col(static_cast<Eigen::Index>(base + j * stride));
    const CMat out = line * Wm.transpose();
    for (int k = 0; k < n; ++k) f.col(static_cast<Eigen::Index>(base + k * stride)) = out.col(k);
  }
}

int wavenumber(int idx, int n) {
  if (2 * idx == n) return 0;  // Nyquist mode carries no derivative
  return idx < n / 2 + (n % 2) ? idx : idx - n;
}

}  // namespace

std::vector<Mat> solve_acoustic(const AcousticSystem& sys, const SpatialGrid& xg, const Mat& m0,
                                const std::vector<double>& times, AcousticMethod method, double cfl) {
  if (xg.dim() != sys.dim) throw GridMismatch("acoustic system and grid dimensions differ");
  if (m0.rows() != sys.count() || m0.cols() != static_cast<Eigen::Index>(xg.size()))
    throw GridMismatch("initial moments do not match the grid");
  const int d = sys.dim;
  const int n = xg.n();
  std::vector<Mat> out;
  if (method == AcousticMethod::spectral) {
    CMat fh = m0.cast<cd>();
    for (int a = 0; a < d; ++a) dft_axis(fh, xg, a, -1);
    const double norm = 1.0 / static_cast<double>(xg.size());
    // per-mode eigen decomposition of sum_a k_a A_a
    std::vector<Mat> U(xg.size());
    std::vector<Vec> c(xg.size());
    for (std::size_t j = 0; j < xg.size(); ++j) {
      Mat Ak = Mat::Zero(sys.count(), sys.count());
      for (int a = 0; a < d; ++a) Ak += wavenumber(xg.index_along(j, a), n) * sys.A[static_cast<std::size_t>(a)];
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Ak + Ak.transpose()));
      U[j] = es.eigenvectors();
      c[j] = es.eigenvalues();
    }
    for (double t : times) {
      CMat g(fh.rows(), fh.cols());
      for (std::size_t j = 0; j < xg.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const Eigen::VectorXcd ph = (c[j] * cd(0, -t)).array().exp();
        g.col(jj) = U[j].cast<cd>() * (ph.asDiagonal() * (U[j].transpose().cast<cd>() * fh.col(jj)));
      }
      for (int a = 0; a < d; ++a) dft_axis(g, xg, a, +1);
      out.push_back(norm * g.real());
    }
    return out;
  }
  // upwind flux splitting
  double smax = 0;
  std::vector<Mat> Ap, Am;
  for (int a = 0; a < d; ++a) {
    const Mat& A = sys.A[static_cast<std::size_t>(a)];
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (A + A.transpose()));
    const Vec lam = es.eigenvalues();
    smax = std::max(smax, lam.cwiseAbs().maxCoeff());
    Ap.push_back(es.eigenvectors() * lam.cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose());
    Am.push_back(es.eigenvectors() * lam.cwiseMin(0.0).asDiagonal() * es.eigenvectors().transpose());
  }
  const double h = xg.spacing();
  const double dt_max = smax > 0 ? cfl * h / (smax * d) : 1.0;
  Mat m = m0;
  double t = 0;
  for (double target : times) {
    if (target < t) throw InvalidArgument("times must be nondecreasing");
    const long steps = static_cast<long>(std::ceil((target - t) / dt_max - 1e-12));
    const double dt = steps > 0 ? (target - t) / static_cast<double>(steps) : 0.0;
    for (long s = 0; s < steps; ++s) {
      Mat dm = Mat::Zero(m.rows(), m.cols());
      for (std::size_t j = 0; j < xg.size(); ++j) {
        for (int a = 0; a < d; ++a) {
          const auto jp = static_cast<Eigen::Index>(xg.shift(j, a, 1));
          const auto jm = static_cast<Eigen::Index>(xg.shift(j, a, -1));
          const auto jj = static_cast<Eigen::Index>(j);
          dm.col(jj) -= Ap[static_cast<std::size_t>(a)] * (m.col(jj) - m.col(jm)) / h +
                        Am[static_cast<std::size_t>(a)] * (m.col(jp) - m.col(jj)) / h;
        }
      }
      m += dt * dm;
    }
    t = target;
    out.push_back(m);
  }
  return out;
}

}  // namespace apnn
