#pragma once

#include <array>
#include <complex>
#include <vector>

#include "apnn/gpc.hpp"
#include "apnn/network.hpp"

namespace apnn {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Initial data sum_terms amp * cos(k.x + phase) * p(v) M(v) per gPC mode,
/// with p a polynomial given by monomials.
class FourierHermiteInit : public InitialData {
 public:
  struct Monomial {
    std::array<int, 3> pw{};
    double c = 0;
  };
  struct Term {
    int mode = 0;  ///< 0-based
    std::array<int, 3> k{};
    double amp = 0;
    double phase = 0;
    std::vector<Monomial> profile;
  };

  FourierHermiteInit(int dim, int K, std::vector<Term> terms);

  int modes() const override { return K_; }
  int dim() const { return dim_; }
  const std::vector<Term>& terms() const { return terms_; }
  Mat eval(int mode, int kind, const Mat& x, const Mat& vel) const override;

  /// p(v) M(v) of one term at each column of vel.
  Vec profile(const Term& t, const Mat& vel) const;
  /// d/dv_b of p(v) M(v).
  Vec profile_grad(const Term& t, const Mat& vel, int b) const;

  /// Fluid-only density/velocity wave in mode 1 plus a smaller kinetic
  /// perturbation in the remaining modes.
  static FourierHermiteInit standard(int dim, int K, double amp = 1.0);
  /// Well-prepared data: h lies in the kernel of the collision operator.
  static FourierHermiteInit fluid(int dim, int K, double amp = 1.0);

 private:
  int dim_, K_;
  std::vector<Term> terms_;
};

/// Closed-form solution of the velocity-discrete BGK Galerkin system
/// dt h_i + v.grad_x h_i = (1/eps) sum_k S_ik (P - I) h_k
/// for Fourier initial data. The Galerkin matrix is diagonalized once; each
/// Fourier mode is then an exponential of an N_v x N_v matrix. At velocities
/// off the grid the field follows the same equation with the grid moments as
/// forcing, which extends the solution smoothly in v.
class ExactBgkSolution : public FieldSource {
 public:
  ExactBgkSolution(const FluidBasis& basis, const SgCoupling& coupling, double eps, const FourierHermiteInit& init);

  int modes() const override { return K_; }
  int dim() const override { return dim_; }
  int macro(int mode, const Mat& tx, unsigned flags, MacroBlock& out, bool record) override;
  int micro(int mode, const Mat& tx, const Mat& vel, unsigned flags, MicroBlock& out, bool record) override;

  /// Full field h_i at grid velocities and the given points (N_v x P).
  Mat h_grid(int mode, const Mat& tx) const;

 private:
  struct Comp {
    Vec k;          ///< wave vector
    double sigma;   ///< eigenvalue of the Galerkin collision matrix
    int j;          ///< its index (column of Q)
    CVec lambda;    ///< eigenvalues of the velocity operator
    CMat Cm;        ///< count x N: moment coefficients per eigenvalue
    CVec alpha;     ///< grid coefficients V^{-1} h0
    CMat V;         ///< eigenvectors
    std::vector<std::pair<std::size_t, std::complex<double>>> init;  ///< (term, coefficient)
  };
  /// h_i (value and requested derivatives) at vel, and the moments m_i.
  void field(int mode, const Mat& tx, const Mat* vel, unsigned flags, MicroBlock* h, MacroBlock& m) const;

  const FluidBasis& basis_;
  double eps_;
  int dim_, K_;
  FourierHermiteInit init_;
  Mat Q_;  ///< eigenvectors of the Galerkin matrix, h_i = sum_j Q_ij eta_j
  std::vector<Comp> comps_;
};

}  // namespace apnn
