#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stochinf/errors.hpp"

namespace stochinf {

// Dense real matrices, column-major (Eigen default) in every module.
// vec() in Kronecker identities always means stacking columns.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kRankTolDefault = 1e-10;

// Symmetric matrix carrier. Construction symmetrizes via (M + M^T)/2 and
// records the Frobenius norm of the part it removed, so symmetry drift across
// long iteration chains stays observable instead of silently accumulating.
class SymMatrix {
 public:
  SymMatrix() = default;
  SymMatrix(const Matrix& M);  // NOLINT: implicit by design
  SymMatrix(Matrix&& M);       // NOLINT

  const Matrix& mat() const { return m_; }
  operator const Matrix&() const { return m_; }
  double asymmetry() const { return asymmetry_; }
  Eigen::Index order() const { return m_.rows(); }
  double norm() const { return m_.norm(); }

 private:
  Matrix m_;
  double asymmetry_ = 0.0;
};

// Largest real part over the spectrum of a square matrix.
double spectral_abscissa(const Matrix& A);

// Solves A^T X + X A = Q by the Bartels-Stewart scheme: one real Schur
// factorization A = U T U^T up front, then quasi-triangular substitution per
// right-hand side. Keep an instance alive to amortize the O(n^3) Schur step
// over many solves with the same A (power iterations, fixed-point sweeps).
//
// Residual contract: for well-scaled A the result satisfies
// ||A^T X + X A - Q||_F <= c * eps * ||A||_F * ||X||_F with a modest constant
// c; validated against a dense Kronecker solve in the test suite.
class LyapunovSolver {
 public:
  explicit LyapunovSolver(const Matrix& A);

  // Throws SingularLyapunov when some eigenvalue pair of A sums to (nearly)
  // zero; the threshold is 1e-12 * (1 + ||A||_F).
  SymMatrix solve(const SymMatrix& Q) const;

  double abscissa() const { return abscissa_; }
  bool hurwitz() const { return abscissa_ < 0.0; }
  double min_pair_sum() const { return min_pair_sum_; }
  Eigen::Index order() const { return T_.rows(); }
  const Matrix& matrix() const { return A_; }

 private:
  Matrix A_;
  Matrix T_;  // upper quasi-triangular
  Matrix U_;  // orthogonal
  std::vector<Eigen::Index> block_start_;  // 1x1 / 2x2 partition of T_
  std::vector<std::complex<double>> eigenvalues_;
  double abscissa_ = 0.0;
  double min_pair_sum_ = 0.0;  // min_{i,j} |lambda_i + lambda_j|
  double scale_ = 1.0;         // 1 + ||A||_F, used in singularity threshold
};

// One-shot convenience wrapper around LyapunovSolver.
SymMatrix lyap_solve(const Matrix& A, const SymMatrix& Q);

struct SymEig {
  Vector values;   // ascending
  Matrix vectors;  // orthogonal, M = V diag(values) V^T
};

SymEig sym_eig(const SymMatrix& M);

double min_eig_sym(const SymMatrix& M);

// Moore-Penrose inverse of a symmetric PSD matrix via its eigendecomposition;
// eigenvalues above rank_tol * lambda_max are inverted, the rest zeroed.
// Throws NotPSD if an eigenvalue falls below -rank_tol * lambda_max.
SymMatrix pseudoinverse(const SymMatrix& M, double rank_tol = kRankTolDefault);

// Largest singular value, computed as sqrt(max eig(M^T M)) clamped at zero.
double operator_2norm(const Matrix& M);

}  // namespace stochinf
