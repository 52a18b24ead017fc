#include "stochinf/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace stochinf {

namespace {

void require_finite(const Matrix& M, const char* who) {
  if (!M.allFinite()) {
    std::ostringstream os;
    os << who << ": matrix has non-finite entries (" << M.rows() << "x"
       << M.cols() << ")";
    throw std::invalid_argument(os.str());
  }
}

void require_square(const Matrix& M, const char* who) {
  if (M.rows() != M.cols()) {
    std::ostringstream os;
    os << who << ": expected square matrix, got " << M.rows() << "x"
       << M.cols();
    throw std::invalid_argument(os.str());
  }
}

// Eigenvalues of a 1x1 or 2x2 diagonal block of a real Schur form.
void block_eigenvalues(const Matrix& T, Eigen::Index start, Eigen::Index size,
                       std::vector<std::complex<double>>* out) {
  if (size == 1) {
    out->emplace_back(T(start, start), 0.0);
    return;
  }
  const double a = T(start, start);
  const double b = T(start, start + 1);
  const double c = T(start + 1, start);
  const double d = T(start + 1, start + 1);
  const double tr = a + d;
  const double disc = 0.25 * (a - d) * (a - d) + b * c;
  if (disc < 0.0) {
    const double im = std::sqrt(-disc);
    out->emplace_back(0.5 * tr, im);
    out->emplace_back(0.5 * tr, -im);
  } else {
    const double rt = std::sqrt(disc);
    out->emplace_back(0.5 * tr + rt, 0.0);
    out->emplace_back(0.5 * tr - rt, 0.0);
  }
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& M) {
  require_finite(M, "SymMatrix");
  require_square(M, "SymMatrix");
  m_ = 0.5 * (M + M.transpose());
  asymmetry_ = 0.5 * (M - M.transpose()).norm();
}

SymMatrix::SymMatrix(Matrix&& M) {
  require_finite(M, "SymMatrix");
  require_square(M, "SymMatrix");
  asymmetry_ = 0.5 * (M - M.transpose()).norm();
  M = 0.5 * (M + M.transpose()).eval();
  m_ = std::move(M);
}

double spectral_abscissa(const Matrix& A) {
  require_square(A, "spectral_abscissa");
  require_finite(A, "spectral_abscissa");
  if (A.rows() == 0) {
    throw std::invalid_argument("spectral_abscissa: empty matrix");
  }
  if (A.rows() == 1) return A(0, 0);
  Eigen::RealSchur<Matrix> schur(A, /*computeU=*/false);
  if (schur.info() != Eigen::Success) {
    std::ostringstream os;
    os << "spectral_abscissa: Schur iteration failed on " << A.rows() << "x"
       << A.cols() << " matrix";
    throw std::runtime_error(os.str());
  }
  const Matrix& T = schur.matrixT();
  const Eigen::Index n = T.rows();
  double alpha = -std::numeric_limits<double>::infinity();
  Eigen::Index i = 0;
  while (i < n) {
    const Eigen::Index size = (i + 1 < n && T(i + 1, i) != 0.0) ? 2 : 1;
    std::vector<std::complex<double>> eigs;
    block_eigenvalues(T, i, size, &eigs);
    for (const auto& ev : eigs) alpha = std::max(alpha, ev.real());
    i += size;
  }
  return alpha;
}

LyapunovSolver::LyapunovSolver(const Matrix& A) {
  require_square(A, "LyapunovSolver");
  require_finite(A, "LyapunovSolver");
  const Eigen::Index n = A.rows();
  if (n == 0) throw std::invalid_argument("LyapunovSolver: empty matrix");
  A_ = A;
  scale_ = 1.0 + A.norm();

  if (n == 1) {
    T_ = A;
    U_ = Matrix::Identity(1, 1);
  } else {
    Eigen::RealSchur<Matrix> schur(A);
    if (schur.info() != Eigen::Success) {
      std::ostringstream os;
      os << "LyapunovSolver: Schur iteration failed on " << n << "x" << n
         << " matrix";
      throw std::runtime_error(os.str());
    }
    T_ = schur.matrixT();
    U_ = schur.matrixU();
  }

  // Partition T into its 1x1 / 2x2 diagonal blocks and collect eigenvalues.
  Eigen::Index i = 0;
  while (i < n) {
    block_start_.push_back(i);
    const Eigen::Index size = (i + 1 < n && T_(i + 1, i) != 0.0) ? 2 : 1;
    block_eigenvalues(T_, i, size, &eigenvalues_);
    i += size;
  }
  block_start_.push_back(n);

  abscissa_ = -std::numeric_limits<double>::infinity();
  for (const auto& ev : eigenvalues_) abscissa_ = std::max(abscissa_, ev.real());

  min_pair_sum_ = std::numeric_limits<double>::infinity();
  for (const auto& li : eigenvalues_) {
    for (const auto& lj : eigenvalues_) {
      min_pair_sum_ = std::min(min_pair_sum_, std::abs(li + lj));
    }
  }
}

SymMatrix LyapunovSolver::solve(const SymMatrix& Q) const {
  const Eigen::Index n = T_.rows();
  if (Q.order() != n) {
    std::ostringstream os;
    os << "LyapunovSolver::solve: right-hand side is " << Q.order() << "x"
       << Q.order() << ", expected " << n << "x" << n;
    throw std::invalid_argument(os.str());
  }
  if (min_pair_sum_ <= 1e-12 * scale_) {
    std::ostringstream os;
    os << "LyapunovSolver: operator is numerically singular, min |li+lj| = "
       << min_pair_sum_;
    throw SingularLyapunov(os.str());
  }

  // Rotate into the Schur basis: T^T Y + Y T = Qt with Y = U^T X U.
  Matrix Qt = U_.transpose() * Q.mat() * U_;
  Matrix Y = Matrix::Zero(n, n);

  const auto nblocks = static_cast<Eigen::Index>(block_start_.size()) - 1;
  for (Eigen::Index bi = 0; bi < nblocks; ++bi) {
    const Eigen::Index i0 = block_start_[bi];
    const Eigen::Index isz = block_start_[bi + 1] - i0;
    for (Eigen::Index bj = 0; bj < nblocks; ++bj) {
      const Eigen::Index j0 = block_start_[bj];
      const Eigen::Index jsz = block_start_[bj + 1] - j0;

      // T_{ii}^T Y_{ij} + Y_{ij} T_{jj} =
      //   Qt_{ij} - sum_{k<i} T_{ki}^T Y_{kj} - sum_{k<j} Y_{ik} T_{kj},
      // where the sums hit only already-computed blocks: rows above in the
      // same column and columns to the left in the same row.
      Matrix rhs = Qt.block(i0, j0, isz, jsz);
      if (i0 > 0) {
        rhs.noalias() -=
            T_.block(0, i0, i0, isz).transpose() * Y.block(0, j0, i0, jsz);
      }
      if (j0 > 0) {
        rhs.noalias() -= Y.block(i0, 0, isz, j0) * T_.block(0, j0, j0, jsz);
      }

      const Matrix Tii = T_.block(i0, i0, isz, isz);
      const Matrix Tjj = T_.block(j0, j0, jsz, jsz);
      // Small Sylvester system via its Kronecker form, at most 4x4:
      // (I (x) Tii^T + Tjj^T (x) I) vec(Y_{ij}) = vec(rhs).
      Matrix sys = Matrix::Zero(isz * jsz, isz * jsz);
      for (Eigen::Index q = 0; q < jsz; ++q) {
        sys.block(q * isz, q * isz, isz, isz) += Tii.transpose();
      }
      for (Eigen::Index q = 0; q < jsz; ++q) {
        for (Eigen::Index r = 0; r < jsz; ++r) {
          sys.block(q * isz, r * isz, isz, isz) +=
              Tjj(r, q) * Matrix::Identity(isz, isz);
        }
      }
      Eigen::Map<Vector> vec_rhs(rhs.data(), isz * jsz);
      Eigen::FullPivLU<Matrix> lu(sys);
      if (!lu.isInvertible() ||
          lu.matrixLU().diagonal().cwiseAbs().minCoeff() <= 1e-12 * scale_) {
        std::ostringstream os;
        os << "LyapunovSolver: singular diagonal block pair at (" << i0 << ", "
           << j0 << ")";
        throw SingularLyapunov(os.str());
      }
      Vector sol = lu.solve(vec_rhs);
      Y.block(i0, j0, isz, jsz) =
          Eigen::Map<Matrix>(sol.data(), isz, jsz);
    }
  }

  return SymMatrix(U_ * Y * U_.transpose());
}

SymMatrix lyap_solve(const Matrix& A, const SymMatrix& Q) {
  return LyapunovSolver(A).solve(Q);
}

SymEig sym_eig(const SymMatrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M.mat());
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "sym_eig: iteration failed on order " << M.order();
    throw std::runtime_error(os.str());
  }
  return SymEig{es.eigenvalues(), es.eigenvectors()};
}

double min_eig_sym(const SymMatrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M.mat(),
                                           Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("min_eig_sym: iteration failed");
  }
  return es.eigenvalues().minCoeff();
}

SymMatrix pseudoinverse(const SymMatrix& M, double rank_tol) {
  SymEig eig = sym_eig(M);
  const double lam_max = eig.values.size() ? eig.values.cwiseAbs().maxCoeff() : 0.0;
  const double cut = rank_tol * lam_max;
  Vector inv = Vector::Zero(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double lam = eig.values(i);
    if (lam < -cut) {
      std::ostringstream os;
      os << "pseudoinverse: eigenvalue " << lam
         << " below the PSD tolerance -" << cut;
      throw NotPSD(os.str());
    }
    if (lam > cut) inv(i) = 1.0 / lam;
  }
  return SymMatrix(eig.vectors * inv.asDiagonal() * eig.vectors.transpose());
}

double operator_2norm(const Matrix& M) {
  require_finite(M, "operator_2norm");
  if (M.rows() == 0 || M.cols() == 0) return 0.0;
  // sqrt of the top eigenvalue of M^T M; cheaper side first.
  const Matrix G = (M.rows() >= M.cols()) ? Matrix(M.transpose() * M)
                                          : Matrix(M * M.transpose());
  const double top = sym_eig(SymMatrix(G)).values.maxCoeff();
  return std::sqrt(std::max(0.0, top));
}

}  // namespace stochinf
