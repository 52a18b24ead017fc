#include "stochinf/operators.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace stochinf {

namespace {

void check_dims(bool ok, const char* what) {
  if (!ok) {
    throw std::invalid_argument(std::string("StochasticSystem: ") + what);
  }
}

}  // namespace

StochasticSystem::StochasticSystem(Matrix A_, Matrix N_, Matrix B_, Matrix C_,
                                   Matrix D_)
    : A(std::move(A_)),
      B(std::move(B_)),
      C(std::move(C_)),
      D(std::move(D_)) {
  Nx.push_back(std::move(N_));
  validate();
}

StochasticSystem::StochasticSystem(Matrix A_, std::vector<Matrix> Nx_,
                                   std::vector<Matrix> Nu_, Matrix B_,
                                   Matrix C_, Matrix D_)
    : A(std::move(A_)),
      Nx(std::move(Nx_)),
      Nu(std::move(Nu_)),
      B(std::move(B_)),
      C(std::move(C_)),
      D(std::move(D_)) {
  validate();
}

bool StochasticSystem::has_input_noise() const {
  for (const auto& Nuj : Nu) {
    if (Nuj.size() != 0 && Nuj.norm() > 0.0) return true;
  }
  return false;
}

void StochasticSystem::validate() const {
  check_dims(A.rows() == A.cols() && A.rows() >= 1, "A must be square");
  check_dims(!Nx.empty(), "at least one state noise term required");
  const Eigen::Index nn = n();
  const Eigen::Index mm = m();
  for (const auto& Nj : Nx) {
    check_dims(Nj.rows() == nn && Nj.cols() == nn, "Nx term must be n x n");
  }
  if (!Nu.empty()) {
    check_dims(Nu.size() == Nx.size(),
               "Nu must be empty or match Nx term count");
    for (const auto& Nuj : Nu) {
      check_dims(Nuj.rows() == nn && Nuj.cols() == mm, "Nu term must be n x m");
    }
  }
  check_dims(B.rows() == nn && B.cols() >= 1, "B must be n x m");
  check_dims(C.cols() == nn && C.rows() >= 1, "C must be p x n");
  check_dims(D.rows() == p() && D.cols() == mm, "D must be p x m");
  for (const Matrix* M : {&A, &B, &C, &D}) {
    check_dims(M->allFinite(), "non-finite entries");
  }
  for (const auto& Nj : Nx) check_dims(Nj.allFinite(), "non-finite entries");
  for (const auto& Nuj : Nu) check_dims(Nuj.allFinite(), "non-finite entries");
}

GLyapOperator::GLyapOperator(Matrix Ac_, std::vector<Matrix> Njs_)
    : Ac(std::move(Ac_)), Njs(std::move(Njs_)) {
  if (Ac.rows() != Ac.cols()) {
    throw std::invalid_argument("GLyapOperator: Ac must be square");
  }
  for (const auto& Nj : Njs) {
    if (Nj.rows() != Ac.rows() || Nj.cols() != Ac.cols()) {
      throw std::invalid_argument("GLyapOperator: noise term size mismatch");
    }
  }
}

SymMatrix apply(const GLyapOperator& op, const SymMatrix& X) {
  if (X.order() != op.order()) {
    throw std::invalid_argument("apply: operand size mismatch");
  }
  Matrix R = op.Ac.transpose() * X.mat() + X.mat() * op.Ac;
  for (const auto& Nj : op.Njs) {
    R.noalias() += Nj.transpose() * X.mat() * Nj;
  }
  return SymMatrix(std::move(R));
}

SymMatrix apply_adjoint(const GLyapOperator& op, const SymMatrix& X) {
  if (X.order() != op.order()) {
    throw std::invalid_argument("apply_adjoint: operand size mismatch");
  }
  Matrix R = op.Ac * X.mat() + X.mat() * op.Ac.transpose();
  for (const auto& Nj : op.Njs) {
    R.noalias() += Nj * X.mat() * Nj.transpose();
  }
  return SymMatrix(std::move(R));
}

Matrix kron_materialize(const GLyapOperator& op) {
  const Eigen::Index n = op.order();
  if (n * n > kKronGuard) {
    std::ostringstream os;
    os << "kron_materialize: n^2 = " << n * n << " exceeds guard "
       << kKronGuard;
    throw GuardExceeded(os.str());
  }
  const Eigen::Index nn = n * n;
  Matrix K = Matrix::Zero(nn, nn);
  const Matrix At = op.Ac.transpose();
  // vec(A^T X) = (I (x) A^T) vec X; vec(X A) = (A^T (x) I) vec X;
  // vec(N^T X N) = (N^T (x) N^T) vec X, all for column-major vec.
  for (Eigen::Index j = 0; j < n; ++j) {
    K.block(j * n, j * n, n, n) += At;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      K.block(i * n, j * n, n, n) +=
          At(i, j) * Matrix::Identity(n, n);
    }
  }
  for (const auto& N : op.Njs) {
    const Matrix Nt = N.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        K.block(i * n, j * n, n, n) += Nt(i, j) * Nt;
      }
    }
  }
  return K;
}

bool ms_stable_oracle(const Matrix& A, const std::vector<Matrix>& Nx) {
  GLyapOperator op(A, Nx);
  return spectral_abscissa(kron_materialize(op)) < 0.0;
}

PowerResult spectral_radius_power(const LyapunovSolver& lyap,
                                  const std::vector<Matrix>& Njs,
                                  double tol, int maxit) {
  const Eigen::Index n = lyap.order();
  PowerResult out;

  bool all_zero = true;
  for (const auto& Nj : Njs) {
    if (Nj.norm() > 0.0) {
      all_zero = false;
      break;
    }
  }
  if (Njs.empty() || all_zero) {
    out.rho = 0.0;
    out.iterations = 1;
    out.converged = true;
    return out;
  }

  Matrix P = Matrix::Identity(n, n) / std::sqrt(static_cast<double>(n));
  double rho_prev = -1.0;
  for (int k = 1; k <= maxit; ++k) {
    Matrix W = Matrix::Zero(n, n);
    for (const auto& Nj : Njs) {
      W.noalias() += Nj.transpose() * P * Nj;
    }
    // -L^{-1} Pi(P): solve A^T Z + Z A = -W; for Hurwitz A this keeps the
    // iterate in the nonnegative definite cone.
    Matrix Pn = lyap.solve(SymMatrix(Matrix(-W))).mat();
    const double pn_norm = Pn.norm();
    if (pn_norm == 0.0) {
      // The operator annihilated the iterate; its radius along this
      // trajectory is exactly zero.
      out.rho = 0.0;
      out.iterations = k;
      out.converged = true;
      return out;
    }
    const double rho = (P.array() * Pn.array()).sum() / P.squaredNorm();
    P = Pn / pn_norm;
    if (std::abs(rho - rho_prev) <= tol * std::max(std::abs(rho), 1.0)) {
      out.rho = rho;
      out.iterations = k;
      out.converged = true;
      return out;
    }
    rho_prev = rho;
  }
  out.rho = rho_prev;
  out.iterations = maxit;
  out.converged = false;
  return out;
}

PowerResult spectral_radius_power(const Matrix& Ac,
                                  const std::vector<Matrix>& Njs, double tol,
                                  int maxit) {
  LyapunovSolver lyap(Ac);
  return spectral_radius_power(lyap, Njs, tol, maxit);
}

MsVerdict ms_stability(const Matrix& A, const std::vector<Matrix>& Nx,
                       double tol, int maxit) {
  MsVerdict v;
  LyapunovSolver lyap(A);
  v.abscissa = lyap.abscissa();
  if (!lyap.hurwitz()) {
    v.stable = false;
    return v;
  }
  PowerResult pr = spectral_radius_power(lyap, Nx, tol, maxit);
  v.rho = pr.rho;
  v.rho_converged = pr.converged;
  v.power_iterations = pr.iterations;
  v.stable = pr.converged && pr.rho < 1.0 - kStabilityMargin;
  return v;
}

bool ms_stable_fast(const Matrix& A, const std::vector<Matrix>& Nx, double tol,
                    int maxit) {
  return ms_stability(A, Nx, tol, maxit).stable;
}

}  // namespace stochinf
