#pragma once

#include <vector>

#include "stochinf/linalg.hpp"

namespace stochinf {

// State-space data of a linear system with multiplicative white noise:
//   dx = (A x + B u) dt + sum_j (Nx_j x + Nu_j u) dw_j,   y = C x + D u.
// The single-noise case with Nu = 0 is the common one; the constructors
// below cover both.
struct StochasticSystem {
  Matrix A;                 // n x n
  std::vector<Matrix> Nx;   // each n x n
  std::vector<Matrix> Nu;   // each n x m; empty or all-zero in the basic case
  Matrix B;                 // n x m
  Matrix C;                 // p x n
  Matrix D;                 // p x m

  StochasticSystem() = default;
  StochasticSystem(Matrix A_, Matrix N_, Matrix B_, Matrix C_, Matrix D_);
  StochasticSystem(Matrix A_, std::vector<Matrix> Nx_, std::vector<Matrix> Nu_,
                   Matrix B_, Matrix C_, Matrix D_);

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  Eigen::Index p() const { return C.rows(); }
  std::size_t noise_count() const { return Nx.size(); }

  // True if any Nu term is present and nonzero.
  bool has_input_noise() const;

  // Throws std::invalid_argument on dimension inconsistencies or non-finite
  // entries.
  void validate() const;
};

// The linear map X -> Ac^T X + X Ac + sum_j Nj^T X Nj on symmetric matrices.
// Carries closed-loop data during Newton steps and the open-loop (A, Nx)
// pair for stability tests.
struct GLyapOperator {
  Matrix Ac;
  std::vector<Matrix> Njs;

  GLyapOperator(Matrix Ac_, std::vector<Matrix> Njs_);
  Eigen::Index order() const { return Ac.rows(); }
};

SymMatrix apply(const GLyapOperator& op, const SymMatrix& X);

// The adjoint under the trace inner product: X -> Ac X + X Ac^T + sum Nj X Nj^T.
SymMatrix apply_adjoint(const GLyapOperator& op, const SymMatrix& X);

// Dense n^2 x n^2 matrix K with K vec(X) = vec(apply(op, X)) for column-major
// vec. Guarded at n^2 <= 4096; intended as a brute-force oracle, not a
// production path.
Matrix kron_materialize(const GLyapOperator& op);

inline constexpr Eigen::Index kKronGuard = 4096;

// Mean-square stability by direct eigenvalue computation on the materialized
// operator. Same size guard as kron_materialize.
bool ms_stable_oracle(const Matrix& A, const std::vector<Matrix>& Nx);

struct PowerResult {
  double rho = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Power iteration for rho(-L_Ac^{-1} Pi_N) on the cone of nonnegative
// definite matrices: P0 = I, P_{k+1} = -L^{-1}(Pi(P_k)), Rayleigh quotient
// <P_k, P_{k+1}> / <P_k, P_k>, with P_k renormalized every step. Requires a
// Hurwitz Ac (caller-verified; the solver's abscissa() makes that cheap).
PowerResult spectral_radius_power(const LyapunovSolver& lyap,
                                  const std::vector<Matrix>& Njs,
                                  double tol = 1e-9, int maxit = 10000);

PowerResult spectral_radius_power(const Matrix& Ac,
                                  const std::vector<Matrix>& Njs,
                                  double tol = 1e-9, int maxit = 10000);

// rho values within this margin of 1 are classified as unstable; being
// conservative here only shifts the bisection by its own tolerance.
inline constexpr double kStabilityMargin = 1e-8;

struct MsVerdict {
  bool stable = false;
  double abscissa = 0.0;
  double rho = 0.0;
  bool rho_converged = false;
  int power_iterations = 0;
};

// Two-stage test: spectral_abscissa(A) < 0, then rho(L_A^{-1} Pi_N) < 1 with
// the margin above. A non-converged power iteration yields a conservative
// "not stable".
MsVerdict ms_stability(const Matrix& A, const std::vector<Matrix>& Nx,
                       double tol = 1e-9, int maxit = 10000);

bool ms_stable_fast(const Matrix& A, const std::vector<Matrix>& Nx,
                    double tol = 1e-9, int maxit = 10000);

}  // namespace stochinf
