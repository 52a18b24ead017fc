#pragma once

#include <vector>

#include "stochinf/operators.hpp"

namespace stochinf {

struct GlyapOptions {
  double tol = 1e-11;  // relative residual target, scaled by 1 + ||Q||_F
  int maxit = 5000;
};

struct GlyapResult {
  SymMatrix X;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;  // ||apply(op, X) - Q||_F / (1 + ||Q||_F)
};

// Solves Ac^T X + X Ac + sum_j Nj^T X Nj = Q by the fixed point
//   X_{j+1} = L_Ac^{-1}(Q - Pi(X_j)),   X_0 = 0,
// which contracts whenever rho(L_Ac^{-1} Pi) < 1 (caller-verified together
// with Ac Hurwitz). Non-convergence is reported, not thrown: inside the
// Newton iteration a stalling inner solve is evidence that gamma is too
// small, and the caller decides what that means.
GlyapResult solve_fixed_point(const LyapunovSolver& lyap,
                              const std::vector<Matrix>& Njs,
                              const SymMatrix& Q,
                              const GlyapOptions& opts = {});

GlyapResult solve_fixed_point(const GLyapOperator& op, const SymMatrix& Q,
                              const GlyapOptions& opts = {});

// Same contract, but runs GMRES on the preconditioned system
//   (I + L^{-1} Pi) X = L^{-1} Q
// treating symmetric matrices as vectors under the trace inner product.
// Falls back to the fixed point if the Krylov space hits its cap without
// meeting the tolerance.
GlyapResult solve_accelerated(const LyapunovSolver& lyap,
                              const std::vector<Matrix>& Njs,
                              const SymMatrix& Q,
                              const GlyapOptions& opts = {});

// Controllability Gramian: the solution P >= 0 of
//   A P + P A^T + sum_j Nx_j P Nx_j^T = -B B^T.
// This is the adjoint-form equation, so it runs the fixed point on
// (A^T, Nx^T). Throws MSUnstable when the stability precondition fails.
SymMatrix controllability_gramian(const StochasticSystem& sys,
                                  const GlyapOptions& opts = {});

}  // namespace stochinf
