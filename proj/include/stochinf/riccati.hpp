#pragma once

#include <vector>

#include "stochinf/glyap.hpp"

namespace stochinf {

// Tag for the constructor that skips precondition checks. The bisection
// driver validates the system once and then builds one problem per gamma;
// re-running the mean-square stability test each time would dominate the
// cost of the whole computation.
struct Trusted {};

// The parametrized Riccati map
//   R_gamma(X) = P(X) - S(X)^T Q_gamma(X)^{-1} S(X)
// with
//   P(X) = A^T X + X A + sum_j Nx_j^T X Nx_j - C^T C
//   S(X) = B^T X + sum_j Nu_j^T X Nx_j - D^T C
//   Q_gamma(X) = sum_j Nu_j^T X Nu_j + gamma^2 I - D^T D.
// Without input noise, S and Q lose their sums and the map reduces to the
// familiar bounded-real form.
class RiccatiProblem {
 public:
  // Validates gamma > ||D||_2 and mean-square stability of (A, Nx); throws
  // std::invalid_argument or MSUnstable.
  RiccatiProblem(StochasticSystem sys, double gamma);
  RiccatiProblem(StochasticSystem sys, double gamma, Trusted);

  const StochasticSystem& sys() const { return sys_; }
  double gamma() const { return gamma_; }

  SymMatrix q_gamma(const SymMatrix& X) const;  // m x m
  Matrix s_of(const SymMatrix& X) const;        // m x n
  SymMatrix p_of(const SymMatrix& X) const;     // n x n

  // Throws QIndefiniteError when Q_gamma(X) is not positive definite
  // (lambda_min <= 1e-12 * ||Q||_F). In the input-noise case this happens
  // legitimately for gamma below the norm and is a distinct failure signal.
  SymMatrix riccati_eval(const SymMatrix& X) const;

  // K = Q_gamma(X)^{-1} S(X); the closed loop is A - B K.
  Matrix gain(const SymMatrix& X) const;

  // Frechet derivative of R_gamma at X as a generalized Lyapunov operator:
  //   Delta -> Ac^T Delta + Delta Ac + sum_j Ntil_j^T Delta Ntil_j,
  // Ac = A - B K, Ntil_j = Nx_j - Nu_j K.
  GLyapOperator frechet_operator(const SymMatrix& X) const;

  // The (n+m) x (n+m) block matrix [[P(X), S(X)^T], [S(X), Q_gamma(X)]].
  // Positive semidefinite exactly when Q_gamma(X) > 0 and R_gamma(X) >= 0,
  // so it certifies a solution independently of the Schur-complement path.
  SymMatrix lmi_block(const SymMatrix& X) const;

 private:
  StochasticSystem sys_;
  double gamma_;
};

enum class NewtonStatus {
  Converged,
  StabilityLost,
  MaxIter,
  BoundViolated,
  QIndefinite,
};

const char* to_string(NewtonStatus s);

struct NewtonOptions {
  int kmax = 50;
  double tol = 1e-10;  // stop when ||R(X_k)||_F <= tol * (1 + ||X_k||_F)
  bool bound_checks = false;
  bool record = false;
  double power_tol = 1e-9;
  int power_maxit = 10000;
  GlyapOptions inner;
};

struct NewtonRecord {
  int k = 0;
  double residual = 0.0;
  double rho = 0.0;
  double abscissa = 0.0;
  double step_norm = 0.0;
  SymMatrix X;  // the iterate the row describes
};

struct NewtonOutcome {
  NewtonStatus status = NewtonStatus::MaxIter;
  SymMatrix X;
  int iterations = 0;
  std::vector<double> residuals;
  double rho_final = 0.0;    // rho(L_Ac^{-1} Pi) at the last tested iterate
  double alpha_final = 0.0;  // spectral abscissa of the closed-loop drift
  std::vector<NewtonRecord> history;
};

// Newton iteration from X_0 = 0: at each step the derivative operator is
// checked for stability (drift abscissa, then weighted spectral radius), the
// residual is tested, and the correction solves
//   frechet(X_k)(Delta) = -R_gamma(X_k)
// by the fixed-point scheme. All mathematically meaningful failures come
// back as statuses, never exceptions.
NewtonOutcome newton_solve(const RiccatiProblem& prob,
                           const NewtonOptions& opts = {});

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = true;
};

// Precomputes ||B^T P^+ B||_2 from the controllability Gramian; one solve
// per system, reused across all gamma.
double trace_bound_term(const StochasticSystem& sys);

// Trace bound on solution candidates: trace(-B^T X B) <= m^2 gamma^2 * term.
// A violation means the current iterate left the set where solutions can
// live, which the Newton loop reports as BoundViolated.
BoundCheck check_trace_bound(const SymMatrix& X, const Matrix& B,
                             double pinv_term, double gamma);

// Smallest (anti-stabilizing) solution of the deterministic Riccati equation
// obtained from the right-half-plane invariant subspace of the associated
// Hamiltonian matrix. Serves as a floor: every solution X of the full
// equation satisfies X >= X_minus. Throws std::runtime_error when the
// Hamiltonian has eigenvalues on the imaginary axis (gamma too small).
SymMatrix deterministic_smallest_solution(const StochasticSystem& sys,
                                          double gamma);

}  // namespace stochinf
