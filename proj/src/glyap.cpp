#include "stochinf/glyap.hpp"

#include <algorithm>
#include <cmath>

namespace stochinf {

namespace {

Matrix pi_of(const std::vector<Matrix>& Njs, const Matrix& X) {
  Matrix W = Matrix::Zero(X.rows(), X.cols());
  for (const auto& Nj : Njs) {
    W.noalias() += Nj.transpose() * X * Nj;
  }
  return W;
}

}  // namespace

GlyapResult solve_fixed_point(const LyapunovSolver& lyap,
                              const std::vector<Matrix>& Njs,
                              const SymMatrix& Q, const GlyapOptions& opts) {
  GlyapResult out;
  const double qscale = 1.0 + Q.norm();

  // X_{j+1} solves A^T X + X A = Q - Pi(X_j). The residual of X_{j+1} then
  // telescopes to Pi(X_{j+1}) - Pi(X_j), so each sweep prices its own
  // residual with no extra Lyapunov solve.
  Matrix X = Matrix::Zero(Q.order(), Q.order());
  Matrix piX = pi_of(Njs, X);
  for (int j = 1; j <= opts.maxit; ++j) {
    Matrix Xn = lyap.solve(SymMatrix(Matrix(Q.mat() - piX))).mat();
    Matrix piXn = pi_of(Njs, Xn);
    const double res = (piXn - piX).norm() / qscale;
    X.swap(Xn);
    piX.swap(piXn);
    out.iterations = j;
    out.residual = res;
    if (res <= opts.tol) {
      out.converged = true;
      break;
    }
  }
  out.X = SymMatrix(std::move(X));
  return out;
}

GlyapResult solve_fixed_point(const GLyapOperator& op, const SymMatrix& Q,
                              const GlyapOptions& opts) {
  LyapunovSolver lyap(op.Ac);
  return solve_fixed_point(lyap, op.Njs, Q, opts);
}

GlyapResult solve_accelerated(const LyapunovSolver& lyap,
                              const std::vector<Matrix>& Njs,
                              const SymMatrix& Q, const GlyapOptions& opts) {
  const Eigen::Index n = Q.order();
  const Eigen::Index nn = n * n;
  const double qscale = 1.0 + Q.norm();

  // Operator of the preconditioned system, acting on vectorized symmetric
  // matrices: z -> z + vec(L^{-1} Pi(unvec z)).
  auto apply_T = [&](const Vector& z) -> Vector {
    Eigen::Map<const Matrix> Z(z.data(), n, n);
    Matrix W = pi_of(Njs, Z);
    Matrix LW = lyap.solve(SymMatrix(std::move(W))).mat();
    Vector r = z;
    r += Eigen::Map<const Vector>(LW.data(), nn);
    return r;
  };

  Matrix B0 = lyap.solve(Q).mat();
  Vector b = Eigen::Map<const Vector>(B0.data(), nn);
  const double bnorm = b.norm();
  GlyapResult out;
  if (bnorm == 0.0) {
    // L^{-1} is injective, so a vanishing right-hand side means Q = 0.
    out.X = SymMatrix(Matrix::Zero(n, n));
    out.iterations = 1;
    out.residual = Q.norm() / qscale;
    out.converged = out.residual <= opts.tol;
    return out;
  }

  // Plain unrestarted GMRES with modified Gram-Schmidt and Givens updates.
  const int kmax = static_cast<int>(
      std::min<Eigen::Index>(std::min(opts.maxit, 200), nn));
  std::vector<Vector> V;
  V.reserve(kmax + 1);
  Matrix H = Matrix::Zero(kmax + 1, kmax);
  Vector cs = Vector::Zero(kmax);
  Vector sn = Vector::Zero(kmax);
  Vector g = Vector::Zero(kmax + 1);

  V.push_back(b / bnorm);
  g(0) = bnorm;
  int steps = 0;
  double rel_res = 1.0;
  for (int k = 0; k < kmax; ++k) {
    Vector w = apply_T(V[k]);
    for (int i = 0; i <= k; ++i) {
      H(i, k) = w.dot(V[i]);
      w -= H(i, k) * V[i];
    }
    H(k + 1, k) = w.norm();
    for (int i = 0; i < k; ++i) {
      const double t = cs(i) * H(i, k) + sn(i) * H(i + 1, k);
      H(i + 1, k) = -sn(i) * H(i, k) + cs(i) * H(i + 1, k);
      H(i, k) = t;
    }
    const double denom = std::hypot(H(k, k), H(k + 1, k));
    if (denom == 0.0) {
      steps = k + 1;
      break;
    }
    cs(k) = H(k, k) / denom;
    sn(k) = H(k + 1, k) / denom;
    H(k, k) = denom;
    g(k + 1) = -sn(k) * g(k);
    g(k) = cs(k) * g(k);
    steps = k + 1;
    rel_res = std::abs(g(k + 1)) / bnorm;
    if (H(k + 1, k) != 0.0 && k + 1 < kmax && rel_res > opts.tol * 0.1) {
      V.push_back(w / H(k + 1, k));
      continue;
    }
    break;
  }

  // Back-substitute for the Krylov coefficients and assemble the iterate.
  Vector y = Vector::Zero(steps);
  for (int i = steps - 1; i >= 0; --i) {
    double s = g(i);
    for (int j = i + 1; j < steps; ++j) s -= H(i, j) * y(j);
    y(i) = (H(i, i) != 0.0) ? s / H(i, i) : 0.0;
  }
  Vector xv = Vector::Zero(nn);
  for (int i = 0; i < steps && i < static_cast<int>(V.size()); ++i) {
    xv += y(i) * V[i];
  }
  Eigen::Map<const Matrix> Xm(xv.data(), n, n);
  SymMatrix X{Matrix(Xm)};

  // True residual of the original equation decides acceptance.
  const Matrix& A = lyap.matrix();
  Matrix r_true =
      A.transpose() * X.mat() + X.mat() * A + pi_of(Njs, X.mat()) - Q.mat();
  out.X = X;
  out.iterations = steps;
  out.residual = r_true.norm() / qscale;
  out.converged = out.residual <= opts.tol;
  if (!out.converged) {
    return solve_fixed_point(lyap, Njs, Q, opts);
  }
  return out;
}

SymMatrix controllability_gramian(const StochasticSystem& sys,
                                  const GlyapOptions& opts) {
  sys.validate();
  MsVerdict v = ms_stability(sys.A, sys.Nx);
  if (!v.stable) {
    throw MSUnstable("controllability_gramian: (A, Nx) is not mean-square stable");
  }
  LyapunovSolver lyap(sys.A.transpose());
  std::vector<Matrix> Nt;
  Nt.reserve(sys.Nx.size());
  for (const auto& Nj : sys.Nx) Nt.push_back(Nj.transpose());
  SymMatrix rhs(Matrix(-(sys.B * sys.B.transpose())));
  GlyapResult r = solve_fixed_point(lyap, Nt, rhs, opts);
  if (!r.converged) {
    throw MSUnstable(
        "controllability_gramian: fixed point failed to converge despite "
        "stability test passing");
  }
  return r.X;
}

}  // namespace stochinf
