#include "stochinf/riccati.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <sstream>
#include <utility>

namespace stochinf {

namespace {

constexpr double kDivergenceGuard = 1e12;

Matrix solve_spd(const SymMatrix& Q, const Matrix& rhs, const char* who) {
  Eigen::LLT<Matrix> llt(Q.mat());
  if (llt.info() != Eigen::Success) {
    throw QIndefiniteError(std::string(who) +
                           ": Cholesky factorization of Q_gamma failed");
  }
  return llt.solve(rhs);
}

}  // namespace

RiccatiProblem::RiccatiProblem(StochasticSystem sys, double gamma)
    : sys_(std::move(sys)), gamma_(gamma) {
  sys_.validate();
  const double dnorm = operator_2norm(sys_.D);
  if (!(gamma_ > dnorm)) {
    std::ostringstream os;
    os << "RiccatiProblem: gamma = " << gamma_ << " must exceed ||D||_2 = "
       << dnorm;
    throw std::invalid_argument(os.str());
  }
  if (!ms_stable_fast(sys_.A, sys_.Nx)) {
    throw MSUnstable("RiccatiProblem: (A, Nx) is not mean-square stable");
  }
}

RiccatiProblem::RiccatiProblem(StochasticSystem sys, double gamma, Trusted)
    : sys_(std::move(sys)), gamma_(gamma) {}

SymMatrix RiccatiProblem::q_gamma(const SymMatrix& X) const {
  const Eigen::Index m = sys_.m();
  Matrix Q = gamma_ * gamma_ * Matrix::Identity(m, m) -
             sys_.D.transpose() * sys_.D;
  for (std::size_t j = 0; j < sys_.Nu.size(); ++j) {
    Q.noalias() += sys_.Nu[j].transpose() * X.mat() * sys_.Nu[j];
  }
  return SymMatrix(std::move(Q));
}

Matrix RiccatiProblem::s_of(const SymMatrix& X) const {
  Matrix S = sys_.B.transpose() * X.mat() - sys_.D.transpose() * sys_.C;
  for (std::size_t j = 0; j < sys_.Nu.size(); ++j) {
    S.noalias() += sys_.Nu[j].transpose() * X.mat() * sys_.Nx[j];
  }
  return S;
}

SymMatrix RiccatiProblem::p_of(const SymMatrix& X) const {
  Matrix P = sys_.A.transpose() * X.mat() + X.mat() * sys_.A -
             sys_.C.transpose() * sys_.C;
  for (const auto& Nj : sys_.Nx) {
    P.noalias() += Nj.transpose() * X.mat() * Nj;
  }
  return SymMatrix(std::move(P));
}

SymMatrix RiccatiProblem::riccati_eval(const SymMatrix& X) const {
  SymMatrix Q = q_gamma(X);
  const double lam_min = min_eig_sym(Q);
  if (lam_min <= 1e-12 * Q.norm()) {
    std::ostringstream os;
    os << "riccati_eval: Q_gamma(X) lost definiteness, lambda_min = "
       << lam_min;
    throw QIndefiniteError(os.str());
  }
  Matrix S = s_of(X);
  Matrix W = solve_spd(Q, S, "riccati_eval");  // Q^{-1} S
  Matrix R = p_of(X).mat() - S.transpose() * W;
  return SymMatrix(std::move(R));
}

Matrix RiccatiProblem::gain(const SymMatrix& X) const {
  SymMatrix Q = q_gamma(X);
  const double lam_min = min_eig_sym(Q);
  if (lam_min <= 1e-12 * Q.norm()) {
    throw QIndefiniteError("gain: Q_gamma(X) is not positive definite");
  }
  return solve_spd(Q, s_of(X), "gain");
}

GLyapOperator RiccatiProblem::frechet_operator(const SymMatrix& X) const {
  Matrix K = gain(X);
  Matrix Ac = sys_.A - sys_.B * K;
  std::vector<Matrix> Ntil;
  Ntil.reserve(sys_.Nx.size());
  for (std::size_t j = 0; j < sys_.Nx.size(); ++j) {
    if (j < sys_.Nu.size() && sys_.Nu[j].size() != 0) {
      Ntil.push_back(sys_.Nx[j] - sys_.Nu[j] * K);
    } else {
      Ntil.push_back(sys_.Nx[j]);
    }
  }
  return GLyapOperator(std::move(Ac), std::move(Ntil));
}

SymMatrix RiccatiProblem::lmi_block(const SymMatrix& X) const {
  const Eigen::Index n = sys_.n();
  const Eigen::Index m = sys_.m();
  Matrix M = Matrix::Zero(n + m, n + m);
  M.topLeftCorner(n, n) = p_of(X).mat();
  Matrix S = s_of(X);
  M.bottomLeftCorner(m, n) = S;
  M.topRightCorner(n, m) = S.transpose();
  M.bottomRightCorner(m, m) = q_gamma(X).mat();
  return SymMatrix(std::move(M));
}

const char* to_string(NewtonStatus s) {
  switch (s) {
    case NewtonStatus::Converged:
      return "Converged";
    case NewtonStatus::StabilityLost:
      return "StabilityLost";
    case NewtonStatus::MaxIter:
      return "MaxIter";
    case NewtonStatus::BoundViolated:
      return "BoundViolated";
    case NewtonStatus::QIndefinite:
      return "QIndefinite";
  }
  return "Unknown";
}

NewtonOutcome newton_solve(const RiccatiProblem& prob,
                           const NewtonOptions& opts) {
  NewtonOutcome out;
  const Eigen::Index n = prob.sys().n();
  out.X = SymMatrix(Matrix::Zero(n, n));

  double bound_term = 0.0;
  if (opts.bound_checks) {
    bound_term = trace_bound_term(prob.sys());
  }

  SymMatrix X(Matrix::Zero(n, n));
  for (int k = 0;; ++k) {
    SymMatrix R(Matrix::Zero(n, n));
    try {
      R = prob.riccati_eval(X);
    } catch (const QIndefiniteError&) {
      out.status = NewtonStatus::QIndefinite;
      out.X = X;
      out.iterations = k;
      return out;
    }
    const double res = R.norm();
    out.residuals.push_back(res);

    GLyapOperator der = prob.frechet_operator(X);
    LyapunovSolver lyap(der.Ac);
    const double alpha = lyap.abscissa();
    out.alpha_final = alpha;
    if (alpha >= 0.0) {
      out.status = NewtonStatus::StabilityLost;
      out.X = X;
      out.iterations = k;
      return out;
    }
    PowerResult pr =
        spectral_radius_power(lyap, der.Njs, opts.power_tol, opts.power_maxit);
    out.rho_final = pr.rho;
    if (!pr.converged || pr.rho >= 1.0 - kStabilityMargin) {
      out.status = NewtonStatus::StabilityLost;
      out.X = X;
      out.iterations = k;
      return out;
    }

    if (opts.record) {
      out.history.push_back(NewtonRecord{k, res, pr.rho, alpha, 0.0, X});
    }

    if (res <= opts.tol * (1.0 + X.norm())) {
      out.status = NewtonStatus::Converged;
      out.X = X;
      out.iterations = k;
      return out;
    }
    if (k >= opts.kmax) {
      out.status = NewtonStatus::MaxIter;
      out.X = X;
      out.iterations = k;
      return out;
    }

    // The fixed point contracts at rate rho, so certifying a gamma close to
    // the norm takes about ln(1/tol) / (1 - rho) sweeps. A fixed cap would
    // stall there and the bisection would misclassify gammas it could still
    // certify. Switch to the Krylov solve once the estimate passes the cap:
    // near criticality only the Perron eigenvalue approaches 1, which GMRES
    // absorbs in a few extra steps. Its fixed-point fallback gets the raised
    // cap so a failed Krylov pass still cannot bias the bisection.
    const SymMatrix rhs(Matrix(-R.mat()));
    GlyapOptions inner = opts.inner;
    const double gap = std::max(1.0 - pr.rho, 1e-8);
    const double needed = 30.0 / gap + 100.0;
    GlyapResult step;
    if (needed > inner.maxit) {
      inner.maxit =
          static_cast<int>(std::min(std::max<double>(needed, inner.maxit), 2e5));
      step = solve_accelerated(lyap, der.Njs, rhs, inner);
    } else {
      step = solve_fixed_point(lyap, der.Njs, rhs, inner);
    }
    if (!step.converged) {
      // A stalling inner solve means the derivative operator is barely
      // stable; treat like running out of iterations at this gamma.
      out.status = NewtonStatus::MaxIter;
      out.X = X;
      out.iterations = k;
      return out;
    }
    if (opts.record && !out.history.empty()) {
      out.history.back().step_norm = step.X.norm();
    }
    X = SymMatrix(Matrix(X.mat() + step.X.mat()));

    if (opts.bound_checks) {
      BoundCheck bc =
          check_trace_bound(X, prob.sys().B, bound_term, prob.gamma());
      if (!bc.ok) {
        out.status = NewtonStatus::BoundViolated;
        out.X = X;
        out.iterations = k + 1;
        return out;
      }
    }
    if (X.norm() > kDivergenceGuard) {
      // Monotonically decreasing and unbounded iterates are the signature of
      // gamma below the norm; cut the run short before overflow.
      out.status = NewtonStatus::MaxIter;
      out.X = X;
      out.iterations = k + 1;
      return out;
    }
  }
}

double trace_bound_term(const StochasticSystem& sys) {
  SymMatrix P = controllability_gramian(sys);
  SymMatrix Pdag = pseudoinverse(P);
  return operator_2norm(sys.B.transpose() * Pdag.mat() * sys.B);
}

BoundCheck check_trace_bound(const SymMatrix& X, const Matrix& B,
                             double pinv_term, double gamma) {
  BoundCheck bc;
  const double m = static_cast<double>(B.cols());
  bc.lhs = -(B.transpose() * X.mat() * B).trace();
  bc.rhs = m * m * gamma * gamma * pinv_term;
  bc.ok = bc.lhs <= bc.rhs + 1e-8 * (1.0 + std::abs(bc.rhs));
  return bc;
}

SymMatrix deterministic_smallest_solution(const StochasticSystem& sys,
                                          double gamma) {
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();
  SymMatrix Rg(Matrix(gamma * gamma * Matrix::Identity(m, m) -
                      sys.D.transpose() * sys.D));
  if (min_eig_sym(Rg) <= 0.0) {
    throw std::invalid_argument(
        "deterministic_smallest_solution: gamma^2 I - D^T D must be positive "
        "definite");
  }
  Eigen::LLT<Matrix> llt(Rg.mat());
  const Matrix RinvBt = llt.solve(sys.B.transpose());       // R^{-1} B^T
  const Matrix RinvDtC = llt.solve(sys.D.transpose() * sys.C);
  const Matrix Ah = sys.A + sys.B * RinvDtC;                // A + B R^{-1} D^T C
  const Matrix Gh = sys.B * RinvBt;                         // B R^{-1} B^T
  const Matrix Hh =
      sys.C.transpose() *
      (Matrix::Identity(sys.p(), sys.p()) + sys.D * llt.solve(sys.D.transpose())) *
      sys.C;

  Matrix H(2 * n, 2 * n);
  H.topLeftCorner(n, n) = Ah;
  H.topRightCorner(n, n) = -Gh;
  H.bottomLeftCorner(n, n) = Hh;
  H.bottomRightCorner(n, n) = -Ah.transpose();

  Eigen::EigenSolver<Matrix> es(H);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error(
        "deterministic_smallest_solution: eigen iteration failed");
  }
  const double scale = 1.0 + H.norm();
  Eigen::MatrixXcd V(2 * n, n);
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    const std::complex<double> lam = es.eigenvalues()(i);
    if (std::abs(lam.real()) <= 1e-9 * scale) {
      throw std::runtime_error(
          "deterministic_smallest_solution: Hamiltonian eigenvalue on the "
          "imaginary axis; gamma is at or below the deterministic norm");
    }
    if (lam.real() > 0.0) {
      if (count >= n) {
        throw std::runtime_error(
            "deterministic_smallest_solution: more than n right-half-plane "
            "eigenvalues");
      }
      V.col(count++) = es.eigenvectors().col(i);
    }
  }
  if (count != n) {
    throw std::runtime_error(
        "deterministic_smallest_solution: expected n right-half-plane "
        "eigenvalues");
  }

  // The invariant subspace spans [V1; V2]; the anti-stabilizing solution is
  // X = Re(V2 V1^{-1}).
  const Eigen::MatrixXcd V1 = V.topRows(n);
  const Eigen::MatrixXcd V2 = V.bottomRows(n);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(V1);
  if (!lu.isInvertible()) {
    throw std::runtime_error(
        "deterministic_smallest_solution: invariant subspace is not a graph");
  }
  Eigen::MatrixXcd Xc = V2 * lu.inverse();
  return SymMatrix(Matrix(Xc.real()));
}

}  // namespace stochinf
