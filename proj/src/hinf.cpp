#include "stochinf/hinf.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace stochinf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// sigma_max of G(i w) via one complex solve per frequency.
double gain_at(const Matrix& A, const Matrix& B, const Matrix& C,
               const Matrix& D, double omega) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXcd M =
      std::complex<double>(0.0, omega) * Eigen::MatrixXcd::Identity(n, n) -
      A.cast<std::complex<double>>();
  Eigen::MatrixXcd X = M.partialPivLu().solve(B.cast<std::complex<double>>());
  Eigen::MatrixXcd G = C.cast<std::complex<double>>() * X +
                       D.cast<std::complex<double>>();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G);
  return svd.singularValues()(0);
}

bool hamiltonian_has_imag_eig(const Matrix& A, const Matrix& B,
                              const Matrix& C, const Matrix& D, double gamma) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  const Eigen::Index p = C.rows();
  Matrix R = gamma * gamma * Matrix::Identity(m, m) - D.transpose() * D;
  Eigen::LLT<Matrix> llt(R);
  if (llt.info() != Eigen::Success) {
    // gamma at or below ||D||_2; that certainly sits below the norm.
    return true;
  }
  const Matrix RinvBt = llt.solve(B.transpose());
  const Matrix RinvDtC = llt.solve(D.transpose() * C);
  const Matrix Abar = A + B * RinvDtC;
  Matrix H(2 * n, 2 * n);
  H.topLeftCorner(n, n) = Abar;
  H.topRightCorner(n, n) = B * RinvBt;
  H.bottomLeftCorner(n, n) =
      -C.transpose() * (Matrix::Identity(p, p) + D * llt.solve(D.transpose())) *
      C;
  H.bottomRightCorner(n, n) = -Abar.transpose();

  Eigen::EigenSolver<Matrix> es(H, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("det_hinf_norm: Hamiltonian eigensolve failed");
  }
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    const std::complex<double> lam = es.eigenvalues()(i);
    if (std::abs(lam.real()) <= 1e-8 * (1.0 + std::abs(lam))) {
      return true;
    }
  }
  return false;
}

}  // namespace

double det_hinf_norm(const Matrix& A, const Matrix& B, const Matrix& C,
                     const Matrix& D, double tol) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("det_hinf_norm: A must be square");
  }
  LyapunovSolver lyap(A);
  if (!lyap.hurwitz()) {
    throw MSUnstable("det_hinf_norm: A is not Hurwitz");
  }
  const Eigen::Index n = A.rows();
  const double sigma_d = operator_2norm(D);

  // Lower bound: probe the gain at zero and at frequencies suggested by the
  // poles (their moduli and imaginary parts pick up resonant peaks).
  double lo = std::max(sigma_d, gain_at(A, B, C, D, 0.0));
  {
    Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::complex<double> lam = es.eigenvalues()(i);
      for (double w : {std::abs(lam), std::abs(lam.imag())}) {
        if (w > 0.0) lo = std::max(lo, gain_at(A, B, C, D, w));
      }
    }
  }

  // Upper bound: ||D||_2 + twice the sum of the Hankel singular values.
  SymMatrix Wc = lyap_solve(A.transpose(), SymMatrix(Matrix(-(B * B.transpose()))));
  SymMatrix Wo = lyap.solve(SymMatrix(Matrix(-(C.transpose() * C))));
  Eigen::EigenSolver<Matrix> prod(Wc.mat() * Wo.mat(),
                                  /*computeEigenvectors=*/false);
  double hankel_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    hankel_sum += std::sqrt(std::max(0.0, prod.eigenvalues()(i).real()));
  }
  double hi = sigma_d + 2.0 * hankel_sum;
  if (hi <= lo) hi = lo * (1.0 + 10.0 * tol) + 1e-300;

  if (lo == 0.0 && hi == 0.0) return 0.0;

  while (hi - lo > tol * std::max(1.0, hi)) {
    const double mid =
        std::max(0.5 * (lo + hi), sigma_d * (1.0 + 1e-9) + 1e-300);
    if (hamiltonian_has_imag_eig(A, B, C, D, mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

GammaBracket gamma_bracket(const StochasticSystem& sys,
                           const NewtonOptions& nopts) {
  GammaBracket out;
  out.det_hinf = det_hinf_norm(sys.A, sys.B, sys.C, sys.D);
  out.gamma0 = out.det_hinf > 0.0 ? out.det_hinf : kGammaFloor;

  double g1 = 2.0 * out.gamma0;
  for (int t = 0; t < kDoublingCap; ++t) {
    RiccatiProblem prob(sys, g1, Trusted{});
    NewtonOutcome res = newton_solve(prob, nopts);
    out.history.push_back(BracketEntry{
        g1, res.status, res.iterations,
        res.residuals.empty() ? 0.0 : res.residuals.back()});
    if (res.status == NewtonStatus::Converged) {
      out.gamma1 = g1;
      return out;
    }
    out.gamma0 = g1;
    g1 *= 2.0;
  }
  std::ostringstream os;
  os << "gamma_bracket: no Newton convergence up to gamma = " << g1
     << "; the norm appears unbounded";
  throw BracketFailure(os.str());
}

NormReport stoch_hinf_norm(const StochasticSystem& sys,
                           const HinfOptions& opts) {
  NormReport report;
  report.tol = opts.tol;
  const auto t_total = Clock::now();

  sys.validate();
  {
    const auto t0 = Clock::now();
    MsVerdict v = ms_stability(sys.A, sys.Nx);
    report.timings["stability_s"] = seconds_since(t0);
    if (!v.stable) {
      std::ostringstream os;
      os << "stoch_hinf_norm: system is not mean-square stable (abscissa = "
         << v.abscissa << ", rho = " << v.rho << ")";
      throw MSUnstable(os.str());
    }
  }

  GammaBracket bracket;
  {
    const auto t0 = Clock::now();
    bracket = gamma_bracket(sys, opts.newton);
    report.timings["bracket_s"] = seconds_since(t0);
  }
  report.det_hinf = bracket.det_hinf;
  report.bracket_history = bracket.history;

  const double dfloor = operator_2norm(sys.D) * (1.0 + 1e-9);
  double lo = bracket.gamma0;
  double hi = bracket.gamma1;
  {
    const auto t0 = Clock::now();
    // Relative width: hi converges onto the norm from above, so scaling by
    // hi keeps the achieved accuracy proportional to the answer even when
    // the norm is far below 1. The floor only matters for a zero transfer.
    while (hi - lo > opts.tol * std::max(hi, kGammaFloor)) {
      const double mid = std::max(0.5 * (lo + hi), dfloor);
      if (mid <= lo || mid >= hi) break;  // floor pinched the interval
      RiccatiProblem prob(sys, mid, Trusted{});
      NewtonOutcome res = newton_solve(prob, opts.newton);
      report.bracket_history.push_back(BracketEntry{
          mid, res.status, res.iterations,
          res.residuals.empty() ? 0.0 : res.residuals.back()});
      if (res.status == NewtonStatus::Converged) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    report.timings["bisection_s"] = seconds_since(t0);
  }
  report.gamma_lo = lo;
  report.gamma_hi = hi;
  report.norm = 0.5 * (lo + hi);
  report.timings["total_s"] = seconds_since(t_total);
  return report;
}

std::vector<ProfilePoint> profile(const StochasticSystem& sys,
                                  const std::vector<double>& gammas,
                                  const NewtonOptions& opts) {
  std::vector<ProfilePoint> points;
  points.reserve(gammas.size());
  const Eigen::Index n = sys.n();
  for (double g : gammas) {
    ProfilePoint pt;
    pt.gamma = g;
    RiccatiProblem prob(sys, g, Trusted{});
    NewtonOutcome res = newton_solve(prob, opts);
    pt.status = res.status;
    pt.newton_iters = res.iterations;
    if (res.status == NewtonStatus::Converged) {
      pt.rho = res.rho_final;
      if (n * n <= kKronGuard) {
        GLyapOperator der = prob.frechet_operator(res.X);
        pt.alpha = spectral_abscissa(kron_materialize(der));
      } else {
        pt.alpha = res.alpha_final;
        pt.alpha_is_surrogate = true;
      }
    } else {
      pt.rho = std::numeric_limits<double>::quiet_NaN();
      pt.alpha = std::numeric_limits<double>::quiet_NaN();
    }
    points.push_back(pt);
  }
  return points;
}

std::vector<double> default_profile_grid(double norm, int points) {
  if (points < 2) points = 2;
  std::vector<double> g(points);
  const double lo = 1.1 * norm;
  const double hi = 6.0 * norm;
  for (int i = 0; i < points; ++i) {
    g[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
  }
  return g;
}

}  // namespace stochinf
