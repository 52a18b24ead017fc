#include <doctest.h>

#include <random>

#include "stochinf/glyap.hpp"
#include "support/oracles.hpp"

using namespace stochinf;

namespace {

struct StableCase {
  Matrix A;
  std::vector<Matrix> Ns;
};

StableCase make_stable(std::mt19937& gen, Eigen::Index n, double rho_target,
                       int noise_terms = 1) {
  StableCase sc;
  sc.A = oracle::randn_hurwitz(gen, n);
  for (int t = 0; t < noise_terms; ++t) {
    sc.Ns.push_back(oracle::randn(gen, n, n));
  }
  const double rho0 = oracle::rho_dense(sc.A, sc.Ns);
  if (rho0 > 0.0) {
    const double s = std::sqrt(rho_target / rho0);
    for (auto& N : sc.Ns) N *= s;
  }
  return sc;
}

}  // namespace

TEST_CASE("fixed point matches the dense Kronecker solve") {
  std::mt19937 gen(1001);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + trial % 7;
    const StableCase sc =
        make_stable(gen, n, 0.2 + 0.5 * (trial % 4) / 3.0, 1 + trial % 2);
    const Matrix Q = oracle::randn_sym(gen, n);

    const LyapunovSolver lyap(sc.A);
    const GlyapResult r = solve_fixed_point(lyap, sc.Ns, SymMatrix(Q));
    REQUIRE(r.converged);

    const Matrix Xk = oracle::glyap_kron_solve(sc.A, sc.Ns, Q);
    CHECK((r.X.mat() - Xk).norm() <= 1e-8 * (1.0 + Xk.norm()));

    // Residual reported and true residual agree.
    Matrix res = sc.A.transpose() * r.X.mat() + r.X.mat() * sc.A - Q;
    for (const auto& N : sc.Ns) res += N.transpose() * r.X.mat() * N;
    CHECK(res.norm() / (1.0 + Q.norm()) <= 2.0 * GlyapOptions{}.tol);
  }
}

TEST_CASE("operator-facade overload gives the same answer") {
  std::mt19937 gen(1002);
  const StableCase sc = make_stable(gen, 5, 0.4);
  const Matrix Q = oracle::randn_sym(gen, 5);
  const GlyapResult a =
      solve_fixed_point(LyapunovSolver(sc.A), sc.Ns, SymMatrix(Q));
  const GlyapResult b =
      solve_fixed_point(GLyapOperator(sc.A, sc.Ns), SymMatrix(Q));
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK((a.X.mat() - b.X.mat()).norm() <= 1e-12 * (1.0 + a.X.norm()));
}

TEST_CASE("zero right-hand side returns zero immediately") {
  std::mt19937 gen(1003);
  const StableCase sc = make_stable(gen, 4, 0.5);
  const GlyapResult r = solve_fixed_point(LyapunovSolver(sc.A), sc.Ns,
                                          SymMatrix(Matrix::Zero(4, 4)));
  CHECK(r.converged);
  CHECK(r.X.norm() == 0.0);
}

TEST_CASE("contraction degrades gracefully near rho = 1") {
  std::mt19937 gen(1004);
  const StableCase sc = make_stable(gen, 4, 0.97);
  const Matrix Q = oracle::randn_sym(gen, 4);
  const GlyapResult r = solve_fixed_point(LyapunovSolver(sc.A), sc.Ns,
                                          SymMatrix(Q));
  REQUIRE(r.converged);  // slow but still contracting
  const Matrix Xk = oracle::glyap_kron_solve(sc.A, sc.Ns, Q);
  CHECK((r.X.mat() - Xk).norm() <= 1e-7 * (1.0 + Xk.norm()));
}

TEST_CASE("non-convergence is reported, not thrown") {
  std::mt19937 gen(1005);
  const StableCase sc = make_stable(gen, 4, 0.9);
  const Matrix Q = oracle::randn_sym(gen, 4);
  GlyapOptions opts;
  opts.maxit = 3;  // far too few sweeps at rho = 0.9
  const GlyapResult r = solve_fixed_point(LyapunovSolver(sc.A), sc.Ns,
                                          SymMatrix(Q), opts);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
}

TEST_CASE("accelerated solve agrees with the fixed point") {
  std::mt19937 gen(1006);
  for (double rho_target : {0.3, 0.8, 0.95}) {
    const StableCase sc = make_stable(gen, 6, rho_target);
    const Matrix Q = oracle::randn_sym(gen, 6);
    const LyapunovSolver lyap(sc.A);
    const GlyapResult fp = solve_fixed_point(lyap, sc.Ns, SymMatrix(Q));
    const GlyapResult kr = solve_accelerated(lyap, sc.Ns, SymMatrix(Q));
    REQUIRE(fp.converged);
    REQUIRE(kr.converged);
    CHECK((fp.X.mat() - kr.X.mat()).norm() <= 1e-7 * (1.0 + fp.X.norm()));
  }
}

TEST_CASE("accelerated solve handles Q = 0") {
  std::mt19937 gen(1007);
  const StableCase sc = make_stable(gen, 4, 0.5);
  const GlyapResult r = solve_accelerated(LyapunovSolver(sc.A), sc.Ns,
                                          SymMatrix(Matrix::Zero(4, 4)));
  CHECK(r.converged);
  CHECK(r.X.norm() == 0.0);
}

TEST_CASE("scalar Gramian closed form") {
  // a p + p a + n^2 p = -b^2  =>  p = b^2 / (-2a - n^2).
  Matrix A(1, 1), N(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << -1.0;
  N << 0.5;
  B << 2.0;
  C << 1.0;
  D << 0.0;
  const StochasticSystem sys(A, N, B, C, D);
  const SymMatrix P = controllability_gramian(sys);
  CHECK(P.mat()(0, 0) == doctest::Approx(4.0 / 1.75).epsilon(1e-9));
}

TEST_CASE("Gramian is PSD and solves the adjoint equation") {
  std::mt19937 gen(1008);
  for (int trial = 0; trial < 8; ++trial) {
    const Eigen::Index n = 2 + trial % 5;
    const StableCase sc = make_stable(gen, n, 0.4);
    const Matrix B = oracle::randn(gen, n, 2);
    const StochasticSystem sys(sc.A, sc.Ns, {}, B, Matrix::Ones(1, n),
                               Matrix::Zero(1, 2));
    const SymMatrix P = controllability_gramian(sys);

    CHECK(min_eig_sym(P) >= -1e-9 * (1.0 + P.norm()));

    Matrix res = sc.A * P.mat() + P.mat() * sc.A.transpose() +
                 B * B.transpose();
    for (const auto& N : sc.Ns) res += N * P.mat() * N.transpose();
    CHECK(res.norm() <= 1e-8 * (1.0 + P.norm()) * (1.0 + sc.A.norm()));
  }
}

TEST_CASE("Gramian refuses unstable systems") {
  Matrix A(1, 1), N(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << -1.0;
  N << 1.5;  // 2a + n^2 = 0.25 > 0
  B << 1.0;
  C << 1.0;
  D << 0.0;
  CHECK_THROWS_AS(controllability_gramian(StochasticSystem(A, N, B, C, D)),
                  MSUnstable);
}
