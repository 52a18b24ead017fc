#include <doctest.h>

#include <limits>
#include <random>

#include "stochinf/operators.hpp"
#include "support/oracles.hpp"

using namespace stochinf;

namespace {

// Random system that is ms-stable by construction: Gershgorin-Hurwitz drift
// plus a noise term shrunk until the weighted radius sits at `target`.
std::pair<Matrix, std::vector<Matrix>> stable_pair(std::mt19937& gen,
                                                   Eigen::Index n,
                                                   double target) {
  const Matrix A = oracle::randn_hurwitz(gen, n);
  Matrix N = oracle::randn(gen, n, n);
  const double rho0 = oracle::rho_dense(A, {N});
  if (rho0 > 0.0) N *= std::sqrt(target / rho0);
  return {A, {N}};
}

}  // namespace

TEST_CASE("StochasticSystem rejects inconsistent dimensions") {
  const Matrix A = Matrix::Identity(2, 2);
  const Matrix B = Matrix::Ones(2, 1);
  const Matrix C = Matrix::Ones(1, 2);
  const Matrix D = Matrix::Zero(1, 1);
  CHECK_NOTHROW(StochasticSystem(A, Matrix::Zero(2, 2), B, C, D));
  CHECK_THROWS_AS(StochasticSystem(A, Matrix::Zero(3, 3), B, C, D),
                  std::invalid_argument);
  CHECK_THROWS_AS(StochasticSystem(A, Matrix::Zero(2, 2), B.transpose(), C, D),
                  std::invalid_argument);
  CHECK_THROWS_AS(StochasticSystem(A, Matrix::Zero(2, 2), B, C,
                                   Matrix::Zero(2, 2)),
                  std::invalid_argument);

  Matrix bad = A;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(StochasticSystem(bad, Matrix::Zero(2, 2), B, C, D),
                  std::invalid_argument);
}

TEST_CASE("has_input_noise looks past empty and zero terms") {
  const Matrix A = -Matrix::Identity(2, 2);
  const Matrix B = Matrix::Ones(2, 1);
  const Matrix C = Matrix::Ones(1, 2);
  const Matrix D = Matrix::Zero(1, 1);
  StochasticSystem basic(A, Matrix::Identity(2, 2), B, C, D);
  CHECK_FALSE(basic.has_input_noise());

  StochasticSystem with_zero(A, {Matrix::Identity(2, 2)},
                             {Matrix::Zero(2, 1)}, B, C, D);
  CHECK_FALSE(with_zero.has_input_noise());

  StochasticSystem with_noise(A, {Matrix::Identity(2, 2)},
                              {Matrix::Ones(2, 1)}, B, C, D);
  CHECK(with_noise.has_input_noise());
}

TEST_CASE("apply on a worked 2x2 example") {
  Matrix Ac(2, 2), N(2, 2), X(2, 2);
  Ac << -1.0, 2.0, 0.0, -3.0;
  N << 0.5, 0.0, 0.0, 0.5;
  X << 1.0, 0.0, 0.0, 2.0;
  const GLyapOperator op(Ac, {N});
  // Ac^T X + X Ac + N^T X N with diagonal N = I/2 adds X/4.
  Matrix expect = Ac.transpose() * X + X * Ac + 0.25 * X;
  CHECK((apply(op, SymMatrix(X)).mat() - expect).norm() <= 1e-14);
}

TEST_CASE("apply matches its Kronecker materialization") {
  std::mt19937 gen(909);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 2 + trial % 5;
    const Matrix Ac = oracle::randn(gen, n, n);
    const std::vector<Matrix> Ns = {oracle::randn(gen, n, n),
                                    oracle::randn(gen, n, n)};
    const GLyapOperator op(Ac, Ns);
    const Matrix K = kron_materialize(op);
    CHECK((K - oracle::glyap_matrix(Ac, Ns)).norm() <= 1e-12 * (1.0 + K.norm()));

    const Matrix X = oracle::randn_sym(gen, n);
    const Matrix lhs = apply(op, SymMatrix(X)).mat();
    const Matrix rhs = oracle::unvec(K * oracle::vec(X), n);
    CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
  }
}

TEST_CASE("apply is linear") {
  std::mt19937 gen(111);
  const Matrix Ac = oracle::randn(gen, 4, 4);
  const GLyapOperator op(Ac, {oracle::randn(gen, 4, 4)});
  const Matrix X = oracle::randn_sym(gen, 4);
  const Matrix Y = oracle::randn_sym(gen, 4);
  const Matrix lhs = apply(op, SymMatrix(Matrix(2.0 * X - 3.0 * Y))).mat();
  const Matrix rhs =
      2.0 * apply(op, SymMatrix(X)).mat() - 3.0 * apply(op, SymMatrix(Y)).mat();
  CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
}

TEST_CASE("apply_adjoint is the trace-inner-product adjoint") {
  std::mt19937 gen(222);
  const Matrix Ac = oracle::randn(gen, 5, 5);
  const GLyapOperator op(Ac, {oracle::randn(gen, 5, 5)});
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix X = oracle::randn_sym(gen, 5);
    const Matrix Y = oracle::randn_sym(gen, 5);
    const double a = (apply(op, SymMatrix(X)).mat() * Y).trace();
    const double b = (X * apply_adjoint(op, SymMatrix(Y)).mat()).trace();
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
  }
}

TEST_CASE("kron_materialize enforces the size guard") {
  const Eigen::Index n = 65;  // n^2 = 4225 > 4096
  const GLyapOperator op(Matrix::Identity(n, n), {});
  CHECK_THROWS_AS(kron_materialize(op), GuardExceeded);
}

TEST_CASE("scalar ms-stability closed form: 2a + n^2 < 0") {
  auto scalar_stable = [](double a, double nval) {
    Matrix A(1, 1), N(1, 1);
    A << a;
    N << nval;
    return ms_stable_fast(A, {N});
  };
  CHECK(scalar_stable(-1.0, 1.0));        // 2a + n^2 = -1
  CHECK_FALSE(scalar_stable(-1.0, 1.5));  // 2a + n^2 = +0.25
  CHECK_FALSE(scalar_stable(0.1, 0.0));   // drift unstable
  CHECK(ms_stable_oracle((Matrix(1, 1) << -1.0).finished(),
                         {(Matrix(1, 1) << 1.0).finished()}));
  CHECK_FALSE(ms_stable_oracle((Matrix(1, 1) << -1.0).finished(),
                               {(Matrix(1, 1) << 1.5).finished()}));
}

TEST_CASE("power iteration matches dense eigenvalues of -L^{-1} Pi") {
  std::mt19937 gen(333);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + trial % 6;
    auto [A, Ns] = stable_pair(gen, n, 0.3 + 0.6 * (trial % 3) / 2.0);
    const PowerResult pr = spectral_radius_power(A, Ns);
    CHECK(pr.converged);
    const double dense = oracle::rho_dense(A, Ns);
    CHECK(pr.rho == doctest::Approx(dense).epsilon(1e-6));
  }
}

TEST_CASE("power iteration handles the zero-noise edge") {
  std::mt19937 gen(444);
  const Matrix A = oracle::randn_hurwitz(gen, 4);
  const PowerResult pr = spectral_radius_power(A, {Matrix::Zero(4, 4)});
  CHECK(pr.converged);
  CHECK(pr.rho == 0.0);
}

TEST_CASE("ms_stability verdict flips with the noise amplitude") {
  std::mt19937 gen(555);
  const Matrix A = oracle::randn_hurwitz(gen, 5);
  Matrix N = oracle::randn(gen, 5, 5);
  const double rho0 = oracle::rho_dense(A, {N});
  REQUIRE(rho0 > 0.0);

  for (double target : {0.5, 0.9, 0.999}) {
    const Matrix Ns = N * std::sqrt(target / rho0);
    const MsVerdict v = ms_stability(A, {Ns});
    CHECK(v.stable);
    CHECK(v.abscissa < 0.0);
    CHECK(v.rho == doctest::Approx(target).epsilon(1e-5));
  }
  for (double target : {1.001, 1.5, 4.0}) {
    const Matrix Ns = N * std::sqrt(target / rho0);
    CHECK_FALSE(ms_stable_fast(A, {Ns}));
    CHECK_FALSE(ms_stable_oracle(A, {Ns}));
  }
}

TEST_CASE("unstable drift short-circuits before any power iteration") {
  Matrix A = Matrix::Identity(3, 3);
  const MsVerdict v = ms_stability(A, {Matrix::Zero(3, 3)});
  CHECK_FALSE(v.stable);
  CHECK(v.abscissa == doctest::Approx(1.0));
  CHECK(v.power_iterations == 0);
}

TEST_CASE("scalar weighted radius equals n^2 / (-2a)") {
  Matrix A(1, 1), N(1, 1);
  A << -1.5;
  N << 0.9;
  const PowerResult pr = spectral_radius_power(A, {N});
  CHECK(pr.converged);
  CHECK(pr.rho == doctest::Approx(0.81 / 3.0).epsilon(1e-9));
}
