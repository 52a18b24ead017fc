#include "stochinf/problems.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace stochinf {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Matrix draw_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      M(i, j) = rng.normal();
    }
  }
  return M;
}

// Mirror right-half-plane eigenvalues of A into the left half. Returns false
// when the eigenvector basis is too ill-conditioned for the reassembled
// matrix to be trusted.
bool mirror_stable(Matrix* A) {
  Eigen::EigenSolver<Matrix> es(*A);
  if (es.info() != Eigen::Success) return false;
  Eigen::VectorXcd lam = es.eigenvalues();
  bool any_flip = false;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i).real() > 0.0) {
      lam(i) = std::complex<double>(-lam(i).real(), lam(i).imag());
      any_flip = true;
    }
  }
  const Eigen::MatrixXcd V = es.eigenvectors();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0 || smax / smin > 1e8) return false;
  if (any_flip) {
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(V);
    *A = (V * lam.asDiagonal() * lu.inverse()).real();
  }
  // Mirrored spectra can still graze the axis through roundoff; such draws
  // are useless as stable test systems.
  const double margin = 1e-6 * (1.0 + A->norm());
  return spectral_abscissa(*A) < -margin;
}

StochasticSystem random_system_impl(int n, int m, int p, int noise_terms,
                                    double nu_scale, std::uint64_t seed,
                                    int* resamples) {
  if (n < 1 || m < 1 || p < 1 || noise_terms < 1) {
    throw std::invalid_argument("random_system: dimensions must be positive");
  }
  int skipped = 0;
  for (;; ++skipped) {
    Rng rng(seed + static_cast<std::uint64_t>(skipped));
    Matrix A = draw_matrix(rng, n, n);
    std::vector<Matrix> Nx;
    std::vector<Matrix> Nu;
    for (int j = 0; j < noise_terms; ++j) Nx.push_back(draw_matrix(rng, n, n));
    if (nu_scale > 0.0) {
      for (int j = 0; j < noise_terms; ++j) {
        Nu.push_back(nu_scale * draw_matrix(rng, n, m));
      }
    }
    Matrix B = draw_matrix(rng, n, m);
    Matrix C = draw_matrix(rng, p, n);

    if (!mirror_stable(&A)) continue;

    PowerResult pr = spectral_radius_power(A, Nx);
    if (!pr.converged) continue;
    const double s = 1.0 / std::sqrt(2.0 * pr.rho + 1.0);
    for (auto& Nj : Nx) Nj *= s;
    for (auto& Nuj : Nu) Nuj *= s;

    if (resamples) *resamples = skipped;
    return StochasticSystem(std::move(A), std::move(Nx), std::move(Nu),
                            std::move(B), std::move(C),
                            Matrix::Zero(p, m));
  }
}

}  // namespace

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; reject u = 0 so the log stays finite.
  double u = 0.0;
  do {
    u = u01();
  } while (u == 0.0);
  const double v = u01();
  const double r = std::sqrt(-2.0 * std::log(u));
  const double theta = 2.0 * M_PI * v;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

StochasticSystem random_system(int n, int m, int p, std::uint64_t seed,
                               int* resamples) {
  return random_system_impl(n, m, p, 1, 0.0, seed, resamples);
}

StochasticSystem random_general_system(int n, int m, int p, int noise_terms,
                                       std::uint64_t seed, int* resamples) {
  return random_system_impl(n, m, p, noise_terms, 0.3, seed, resamples);
}

StochasticSystem heat_system(int k) {
  if (k < 2) {
    throw std::invalid_argument("heat_system: k must be at least 2");
  }
  const int n = k * k;
  const double h = 1.0 / (k + 1);
  const double w = 1.0 / (h * h);

  Matrix A = Matrix::Zero(n, n);
  Matrix N = Matrix::Zero(n, n);
  Matrix B = Matrix::Zero(n, 3);
  // Node (i, j) -> index; i runs along x (the transfer edge sits at x = 1),
  // j along y. Edges: x = 0 carries u1, y = 0 carries u2, y = 1 carries u3.
  auto idx = [k](int i, int j) { return (j - 1) * k + (i - 1); };

  for (int j = 1; j <= k; ++j) {
    for (int i = 1; i <= k; ++i) {
      const int q = idx(i, j);
      A(q, q) = -4.0 * w;
      if (i > 1) A(q, idx(i - 1, j)) = w; else B(q, 0) = w;
      if (j > 1) A(q, idx(i, j - 1)) = w; else B(q, 1) = w;
      if (j < k) A(q, idx(i, j + 1)) = w; else B(q, 2) = w;
      if (i < k) {
        A(q, idx(i + 1, j)) = w;
      } else {
        // Edge x = 1: eliminating the boundary value T_b = (1/2) T_edge
        // leaves half the neighbor weight on the diagonal; the stochastic
        // part of the transfer coefficient couples at 1/(2h).
        A(q, q) += 0.5 * w;
        N(q, q) = 0.5 / h;
      }
    }
  }

  Matrix C = Matrix::Constant(1, n, 1.0 / n);
  return StochasticSystem(std::move(A), std::move(N), std::move(B),
                          std::move(C), Matrix::Zero(1, 3));
}

McEstimate mc_norm_lower_bound(const StochasticSystem& sys,
                               const std::function<Vector(double)>& u,
                               const McOptions& opts) {
  sys.validate();
  if (!(opts.dt > 0.0) || !(opts.t_final > opts.dt) || opts.paths < 1) {
    throw std::invalid_argument("mc_norm_lower_bound: bad time grid");
  }
  const Eigen::Index n = sys.n();
  const Eigen::Index m = sys.m();
  const auto nu = static_cast<Eigen::Index>(sys.noise_count());
  const int steps = static_cast<int>(opts.t_final / opts.dt);
  const double sqdt = std::sqrt(opts.dt);

  // The input is deterministic: sample it once.
  std::vector<Vector> us(steps);
  double u_energy = 0.0;
  for (int s = 0; s < steps; ++s) {
    us[s] = u(s * opts.dt);
    if (us[s].size() != m) {
      throw std::invalid_argument("mc_norm_lower_bound: input size mismatch");
    }
    u_energy += us[s].squaredNorm() * opts.dt;
  }
  if (u_energy == 0.0) return McEstimate{0.0, 0.0};

  const bool with_input_noise = sys.has_input_noise();
  double sum_q = 0.0;
  double sum_q2 = 0.0;
  for (int path = 0; path < opts.paths; ++path) {
    Rng rng(splitmix64(opts.seed + static_cast<std::uint64_t>(path)));
    Vector x = Vector::Zero(n);
    double y_energy = 0.0;
    for (int s = 0; s < steps; ++s) {
      const Vector y = sys.C * x + sys.D * us[s];
      y_energy += y.squaredNorm() * opts.dt;
      Vector dx = (sys.A * x + sys.B * us[s]) * opts.dt;
      for (Eigen::Index j = 0; j < nu; ++j) {
        const double xi = rng.normal();
        Vector diff = sys.Nx[j] * x;
        if (with_input_noise && j < static_cast<Eigen::Index>(sys.Nu.size()) &&
            sys.Nu[j].size() != 0) {
          diff += sys.Nu[j] * us[s];
        }
        dx += sqdt * xi * diff;
      }
      x += dx;
      if (x.norm() > 1e12) {
        std::ostringstream os;
        os << "mc_norm_lower_bound: trajectory blow-up at t = " << s * opts.dt
           << " (dt too large or system unstable)";
        throw std::runtime_error(os.str());
      }
    }
    const double q = y_energy / u_energy;
    sum_q += q;
    sum_q2 += q * q;
  }

  const double mean_q = sum_q / opts.paths;
  McEstimate est;
  est.ratio = std::sqrt(std::max(0.0, mean_q));
  if (opts.paths > 1 && est.ratio > 0.0) {
    const double var_q =
        std::max(0.0, (sum_q2 - opts.paths * mean_q * mean_q) /
                          (opts.paths - 1));
    const double se_q = std::sqrt(var_q / opts.paths);
    est.std_error = se_q / (2.0 * est.ratio);
  }
  return est;
}

}  // namespace stochinf
