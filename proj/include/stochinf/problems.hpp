#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "stochinf/operators.hpp"

namespace stochinf {

// Seeded generator with explicitly coded uniform and normal transforms.
// std::normal_distribution is implementation-defined, which would make
// "same seed, same corpus" break across standard libraries; mt19937_64
// plus Box-Muller is pinned everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform on [0, 1) with 53 significant bits.
  double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double normal();

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Random test system: A, N, B, C entrywise standard normal (drawn in that
// order, each column-major), A made Hurwitz by mirroring right-half-plane
// eigenvalues into the left half, N rescaled by (2 rho + 1)^{-1/2} so that
// the weighted spectral radius lands at rho/(2 rho + 1) < 1/2, D = 0.
// Seeds whose eigenvector basis is too ill-conditioned to mirror reliably
// are skipped deterministically (seed+1, seed+2, ...); *resamples reports
// how many were skipped when non-null.
StochasticSystem random_system(int n, int m, int p, std::uint64_t seed,
                               int* resamples = nullptr);

// Same pipeline with `noise_terms` state noises and matching input noises:
// Nx_j standard normal, Nu_j standard normal scaled by 0.3 (keeps
// Q_gamma(X) comfortably definite along Newton paths), all jointly rescaled
// by (2 rho + 1)^{-1/2}.
StochasticSystem random_general_system(int n, int m, int p, int noise_terms,
                                       std::uint64_t seed,
                                       int* resamples = nullptr);

// Heat conduction on the unit square, 5-point scheme on the k x k interior
// grid (n = k^2, h = 1/(k+1)). Three edges carry Dirichlet data u1, u2, u3
// entering through B with weight 1/h^2; on the fourth edge the boundary
// value is eliminated as T_b = (1/2) T_edge with noise coupling 1/(2h), so
// the Robin-type transfer modifies the diagonal of A at the edge column and
// puts the only nonzeros of N there. Output y = mean temperature, D = 0.
StochasticSystem heat_system(int k);

struct McOptions {
  double t_final = 20.0;
  double dt = 1e-3;
  int paths = 200;
  std::uint64_t seed = 1;
};

struct McEstimate {
  double ratio = 0.0;      // ||y||_{L2} / ||u||_{L2}, averaged over paths
  double std_error = 0.0;  // delta-method standard error of the ratio
};

// Euler-Maruyama estimate of the input-output gain for a fixed deterministic
// input signal: a statistical lower bound on the induced norm. Each path
// draws its Wiener increments from an independent substream derived from
// (seed, path index). Throws on trajectory blow-up (||x|| > 1e12), which
// indicates instability or too coarse a step.
McEstimate mc_norm_lower_bound(const StochasticSystem& sys,
                               const std::function<Vector(double)>& u,
                               const McOptions& opts = {});

}  // namespace stochinf
