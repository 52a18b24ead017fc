#pragma once

#include <map>
#include <string>
#include <vector>

#include "stochinf/riccati.hpp"

namespace stochinf {

// Deterministic H-infinity norm of G(s) = C (sI - A)^{-1} B + D for Hurwitz
// A, by bisection on gamma with an imaginary-axis eigenvalue test of the
// associated Hamiltonian matrix. The returned value is the certified lower
// end of the final bisection interval, so it never overshoots the true norm
// by more than roundoff; that one-sidedness is what the bracketing below
// relies on. Throws MSUnstable when A is not Hurwitz.
double det_hinf_norm(const Matrix& A, const Matrix& B, const Matrix& C,
                     const Matrix& D, double tol = 1e-6);

struct BracketEntry {
  double gamma = 0.0;
  NewtonStatus status = NewtonStatus::MaxIter;
  int newton_iters = 0;
  double residual = 0.0;
};

struct GammaBracket {
  double gamma0 = 0.0;  // below the norm (or the untested starting bound)
  double gamma1 = 0.0;  // Newton converged here
  double det_hinf = 0.0;
  std::vector<BracketEntry> history;
};

// Floor used when the deterministic bound is exactly zero (C = 0 or B = 0).
inline constexpr double kGammaFloor = 1e-8;
inline constexpr int kDoublingCap = 60;

// Starting interval for the bisection: gamma0 = deterministic bound, then
// double until Newton converges. Throws BracketFailure after the cap.
GammaBracket gamma_bracket(const StochasticSystem& sys,
                           const NewtonOptions& nopts = {});

struct NormReport {
  double norm = 0.0;  // midpoint of the final bracket
  double gamma_lo = 0.0;
  double gamma_hi = 0.0;
  double tol = 0.0;
  double det_hinf = 0.0;
  std::vector<BracketEntry> bracket_history;
  std::map<std::string, double> timings;  // seconds per stage
};

struct HinfOptions {
  double tol = 1e-4;  // bisection width target, relative: tol * max(1, hi)
  NewtonOptions newton;
};

// Top-level computation: verify mean-square stability, bracket, bisect.
// Every midpoint with a Converged Newton tightens the upper end, any other
// status the lower end. Throws MSUnstable or BracketFailure.
NormReport stoch_hinf_norm(const StochasticSystem& sys,
                           const HinfOptions& opts = {});

struct ProfilePoint {
  double gamma = 0.0;
  double rho = 0.0;
  double alpha = 0.0;
  NewtonStatus status = NewtonStatus::MaxIter;
  int newton_iters = 0;
  bool alpha_is_surrogate = false;  // true when the dense operator abscissa
                                    // was out of reach and the closed-loop
                                    // drift abscissa stands in
};

// Newton at each gamma; on convergence, rho of the derivative operator and
// its spectral abscissa (dense materialization when n^2 fits the guard).
// Failures are recorded per point, never fatal.
std::vector<ProfilePoint> profile(const StochasticSystem& sys,
                                  const std::vector<double>& gammas,
                                  const NewtonOptions& opts = {});

// Evenly spaced grid from 1.1 * norm to 6 * norm, the default plotting range.
std::vector<double> default_profile_grid(double norm, int points = 50);

}  // namespace stochinf
