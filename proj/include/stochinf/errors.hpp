#pragma once

#include <stdexcept>
#include <string>

namespace stochinf {

// Thrown when the Lyapunov operator X -> A^T X + X A is numerically singular,
// i.e. two eigenvalues of A sum to something indistinguishable from zero.
class SingularLyapunov : public std::runtime_error {
 public:
  explicit SingularLyapunov(const std::string& msg) : std::runtime_error(msg) {}
};

// Input expected to be symmetric positive semidefinite has a clearly negative
// eigenvalue.
class NotPSD : public std::runtime_error {
 public:
  explicit NotPSD(const std::string& msg) : std::runtime_error(msg) {}
};

// The pair (A, N) is not asymptotically mean-square stable, so the requested
// quantity is undefined.
class MSUnstable : public std::runtime_error {
 public:
  explicit MSUnstable(const std::string& msg) : std::runtime_error(msg) {}
};

// A dense oracle was asked for a problem above its size guard.
class GuardExceeded : public std::length_error {
 public:
  explicit GuardExceeded(const std::string& msg) : std::length_error(msg) {}
};

// The doubling search for an upper bracket endpoint gave up.
class BracketFailure : public std::runtime_error {
 public:
  explicit BracketFailure(const std::string& msg) : std::runtime_error(msg) {}
};

// Q_gamma(X) lost positive definiteness; inside the Newton iteration this is
// caught and converted into a structured status instead of propagating.
class QIndefiniteError : public std::runtime_error {
 public:
  explicit QIndefiniteError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace stochinf
