#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace avint {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A model file or ModelSpec that violates one or more invariants. All
// violations are collected before throwing.
class ModelError : public Error {
 public:
  explicit ModelError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// An integer vector k with <mu, k> = 0 (or below the divisor tolerance)
// inside the working order.
class ResonanceError : public Error {
 public:
  ResonanceError(std::vector<int> k, double modulus);
  const std::vector<int>& k() const noexcept { return k_; }
  double modulus() const noexcept { return modulus_; }

 private:
  std::vector<int> k_;
  double modulus_;
};

// The closed-form solution contains a term the theory forbids, e.g. a
// non-decaying polynomial-in-delta term.
class TheoryViolation : public Error {
 public:
  using Error::Error;
};

class FlowError : public Error {
 public:
  using Error::Error;
};

std::string format_k(const std::vector<int>& k);

}  // namespace avint
