#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "avint/polynomial.hpp"

namespace avint {

enum class BlockKind { focus, elliptic, hyperbolic };

// Index ranges of the three blocks (0-based): [0, 2*n1) focus pairs,
// [2*n1, n2) elliptic, [n2, n) hyperbolic.
struct BlockLayout {
  int n1 = 0;
  int n2 = 0;
  int n = 0;

  BlockKind kind(std::size_t j) const;
  int elliptic_count() const { return n2 - 2 * n1; }
  int hyperbolic_count() const { return n - n2; }
  bool operator==(const BlockLayout&) const = default;
};

struct FocusBlock {
  double a = 0.0;
  double b = 0.0;
  bool operator==(const FocusBlock&) const = default;
};

struct ModelSpec {
  int n1 = 0;
  int n2 = 0;
  int n = 0;
  std::vector<FocusBlock> focus;
  std::vector<double> omega;
  std::vector<double> lambda;
  // Higher-order part in real coordinates x^alpha y^beta.
  ComplexPolynomial hstar;

  BlockLayout layout() const { return {n1, n2, n}; }
  // Every violated invariant, empty if the model is valid.
  std::vector<std::string> violations() const;
  // Throws ModelError listing all violations.
  void validate() const;
};

struct EigenvalueVector {
  std::vector<Complex> mu;
  std::size_t size() const noexcept { return mu.size(); }
  const Complex& operator[](std::size_t j) const { return mu[j]; }
};

EigenvalueVector eigenvalues(const ModelSpec& spec);

// Focus pairs conjugate, elliptic purely imaginary, hyperbolic real.
bool matches_block_pattern(const EigenvalueVector& mu, const BlockLayout& layout);

// <mu, k>
Complex pairing(const EigenvalueVector& mu, std::span<const int> k);

ComplexPolynomial build_H2(const ModelSpec& spec);

// The model Hamiltonian H2 + H_* in real coordinates.
ComplexPolynomial build_hamiltonian(const ModelSpec& spec);

struct DivisorHit {
  std::vector<int> k;
  double modulus = 0.0;
};

struct DivisorReport {
  int order = 0;
  // Number of distinct +-k pairs scanned.
  std::size_t scanned = 0;
  double min_modulus = 0.0;
  std::vector<int> argmin;
  // Vanishing within round-off.
  std::vector<DivisorHit> exact_zeros;
  // Nonzero but below near_tolerance.
  std::vector<DivisorHit> near_zeros;
  double near_tolerance = 0.0;
  // floor(log10 |<mu,k>|) -> count, over nonzero values.
  std::map<int, std::size_t> decade_histogram;

  // Smallest modulus that is not an exact zero.
  double min_nonzero_modulus = 0.0;

  bool resonant() const { return !exact_zeros.empty() || !near_zeros.empty(); }
};

inline constexpr double kDefaultNearResonance = 1e-9;

// Scans every k = beta - alpha != 0 realised by some 2 < |alpha|+|beta| <= order.
// Each +-k pair is reported once, with its first nonzero entry positive.
DivisorReport divisor_scan(const EigenvalueVector& mu, int order, double near_tolerance = kDefaultNearResonance);

}  // namespace avint
