#pragma once

// Finite sums  sum_i c_i * delta^{s_i} * exp(-nu_i * delta)  with nu_i >= 0.
//
// This class is closed under addition, multiplication and the damped linear
// solve below, which is all the triangular averaging system needs.

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "avint/polynomial.hpp"

namespace avint {

// Rates closer than this (relative to max(1, nu)) are the same rate.
inline constexpr double kRateMergeTolerance = 1e-12;

struct ExpPolyTerm {
  Complex c;
  int s = 0;
  double nu = 0.0;
  bool operator==(const ExpPolyTerm&) const = default;
};

class ExpPolyFunction {
 public:
  ExpPolyFunction() = default;
  explicit ExpPolyFunction(std::vector<ExpPolyTerm> terms);
  static ExpPolyFunction constant(Complex c);
  static ExpPolyFunction term(Complex c, int s, double nu);

  const std::vector<ExpPolyTerm>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  Complex operator()(double delta) const;
  // Term-wise d/d delta.
  ExpPolyFunction derivative() const;
  // Sum of the (nu = 0, s = 0) terms.
  Complex constant_part() const;
  // Largest |c| among nu = 0, s > 0 terms; these must not occur in a
  // convergent solution.
  double divergent_magnitude() const;
  // Smallest positive rate, or +inf if there is none.
  double slowest_positive_rate() const;

  ExpPolyFunction& operator+=(const ExpPolyFunction& g);
  ExpPolyFunction& operator-=(const ExpPolyFunction& g);
  friend ExpPolyFunction operator+(ExpPolyFunction f, const ExpPolyFunction& g) { return f += g; }
  friend ExpPolyFunction operator-(ExpPolyFunction f, const ExpPolyFunction& g) { return f -= g; }
  friend ExpPolyFunction operator*(const ExpPolyFunction& f, const ExpPolyFunction& g);
  friend ExpPolyFunction operator*(const ExpPolyFunction& f, Complex s);
  friend ExpPolyFunction operator*(Complex s, const ExpPolyFunction& f) { return f * s; }

  bool operator==(const ExpPolyFunction&) const = default;

 private:
  void normalize();
  std::vector<ExpPolyTerm> terms_;
};

std::string to_string(const ExpPolyFunction& f);

template <>
struct CoefficientTraits<ExpPolyFunction> {
  static void canonicalize(std::map<BiIndex, ExpPolyFunction>& terms);
};

using ExpPolyPolynomial = SparsePolynomial<ExpPolyFunction>;

// Unique solution of c' = -lambda*c - f, c(0) = c0. Source terms whose rate
// matches lambda gain one power of delta. Near-coincident rates (well
// conditioned only in exact arithmetic) are reported through `warnings`.
ExpPolyFunction solve_damped_linear(double lambda, const ExpPolyFunction& f, Complex c0,
                                    std::vector<std::string>* warnings = nullptr);

// Pointwise evaluation of every coefficient.
ComplexPolynomial evaluate_at(const ExpPolyPolynomial& p, double delta);
ExpPolyPolynomial lift_constant(const ComplexPolynomial& p);

}  // namespace avint
