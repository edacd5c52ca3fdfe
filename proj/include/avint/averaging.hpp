#pragma once

// Continuous averaging of a polynomial Hamiltonian near a nonresonant
// equilibrium.
//
// In complex coordinates the higher-order part evolves by
//
//   d/d delta H_* = -{ xi H_*, H2 + H_* },   H_*(0) = initial data,
//
// where xi multiplies the coefficient of z^a w^b (degree <= M, <mu,b-a> != 0)
// by |<mu,b-a>| / <mu,b-a>. Against H2 this is a pure damping at rate
// |<mu,b-a>|; the remaining bracket only couples strictly lower degrees, so
// the system is solved degree by degree in closed form with exp-polynomial
// coefficients. As delta -> infinity the non-resonant coefficients decay and
// the resonant (alpha == beta) ones converge to the Birkhoff normal form.

#include <optional>
#include <string>
#include <vector>

#include "avint/complexify.hpp"
#include "avint/exp_poly.hpp"
#include "avint/polynomial.hpp"
#include "avint/spectrum.hpp"

namespace avint {

// |<mu,k>| below this is a resonance.
inline constexpr double kDivisorTolerance = 1e-9;

// Everything derived from a ModelSpec that the pipeline keeps reusing.
struct AveragingProblem {
  ModelSpec spec;
  EigenvalueVector mu;
  ThetaMap theta;
  ComplexPolynomial h2;         // real coordinates
  ComplexPolynomial h2_hat;     // sum mu_j z_j w_j
  ComplexPolynomial hstar_hat;  // H_* o theta
};

AveragingProblem prepare_problem(const ModelSpec& spec);

// |<mu,b-a>| / <mu,b-a>, or nullopt when the pairing is below kDivisorTolerance.
std::optional<Complex> sigma(const BiIndex& idx, const EigenvalueVector& mu);

template <class C>
SparsePolynomial<C> xi(const SparsePolynomial<C>& p, const EigenvalueVector& mu, int order) {
  SparsePolynomial<C> r(p.dim());
  for (const auto& [idx, c] : p.terms()) {
    if (idx.degree() > order) break;
    if (auto s = sigma(idx, mu)) r.add_term(idx, c * *s);
  }
  r.canonicalize();
  return r;
}

// Closed-form solution of the averaging flow, degrees 3..order.
struct EvolvingPolynomial {
  std::size_t n = 0;
  int order = 0;
  ExpPolyPolynomial coeffs;
  // Conditioning notes from the damped solves.
  std::vector<std::string> warnings;

  ComplexPolynomial operator()(double delta) const { return evaluate_at(coeffs, delta); }
  // Term-wise delta derivative.
  ExpPolyPolynomial derivative() const;
};

// Throws ResonanceError if some |<mu,k>| with k realised up to `order` is
// below kDivisorTolerance.
EvolvingPolynomial solve_triangular(const ComplexPolynomial& hstar_hat, const EigenvalueVector& mu, int order);

// Polynomial in the quadratic invariants, stored in the alpha slots of an
// n-dimensional ComplexPolynomial (beta always zero). Variable order:
// focus pair j -> (P_j, R_j) with P = y_p x_p + y_q x_q, R = y_p x_q - y_q x_p;
// elliptic k -> I_k = (x_k^2 + y_k^2)/2; hyperbolic l -> J_l = x_l y_l.
struct InvariantPolynomial {
  ComplexPolynomial poly;
  Complex evaluate(std::span<const double> invariant_values) const;
};

// Real quadratic polynomial for each invariant variable, in the order above.
std::vector<ComplexPolynomial> invariant_quadratics(const BlockLayout& layout);
// The invariant values at a real point.
std::vector<double> invariant_values(const BlockLayout& layout, std::span<const double> point);

struct NormalForm {
  ComplexPolynomial hat_star;  // degree >= 3 part, complex coordinates, alpha == beta only
  ComplexPolynomial hat;       // h2_hat + hat_star
  ComplexPolynomial real;      // H2 + to_real(hat_star), imaginary dust removed
  InvariantPolynomial invariants;
  // max |Im| of to_real(hat) before it was dropped
  double reality_residual = 0.0;
  // max coefficient gap between `real` and `invariants` composed with the quadratics
  double invariant_residual = 0.0;
};

// Builds the NormalForm record from the resonant part in complex coordinates.
// Throws TheoryViolation if hat_star has an alpha != beta term above `tol`.
NormalForm assemble_normal_form(const ComplexPolynomial& hat_star, const AveragingProblem& problem,
                                double tol = 1e-10);

NormalForm normal_form_limit(const EvolvingPolynomial& ev, const AveragingProblem& problem);

// K_hat as an exp-polynomial polynomial: xi applied to every coefficient.
ExpPolyPolynomial generator_series(const EvolvingPolynomial& ev, const EigenvalueVector& mu);
ComplexPolynomial generator_at(const EvolvingPolynomial& ev, const EigenvalueVector& mu, int order, double delta);
// Real-coordinate K(delta) = to_real(K_hat(delta)), real parts only.
ComplexPolynomial real_generator_at(const EvolvingPolynomial& ev, const AveragingProblem& problem, double delta);

// Smallest nonzero |<mu, b-a>| over the working degrees.
double min_decay_rate(const EigenvalueVector& mu, int order);

// Coefficient of z^a w^b in {xi H, H} written out as the explicit coupling
// sum over (a', b') and j with factor b'_j (a_j + 1) - a'_j (b_j + 1). With
// include_sigma = false the xi factor of each (a', b') term is left out.
Complex coupling_sum(const ComplexPolynomial& h_hat, const BiIndex& target, const EigenvalueVector& mu, int order,
                     bool include_sigma);

}  // namespace avint
