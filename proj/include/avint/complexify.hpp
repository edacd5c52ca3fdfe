#pragma once

// Symplectic complexification of the block-diagonal quadratic part and the
// reality structure it induces on complex-coordinate polynomials.

#include "avint/exp_poly.hpp"
#include "avint/polynomial.hpp"
#include "avint/spectrum.hpp"

namespace avint {

struct ThetaMap {
  BlockLayout layout;
  // (x, y) -> (z, w)
  LinearMap2n forward;
  // (z, w) -> (x, y); this is the substitution that complexifies.
  LinearMap2n inverse;
};

ThetaMap build_theta(const BlockLayout& layout);
inline ThetaMap build_theta(const ModelSpec& spec) { return build_theta(spec.layout()); }

// H -> H o theta (real coordinates to complex ones).
template <class C>
SparsePolynomial<C> to_complex(const SparsePolynomial<C>& p, const ThetaMap& theta) {
  return substitute_linear(p, theta.inverse);
}

// Inverse of to_complex.
template <class C>
SparsePolynomial<C> to_real(const SparsePolynomial<C>& p_hat, const ThetaMap& theta) {
  return substitute_linear(p_hat, theta.forward);
}

// Theta Conj Theta^{-1}, composed literally through the two substitutions.
ComplexPolynomial conj_theta(const ComplexPolynomial& p_hat, const ThetaMap& theta);

// The index involution (alpha, beta) -> (alpha', beta'): focus pairs swap
// partners, elliptic entries swap alpha <-> beta, hyperbolic stay.
BiIndex reality_swap(const BiIndex& idx, const BlockLayout& layout);
// Sum of the elliptic entries of alpha and beta; the power of i^{-1} in the
// coefficient relation.
int elliptic_weight(const BiIndex& idx, const BlockLayout& layout);

// Conj_theta computed from the coefficient relation:
//   (Conj_theta G)_{alpha',beta'} = i^{-w} conj(G_{alpha,beta}).
ComplexPolynomial conj_theta_by_relation(const ComplexPolynomial& p_hat, const BlockLayout& layout);

struct RealityCheck {
  bool real = false;
  // max |G_{a,b} - i^{-w} conj(G_{a',b'})|
  double relation_residual = 0.0;
  // max |Conj_theta(G) - G| via substitution
  double conjugation_residual = 0.0;
  bool paths_agree = false;
};

RealityCheck is_theta_real(const ComplexPolynomial& p_hat, const ThetaMap& theta, double tol);

}  // namespace avint
