#include "avint/complexify.hpp"

#include <cmath>

namespace avint {

ThetaMap build_theta(const BlockLayout& layout) {
  const auto n = static_cast<Eigen::Index>(layout.n);
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  const Complex i(0.0, 1.0);
  const Complex plus = (1.0 + i) / 2.0;
  const Complex minus = (1.0 - i) / 2.0;
  for (int j = 0; j < layout.n1; ++j) {
    const Eigen::Index p = 2 * j;
    const Eigen::Index q = p + 1;
    // z_p = (x_p + x_q)/2 - i(x_p - x_q)/2, z_q = (x_p + x_q)/2 + i(x_p - x_q)/2
    t(p, p) = minus;
    t(p, q) = plus;
    t(q, p) = plus;
    t(q, q) = minus;
    // w_p = (y_p + y_q)/2 + i(y_p - y_q)/2, w_q = (y_p + y_q)/2 - i(y_p - y_q)/2
    t(n + p, n + p) = plus;
    t(n + p, n + q) = minus;
    t(n + q, n + p) = minus;
    t(n + q, n + q) = plus;
  }
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index k = 2 * layout.n1; k < layout.n2; ++k) {
    // z = (x + i y)/sqrt2, w = (y + i x)/sqrt2
    t(k, k) = r;
    t(k, n + k) = i * r;
    t(n + k, k) = i * r;
    t(n + k, n + k) = r;
  }
  for (Eigen::Index l = layout.n2; l < n; ++l) {
    t(l, l) = 1.0;
    t(n + l, n + l) = 1.0;
  }
  ThetaMap theta{layout, LinearMap2n(t), LinearMap2n()};
  theta.inverse = theta.forward.inverse();
  return theta;
}

ComplexPolynomial conj_theta(const ComplexPolynomial& p_hat, const ThetaMap& theta) {
  return to_complex(conj(to_real(p_hat, theta)), theta);
}

BiIndex reality_swap(const BiIndex& idx, const BlockLayout& layout) {
  BiIndex out = idx;
  for (int j = 0; j < layout.n1; ++j) {
    const auto p = static_cast<std::size_t>(2 * j);
    std::swap(out.alpha[p], out.alpha[p + 1]);
    std::swap(out.beta[p], out.beta[p + 1]);
  }
  for (int k = 2 * layout.n1; k < layout.n2; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    std::swap(out.alpha[kk], out.beta[kk]);
  }
  return out;
}

int elliptic_weight(const BiIndex& idx, const BlockLayout& layout) {
  int w = 0;
  for (int k = 2 * layout.n1; k < layout.n2; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    w += idx.alpha[kk] + idx.beta[kk];
  }
  return w;
}

namespace {

// i^{-w}
Complex inverse_i_power(int w) {
  switch (((w % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

}  // namespace

ComplexPolynomial conj_theta_by_relation(const ComplexPolynomial& p_hat, const BlockLayout& layout) {
  ComplexPolynomial out(p_hat.dim());
  for (const auto& [idx, c] : p_hat.terms())
    out.add_term(reality_swap(idx, layout), inverse_i_power(elliptic_weight(idx, layout)) * std::conj(c));
  out.canonicalize();
  return out;
}

RealityCheck is_theta_real(const ComplexPolynomial& p_hat, const ThetaMap& theta, double tol) {
  RealityCheck r;
  for (const auto& [idx, c] : p_hat.terms()) {
    const Complex partner = p_hat.coefficient(reality_swap(idx, theta.layout));
    const Complex expected = inverse_i_power(elliptic_weight(idx, theta.layout)) * std::conj(partner);
    r.relation_residual = std::max(r.relation_residual, std::abs(c - expected));
  }
  r.conjugation_residual = max_difference(conj_theta(p_hat, theta), p_hat);
  const bool by_relation = r.relation_residual <= tol;
  const bool by_conjugation = r.conjugation_residual <= tol;
  r.real = by_relation && by_conjugation;
  r.paths_agree = by_relation == by_conjugation;
  return r;
}

}  // namespace avint
