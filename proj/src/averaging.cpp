#include "avint/averaging.hpp"

#include <cmath>
#include <sstream>

namespace avint {

namespace {

ComplexPolynomial diagonal_quadratic(const EigenvalueVector& mu) {
  const std::size_t n = mu.size();
  ComplexPolynomial h(n);
  for (std::size_t j = 0; j < n; ++j) {
    BiIndex idx = BiIndex::zero(n);
    idx.alpha[j] = 1;
    idx.beta[j] = 1;
    h.add_term(idx, mu[j]);
  }
  h.canonicalize();
  return h;
}

}  // namespace

AveragingProblem prepare_problem(const ModelSpec& spec) {
  spec.validate();
  AveragingProblem p;
  p.spec = spec;
  p.mu = eigenvalues(spec);
  p.theta = build_theta(spec);
  p.h2 = build_H2(spec);
  p.h2_hat = diagonal_quadratic(p.mu);
  p.hstar_hat = to_complex(spec.hstar, p.theta);
  return p;
}

std::optional<Complex> sigma(const BiIndex& idx, const EigenvalueVector& mu) {
  const auto k = idx.shift();
  const Complex pk = pairing(mu, k);
  const double m = std::abs(pk);
  if (m < kDivisorTolerance) return std::nullopt;
  return m / pk;
}

ExpPolyPolynomial EvolvingPolynomial::derivative() const {
  return map_coefficients(coeffs, [](const BiIndex&, const ExpPolyFunction& f) { return f.derivative(); });
}

EvolvingPolynomial solve_triangular(const ComplexPolynomial& hstar_hat, const EigenvalueVector& mu, int order) {
  const std::size_t n = hstar_hat.dim();
  if (n != mu.size()) throw DimensionMismatch("H_* and mu dimensions differ");
  if (order < 3) throw Error("working order must be at least 3");
  if (min_degree(hstar_hat) < 3) throw Error("H_* must vanish to order 3 at the origin");

  const DivisorReport scan = divisor_scan(mu, order);
  if (!scan.exact_zeros.empty()) throw ResonanceError(scan.exact_zeros.front().k, scan.exact_zeros.front().modulus);
  if (!scan.near_zeros.empty()) throw ResonanceError(scan.near_zeros.front().k, scan.near_zeros.front().modulus);

  EvolvingPolynomial ev;
  ev.n = n;
  ev.order = order;
  ev.coeffs = ExpPolyPolynomial(n);
  ExpPolyPolynomial xi_coeffs(n);
  const ComplexPolynomial initial = truncate_degree(hstar_hat, order);

  for (int d = 3; d <= order; ++d) {
    // Only degrees < d are present in ev / xi_coeffs at this point.
    const ExpPolyPolynomial source = poisson_bracket(xi_coeffs, ev.coeffs, d);
    std::map<BiIndex, std::pair<ExpPolyFunction, Complex>> rows;
    for (const auto& [idx, f] : source.terms()) rows[idx].first = f;
    for (const auto& [idx, c] : initial.terms())
      if (idx.degree() == d) rows[idx].second = c;

    for (const auto& [idx, row] : rows) {
      const double lambda = idx.alpha == idx.beta ? 0.0 : std::abs(pairing(mu, idx.shift()));
      ExpPolyFunction c = solve_damped_linear(lambda, row.first, row.second, &ev.warnings);
      if (c.is_zero()) continue;
      if (auto s = sigma(idx, mu)) xi_coeffs.add_term(idx, c * *s);
      ev.coeffs.add_term(idx, std::move(c));
    }
    ev.coeffs.canonicalize();
    xi_coeffs.canonicalize();
  }
  return ev;
}

Complex InvariantPolynomial::evaluate(std::span<const double> invariant_values) const {
  const std::size_t n = poly.dim();
  if (invariant_values.size() != n) throw DimensionMismatch("invariant vector has wrong length");
  Complex s{};
  for (const auto& [idx, c] : poly.terms()) {
    double m = 1.0;
    for (std::size_t j = 0; j < n; ++j) m *= std::pow(invariant_values[j], idx.alpha[j]);
    s += c * m;
  }
  return s;
}

namespace {

BiIndex single(std::size_t n, std::size_t xj, int xe, std::size_t yj, int ye) {
  BiIndex idx = BiIndex::zero(n);
  if (xe) idx.alpha[xj] += xe;
  if (ye) idx.beta[yj] += ye;
  return idx;
}

}  // namespace

std::vector<ComplexPolynomial> invariant_quadratics(const BlockLayout& layout) {
  const auto n = static_cast<std::size_t>(layout.n);
  std::vector<ComplexPolynomial> q(n, ComplexPolynomial(n));
  for (int j = 0; j < layout.n1; ++j) {
    const auto p = static_cast<std::size_t>(2 * j);
    const auto r = p + 1;
    q[p].add_term(single(n, p, 1, p, 1), 1.0);
    q[p].add_term(single(n, r, 1, r, 1), 1.0);
    q[r].add_term(single(n, r, 1, p, 1), 1.0);
    q[r].add_term(single(n, p, 1, r, 1), -1.0);
  }
  for (int k = 2 * layout.n1; k < layout.n2; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    q[kk].add_term(single(n, kk, 2, kk, 0), 0.5);
    q[kk].add_term(single(n, kk, 0, kk, 2), 0.5);
  }
  for (int l = layout.n2; l < layout.n; ++l) {
    const auto ll = static_cast<std::size_t>(l);
    q[ll].add_term(single(n, ll, 1, ll, 1), 1.0);
  }
  for (auto& p : q) p.canonicalize();
  return q;
}

std::vector<double> invariant_values(const BlockLayout& layout, std::span<const double> point) {
  const auto n = static_cast<std::size_t>(layout.n);
  if (point.size() != 2 * n) throw DimensionMismatch("point must have length 2n");
  const auto x = point.first(n);
  const auto y = point.subspan(n);
  std::vector<double> v(n);
  for (int j = 0; j < layout.n1; ++j) {
    const auto p = static_cast<std::size_t>(2 * j);
    const auto r = p + 1;
    v[p] = y[p] * x[p] + y[r] * x[r];
    v[r] = y[p] * x[r] - y[r] * x[p];
  }
  for (int k = 2 * layout.n1; k < layout.n2; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    v[kk] = 0.5 * (x[kk] * x[kk] + y[kk] * y[kk]);
  }
  for (int l = layout.n2; l < layout.n; ++l) {
    const auto ll = static_cast<std::size_t>(l);
    v[ll] = x[ll] * y[ll];
  }
  return v;
}

namespace {

// z_j w_j as a linear form in the invariant variables, as a substitution
// acting on the alpha slots.
LinearMap2n products_to_invariants(const BlockLayout& layout) {
  const auto n = static_cast<Eigen::Index>(layout.n);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(2 * n, 2 * n);
  const Complex i(0.0, 1.0);
  for (int j = 0; j < layout.n1; ++j) {
    const Eigen::Index p = 2 * j;
    const Eigen::Index r = p + 1;
    // z_p w_p = (P + iR)/2, z_r w_r = (P - iR)/2
    m(p, p) = 0.5;
    m(p, r) = 0.5 * i;
    m(r, p) = 0.5;
    m(r, r) = -0.5 * i;
  }
  for (Eigen::Index k = 2 * layout.n1; k < layout.n2; ++k) m(k, k) = i;  // z w = i I
  return LinearMap2n(m);
}

}  // namespace

NormalForm assemble_normal_form(const ComplexPolynomial& hat_star, const AveragingProblem& problem, double tol) {
  const std::size_t n = hat_star.dim();
  NormalForm nf;
  nf.hat_star = ComplexPolynomial(n);
  for (const auto& [idx, c] : hat_star.terms()) {
    if (idx.alpha != idx.beta) {
      if (std::abs(c) > tol)
        throw TheoryViolation("normal form has a non-resonant term " + to_string(idx) + " of modulus " +
                              std::to_string(std::abs(c)));
      continue;
    }
    nf.hat_star.add_term(idx, c);
  }
  nf.hat_star.canonicalize();
  nf.hat = problem.h2_hat + nf.hat_star;

  const ComplexPolynomial real_full = problem.h2 + to_real(nf.hat_star, problem.theta);
  for (const auto& [idx, c] : real_full.terms()) nf.reality_residual = std::max(nf.reality_residual, std::abs(c.imag()));
  nf.real = real_part(real_full);

  // alpha == beta monomials as monomials in the products z_j w_j.
  ComplexPolynomial products(n);
  for (const auto& [idx, c] : nf.hat.terms()) products.add_term(BiIndex(idx.alpha, std::vector<int>(n, 0)), c);
  products.canonicalize();
  nf.invariants.poly = substitute_linear(products, products_to_invariants(problem.theta.layout));

  const auto quads = invariant_quadratics(problem.theta.layout);
  ComplexPolynomial rebuilt(n);
  for (const auto& [idx, c] : nf.invariants.poly.terms()) {
    ComplexPolynomial term = ComplexPolynomial::constant(n, c);
    for (std::size_t j = 0; j < n; ++j)
      for (int e = 0; e < idx.alpha[j]; ++e) term = term * quads[j];
    rebuilt += term;
  }
  nf.invariant_residual = max_difference(rebuilt, real_full);
  return nf;
}

NormalForm normal_form_limit(const EvolvingPolynomial& ev, const AveragingProblem& problem) {
  ComplexPolynomial limit(ev.n);
  for (const auto& [idx, f] : ev.coeffs.terms()) {
    if (const double m = f.divergent_magnitude(); m > 1e-10) {
      std::ostringstream os;
      os << "coefficient " << to_string(idx) << " has a non-decaying delta^s term of size " << m;
      throw TheoryViolation(os.str());
    }
    limit.add_term(idx, f.constant_part());
  }
  limit.canonicalize();
  return assemble_normal_form(limit, problem);
}

ExpPolyPolynomial generator_series(const EvolvingPolynomial& ev, const EigenvalueVector& mu) {
  return xi(ev.coeffs, mu, ev.order);
}

ComplexPolynomial generator_at(const EvolvingPolynomial& ev, const EigenvalueVector& mu, int order, double delta) {
  if (delta < 0.0) throw Error("generator requested at negative delta");
  return xi(ev(delta), mu, order);
}

ComplexPolynomial real_generator_at(const EvolvingPolynomial& ev, const AveragingProblem& problem, double delta) {
  return real_part(to_real(generator_at(ev, problem.mu, ev.order, delta), problem.theta));
}

double min_decay_rate(const EigenvalueVector& mu, int order) { return divisor_scan(mu, order).min_nonzero_modulus; }

Complex coupling_sum(const ComplexPolynomial& h_hat, const BiIndex& target, const EigenvalueVector& mu, int order,
                     bool include_sigma) {
  const std::size_t n = h_hat.dim();
  Complex total{};
  for (const auto& [a, ca] : h_hat.terms()) {
    const int da = a.degree();
    if (da <= 2 || da > order) continue;
    Complex weight = ca;
    if (include_sigma) {
      auto s = sigma(a, mu);
      if (!s) continue;
      weight *= *s;
    }
    for (std::size_t j = 0; j < n; ++j) {
      BiIndex b = BiIndex::zero(n);
      bool valid = true;
      for (std::size_t i = 0; i < n && valid; ++i) {
        const int e = i == j ? 1 : 0;
        b.alpha[i] = target.alpha[i] + e - a.alpha[i];
        b.beta[i] = target.beta[i] + e - a.beta[i];
        valid = b.alpha[i] >= 0 && b.beta[i] >= 0;
      }
      if (!valid) continue;
      const int factor = a.beta[j] * (target.alpha[j] + 1) - a.alpha[j] * (target.beta[j] + 1);
      if (factor == 0) continue;
      total += static_cast<double>(factor) * weight * h_hat.coefficient(b);
    }
  }
  return total;
}

}  // namespace avint
