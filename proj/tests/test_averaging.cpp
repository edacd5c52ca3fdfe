#include <doctest.h>

#include "avint/averaging.hpp"
#include "avint/errors.hpp"
#include "avint/verify.hpp"
#include "test_models.hpp"

using namespace avint;
using avint::testing::xy;

namespace {

EigenvalueVector mu_of(const ModelSpec& s) { return eigenvalues(s); }

Complex invariant_coefficient(const NormalForm& nf, std::vector<int> exps) {
  const std::size_t n = exps.size();
  return nf.invariants.poly.coefficient(BiIndex(std::move(exps), std::vector<int>(n, 0)));
}

}  // namespace

TEST_CASE("xi operator") {
  const EigenvalueVector mu{{Complex(0.0, -1.0)}};
  const Complex c(0.7, 0.2);
  const ComplexPolynomial p = ComplexPolynomial::monomial(xy({3}, {0}), c);
  const ComplexPolynomial r = xi(p, mu, 4);
  CHECK(std::abs(r.coefficient(xy({3}, {0})) - Complex(0.0, -1.0) * c) <= 1e-15);
  CHECK(xi(ComplexPolynomial::monomial(xy({2}, {2}), c), mu, 4).is_zero());
  CHECK(xi(ComplexPolynomial::monomial(xy({5}, {0}), c), mu, 4).is_zero());
  const auto s = sigma(xy({1}, {2}), mu);
  REQUIRE(s);
  CHECK(std::abs(std::abs(*s) - 1.0) <= 1e-15);
  CHECK_FALSE(sigma(xy({1}, {1}), mu));
}

TEST_CASE("exp-polynomial algebra") {
  const ExpPolyFunction a = ExpPolyFunction::term(1.0, 0, 1.0);
  const ExpPolyFunction b = ExpPolyFunction::term(1.0, 1, 2.0);
  const ExpPolyFunction ab = a * b;
  REQUIRE(ab.terms().size() == 1);
  CHECK(ab.terms()[0].s == 1);
  CHECK(ab.terms()[0].nu == doctest::Approx(3.0));
  CHECK(ab.terms()[0].c == Complex(1.0));
  CHECK((ab + ab * Complex(-1.0)).is_zero());
  CHECK(ExpPolyFunction::term(3.0, 0, 2.0)(0.0) == Complex(3.0));
  // merging within the rate tolerance
  const ExpPolyFunction m = ExpPolyFunction::term(1.0, 0, 2.0) + ExpPolyFunction::term(1.0, 0, 2.0 + 1e-14);
  CHECK(m.terms().size() == 1);
  const ExpPolyFunction d = (ExpPolyFunction::term(2.0, 2, 1.5)).derivative();
  for (double t : {0.3, 1.0, 4.0}) CHECK(std::abs(d(t) - (4.0 * t - 3.0 * t * t) * std::exp(-1.5 * t)) <= 1e-14);
}

TEST_CASE("damped linear solves") {
  const Complex c(0.5, -0.25);
  const ExpPolyFunction pure = solve_damped_linear(3.0, ExpPolyFunction(), c);
  for (double t : {0.0, 0.7, 2.0}) CHECK(std::abs(pure(t) - c * std::exp(-3.0 * t)) <= 1e-15);

  const ExpPolyFunction res = solve_damped_linear(1.0, ExpPolyFunction::term(1.0, 0, 1.0), 0.0);
  for (double t : {0.0, 0.7, 2.0}) CHECK(std::abs(res(t) + t * std::exp(-t)) <= 1e-15);

  const ExpPolyFunction zero_rate = solve_damped_linear(0.0, ExpPolyFunction::term(1.0, 0, 2.0), 0.0);
  for (double t : {0.0, 0.7, 2.0}) CHECK(std::abs(zero_rate(t) - (std::exp(-2.0 * t) - 1.0) / 2.0) <= 1e-15);
  CHECK(zero_rate.constant_part() == Complex(-0.5));

  // Generic source against c' = -lambda c - f by residual.
  const ExpPolyFunction f = ExpPolyFunction::term(Complex(1.0, 2.0), 2, 0.5) + ExpPolyFunction::term(0.3, 1, 1.7);
  const ExpPolyFunction g = solve_damped_linear(1.7, f, Complex(0.2, 0.1));
  const ExpPolyFunction resid = g.derivative() + g * Complex(1.7) + f;
  for (double t : {0.0, 0.3, 1.0, 5.0}) CHECK(std::abs(resid(t)) <= 1e-13);
  CHECK(std::abs(g(0.0) - Complex(0.2, 0.1)) <= 1e-15);

  std::vector<std::string> warnings;
  solve_damped_linear(1.0, ExpPolyFunction::term(1.0, 0, 1.0 + 1e-8), 0.0, &warnings);
  CHECK_FALSE(warnings.empty());
}

TEST_CASE("triangular solution: initial data and cubic decay") {
  for (const ModelSpec& s : {avint::testing::cubic_quartic_model(), avint::testing::two_dof_model()}) {
    const AveragingProblem p = prepare_problem(s);
    const EvolvingPolynomial ev = solve_triangular(p.hstar_hat, p.mu, 4);
    CHECK(max_difference(ev(0.0), truncate_degree(p.hstar_hat, 4)) <= 1e-14);
    for (double t : {0.1, 1.0, 10.0}) {
      const ComplexPolynomial at = ev(t);
      CHECK(min_degree(at) >= 3);
      CHECK(at.degree() <= 4);
      const auto part = degree_part(p.hstar_hat, 3);
      for (const auto& [idx, h] : part.terms()) {
        const double lambda = std::abs(pairing(p.mu, idx.shift()));
        CHECK(std::abs(at.coefficient(idx) - h * std::exp(-lambda * t)) <= 1e-13);
      }
    }
  }
}

TEST_CASE("closed form satisfies the averaging equation") {
  for (const ModelSpec& s : {avint::testing::cubic_quartic_model(), avint::testing::two_dof_model()}) {
    const AveragingProblem p = prepare_problem(s);
    for (int order : {4, 5}) {
      const EvolvingPolynomial ev = solve_triangular(p.hstar_hat, p.mu, order);
      const ExpPolyPolynomial d = ev.derivative();
      for (double t : {0.0, 0.4, 1.5, 6.0}) {
        const ComplexPolynomial lhs = evaluate_at(d, t);
        const ComplexPolynomial rhs = averaging_rhs(ev(t), p.h2_hat, p.mu, order);
        CHECK(max_difference(lhs, rhs) <= 1e-10);
      }
    }
  }
}

TEST_CASE("explicit coupling sum needs the sigma factor") {
  const AveragingProblem p = prepare_problem(avint::testing::two_dof_model());
  const ComplexPolynomial h = truncate_degree(p.hstar_hat + to_complex(avint::testing::random_homogeneous(2, 4, 3), p.theta), 4);
  const ComplexPolynomial bracket = poisson_bracket(xi(h, p.mu, 4), h);
  double with_sigma = 0.0;
  double without = 0.0;
  for (const auto& [idx, c] : bracket.terms()) {
    with_sigma = std::max(with_sigma, std::abs(coupling_sum(h, idx, p.mu, 6, true) - c));
    without = std::max(without, std::abs(coupling_sum(h, idx, p.mu, 6, false) - c));
  }
  CHECK(with_sigma <= 1e-12);
  CHECK(without > 1e-3);
}

TEST_CASE("normal form examples") {
  SUBCASE("pure cubic has no normal-form correction") {
    const AveragingProblem p = prepare_problem(avint::testing::two_dof_model());
    const NormalForm nf = normal_form_limit(solve_triangular(p.hstar_hat, p.mu, 3), p);
    CHECK(nf.hat_star.is_zero());
  }
  SUBCASE("x^4 gives I + 3/2 I^2") {
    const AveragingProblem p = prepare_problem(avint::testing::quartic_model());
    const NormalForm nf = normal_form_limit(solve_triangular(p.hstar_hat, p.mu, 4), p);
    CHECK(std::abs(invariant_coefficient(nf, {1}) - 1.0) <= 1e-10);
    CHECK(std::abs(invariant_coefficient(nf, {2}) - 1.5) <= 1e-10);
    CHECK(nf.invariants.poly.size() == 2);
    CHECK(nf.invariant_residual <= 1e-12);
    CHECK(nf.reality_residual <= 1e-12);
  }
  SUBCASE("x^3 matches the Birkhoff oracle") {
    ModelSpec s = avint::testing::elliptic_model({1.0});
    s.hstar.add_term(xy({3}, {0}), 1.0);
    s.hstar.canonicalize();
    const AveragingProblem p = prepare_problem(s);
    const NormalForm a = normal_form_limit(solve_triangular(p.hstar_hat, p.mu, 4), p);
    const NormalForm b = birkhoff_oracle(s, 4);
    CHECK(std::abs(invariant_coefficient(a, {2}) - invariant_coefficient(b, {2})) <= 1e-10);
    // The classical value for omega = 1, H_* = x^3: -15/4 I^2.
    CHECK(std::abs(invariant_coefficient(a, {2}) + 15.0 / 4.0) <= 1e-10);
  }
  SUBCASE("normal form only has alpha == beta terms and is real") {
    const AveragingProblem p = prepare_problem(avint::testing::two_dof_model());
    const NormalForm nf = normal_form_limit(solve_triangular(p.hstar_hat, p.mu, 4), p);
    for (const auto& [idx, c] : nf.hat.terms()) CHECK(idx.alpha == idx.beta);
    CHECK(nf.reality_residual <= 1e-12);
    CHECK(nf.invariant_residual <= 1e-12);
    CHECK(max_difference(conj(nf.real), nf.real) == 0.0);
  }
}

TEST_CASE("normal form ignores terms above the working order") {
  ModelSpec s = avint::testing::cubic_quartic_model();
  const AveragingProblem p = prepare_problem(s);
  const NormalForm a = normal_form_limit(solve_triangular(p.hstar_hat, p.mu, 4), p);
  s.hstar.add_term(xy({3}, {2}), 0.8);
  s.hstar.canonicalize();
  const AveragingProblem q = prepare_problem(s);
  const NormalForm b = normal_form_limit(solve_triangular(q.hstar_hat, q.mu, 4), q);
  CHECK(max_difference(a.hat, b.hat) <= 1e-14);
}

TEST_CASE("a non-decaying coefficient is a theory violation") {
  const AveragingProblem p = prepare_problem(avint::testing::quartic_model());
  EvolvingPolynomial ev = solve_triangular(p.hstar_hat, p.mu, 4);
  ev.coeffs.add_term(xy({2}, {2}), ExpPolyFunction::term(1.0, 1, 0.0));
  ev.coeffs.canonicalize();
  CHECK_THROWS_AS(normal_form_limit(ev, p), TheoryViolation);
}

TEST_CASE("resonant frequencies abort") {
  const AveragingProblem p = prepare_problem(avint::testing::resonant_model());
  try {
    solve_triangular(p.hstar_hat, p.mu, 3);
    FAIL("expected a resonance");
  } catch (const ResonanceError& e) {
    CHECK(e.k() == std::vector<int>{2, -1});
    CHECK(std::string(e.what()).find("k=(2,-1)") != std::string::npos);
  }
  CHECK_THROWS_AS(birkhoff_oracle(avint::testing::resonant_model(), 3), ResonanceError);
}

TEST_CASE("generator") {
  const AveragingProblem p = prepare_problem(avint::testing::two_dof_model());
  const EvolvingPolynomial ev = solve_triangular(p.hstar_hat, p.mu, 4);
  CHECK(max_difference(generator_at(ev, p.mu, 4, 0.0), xi(truncate_degree(p.hstar_hat, 4), p.mu, 4)) <= 1e-14);
  const double m = min_decay_rate(p.mu, 4);
  for (double t = 2.0; t <= 10.0; t += 1.0) {
    const double a = coefficient_norm(real_generator_at(ev, p, t));
    const double b = coefficient_norm(real_generator_at(ev, p, t + 1.0));
    CHECK(b / a <= std::exp(-0.9 * m));
    const auto part = generator_at(ev, p.mu, 4, t);
    for (const auto& [idx, c] : part.terms()) CHECK(idx.alpha != idx.beta);
  }
  CHECK_THROWS(generator_at(ev, p.mu, 4, -1.0));

  ModelSpec zero = avint::testing::elliptic_model({1.0, std::sqrt(2.0)});
  const AveragingProblem z = prepare_problem(zero);
  CHECK(real_generator_at(solve_triangular(z.hstar_hat, z.mu, 4), z, 1.0).is_zero());
}
