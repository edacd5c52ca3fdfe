#include <doctest.h>

#include <random>

#include "avint/polynomial.hpp"
#include "test_models.hpp"

using namespace avint;
using avint::testing::xy;

namespace {

ComplexPolynomial random_poly(std::size_t n, int max_degree, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexPolynomial p(n);
  for (int d = 0; d <= max_degree; ++d) {
    const ComplexPolynomial h = avint::testing::random_homogeneous(n, d, seed * 31 + static_cast<std::uint64_t>(d));
    for (const auto& [idx, c] : h.terms()) p.add_term(idx, Complex(c.real(), u(rng)));
  }
  p.canonicalize();
  return p;
}

ComplexPolynomial z(std::size_t n, std::size_t j) { return ComplexPolynomial::variable(n, j, 1.0); }
ComplexPolynomial w(std::size_t n, std::size_t j) { return ComplexPolynomial::variable(n, n + j, 1.0); }

}  // namespace

TEST_CASE("ring operations") {
  const ComplexPolynomial x1 = z(1, 0);
  const ComplexPolynomial y1 = w(1, 0);
  const ComplexPolynomial prod = x1 * y1;
  CHECK(prod.size() == 1);
  CHECK(prod.coefficient(xy({1}, {1})) == Complex(1.0));

  const ComplexPolynomial p = random_poly(2, 3, 5);
  CHECK((p + p * Complex(-1.0)).is_zero());
  CHECK((p - p).is_zero());

  const ComplexPolynomial s = (x1 + y1) * (x1 + y1);
  CHECK(s.size() == 3);
  CHECK(s.coefficient(xy({2}, {0})) == Complex(1.0));
  CHECK(s.coefficient(xy({1}, {1})) == Complex(2.0));
  CHECK(s.coefficient(xy({0}, {2})) == Complex(1.0));

  CHECK_THROWS_AS(z(1, 0) + z(2, 0), DimensionMismatch);
  CHECK_THROWS_AS(z(1, 0) * z(2, 0), DimensionMismatch);
}

TEST_CASE("canonical zero drops relative dust") {
  ComplexPolynomial p(1);
  p.add_term(xy({3}, {0}), 1.0);
  p.add_term(xy({4}, {0}), 1e-17);
  p.canonicalize();
  CHECK(p.size() == 1);
  ComplexPolynomial tiny(1);
  tiny.add_term(xy({3}, {0}), 1e-30);
  tiny.canonicalize();
  CHECK(tiny.size() == 1);
}

TEST_CASE("graded lexicographic order") {
  ComplexPolynomial p(1);
  p.add_term(xy({0}, {5}), 1.0);
  p.add_term(xy({2}, {1}), 1.0);
  p.add_term(xy({1}, {2}), 1.0);
  p.canonicalize();
  std::vector<BiIndex> order;
  for (const auto& [idx, c] : p.terms()) order.push_back(idx);
  REQUIRE(order.size() == 3);
  CHECK(order[0].degree() == 3);
  CHECK(order[2].degree() == 5);
  CHECK(order[0].alpha[0] < order[1].alpha[0]);
}

TEST_CASE("poisson bracket convention") {
  const std::size_t n = 1;
  CHECK(poisson_bracket(z(n, 0), w(n, 0)) == ComplexPolynomial::constant(1, -1.0));
  CHECK(poisson_bracket(w(n, 0), z(n, 0)) == ComplexPolynomial::constant(1, 1.0));

  // {z^3, mu z w} = <mu, b - a> z^3 = 3i z^3 for mu = -i.
  const Complex mu(0.0, -1.0);
  const ComplexPolynomial h2 = ComplexPolynomial::monomial(xy({1}, {1}), mu);
  const ComplexPolynomial r = poisson_bracket(ComplexPolynomial::monomial(xy({3}, {0}), 1.0), h2);
  CHECK(r.size() == 1);
  CHECK(std::abs(r.coefficient(xy({3}, {0})) - Complex(0.0, 3.0)) < 1e-15);

  const ComplexPolynomial f = random_poly(2, 4, 3);
  CHECK(max_difference(poisson_bracket(f, f), ComplexPolynomial(2)) <= 1e-14);
}

TEST_CASE("bracket against the diagonal quadratic through degree 6") {
  const std::vector<Complex> mu = {Complex(0.3, -1.0), Complex(-0.2, 0.7)};
  const std::size_t n = 2;
  ComplexPolynomial h2(n);
  for (std::size_t j = 0; j < n; ++j) {
    BiIndex idx = BiIndex::zero(n);
    idx.alpha[j] = idx.beta[j] = 1;
    h2.add_term(idx, mu[j]);
  }
  h2.canonicalize();
  double worst = 0.0;
  for (int d = 0; d <= 6; ++d) {
    const auto part = avint::testing::random_homogeneous(n, d, 1);
    for (const auto& [idx, c] : part.terms()) {
      const ComplexPolynomial m = ComplexPolynomial::monomial(idx, 1.0);
      const auto k = idx.shift();
      const Complex pk = double(k[0]) * mu[0] + double(k[1]) * mu[1];
      worst = std::max(worst, max_difference(poisson_bracket(m, h2), m * pk));
    }
  }
  CHECK(worst <= 1e-14);
}

TEST_CASE("bracket bilinearity, Leibniz and Jacobi") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const std::size_t n = seed % 2 ? 1 : 2;
    const ComplexPolynomial f = random_poly(n, 4, seed);
    const ComplexPolynomial g = random_poly(n, 4, seed + 10);
    const ComplexPolynomial h = random_poly(n, 4, seed + 20);
    const Complex a(0.3, -1.1);
    CHECK(max_difference(poisson_bracket(f * a + g, h), poisson_bracket(f, h) * a + poisson_bracket(g, h)) <= 1e-12);
    CHECK(max_difference(poisson_bracket(f, g), -poisson_bracket(g, f)) <= 1e-12);
    CHECK(max_difference(poisson_bracket(f, g * h), poisson_bracket(f, g) * h + g * poisson_bracket(f, h)) <= 1e-12);
    const ComplexPolynomial jac = poisson_bracket(f, poisson_bracket(g, h)) + poisson_bracket(g, poisson_bracket(h, f)) +
                                  poisson_bracket(h, poisson_bracket(f, g));
    CHECK(max_norm(jac) <= 1e-12);
  }
}

TEST_CASE("bracket restricted to one degree") {
  const ComplexPolynomial f = random_poly(2, 4, 8);
  const ComplexPolynomial g = random_poly(2, 4, 9);
  const ComplexPolynomial full = poisson_bracket(f, g);
  CHECK(max_difference(poisson_bracket(f, g, 3), degree_part(full, 3)) <= 1e-14);
}

TEST_CASE("truncation and min degree") {
  ComplexPolynomial p(1);
  p.add_term(xy({3}, {0}), 1.0);
  p.add_term(xy({5}, {0}), 1.0);
  p.canonicalize();
  const ComplexPolynomial t = truncate_degree(p, 4);
  CHECK(t.size() == 1);
  CHECK(t.coefficient(xy({3}, {0})) == Complex(1.0));
  CHECK(truncate_degree(t, 4) == t);
  CHECK(truncate_degree(ComplexPolynomial(1), 4).is_zero());

  ComplexPolynomial q(1);
  q.add_term(xy({2}, {1}), 1.0);
  q.add_term(xy({5}, {0}), 1.0);
  q.canonicalize();
  CHECK(min_degree(q) == 3);
  CHECK(min_degree(ComplexPolynomial(1)) == kInfiniteDegree);
  CHECK(min_degree(ComplexPolynomial::constant(1, 1.0)) == 0);
  CHECK(ComplexPolynomial(1).degree() == -1);

  const ComplexPolynomial a = random_poly(2, 5, 1);
  const ComplexPolynomial b = random_poly(2, 5, 2);
  for (int m = 0; m <= 6; ++m) {
    CHECK(truncate_degree(truncate_degree(a, m), m) == truncate_degree(a, m));
    CHECK(max_difference(truncate_degree(a * b, m), truncate_degree(truncate_degree(a, m) * truncate_degree(b, m), m)) <=
          1e-13);
  }
}

TEST_CASE("linear substitution") {
  const ComplexPolynomial x2 = ComplexPolynomial::monomial(xy({2}, {0}), 1.0);
  CHECK(substitute_linear(x2, LinearMap2n::identity(1)) == x2);

  Eigen::MatrixXcd swap(2, 2);
  swap << 0, 1, 1, 0;
  const ComplexPolynomial img = substitute_linear(z(1, 0), LinearMap2n(swap));
  CHECK(img == w(1, 0));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXcd a(4, 4), b(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      a(i, j) = Complex(u(rng), u(rng));
      b(i, j) = Complex(u(rng), u(rng));
    }
  const ComplexPolynomial p = random_poly(2, 4, 6);
  const LinearMap2n A(a), B(b);
  // (p o A) o B = p o (A B)
  CHECK(max_difference(substitute_linear(substitute_linear(p, A), B), substitute_linear(p, A * B)) <= 1e-12);
  CHECK(substitute_linear(p, A).degree() == p.degree());
  CHECK(LinearMap2n::identity(2).symplectic_residual() == 0.0);
}

TEST_CASE("evaluation and vector field") {
  const ComplexPolynomial xy1 = ComplexPolynomial::monomial(xy({1}, {1}), 1.0);
  CHECK(evaluate_real(xy1, std::vector<double>{2.0, 3.0}) == doctest::Approx(6.0));
  const ComplexPolynomial p = random_poly(2, 3, 9);
  CHECK(evaluate(p, std::vector<Complex>(4, 0.0)) == p.coefficient(BiIndex::zero(2)));

  ComplexPolynomial osc(1);
  osc.add_term(xy({2}, {0}), 0.5);
  osc.add_term(xy({0}, {2}), 0.5);
  osc.canonicalize();
  CHECK(evaluate_real(osc, std::vector<double>{1.0, 1.0}) == doctest::Approx(1.0));
  const auto v = hamiltonian_vector_field(osc, std::vector<double>{1.0, 0.0});
  CHECK(v[0] == doctest::Approx(0.0));
  CHECK(v[1] == doctest::Approx(-1.0));

  const double lambda = 2.5;
  const auto h = hamiltonian_vector_field(ComplexPolynomial::monomial(xy({1}, {1}), lambda), std::vector<double>{1, 1});
  CHECK(h[0] == doctest::Approx(lambda));
  CHECK(h[1] == doctest::Approx(-lambda));
  const auto c = hamiltonian_vector_field(ComplexPolynomial::constant(1, 3.0), std::vector<double>{0.4, 0.2});
  CHECK(c[0] == 0.0);
  CHECK(c[1] == 0.0);
}
