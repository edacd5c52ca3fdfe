#include <doctest.h>

#include <set>

#include "avint/verify.hpp"
#include "test_models.hpp"

using namespace avint;
using avint::testing::xy;

TEST_CASE("Birkhoff oracle examples") {
  const NormalForm q = birkhoff_oracle(avint::testing::quartic_model(), 4);
  CHECK(std::abs(q.invariants.poly.coefficient(xy({1}, {0})) - 1.0) <= 1e-12);
  CHECK(std::abs(q.invariants.poly.coefficient(xy({2}, {0})) - 1.5) <= 1e-12);
  CHECK(birkhoff_oracle(avint::testing::two_dof_model(), 3).hat_star.is_zero());
}

TEST_CASE("coefficient ODE oracle") {
  const AveragingProblem p = prepare_problem(avint::testing::two_dof_model());
  const std::vector<double> grid = {0.0, 0.5, 2.0};
  const auto sol = ode_coefficient_oracle(p.hstar_hat, p.mu, 3, grid);
  CHECK(sol[0] == truncate_degree(p.hstar_hat, 3));
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (const auto& [idx, h] : p.hstar_hat.terms()) {
      const double lambda = std::abs(pairing(p.mu, idx.shift()));
      CHECK(std::abs(sol[i].coefficient(idx) - h * std::exp(-lambda * grid[i])) <= 1e-11);
    }
  const std::vector<double> bad = {1.0, 0.5};
  CHECK_THROWS(ode_coefficient_oracle(p.hstar_hat, p.mu, 3, bad));
}

TEST_CASE("vanishing-order stubs") {
  VanishingOrderOptions opt;
  const auto quintic = vanishing_order_test([](std::span<const double> p) { return std::pow(p[0], 5); }, 2, opt);
  CHECK(quintic.skipped == 0);
  CHECK(std::abs(quintic.min_slope - 5.0) <= 0.01);
  CHECK(std::abs(quintic.max_slope - 5.0) <= 0.01);
  CHECK(quintic.epsilons.size() >= 8);
  CHECK(quintic.epsilons.front() == doctest::Approx(1e-3));
  CHECK(quintic.epsilons.back() == doctest::Approx(1e-1));

  const auto zero = vanishing_order_test([](std::span<const double>) { return 0.0; }, 2, opt);
  CHECK(zero.identically_small);
  CHECK(zero.skipped == opt.directions);

  // x^5 along a direction with u_x = 0 is identically zero: skipped, reported.
  const auto partial = vanishing_order_test(
      [](std::span<const double> p) { return std::abs(p[0]) < 1e-300 ? 0.0 : std::pow(p[0], 5); }, 1, opt);
  CHECK_FALSE(partial.identically_small);
}

TEST_CASE("seeded samples are reproducible") {
  CHECK(random_unit_directions(4, 5, 3) == random_unit_directions(4, 5, 3));
  CHECK(random_unit_directions(4, 5, 3) != random_unit_directions(4, 5, 4));
  for (const auto& p : random_ball_points(4, 20, 1.0, 2)) {
    double r = 0.0;
    for (double v : p) r += v * v;
    CHECK(r <= 1.0);
  }
}

TEST_CASE("quadratic integrals are in involution") {
  ModelSpec s;
  s.n1 = 1;
  s.n2 = 3;
  s.n = 4;
  s.focus = {{0.3, 1.0}};
  s.omega = {1.7};
  s.lambda = {0.6};
  s.hstar = ComplexPolynomial(4);
  const auto q = invariant_quadratics(s.layout());
  for (std::size_t a = 0; a < q.size(); ++a)
    for (std::size_t b = 0; b < q.size(); ++b) CHECK(poisson_bracket(q[a], q[b]).is_zero());
}

TEST_CASE("trivial generator: harmonic oscillator conserves x^2 + y^2") {
  const AveragingProblem p = prepare_problem(avint::testing::elliptic_model({1.0}));
  NormalForm nf;
  nf.real = p.h2;
  const IntegrableSystem sys(p, nf, GeneratorField::zero(1), FlowConfig{});
  ConservationOptions opt;
  opt.T = 10.0;
  opt.dt = 0.25;
  const auto res = conservation_test(sys, std::vector<double>{0.3, 0.0}, opt);
  CHECK(res.states.size() == 41);
  CHECK(res.integral_drift[0] <= 1e-9);
  CHECK(res.energy_drift <= 1e-9);
  // x(t) = 0.3 cos t
  CHECK(std::abs(res.states.back()[0] - 0.3 * std::cos(10.0)) <= 1e-7);
  CHECK(involution_test(sys, {{0.1, 0.2}}).max_residual == 0.0);

  ConservationOptions tiny = opt;
  tiny.escape_radius = 0.1;
  const auto esc = conservation_test(sys, std::vector<double>{0.3, 0.0}, tiny);
  CHECK(esc.truncated);
}

TEST_CASE("row count is floor(T / dt) + 1") {
  ModelSpec s = avint::testing::elliptic_model({1.0});
  const AveragingProblem p = prepare_problem(s);
  NormalForm nf;
  nf.real = p.h2;
  const IntegrableSystem sys(p, nf, GeneratorField::zero(1), FlowConfig{});
  ConservationOptions opt;
  opt.T = 1.0;
  opt.dt = 0.3;
  CHECK(conservation_test(sys, std::vector<double>{0.2, 0.1}, opt).times.size() == 4);
  opt.T = 0.0;
  CHECK(conservation_test(sys, std::vector<double>{0.2, 0.1}, opt).times.size() == 1);
}

TEST_CASE("worker cap from the environment") {
  setenv("AVINT_THREADS", "3", 1);
  CHECK(worker_count() == 3);
  setenv("AVINT_THREADS", "junk", 1);
  CHECK(worker_count() >= 1);
  unsetenv("AVINT_THREADS");
  std::vector<int> hit(50, 0);
  parallel_for(hit.size(), [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) CHECK(h == 1);
  CHECK_THROWS(parallel_for(4, [](std::size_t i) {
    if (i == 2) throw std::runtime_error("boom");
  }));
}

TEST_CASE("full verification of the one-degree model") {
  VerifyOptions opt;
  opt.conservation.T = 20.0;
  const VerificationReport rep = run_verification(avint::testing::quartic_model(), 4, opt);
  for (const auto& c : rep.checks) {
    INFO(c.name << ": residual " << c.residual << " tol " << c.tolerance << " " << c.detail);
    CHECK(c.passed);
  }
  std::set<std::string> names;
  for (const auto& c : rep.checks) names.insert(c.name);
  CHECK(names.size() == rep.checks.size());
  CHECK(rep.find("involution") == nullptr);
  CHECK(rep.find("vanishing_order") != nullptr);
}
