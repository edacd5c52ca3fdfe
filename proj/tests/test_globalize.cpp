#include <doctest.h>

#include "avint/globalize.hpp"
#include "avint/verify.hpp"
#include "test_models.hpp"

using namespace avint;
using avint::testing::xy;

namespace {

struct Built {
  AveragingProblem problem;
  EvolvingPolynomial ev;
  FlowConfig cfg;
};

Built build(const ModelSpec& s, int order) {
  Built b{prepare_problem(s), {}, {}};
  b.ev = solve_triangular(b.problem.hstar_hat, b.problem.mu, order);
  b.cfg = default_flow_config(min_decay_rate(b.problem.mu, order));
  return b;
}

double max_gap(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

}  // namespace

TEST_CASE("mollifier examples") {
  const ComplexPolynomial x3 = ComplexPolynomial::monomial(xy({3}, {0}), 1.0);
  CHECK(mollify(x3, 4) == x3);

  const ComplexPolynomial x2 = ComplexPolynomial::monomial(xy({2}, {0}), 1.0);
  ComplexPolynomial expect(1);
  expect.add_term(xy({2}, {0}), 1.0);
  expect.add_term(xy({4}, {0}), 1.0);
  expect.add_term(xy({2}, {2}), 1.0);
  expect.canonicalize();
  CHECK(max_difference(mollify(x2, 4), expect) <= 1e-15);
  CHECK(mollify(ComplexPolynomial(1), 4).is_zero());
  CHECK(mollifier_defect_degree(mollify(x2, 4), x2, 4) >= 5);
  CHECK(mollifier_defect_degree(x2, x2, 4) == 4);

  const ComplexPolynomial g = gaussian_taylor(2, 4, -1.0);
  CHECK(g.coefficient(BiIndex::zero(2)) == Complex(1.0));
  CHECK(g.coefficient(xy({2, 0}, {0, 0})) == Complex(-1.0));
  CHECK(g.coefficient(xy({2, 0}, {0, 2})) == Complex(1.0));
  CHECK(g.coefficient(xy({4, 0}, {0, 0})) == Complex(0.5));
}

TEST_CASE("mollified generator agrees with K to order M") {
  for (const ModelSpec& s : {avint::testing::cubic_quartic_model(), avint::testing::two_dof_model()}) {
    for (int order : {4, 5}) {
      const Built b = build(s, order);
      const GeneratorField l = make_mollified_generator(b.ev, b.problem);
      CHECK(l.gaussian());
      CHECK(l.discarded_imaginary() <= 1e-12);
      for (double t : {0.0, 0.5, 3.0}) {
        const ComplexPolynomial k = real_generator_at(b.ev, b.problem, t);
        CHECK(mollifier_defect_degree(l.polynomial_at(t), k, order) >= order + 1);
      }
    }
  }
}

TEST_CASE("generator field matches direct polynomial evaluation") {
  const Built b = build(avint::testing::two_dof_model(), 4);
  const GeneratorField raw = make_raw_generator(b.ev, b.problem);
  const GeneratorField l = make_mollified_generator(b.ev, b.problem);
  const std::vector<double> p = {0.3, -0.2, 0.5, 0.1};
  for (double t : {0.0, 1.0, 4.0}) {
    const ComplexPolynomial k = real_generator_at(b.ev, b.problem, t);
    CHECK(std::abs(raw.value(p, t) - evaluate_real(k, p)) <= 1e-13);
    const auto field = hamiltonian_vector_field(k, p);
    std::vector<double> coeffs;
    raw.coefficients_at(t, coeffs);
    std::vector<double> out(4);
    raw.field(coeffs, p, out);
    CHECK(max_gap(out, field) <= 1e-13);

    double r2 = 0.0;
    for (double v : p) r2 += v * v;
    CHECK(std::abs(l.value(p, t) - evaluate_real(l.polynomial_at(t), p) * std::exp(-r2)) <= 1e-13);
    std::vector<double> grad(4);
    l.gradient(p, t, grad);
    for (std::size_t i = 0; i < 4; ++i) {
      std::vector<double> up = p, down = p;
      up[i] += 1e-6;
      down[i] -= 1e-6;
      CHECK(std::abs(grad[i] - (l.value(up, t) - l.value(down, t)) / 2e-6) <= 1e-8);
    }
  }
}

TEST_CASE("generator Hessian matches differences of the gradient") {
  const Built b = build(avint::testing::two_dof_model(), 4);
  for (const GeneratorField& g : {make_raw_generator(b.ev, b.problem), make_mollified_generator(b.ev, b.problem)}) {
    const std::vector<double> p = {0.3, -0.2, 0.5, 0.1};
    std::vector<double> coeffs;
    g.coefficients_at(0.7, coeffs);
    std::vector<double> grad(4), hess(16), expect(4);
    g.hessian(coeffs, p, grad, hess);
    g.gradient(p, 0.7, expect);
    CHECK(max_gap(grad, expect) <= 1e-14);
    for (std::size_t j = 0; j < 4; ++j) {
      std::vector<double> up = p, down = p, gu(4), gd(4);
      up[j] += 1e-6;
      down[j] -= 1e-6;
      g.gradient(up, 0.7, gu);
      g.gradient(down, 0.7, gd);
      for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(hess[i * 4 + j] - (gu[i] - gd[i]) / 2e-6) <= 1e-8);
        CHECK(hess[i * 4 + j] == hess[j * 4 + i]);
      }
    }
  }
}

TEST_CASE("tangent flow agrees with the difference Jacobian") {
  const Built b = build(avint::testing::two_dof_model(), 4);
  const GeneratorField l = make_mollified_generator(b.ev, b.problem);
  const Eigen::MatrixXd j = structure_matrix(2);
  for (const auto& p : random_ball_points(4, 3, 1.0, 9)) {
    const TangentImage t = flow_tangent(p, l, b.cfg);
    CHECK(max_gap(t.point, flow_forward(p, l, b.cfg)) <= 1e-10);
    CHECK((t.jacobian - flow_jacobian(p, l, b.cfg)).cwiseAbs().maxCoeff() <= 1e-5);
    CHECK((t.jacobian.transpose() * j * t.jacobian - j).cwiseAbs().maxCoeff() <= 1e-9);
  }
  const TangentImage origin = flow_tangent(std::vector<double>(4, 0.0), l, b.cfg);
  CHECK((origin.jacobian - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("flow basics") {
  const Built b = build(avint::testing::cubic_quartic_model(), 4);
  const GeneratorField l = make_mollified_generator(b.ev, b.problem);
  const std::vector<double> origin = {0.0, 0.0};
  CHECK(max_gap(flow_forward(origin, l, b.cfg), origin) == 0.0);

  const std::vector<double> p = {0.3, 0.1};
  CHECK(max_gap(flow_forward(p, GeneratorField::zero(1), b.cfg), p) == 0.0);
  CHECK(max_gap(flow_backward(flow_forward(p, l, b.cfg), l, b.cfg), p) <= 1e-9);
  // Psi is near the identity at small scales.
  CHECK(max_gap(flow_forward(p, l, b.cfg), p) > 1e-4);

  FlowConfig bad = b.cfg;
  bad.max_steps = 2;
  CHECK_THROWS_AS(flow_forward(p, l, bad), FlowError);
  CHECK_THROWS_AS(flow_forward(std::vector<double>{1.0}, l, b.cfg), DimensionMismatch);
  CHECK_THROWS_AS(flow_forward(std::vector<double>{NAN, 0.0}, l, b.cfg), FlowError);
}

TEST_CASE("default flow horizon") {
  const FlowConfig a = default_flow_config(0.5);
  CHECK(a.delta_max == doctest::Approx(60.0));
  CHECK_FALSE(a.capped);
  const FlowConfig c = default_flow_config(1e-6);
  CHECK(c.delta_max == 1e4);
  CHECK(c.capped);
}

TEST_CASE("flow is symplectic and globally defined") {
  const Built b = build(avint::testing::two_dof_model(), 4);
  const GeneratorField l = make_mollified_generator(b.ev, b.problem);
  const Eigen::MatrixXd j = structure_matrix(2);
  for (const auto& p : random_ball_points(4, 3, 1.0, 5)) {
    const Eigen::MatrixXd a = flow_jacobian(p, l, b.cfg);
    CHECK((a.transpose() * j * a - j).cwiseAbs().maxCoeff() <= 1e-5);
  }
  // Far from the origin L is tiny, so points barely move.
  for (auto p : random_unit_directions(4, 3, 6)) {
    for (auto& v : p) v *= 10.0;
    const auto q = flow_forward(p, l, b.cfg);
    CHECK(max_gap(q, p) <= 1e-10);
    for (double t : {0.0, 1.0}) CHECK(std::abs(l.value(p, t)) <= 1e-30);
  }
}

TEST_CASE("raw generator flow pulls the averaged Hamiltonian back to H") {
  const Built b = build(avint::testing::two_dof_model(), 4);
  const GeneratorField raw = make_raw_generator(b.ev, b.problem);
  const ComplexPolynomial h = build_hamiltonian(b.problem.spec);
  for (double t : {0.5, 2.0}) {
    const ComplexPolynomial ht = b.problem.h2 + real_part(to_real(b.ev(t), b.problem.theta));
    for (const auto& p : random_ball_points(4, 4, 0.05, 3)) {
      const auto q = flow_batch({p}, raw, b.cfg, 0.0, t).front();
      CHECK(std::abs(evaluate_real(ht, q) - evaluate_real(h, p)) <= 1e-6);
    }
  }
}

TEST_CASE("integrable Hamiltonian with trivial generator") {
  const Built b = build(avint::testing::cubic_quartic_model(), 4);
  const NormalForm nf = normal_form_limit(b.ev, b.problem);
  const IntegrableSystem trivial(b.problem, nf, GeneratorField::zero(1), b.cfg);
  const std::vector<double> p = {0.4, -0.3};
  CHECK(eval_integrable_H(p, trivial) == doctest::Approx(evaluate_real(nf.real, p)));
  CHECK(eval_integrable_H(std::vector<double>{0.0, 0.0}, trivial) == 0.0);

  NormalForm same = nf;
  same.real = build_hamiltonian(b.problem.spec);
  const IntegrableSystem identity(b.problem, same, GeneratorField::zero(1), b.cfg);
  for (const auto& q : random_ball_points(2, 5, 1.0, 2)) CHECK(std::abs(eval_F(q, identity)) <= 1e-15);

  const auto q1 = first_integrals(std::vector<double>{1.0, 0.0}, trivial);
  REQUIRE(q1.size() == 1);
  CHECK(q1[0] == doctest::Approx(1.0));
}

TEST_CASE("integrable Hamiltonian for the two-degree model") {
  const Built b = build(avint::testing::two_dof_model(), 4);
  const IntegrableSystem sys = build_integrable_system(b.problem, b.ev, b.cfg);
  CHECK(std::abs(eval_F(std::vector<double>(4, 0.0), sys)) <= 1e-15);
  const std::vector<double> p = {0.1, 0.2, -0.1, 0.05};
  CHECK(first_integrals(p, sys).size() == 2);
  // Integrals are conserved by construction: the gradients of G and Q o Psi commute.
  const auto g = sys.gradients(p);
  for (const auto& gq : g.integrals) {
    double s = 0.0;
    for (std::size_t j = 0; j < 2; ++j) s += g.value[2 + j] * gq[j] - g.value[j] * gq[2 + j];
    CHECK(std::abs(s) <= 1e-7);
  }
}

TEST_CASE("concurrent flows agree with serial ones") {
  const Built b = build(avint::testing::two_dof_model(), 4);
  const IntegrableSystem sys = build_integrable_system(b.problem, b.ev, b.cfg);
  const auto pts = random_ball_points(4, 8, 0.5, 9);
  std::vector<double> serial, parallel(pts.size());
  for (const auto& p : pts) serial.push_back(sys.value(p));
  parallel_for(pts.size(), [&](std::size_t i) { parallel[i] = sys.value(pts[i]); });
  CHECK(serial == parallel);
}
