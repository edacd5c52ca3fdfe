#pragma once

// Global realisation of the normalising change of variables.
//
// The generator K(x, y, delta) is replaced by L = P e^{-(x^2+y^2)}, where P is
// the degree <= M Taylor part of K e^{x^2+y^2}. L agrees with K to order M at
// the origin, is bounded on all of R^2n and decays exponentially in delta,
// so its delta-flow from 0 to delta_max defines a global symplectic map Psi.
// Everything here is evaluated pointwise by numerical integration.

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "avint/averaging.hpp"
#include "avint/exp_poly.hpp"
#include "avint/polynomial.hpp"

namespace avint {

// sum_{k <= max_degree/2} (sign * r^2)^k / k!,  r^2 = sum_j (x_j^2 + y_j^2).
ComplexPolynomial gaussian_taylor(std::size_t n, int max_degree, double sign);

template <class C>
SparsePolynomial<C> mollify(const SparsePolynomial<C>& k, int order) {
  if (k.is_zero()) return SparsePolynomial<C>(k.dim());
  const int lowest = min_degree(k);
  const ComplexPolynomial g = gaussian_taylor(k.dim(), std::max(order - lowest, 0), +1.0);
  if constexpr (std::is_same_v<C, Complex>) {
    return truncate_degree(k * g, order);
  } else {
    return truncate_degree(k * lift_constant(g), order);
  }
}

// Lowest degree surviving in the degree <= order expansion of
// P e^{-(x^2+y^2)} - K; kInfiniteDegree if nothing survives. Coefficients
// within rel_tol of the largest coefficient of K count as cancelled.
int mollifier_defect_degree(const ComplexPolynomial& p, const ComplexPolynomial& k, int order,
                            double rel_tol = 1e-12);

// Time-dependent Hamiltonian  H(v, delta) = sum_m c_m(delta) v^m * g(v),
// g = e^{-|v|^2} when `gaussian`, else 1. Coefficients are exp-polynomials in
// delta; only their real parts are used.
class GeneratorField {
 public:
  GeneratorField() = default;
  GeneratorField(const ExpPolyPolynomial& poly, bool gaussian);
  static GeneratorField zero(std::size_t n);

  std::size_t dim() const noexcept { return n_; }
  bool gaussian() const noexcept { return gaussian_; }
  std::size_t monomial_count() const noexcept { return exponents_.size(); }
  // Largest |Im| over all exp-polynomial coefficients that was discarded.
  double discarded_imaginary() const noexcept { return discarded_imag_; }
  // Smallest positive decay rate among the coefficients (+inf if none).
  double slowest_rate() const noexcept { return slowest_rate_; }

  void coefficients_at(double delta, std::vector<double>& out) const;
  double value(std::span<const double> point, double delta) const;
  void gradient(std::span<const double> point, double delta, std::span<double> grad) const;
  // (dH/dy, -dH/dx) with the coefficients already evaluated at some delta.
  void field(const std::vector<double>& coeffs, std::span<const double> point, std::span<double> out) const;
  // Gradient and row-major Hessian with the coefficients already evaluated.
  void hessian(const std::vector<double>& coeffs, std::span<const double> point, std::span<double> grad,
               std::span<double> hess) const;
  // The polynomial factor (P for a mollified generator) at delta.
  ComplexPolynomial polynomial_at(double delta) const;

 private:
  void gradient_with(const std::vector<double>& coeffs, std::span<const double> point, std::span<double> grad,
                     double* value) const;

  struct Term {
    std::size_t monomial;
    std::size_t rate;
    int s;
    double c;
  };
  std::size_t n_ = 0;
  bool gaussian_ = false;
  int max_degree_ = 0;
  int max_s_ = 0;
  std::vector<std::vector<int>> exponents_;
  std::vector<double> rates_;
  std::vector<Term> terms_;
  double discarded_imag_ = 0.0;
  double slowest_rate_ = 0.0;
};

// L = mollify(K) e^{-r^2} with K = to_real(xi H_*(delta)).
GeneratorField make_mollified_generator(const EvolvingPolynomial& ev, const AveragingProblem& problem);
// K itself (no mollification), for local checks.
GeneratorField make_raw_generator(const EvolvingPolynomial& ev, const AveragingProblem& problem);

struct FlowConfig {
  double delta_max = 30.0;
  double rtol = 1e-11;
  double atol = 1e-13;
  double initial_step = 1e-2;
  // Largest step the controller may take. The embedded error estimate of the
  // 7(8) pair misses the e^{rate delta} growth across long backward steps.
  double max_step = 1.0;
  // Finite-difference step is jacobian_step * (1 + |point|).
  double jacobian_step = 1e-5;
  std::size_t max_steps = 1'000'000;
  // Set when delta_max hit its upper cap.
  bool capped = false;
};

// delta_max = 30 / (slowest decay rate), capped at 1e4; max_step is a quarter
// e-folding of the slowest rate, within [0.025, 2.5].
FlowConfig default_flow_config(double min_rate);

// Psi: integrate the field of `gen` from 0 to delta_max. Batched variants
// integrate all points together on a shared step sequence.
std::vector<double> flow_forward(std::span<const double> point, const GeneratorField& gen, const FlowConfig& cfg);
std::vector<double> flow_backward(std::span<const double> point, const GeneratorField& gen, const FlowConfig& cfg);
std::vector<std::vector<double>> flow_forward_batch(const std::vector<std::vector<double>>& points,
                                                    const GeneratorField& gen, const FlowConfig& cfg);
// Integrate from delta_from to delta_to (either direction).
std::vector<std::vector<double>> flow_batch(const std::vector<std::vector<double>>& points, const GeneratorField& gen,
                                            const FlowConfig& cfg, double delta_from, double delta_to);

// Central finite-difference Jacobian of Psi.
Eigen::MatrixXd flow_jacobian(std::span<const double> point, const GeneratorField& gen, const FlowConfig& cfg);

struct TangentImage {
  std::vector<double> point;
  Eigen::MatrixXd jacobian;
};
// Psi(point) and D Psi(point) from the variational equation, integrated
// together under the same error control.
TangentImage flow_tangent(std::span<const double> point, const GeneratorField& gen, const FlowConfig& cfg);

// X_k^2 + Y_k^2 (elliptic), X_l Y_l (hyperbolic), and the two focus
// quadratics Y_p X_p + Y_q X_q, Y_p X_q - Y_q X_p, in block order.
std::vector<double> quadratic_integrals(const BlockLayout& layout, std::span<const double> point);

// The integrable Hamiltonian G = N o Psi together with its first integrals
// Q o Psi. G - H vanishes to order M + 1 at the origin.
class IntegrableSystem {
 public:
  IntegrableSystem(AveragingProblem problem, NormalForm normal_form, GeneratorField generator, FlowConfig cfg);

  const AveragingProblem& problem() const noexcept { return problem_; }
  const NormalForm& normal_form() const noexcept { return normal_form_; }
  const GeneratorField& generator() const noexcept { return generator_; }
  const FlowConfig& config() const noexcept { return cfg_; }
  std::size_t dim() const noexcept { return generator_.dim(); }

  std::vector<double> normalize(std::span<const double> point) const;
  double value(std::span<const double> point) const;
  // G - (H2 + H_*)
  double perturbation(std::span<const double> point) const;
  std::vector<double> first_integrals(std::span<const double> point) const;

  // Gradients of G and of each first integral: D Psi^T applied to the
  // gradients of N and Q at Psi(point).
  struct Gradients {
    std::vector<double> value;
    std::vector<std::vector<double>> integrals;
  };
  Gradients gradients(std::span<const double> point) const;

 private:
  AveragingProblem problem_;
  NormalForm normal_form_;
  GeneratorField generator_;
  FlowConfig cfg_;
  ComplexPolynomial hamiltonian_;
};

double eval_integrable_H(std::span<const double> point, const IntegrableSystem& system);
double eval_F(std::span<const double> point, const IntegrableSystem& system);
std::vector<double> first_integrals(std::span<const double> point, const IntegrableSystem& system);

// End-to-end construction from a model at working order M.
IntegrableSystem build_integrable_system(const ModelSpec& spec, int order);
IntegrableSystem build_integrable_system(const AveragingProblem& problem, const EvolvingPolynomial& ev,
                                         const FlowConfig& cfg);

}  // namespace avint
