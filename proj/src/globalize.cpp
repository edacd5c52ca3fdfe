#include "avint/globalize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>

namespace avint {

ComplexPolynomial gaussian_taylor(std::size_t n, int max_degree, double sign) {
  ComplexPolynomial r2(n);
  for (std::size_t j = 0; j < 2 * n; ++j) {
    BiIndex idx = BiIndex::zero(n);
    idx.exponent(j) = 2;
    r2.add_term(idx, sign);
  }
  r2.canonicalize();
  ComplexPolynomial sum = ComplexPolynomial::constant(n, 1.0);
  ComplexPolynomial power = sum;
  for (int k = 1; 2 * k <= max_degree; ++k) {
    power = power * r2 * Complex(1.0 / k);
    sum += power;
  }
  return sum;
}

int mollifier_defect_degree(const ComplexPolynomial& p, const ComplexPolynomial& k, int order, double rel_tol) {
  const ComplexPolynomial back = truncate_degree(p * gaussian_taylor(p.dim(), order, -1.0), order);
  double scale = 0.0;
  for (const auto& [idx, c] : k.terms()) scale = std::max(scale, std::abs(c));
  const ComplexPolynomial defect = back - truncate_degree(k, order);
  int lowest = kInfiniteDegree;
  for (const auto& [idx, c] : defect.terms())
    if (std::abs(c) > rel_tol * scale) lowest = std::min(lowest, idx.degree());
  return lowest;
}

GeneratorField::GeneratorField(const ExpPolyPolynomial& poly, bool gaussian) : n_(poly.dim()), gaussian_(gaussian) {
  max_degree_ = std::max(poly.degree(), 0);
  slowest_rate_ = std::numeric_limits<double>::infinity();
  std::vector<double> all_rates;
  for (const auto& [idx, f] : poly.terms())
    for (const auto& t : f.terms()) all_rates.push_back(t.nu);
  std::sort(all_rates.begin(), all_rates.end());
  for (double r : all_rates)
    if (rates_.empty() || std::abs(r - rates_.back()) > kRateMergeTolerance * std::max(1.0, r)) rates_.push_back(r);

  auto rate_index = [this](double nu) {
    auto it = std::lower_bound(rates_.begin(), rates_.end(), nu - kRateMergeTolerance * std::max(1.0, nu));
    return static_cast<std::size_t>(it - rates_.begin());
  };

  for (const auto& [idx, f] : poly.terms()) {
    std::vector<int> e(2 * n_);
    for (std::size_t i = 0; i < 2 * n_; ++i) e[i] = idx.exponent(i);
    const std::size_t m = exponents_.size();
    bool used = false;
    for (const auto& t : f.terms()) {
      discarded_imag_ = std::max(discarded_imag_, std::abs(t.c.imag()));
      if (t.c.real() == 0.0) continue;
      terms_.push_back({m, rate_index(t.nu), t.s, t.c.real()});
      max_s_ = std::max(max_s_, t.s);
      if (t.nu > 0.0) slowest_rate_ = std::min(slowest_rate_, t.nu);
      used = true;
    }
    if (used) exponents_.push_back(std::move(e));
  }
}

GeneratorField GeneratorField::zero(std::size_t n) { return GeneratorField(ExpPolyPolynomial(n), false); }

void GeneratorField::coefficients_at(double delta, std::vector<double>& out) const {
  out.assign(exponents_.size(), 0.0);
  if (terms_.empty()) return;
  std::vector<double> e(rates_.size());
  for (std::size_t r = 0; r < rates_.size(); ++r) e[r] = std::exp(-rates_[r] * delta);
  std::vector<double> dp(static_cast<std::size_t>(max_s_) + 1, 1.0);
  for (std::size_t s = 1; s < dp.size(); ++s) dp[s] = dp[s - 1] * delta;
  for (const auto& t : terms_) out[t.monomial] += t.c * dp[static_cast<std::size_t>(t.s)] * e[t.rate];
}

void GeneratorField::gradient_with(const std::vector<double>& coeffs, std::span<const double> point,
                                   std::span<double> grad, double* value) const {
  const std::size_t dim2 = 2 * n_;
  std::fill(grad.begin(), grad.end(), 0.0);
  double p = 0.0;
  // pw[i * (D + 1) + k] = v_i^k
  const std::size_t stride = static_cast<std::size_t>(max_degree_) + 1;
  double pw[64 * 16];
  std::vector<double> heap;
  double* powers = pw;
  if (dim2 * stride > sizeof(pw) / sizeof(double)) {
    heap.resize(dim2 * stride);
    powers = heap.data();
  }
  for (std::size_t i = 0; i < dim2; ++i) {
    powers[i * stride] = 1.0;
    for (std::size_t k = 1; k < stride; ++k) powers[i * stride + k] = powers[i * stride + k - 1] * point[i];
  }
  for (std::size_t m = 0; m < exponents_.size(); ++m) {
    const double c = coeffs[m];
    if (c == 0.0) continue;
    const auto& e = exponents_[m];
    double full = c;
    for (std::size_t i = 0; i < dim2; ++i) full *= powers[i * stride + static_cast<std::size_t>(e[i])];
    p += full;
    for (std::size_t i = 0; i < dim2; ++i) {
      if (e[i] == 0) continue;
      double part = c * e[i] * powers[i * stride + static_cast<std::size_t>(e[i] - 1)];
      for (std::size_t j = 0; j < dim2; ++j)
        if (j != i) part *= powers[j * stride + static_cast<std::size_t>(e[j])];
      grad[i] += part;
    }
  }
  if (gaussian_) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < dim2; ++i) r2 += point[i] * point[i];
    const double g = std::exp(-r2);
    for (std::size_t i = 0; i < dim2; ++i) grad[i] = (grad[i] - 2.0 * point[i] * p) * g;
    p *= g;
  }
  if (value) *value = p;
}

double GeneratorField::value(std::span<const double> point, double delta) const {
  std::vector<double> coeffs;
  coefficients_at(delta, coeffs);
  std::vector<double> g(2 * n_);
  double v = 0.0;
  gradient_with(coeffs, point, g, &v);
  return v;
}

void GeneratorField::gradient(std::span<const double> point, double delta, std::span<double> grad) const {
  std::vector<double> coeffs;
  coefficients_at(delta, coeffs);
  gradient_with(coeffs, point, grad, nullptr);
}

void GeneratorField::field(const std::vector<double>& coeffs, std::span<const double> point,
                           std::span<double> out) const {
  double g[64];
  gradient_with(coeffs, point, std::span<double>(g, 2 * n_), nullptr);
  for (std::size_t j = 0; j < n_; ++j) {
    out[j] = g[n_ + j];
    out[n_ + j] = -g[j];
  }
}

void GeneratorField::hessian(const std::vector<double>& coeffs, std::span<const double> point, std::span<double> grad,
                             std::span<double> hess) const {
  const std::size_t d = 2 * n_;
  std::fill(grad.begin(), grad.end(), 0.0);
  std::fill(hess.begin(), hess.end(), 0.0);
  const std::size_t stride = static_cast<std::size_t>(max_degree_) + 1;
  std::vector<double> powers(d * stride);
  for (std::size_t i = 0; i < d; ++i) {
    powers[i * stride] = 1.0;
    for (std::size_t k = 1; k < stride; ++k) powers[i * stride + k] = powers[i * stride + k - 1] * point[i];
  }
  // v_i^k with v_i^k = 0 for k < 0
  auto pw = [&](std::size_t i, int k) { return k < 0 ? 0.0 : powers[i * stride + static_cast<std::size_t>(k)]; };
  double p = 0.0;
  for (std::size_t m = 0; m < exponents_.size(); ++m) {
    const double c = coeffs[m];
    if (c == 0.0) continue;
    const auto& e = exponents_[m];
    double full = c;
    for (std::size_t i = 0; i < d; ++i) full *= pw(i, e[i]);
    p += full;
    for (std::size_t i = 0; i < d; ++i) {
      if (e[i] == 0) continue;
      double rest = c;
      for (std::size_t k = 0; k < d; ++k)
        if (k != i) rest *= pw(k, e[k]);
      grad[i] += rest * e[i] * pw(i, e[i] - 1);
      hess[i * d + i] += rest * e[i] * (e[i] - 1) * pw(i, e[i] - 2);
      for (std::size_t j = i + 1; j < d; ++j) {
        if (e[j] == 0) continue;
        double r2 = c;
        for (std::size_t k = 0; k < d; ++k)
          if (k != i && k != j) r2 *= pw(k, e[k]);
        const double v = r2 * e[i] * pw(i, e[i] - 1) * e[j] * pw(j, e[j] - 1);
        hess[i * d + j] += v;
        hess[j * d + i] += v;
      }
    }
  }
  if (!gaussian_) return;
  // (P E)_ij = (P_ij - 2 v_j P_i - 2 v_i P_j + (4 v_i v_j - 2 delta_ij) P) E,  E = e^{-r^2}
  double r2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) r2 += point[i] * point[i];
  const double g = std::exp(-r2);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      const double h = (hess[i * d + j] - 2.0 * (point[j] * grad[i] + point[i] * grad[j]) +
                        (4.0 * point[i] * point[j] - (i == j ? 2.0 : 0.0)) * p) *
                       g;
      hess[i * d + j] = hess[j * d + i] = h;
    }
  for (std::size_t i = 0; i < d; ++i) grad[i] = (grad[i] - 2.0 * point[i] * p) * g;
}

ComplexPolynomial GeneratorField::polynomial_at(double delta) const {
  std::vector<double> coeffs;
  coefficients_at(delta, coeffs);
  ComplexPolynomial p(n_);
  for (std::size_t m = 0; m < exponents_.size(); ++m) p.add_term(BiIndex::from_flat(exponents_[m]), coeffs[m]);
  p.canonicalize();
  return p;
}

namespace {

ExpPolyPolynomial real_generator_series(const EvolvingPolynomial& ev, const AveragingProblem& problem) {
  return to_real(generator_series(ev, problem.mu), problem.theta);
}

}  // namespace

GeneratorField make_mollified_generator(const EvolvingPolynomial& ev, const AveragingProblem& problem) {
  return GeneratorField(mollify(real_generator_series(ev, problem), ev.order), true);
}

GeneratorField make_raw_generator(const EvolvingPolynomial& ev, const AveragingProblem& problem) {
  return GeneratorField(real_generator_series(ev, problem), false);
}

FlowConfig default_flow_config(double min_rate) {
  FlowConfig cfg;
  constexpr double cap = 1e4;
  if (!(min_rate > 0.0) || !std::isfinite(min_rate)) {
    cfg.delta_max = std::isinf(min_rate) ? 30.0 : cap;
    cfg.capped = !std::isinf(min_rate);
    return cfg;
  }
  cfg.delta_max = 30.0 / min_rate;
  cfg.max_step = std::clamp(0.25 / min_rate, 0.025, 2.5);
  if (cfg.delta_max > cap) {
    cfg.delta_max = cap;
    cfg.capped = true;
  }
  return cfg;
}

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

// Parametrised by s >= 0 with delta = origin + sign * s, so the stepper
// always advances forward (odeint clamps negative steps against max_dt).
struct BatchField {
  const GeneratorField* gen;
  std::size_t points;
  std::vector<double>* coeffs;
  double origin;
  double sign;

  void operator()(const State& x, State& dxdt, double s) const {
    gen->coefficients_at(origin + sign * s, *coeffs);
    const std::size_t d = 2 * gen->dim();
    for (std::size_t p = 0; p < points; ++p)
      gen->field(*coeffs, std::span<const double>(x.data() + p * d, d), std::span<double>(dxdt.data() + p * d, d));
    if (sign < 0.0)
      for (double& v : dxdt) v = -v;
  }
};

}  // namespace

std::vector<std::vector<double>> flow_batch(const std::vector<std::vector<double>>& points, const GeneratorField& gen,
                                            const FlowConfig& cfg, double delta_from, double delta_to) {
  const std::size_t d = 2 * gen.dim();
  State x;
  x.reserve(points.size() * d);
  for (const auto& p : points) {
    if (p.size() != d) throw DimensionMismatch("flow point has wrong length");
    for (double v : p) {
      if (!std::isfinite(v)) throw FlowError("flow started from a non-finite point");
      x.push_back(v);
    }
  }
  if (points.empty() || delta_from == delta_to || gen.monomial_count() == 0) return points;

  std::vector<double> coeffs;
  const double sign = delta_to > delta_from ? 1.0 : -1.0;
  BatchField sys{&gen, points.size(), &coeffs, delta_from, sign};
  auto stepper = odeint::make_controlled(cfg.atol, cfg.rtol, cfg.max_step, odeint::runge_kutta_fehlberg78<State>());
  const double length = std::abs(delta_to - delta_from);
  std::size_t steps = 0;
  try {
    odeint::integrate_adaptive(stepper, sys, x, 0.0, length, std::min(cfg.initial_step, length), [&](const State& s, double) {
      if (++steps > cfg.max_steps) throw FlowError("flow exceeded the step budget");
      for (double v : s)
        if (!std::isfinite(v)) throw FlowError("flow produced a non-finite state");
    });
  } catch (const FlowError&) {
    throw;
  } catch (const std::exception& e) {
    throw FlowError(std::string("step-size control failed: ") + e.what());
  }

  std::vector<std::vector<double>> out(points.size(), std::vector<double>(d));
  for (std::size_t p = 0; p < points.size(); ++p) std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(p * d), d, out[p].begin());
  return out;
}

std::vector<std::vector<double>> flow_forward_batch(const std::vector<std::vector<double>>& points,
                                                    const GeneratorField& gen, const FlowConfig& cfg) {
  return flow_batch(points, gen, cfg, 0.0, cfg.delta_max);
}

std::vector<double> flow_forward(std::span<const double> point, const GeneratorField& gen, const FlowConfig& cfg) {
  return flow_batch({std::vector<double>(point.begin(), point.end())}, gen, cfg, 0.0, cfg.delta_max).front();
}

std::vector<double> flow_backward(std::span<const double> point, const GeneratorField& gen, const FlowConfig& cfg) {
  return flow_batch({std::vector<double>(point.begin(), point.end())}, gen, cfg, cfg.delta_max, 0.0).front();
}

namespace {

double point_norm(std::span<const double> p) {
  double s = 0.0;
  for (double v : p) s += v * v;
  return std::sqrt(s);
}

// p +- h e_i for each coordinate i, in the order (+e_0, -e_0, +e_1, ...).
std::vector<std::vector<double>> stencil(std::span<const double> point, double h) {
  std::vector<std::vector<double>> pts;
  for (std::size_t i = 0; i < point.size(); ++i)
    for (double sgn : {1.0, -1.0}) {
      std::vector<double> q(point.begin(), point.end());
      q[i] += sgn * h;
      pts.push_back(std::move(q));
    }
  return pts;
}

}  // namespace

Eigen::MatrixXd flow_jacobian(std::span<const double> point, const GeneratorField& gen, const FlowConfig& cfg) {
  const std::size_t d = point.size();
  const double h = cfg.jacobian_step * (1.0 + point_norm(point));
  const auto images = flow_forward_batch(stencil(point, h), gen, cfg);
  Eigen::MatrixXd a(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t r = 0; r < d; ++r)
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = (images[2 * i][r] - images[2 * i + 1][r]) / (2 * h);
  return a;
}

namespace {

// State (x, A) with A row-major; dA/ds = sign J Hess(L) A.
struct TangentField {
  const GeneratorField* gen;
  std::vector<double>* coeffs;
  double origin;
  double sign;

  void operator()(const State& s, State& ds, double t) const {
    gen->coefficients_at(origin + sign * t, *coeffs);
    const std::size_t d = 2 * gen->dim();
    const std::size_t n = d / 2;
    std::vector<double> grad(d), hess(d * d);
    gen->hessian(*coeffs, std::span<const double>(s.data(), d), grad, hess);
    for (std::size_t j = 0; j < n; ++j) {
      ds[j] = sign * grad[n + j];
      ds[n + j] = -sign * grad[j];
    }
    const double* a = s.data() + d;
    double* da = ds.data() + d;
    for (std::size_t r = 0; r < d; ++r) {
      // row r of J Hess: +Hess[n + r] for r < n, -Hess[r - n] otherwise
      const double* h = r < n ? &hess[(n + r) * d] : &hess[(r - n) * d];
      const double f = r < n ? sign : -sign;
      for (std::size_t c = 0; c < d; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += h[k] * a[k * d + c];
        da[r * d + c] = f * acc;
      }
    }
  }
};

}  // namespace

TangentImage flow_tangent(std::span<const double> point, const GeneratorField& gen, const FlowConfig& cfg) {
  const std::size_t d = 2 * gen.dim();
  if (point.size() != d) throw DimensionMismatch("flow point has wrong length");
  for (double v : point)
    if (!std::isfinite(v)) throw FlowError("flow started from a non-finite point");
  State s(d + d * d, 0.0);
  std::copy(point.begin(), point.end(), s.begin());
  for (std::size_t i = 0; i < d; ++i) s[d + i * d + i] = 1.0;
  if (gen.monomial_count() > 0 && cfg.delta_max > 0.0) {
    std::vector<double> coeffs;
    TangentField sys{&gen, &coeffs, 0.0, 1.0};
    auto stepper = odeint::make_controlled(cfg.atol, cfg.rtol, cfg.max_step, odeint::runge_kutta_fehlberg78<State>());
    std::size_t steps = 0;
    try {
      odeint::integrate_adaptive(stepper, sys, s, 0.0, cfg.delta_max, std::min(cfg.initial_step, cfg.delta_max),
                                 [&](const State& x, double) {
                                   if (++steps > cfg.max_steps) throw FlowError("flow exceeded the step budget");
                                   for (double v : x)
                                     if (!std::isfinite(v)) throw FlowError("flow produced a non-finite state");
                                 });
    } catch (const FlowError&) {
      throw;
    } catch (const std::exception& e) {
      throw FlowError(std::string("step-size control failed: ") + e.what());
    }
  }
  TangentImage out{std::vector<double>(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(d)),
                   Eigen::MatrixXd(d, d)};
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      out.jacobian(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = s[d + r * d + c];
  return out;
}

std::vector<double> quadratic_integrals(const BlockLayout& layout, std::span<const double> point) {
  std::vector<double> q = invariant_values(layout, point);
  for (int k = 2 * layout.n1; k < layout.n2; ++k) q[static_cast<std::size_t>(k)] *= 2.0;
  return q;
}

IntegrableSystem::IntegrableSystem(AveragingProblem problem, NormalForm normal_form, GeneratorField generator,
                                   FlowConfig cfg)
    : problem_(std::move(problem)),
      normal_form_(std::move(normal_form)),
      generator_(std::move(generator)),
      cfg_(cfg),
      hamiltonian_(build_hamiltonian(problem_.spec)) {
  if (generator_.dim() != static_cast<std::size_t>(problem_.spec.n))
    throw DimensionMismatch("generator and model dimensions differ");
}

std::vector<double> IntegrableSystem::normalize(std::span<const double> point) const {
  return flow_forward(point, generator_, cfg_);
}

double IntegrableSystem::value(std::span<const double> point) const {
  return evaluate_real(normal_form_.real, normalize(point));
}

double IntegrableSystem::perturbation(std::span<const double> point) const {
  return value(point) - evaluate_real(hamiltonian_, point);
}

std::vector<double> IntegrableSystem::first_integrals(std::span<const double> point) const {
  return quadratic_integrals(problem_.theta.layout, normalize(point));
}

IntegrableSystem::Gradients IntegrableSystem::gradients(std::span<const double> point) const {
  const std::size_t d = point.size();
  const std::size_t n = d / 2;
  const TangentImage t = flow_tangent(point, generator_, cfg_);
  // grad N = (-X_y, X_x) from the Hamiltonian field X = (N_y, -N_x).
  const std::vector<double> x = hamiltonian_vector_field(normal_form_.real, t.point);
  Eigen::VectorXd gn(static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < n; ++j) {
    gn(static_cast<Eigen::Index>(j)) = -x[n + j];
    gn(static_cast<Eigen::Index>(n + j)) = x[j];
  }
  // Central differences are exact for the quadratic integrals up to rounding.
  constexpr double h = 1e-3;
  Eigen::MatrixXd gq(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> up = t.point, down = t.point;
    up[i] += h;
    down[i] -= h;
    const auto qu = quadratic_integrals(problem_.theta.layout, up);
    const auto qd = quadratic_integrals(problem_.theta.layout, down);
    for (std::size_t k = 0; k < n; ++k)
      gq(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = (qu[k] - qd[k]) / (2 * h);
  }
  const Eigen::MatrixXd at = t.jacobian.transpose();
  const Eigen::VectorXd gv = at * gn;
  const Eigen::MatrixXd gi = at * gq;
  Gradients g;
  g.value.assign(gv.data(), gv.data() + d);
  g.integrals.assign(n, std::vector<double>(d, 0.0));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < d; ++i)
      g.integrals[k][i] = gi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
  return g;
}

double eval_integrable_H(std::span<const double> point, const IntegrableSystem& system) { return system.value(point); }

double eval_F(std::span<const double> point, const IntegrableSystem& system) { return system.perturbation(point); }

std::vector<double> first_integrals(std::span<const double> point, const IntegrableSystem& system) {
  return system.first_integrals(point);
}

IntegrableSystem build_integrable_system(const AveragingProblem& problem, const EvolvingPolynomial& ev,
                                         const FlowConfig& cfg) {
  return IntegrableSystem(problem, normal_form_limit(ev, problem), make_mollified_generator(ev, problem), cfg);
}

IntegrableSystem build_integrable_system(const ModelSpec& spec, int order) {
  const AveragingProblem problem = prepare_problem(spec);
  const EvolvingPolynomial ev = solve_triangular(problem.hstar_hat, problem.mu, order);
  return build_integrable_system(problem, ev, default_flow_config(min_decay_rate(problem.mu, order)));
}

}  // namespace avint
