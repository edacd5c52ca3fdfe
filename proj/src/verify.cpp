#include "avint/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

#include <boost/numeric/odeint.hpp>

namespace avint {

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

NormalForm birkhoff_oracle(const ModelSpec& spec, int order) {
  const AveragingProblem problem = prepare_problem(spec);
  const DivisorReport scan = divisor_scan(problem.mu, order);
  if (!scan.exact_zeros.empty()) throw ResonanceError(scan.exact_zeros.front().k, scan.exact_zeros.front().modulus);
  if (!scan.near_zeros.empty()) throw ResonanceError(scan.near_zeros.front().k, scan.near_zeros.front().modulus);

  const std::size_t n = problem.mu.size();
  ComplexPolynomial h = problem.h2_hat + truncate_degree(problem.hstar_hat, order);
  for (int d = 3; d <= order; ++d) {
    ComplexPolynomial chi(n);
    const auto part = degree_part(h, d);
    for (const auto& [idx, c] : part.terms()) {
      if (idx.alpha == idx.beta) continue;
      const Complex pk = pairing(problem.mu, idx.shift());
      if (std::abs(pk) < kDivisorTolerance) throw ResonanceError(idx.shift(), std::abs(pk));
      chi.add_term(idx, -c / pk);
    }
    chi.canonicalize();
    if (chi.is_zero()) continue;
    // exp(ad chi) h; each application raises the degree by d - 2 >= 1.
    ComplexPolynomial next = h;
    ComplexPolynomial term = h;
    for (int k = 1; k <= order; ++k) {
      term = truncate_degree(poisson_bracket(chi, term), order) * Complex(1.0 / k);
      if (term.is_zero()) break;
      next += term;
    }
    h = next;
  }
  ComplexPolynomial hat_star(n);
  for (const auto& [idx, c] : h.terms())
    if (idx.degree() >= 3) hat_star.add_term(idx, c);
  hat_star.canonicalize();
  return assemble_normal_form(hat_star, problem);
}

ComplexPolynomial averaging_rhs(const ComplexPolynomial& h, const ComplexPolynomial& h2_hat,
                                const EigenvalueVector& mu, int order) {
  return -truncate_degree(poisson_bracket(xi(h, mu, order), h2_hat + h), order);
}

std::vector<ComplexPolynomial> ode_coefficient_oracle(const ComplexPolynomial& hstar_hat, const EigenvalueVector& mu,
                                                      int order, std::span<const double> grid, double step) {
  const std::size_t n = hstar_hat.dim();
  ComplexPolynomial h2_hat(n);
  for (std::size_t j = 0; j < n; ++j) {
    BiIndex idx = BiIndex::zero(n);
    idx.alpha[j] = 1;
    idx.beta[j] = 1;
    h2_hat.add_term(idx, mu[j]);
  }
  h2_hat.canonicalize();
  auto rhs = [&](const ComplexPolynomial& h) { return averaging_rhs(h, h2_hat, mu, order); };
  auto rk4 = [&](const ComplexPolynomial& h, double dt) {
    const ComplexPolynomial k1 = rhs(h);
    const ComplexPolynomial k2 = rhs(h + k1 * Complex(dt / 2));
    const ComplexPolynomial k3 = rhs(h + k2 * Complex(dt / 2));
    const ComplexPolynomial k4 = rhs(h + k3 * Complex(dt));
    return h + (k1 + k2 * Complex(2.0) + k3 * Complex(2.0) + k4) * Complex(dt / 6);
  };

  std::vector<ComplexPolynomial> out;
  ComplexPolynomial h = truncate_degree(hstar_hat, order);
  double t = 0.0;
  for (double target : grid) {
    if (target < t) throw Error("oracle grid must be ascending and nonnegative");
    const auto steps = static_cast<std::size_t>(std::ceil((target - t) / step - 1e-9));
    const double dt = steps ? (target - t) / static_cast<double>(steps) : 0.0;
    for (std::size_t i = 0; i < steps; ++i) h = rk4(h, dt);
    t = target;
    out.push_back(h);
  }
  return out;
}

std::vector<std::vector<double>> random_unit_directions(std::size_t dim, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> out;
  while (out.size() < count) {
    std::vector<double> u(dim);
    double s = 0.0;
    for (auto& v : u) {
      v = normal(rng);
      s += v * v;
    }
    if (s < 1e-12) continue;
    for (auto& v : u) v /= std::sqrt(s);
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<std::vector<double>> random_ball_points(std::size_t dim, std::size_t count, double radius,
                                                    std::uint64_t seed) {
  auto pts = random_unit_directions(dim, count, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (auto& p : pts) {
    const double r = radius * std::pow(uniform(rng), 1.0 / static_cast<double>(dim));
    for (auto& v : p) v *= r;
  }
  return pts;
}

unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("AVINT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(std::min<long>(v, 256));
  }
  return hw;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& f) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

VanishingOrderResult vanishing_order_test(const PointFunction& f, std::size_t dim, const VanishingOrderOptions& opt) {
  if (opt.samples < 2 || !(opt.eps_min > 0.0) || !(opt.eps_max > opt.eps_min))
    throw Error("vanishing-order test needs >= 2 samples on a positive increasing range");
  VanishingOrderResult res;
  const double la = std::log(opt.eps_min);
  const double lb = std::log(opt.eps_max);
  for (std::size_t i = 0; i < opt.samples; ++i)
    res.epsilons.push_back(std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(opt.samples - 1)));

  const auto dirs = random_unit_directions(dim, opt.directions, opt.seed);
  res.directions.resize(dirs.size());
  parallel_for(dirs.size(), [&](std::size_t d) {
    DirectionSlope& ds = res.directions[d];
    ds.direction = dirs[d];
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> p(dim);
    for (double eps : res.epsilons) {
      for (std::size_t i = 0; i < dim; ++i) p[i] = eps * dirs[d][i];
      const double v = std::abs(f(p));
      if (!(v > opt.floor) || !std::isfinite(v)) continue;
      xs.push_back(std::log(eps));
      ys.push_back(std::log(v));
    }
    ds.samples_used = xs.size();
    if (xs.size() < 2) {
      ds.skipped = true;
      return;
    }
    const double k = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    ds.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  });

  res.min_slope = std::numeric_limits<double>::infinity();
  res.max_slope = -std::numeric_limits<double>::infinity();
  for (const auto& ds : res.directions) {
    if (ds.skipped) {
      ++res.skipped;
      continue;
    }
    res.min_slope = std::min(res.min_slope, ds.slope);
    res.max_slope = std::max(res.max_slope, ds.slope);
  }
  res.identically_small = !res.directions.empty() && res.skipped == res.directions.size();
  if (res.identically_small) res.min_slope = res.max_slope = std::numeric_limits<double>::quiet_NaN();
  return res;
}

FlowConfig vanishing_flow_config(const FlowConfig& cfg, double eps_min, int order) {
  FlowConfig c = cfg;
  c.atol = std::min(cfg.atol, 1e-3 * std::pow(eps_min, order));
  c.rtol = std::min(cfg.rtol, 1e-12);
  return c;
}

namespace {

double bracket(std::span<const double> gf, std::span<const double> gg) {
  const std::size_t n = gf.size() / 2;
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += gf[n + j] * gg[j] - gf[j] * gg[n + j];
  return s;
}

}  // namespace

InvolutionResult involution_test(const IntegrableSystem& system, const std::vector<std::vector<double>>& points) {
  InvolutionResult res;
  res.points = points.size();
  std::vector<double> per(points.size(), 0.0);
  parallel_for(points.size(), [&](std::size_t i) {
    const auto g = system.gradients(points[i]);
    for (std::size_t a = 0; a < g.integrals.size(); ++a)
      for (std::size_t b = a + 1; b < g.integrals.size(); ++b)
        per[i] = std::max(per[i], std::abs(bracket(g.integrals[a], g.integrals[b])));
  });
  for (double v : per) res.max_residual = std::max(res.max_residual, v);
  return res;
}

namespace {

struct Escape {
  double t;
};

}  // namespace

ConservationResult conservation_test(const IntegrableSystem& system, std::span<const double> p0,
                                     const ConservationOptions& opt) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;
  if (!(opt.dt > 0.0) || !(opt.T >= 0.0)) throw Error("trajectory needs dt > 0 and T >= 0");
  const std::size_t d = p0.size();
  const std::size_t n = d / 2;
  ConservationResult res;
  const auto rows = static_cast<std::size_t>(std::floor(opt.T / opt.dt + 1e-9)) + 1;
  for (std::size_t i = 0; i < rows; ++i) res.times.push_back(static_cast<double>(i) * opt.dt);

  auto rhs = [&](const State& x, State& dxdt, double) {
    const auto g = system.gradients(x).value;
    for (std::size_t j = 0; j < n; ++j) {
      dxdt[j] = g[n + j];
      dxdt[n + j] = -g[j];
    }
  };
  auto record = [&](const State& x, double) {
    double r = 0.0;
    for (double v : x) r += v * v;
    if (!(std::sqrt(r) <= opt.escape_radius)) throw Escape{0.0};
    res.states.push_back(x);
    res.integrals.push_back(system.first_integrals(x));
    res.energy.push_back(system.value(x));
  };

  State x(p0.begin(), p0.end());
  try {
    odeint::integrate_times(odeint::make_controlled(opt.atol, opt.rtol, odeint::runge_kutta_fehlberg78<State>()), rhs,
                            x, res.times.begin(), res.times.end(), std::min(opt.dt, 0.1), record);
  } catch (const Escape&) {
    res.truncated = true;
    res.truncation_reason = "trajectory left the ball of radius " + std::to_string(opt.escape_radius);
  } catch (const FlowError& e) {
    res.truncated = true;
    res.truncation_reason = e.what();
  } catch (const std::exception& e) {
    res.truncated = true;
    res.truncation_reason = std::string("step-size control failed: ") + e.what();
  }
  if (res.truncated) res.times.resize(res.states.size());

  res.integral_drift.assign(n, 0.0);
  if (!res.states.empty()) {
    const auto& q0 = res.integrals.front();
    for (const auto& q : res.integrals)
      for (std::size_t k = 0; k < n; ++k) {
        const double denom = std::abs(q0[k]) > 0.0 ? std::abs(q0[k]) : 1.0;
        res.integral_drift[k] = std::max(res.integral_drift[k], std::abs(q[k] - q0[k]) / denom);
      }
    const double e0 = res.energy.front();
    const double denom = std::abs(e0) > 0.0 ? std::abs(e0) : 1.0;
    for (double e : res.energy) res.energy_drift = std::max(res.energy_drift, std::abs(e - e0) / denom);
  }
  return res;
}

DecayFit decay_rate_fit(const EvolvingPolynomial& ev, const AveragingProblem& problem, double from, double to,
                        std::size_t samples) {
  DecayFit fit;
  fit.min_divisor = min_decay_rate(problem.mu, ev.order);
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < samples; ++i) {
    const double delta = from + (to - from) * static_cast<double>(i) / static_cast<double>(samples - 1);
    const double norm = coefficient_norm(real_generator_at(ev, problem, delta));
    fit.deltas.push_back(delta);
    fit.norms.push_back(norm);
    if (norm > 0.0) {
      xs.push_back(delta);
      ys.push_back(std::log(norm));
    }
  }
  if (xs.size() < 2) {
    fit.rate = std::numeric_limits<double>::infinity();
    return fit;
  }
  const double k = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  fit.rate = -(k * sxy - sx * sy) / (k * sxx - sx * sx);
  return fit;
}

namespace {

double max_relative_gap(const ComplexPolynomial& a, const ComplexPolynomial& b) {
  const double scale = std::max(max_norm(a), max_norm(b));
  double worst = 0.0;
  auto visit = [&](const ComplexPolynomial& p) {
    for (const auto& [idx, c] : p.terms()) {
      if (idx.alpha != idx.beta) continue;
      const Complex ca = a.coefficient(idx);
      const Complex cb = b.coefficient(idx);
      const double denom = std::max({std::abs(ca), std::abs(cb), 1e-14 * scale});
      worst = std::max(worst, std::abs(ca - cb) / denom);
    }
  };
  visit(a);
  visit(b);
  return worst;
}

double point_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

class CheckRunner {
 public:
  CheckRunner(VerificationReport& report, bool with_runtime) : report_(report), with_runtime_(with_runtime) {}

  // f fills residual and detail; pass iff residual <= tol unless `lower` in
  // which case pass iff residual >= tol.
  template <class F>
  void run(const std::string& name, double tol, F&& f, bool lower = false) {
    CheckResult c;
    c.name = name;
    c.tolerance = tol;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      f(c);
      c.passed = std::isfinite(c.residual) && (lower ? c.residual >= tol : c.residual <= tol);
    } catch (const std::exception& e) {
      c.passed = false;
      c.residual = std::numeric_limits<double>::quiet_NaN();
      c.detail = std::string("error: ") + e.what();
    }
    if (with_runtime_) c.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report_.checks.push_back(std::move(c));
  }

 private:
  VerificationReport& report_;
  bool with_runtime_;
};

}  // namespace

VerificationReport run_verification(const ModelSpec& spec, int order, const VerifyOptions& opt) {
  VerificationReport report;
  report.seed = opt.seed;
  report.order = order;

  const AveragingProblem problem = prepare_problem(spec);
  const EvolvingPolynomial ev = solve_triangular(problem.hstar_hat, problem.mu, order);
  const std::size_t n = problem.mu.size();
  const std::size_t dim = 2 * n;
  FlowConfig cfg = default_flow_config(min_decay_rate(problem.mu, order));
  if (opt.delta_max) cfg.delta_max = *opt.delta_max;
  if (opt.rtol) {
    cfg.rtol = *opt.rtol;
    cfg.atol = 1e-2 * *opt.rtol;
  }
  const IntegrableSystem system = build_integrable_system(problem, ev, cfg);
  CheckRunner run(report, opt.with_runtime);

  run.run("initial_condition", 1e-14, [&](CheckResult& c) {
    c.residual = max_difference(ev(0.0), truncate_degree(problem.hstar_hat, order));
  });

  run.run("degree3_decay_law", 1e-13, [&](CheckResult& c) {
    for (double delta : {0.1, 1.0, 10.0}) {
      const ComplexPolynomial at = ev(delta);
      const auto part = degree_part(problem.hstar_hat, 3);
      for (const auto& [idx, h] : part.terms()) {
        const double lambda = std::abs(pairing(problem.mu, idx.shift()));
        c.residual = std::max(c.residual, std::abs(at.coefficient(idx) - h * std::exp(-lambda * delta)));
      }
    }
  });

  run.run("closed_form_vs_ode", 1e-8, [&](CheckResult& c) {
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(0.1 * i);
    const auto numeric = ode_coefficient_oracle(problem.hstar_hat, problem.mu, order, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) c.residual = std::max(c.residual, max_difference(numeric[i], ev(grid[i])));
    c.detail = "delta in [0, 10], RK4 step 1e-3";
  });

  run.run("birkhoff_cross_oracle", 1e-9, [&](CheckResult& c) {
    const NormalForm a = normal_form_limit(ev, problem);
    const NormalForm b = birkhoff_oracle(spec, order);
    c.residual = max_relative_gap(a.hat, b.hat);
    c.detail = "relative gap over alpha == beta coefficients";
  });

  run.run("theta_reality", 1e-11, [&](CheckResult& c) {
    for (double delta : {0.0, 0.5, 1.0, 5.0}) {
      for (const ComplexPolynomial& p : {ev(delta), generator_at(ev, problem.mu, order, delta)}) {
        const RealityCheck r = is_theta_real(p, problem.theta, 1e-11);
        c.residual = std::max({c.residual, r.relation_residual, r.conjugation_residual});
      }
    }
  });

  run.run(
      "generator_decay_rate", 0.9,
      [&](CheckResult& c) {
        // fitted rate over the smallest nonzero divisor
        const DecayFit fit = decay_rate_fit(ev, problem);
        if (std::isinf(fit.rate)) {
          c.residual = std::numeric_limits<double>::max();
          c.detail = "generator identically zero";
          return;
        }
        c.residual = fit.rate / fit.min_divisor;
        c.detail = "fitted rate " + fmt(fit.rate) + ", min divisor " + fmt(fit.min_divisor);
      },
      true);

  run.run(
      "mollifier_order", static_cast<double>(order + 1),
      [&](CheckResult& c) {
        int worst = kInfiniteDegree;
        for (double delta : {0.0, 0.5, 1.0, 5.0}) {
          const ComplexPolynomial p = system.generator().polynomial_at(delta);
          const ComplexPolynomial k = real_generator_at(ev, problem, delta);
          worst = std::min(worst, mollifier_defect_degree(p, k, order));
        }
        c.residual = worst == kInfiniteDegree ? std::numeric_limits<double>::max() : worst;
        c.detail = worst == kInfiniteDegree ? "no surviving terms" : "lowest surviving degree " + std::to_string(worst);
      },
      true);

  const auto ball = random_ball_points(dim, opt.sample_points, 1.0, opt.seed);

  run.run("flow_roundtrip", 1e-9, [&](CheckResult& c) {
    const auto fwd = flow_forward_batch(ball, system.generator(), cfg);
    std::vector<double> worst(ball.size(), 0.0);
    parallel_for(ball.size(), [&](std::size_t i) {
      worst[i] = point_distance(flow_backward(fwd[i], system.generator(), cfg), ball[i]);
    });
    c.residual = *std::max_element(worst.begin(), worst.end());
  });

  run.run("flow_symplecticity", 1e-5, [&](CheckResult& c) {
    const Eigen::MatrixXd j = structure_matrix(n);
    std::vector<double> worst(ball.size(), 0.0);
    parallel_for(ball.size(), [&](std::size_t i) {
      const Eigen::MatrixXd a = flow_jacobian(ball[i], system.generator(), cfg);
      worst[i] = (a.transpose() * j * a - j).cwiseAbs().maxCoeff();
    });
    c.residual = *std::max_element(worst.begin(), worst.end());
  });

  run.run("tail_insensitivity", 1e-10, [&](CheckResult& c) {
    // Psi at 2 delta_max is the flow over [delta_max, 2 delta_max] applied to Psi.
    const auto a = flow_forward_batch(ball, system.generator(), cfg);
    const auto b = flow_batch(a, system.generator(), cfg, cfg.delta_max, 2.0 * cfg.delta_max);
    for (std::size_t i = 0; i < a.size(); ++i) c.residual = std::max(c.residual, point_distance(a[i], b[i]));
  });

  run.run("spatial_decay", 1.0, [&](CheckResult& c) {
    // |L| at radius 10 against e^{-40} times the coefficient bound of P.
    const auto dirs = random_unit_directions(dim, opt.sample_points, opt.seed + 1);
    for (double delta : {0.0, 1.0}) {
      const ComplexPolynomial p = system.generator().polynomial_at(delta);
      double bound = 0.0;
      for (const auto& [idx, coef] : p.terms()) bound += std::abs(coef) * std::pow(10.0, idx.degree());
      for (auto u : dirs) {
        for (auto& v : u) v *= 10.0;
        const double l = std::abs(system.generator().value(u, delta));
        if (bound > 0.0) c.residual = std::max(c.residual, l / (std::exp(-40.0) * bound));
      }
    }
    c.detail = "ratio |L| / (e^-40 * bound) at radius 10";
  });

  run.run("global_definedness", 0.0, [&](CheckResult& c) {
    auto far = random_unit_directions(dim, opt.sample_points, opt.seed + 2);
    for (auto& p : far)
      for (auto& v : p) v *= 10.0;
    const auto img = flow_forward_batch(far, system.generator(), cfg);
    for (const auto& q : img)
      for (double v : q)
        if (!std::isfinite(v)) c.residual = 1.0;
    c.detail = "flow from radius 10 completed";
  });

  run.run(
      "vanishing_order", order + 0.8,
      [&](CheckResult& c) {
        const FlowConfig fine = vanishing_flow_config(cfg, opt.vanishing.eps_min, order);
        const IntegrableSystem tight(problem, system.normal_form(), system.generator(), fine);
        VanishingOrderOptions vo = opt.vanishing;
        vo.seed = opt.seed;
        const auto res = vanishing_order_test([&](std::span<const double> p) { return tight.perturbation(p); }, dim, vo);
        c.residual = res.identically_small ? std::numeric_limits<double>::infinity() : res.min_slope;
        c.detail = "min slope " + fmt(res.min_slope) + ", max slope " + fmt(res.max_slope) + ", skipped " +
                   std::to_string(res.skipped) + " of " + std::to_string(res.directions.size());
        if (res.identically_small) {
          c.detail = "identically small";
          c.residual = std::numeric_limits<double>::max();
        }
      },
      true);

  if (n >= 2) {
    run.run("involution", 1e-5, [&](CheckResult& c) {
      c.residual = involution_test(system, ball).max_residual;
    });
  }

  const auto start = random_unit_directions(dim, 1, opt.seed + 3).front();
  std::vector<double> p0(start);
  for (auto& v : p0) v *= 0.3;
  ConservationResult cons;
  bool cons_ok = true;
  std::string cons_error;
  try {
    cons = conservation_test(system, p0, opt.conservation);
  } catch (const std::exception& e) {
    cons_ok = false;
    cons_error = e.what();
  }
  // A trajectory that escapes (saddle directions) is judged on the rows it
  // recorded before leaving the ball; fewer than two rows judge nothing.
  const bool too_short = cons.truncated && cons.states.size() < 2;
  std::string span_note = "T = " + fmt(opt.conservation.T) + ", |p0| = 0.3";
  if (cons.truncated)
    span_note += ", truncated at t = " + fmt(cons.times.empty() ? 0.0 : cons.times.back()) + ": " +
                 cons.truncation_reason;
  run.run("integral_conservation", 1e-6, [&](CheckResult& c) {
    if (!cons_ok) throw Error(cons_error);
    for (double v : cons.integral_drift) c.residual = std::max(c.residual, v);
    if (too_short) c.residual = std::numeric_limits<double>::infinity();
    c.detail = span_note;
  });
  run.run("energy_conservation", 1e-8, [&](CheckResult& c) {
    if (!cons_ok) throw Error(cons_error);
    c.residual = too_short ? std::numeric_limits<double>::infinity() : cons.energy_drift;
    c.detail = span_note;
  });
  return report;
}

}  // namespace avint
