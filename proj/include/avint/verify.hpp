#pragma once

// Independent oracles and property checks for the averaging pipeline.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "avint/averaging.hpp"
#include "avint/globalize.hpp"

namespace avint {

struct CheckResult {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
  // Wall time; only reported on request since it breaks byte-identical reports.
  double runtime_seconds = 0.0;
};

struct VerificationReport {
  std::uint64_t seed = 0;
  int order = 0;
  std::vector<CheckResult> checks;
  bool passed() const;
  const CheckResult* find(const std::string& name) const;
};

// Classical Birkhoff normalisation by Lie series: at each degree d the
// generator chi_d = sum -h_{ab} / <mu, b - a> z^a w^b over the non-resonant
// part of the degree-d terms, and H <- exp(ad chi_d) H truncated at M.
NormalForm birkhoff_oracle(const ModelSpec& spec, int order);

// -{xi H, H2_hat + H} truncated at `order`.
ComplexPolynomial averaging_rhs(const ComplexPolynomial& h, const ComplexPolynomial& h2_hat,
                                const EigenvalueVector& mu, int order);

// Classical fourth-order Runge-Kutta on the coefficient vector with fixed
// step; returns the state at each grid point (grid ascending, from 0).
std::vector<ComplexPolynomial> ode_coefficient_oracle(const ComplexPolynomial& hstar_hat, const EigenvalueVector& mu,
                                                      int order, std::span<const double> grid, double step = 1e-3);

struct DirectionSlope {
  std::vector<double> direction;
  double slope = 0.0;
  std::size_t samples_used = 0;
  bool skipped = false;
};

struct VanishingOrderResult {
  std::vector<DirectionSlope> directions;
  std::vector<double> epsilons;
  double min_slope = 0.0;
  double max_slope = 0.0;
  std::size_t skipped = 0;
  // Every sample of every direction fell below the floor.
  bool identically_small = false;
};

struct VanishingOrderOptions {
  std::size_t directions = 20;
  std::size_t samples = 10;
  double eps_min = 1e-3;
  double eps_max = 1e-1;
  // |F| at or below this is treated as zero.
  double floor = 1e-280;
  std::uint64_t seed = 1;
};

using PointFunction = std::function<double(std::span<const double>)>;

// Least-squares slope of log|F(eps u)| against log eps, per random unit u.
VanishingOrderResult vanishing_order_test(const PointFunction& f, std::size_t dim, const VanishingOrderOptions& opt);

// Flow tolerances fine enough that |F(eps_min u)| ~ eps_min^(M+1) is resolved.
FlowConfig vanishing_flow_config(const FlowConfig& cfg, double eps_min, int order);

struct InvolutionResult {
  double max_residual = 0.0;
  std::size_t points = 0;
};

// max |{Q_i o Psi, Q_j o Psi}| over i < j and the sample points.
InvolutionResult involution_test(const IntegrableSystem& system, const std::vector<std::vector<double>>& points);

struct ConservationResult {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> integrals;
  std::vector<double> energy;
  // max_t |Q_k(t) - Q_k(0)| / |Q_k(0)|, per integral
  std::vector<double> integral_drift;
  double energy_drift = 0.0;
  bool truncated = false;
  std::string truncation_reason;
};

struct ConservationOptions {
  double T = 50.0;
  double dt = 0.5;
  double rtol = 1e-10;
  double atol = 1e-12;
  // Run stops once |state| exceeds this.
  double escape_radius = 10.0;
};

// Integrates the Hamiltonian flow of G = N o Psi from p0; rows at t = i dt,
// i = 0..floor(T/dt).
ConservationResult conservation_test(const IntegrableSystem& system, std::span<const double> p0,
                                     const ConservationOptions& opt);

struct DecayFit {
  double rate = 0.0;
  double min_divisor = 0.0;
  std::vector<double> deltas;
  std::vector<double> norms;
};

// Least-squares exponential rate of the coefficient norm of K(delta).
DecayFit decay_rate_fit(const EvolvingPolynomial& ev, const AveragingProblem& problem, double from = 2.0,
                        double to = 12.0, std::size_t samples = 21);

std::vector<std::vector<double>> random_unit_directions(std::size_t dim, std::size_t count, std::uint64_t seed);
// Uniform in the ball of the given radius.
std::vector<std::vector<double>> random_ball_points(std::size_t dim, std::size_t count, double radius,
                                                    std::uint64_t seed);

// Worker count: AVINT_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();
// Calls f(i) for i in [0, count) on up to worker_count() threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& f);

struct VerifyOptions {
  std::uint64_t seed = 1;
  std::optional<double> delta_max;
  // Flow relative tolerance; absolute is 1e-2 of it.
  std::optional<double> rtol;
  ConservationOptions conservation;
  VanishingOrderOptions vanishing;
  std::size_t sample_points = 10;
  bool with_runtime = false;
};

// Every check that applies to the model, each appearing once.
VerificationReport run_verification(const ModelSpec& spec, int order, const VerifyOptions& opt);

}  // namespace avint
