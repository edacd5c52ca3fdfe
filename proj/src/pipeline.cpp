#include "avint/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "avint/averaging.hpp"
#include "avint/errors.hpp"
#include "avint/globalize.hpp"
#include "avint/model_io.hpp"
#include "avint/verify.hpp"

namespace avint {

using ojson = nlohmann::ordered_json;

const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> c = {"normal-form", "generator", "build-F", "verify", "trajectory"};
  return c;
}

namespace {

ojson number(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson vector_json(std::span<const double> v) {
  ojson a = ojson::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

ojson complex_terms(const ComplexPolynomial& p) {
  ojson a = ojson::array();
  for (const auto& [idx, c] : p.terms())
    a.push_back({{"alpha", idx.alpha}, {"beta", idx.beta}, {"re", number(c.real())}, {"im", number(c.imag())}});
  return a;
}

ojson real_terms(const ComplexPolynomial& p) {
  ojson a = ojson::array();
  for (const auto& [idx, c] : p.terms()) a.push_back({{"alpha", idx.alpha}, {"beta", idx.beta}, {"c", number(c.real())}});
  return a;
}

std::vector<std::string> invariant_names(const BlockLayout& layout) {
  std::vector<std::string> names(static_cast<std::size_t>(layout.n));
  for (int j = 0; j < layout.n1; ++j) {
    names[static_cast<std::size_t>(2 * j)] = "P" + std::to_string(j + 1);
    names[static_cast<std::size_t>(2 * j + 1)] = "R" + std::to_string(j + 1);
  }
  for (int k = 2 * layout.n1; k < layout.n2; ++k) names[static_cast<std::size_t>(k)] = "I" + std::to_string(k + 1);
  for (int l = layout.n2; l < layout.n; ++l) names[static_cast<std::size_t>(l)] = "J" + std::to_string(l + 1);
  return names;
}

FlowConfig flow_config(const AveragingProblem& problem, const RunConfig& cfg) {
  FlowConfig fc = default_flow_config(min_decay_rate(problem.mu, cfg.order));
  if (cfg.delta_max) {
    if (!(*cfg.delta_max > 0.0)) throw Error("--delta-max must be positive");
    fc.delta_max = *cfg.delta_max;
    fc.capped = false;
  }
  if (cfg.tol) {
    if (!(*cfg.tol > 0.0)) throw Error("--tol must be positive");
    fc.rtol = *cfg.tol;
    fc.atol = 1e-2 * *cfg.tol;
  }
  return fc;
}

ojson header(const std::string& command, const ModelSpec& spec, const RunConfig& cfg) {
  ojson r;
  r["schema_version"] = kReportSchemaVersion;
  r["command"] = command;
  r["order"] = cfg.order;
  r["seed"] = cfg.seed;
  r["model"] = model_to_json(spec);
  return r;
}

ojson spectrum_json(const AveragingProblem& problem, int order) {
  ojson mu = ojson::array();
  for (const auto& m : problem.mu.mu) mu.push_back({{"re", m.real()}, {"im", m.imag()}});
  const DivisorReport scan = divisor_scan(problem.mu, order);
  ojson s;
  s["mu"] = mu;
  s["divisors_scanned"] = scan.scanned;
  s["min_divisor"] = number(scan.min_nonzero_modulus);
  return s;
}

ojson flow_json(const FlowConfig& fc) {
  return {{"delta_max", fc.delta_max}, {"rtol", fc.rtol}, {"atol", fc.atol}, {"capped", fc.capped}};
}

std::vector<std::vector<double>> requested_points(const RunConfig& cfg, std::size_t dim, std::size_t fallback,
                                                  double radius) {
  if (cfg.points.empty()) return random_ball_points(dim, fallback, radius, cfg.seed);
  for (const auto& p : cfg.points)
    if (p.size() != dim) throw ModelError({"point of length " + std::to_string(p.size()) + " given, expected 2n = " +
                                           std::to_string(dim)});
  return cfg.points;
}

CommandResult normal_form_command(const ModelSpec& spec, const RunConfig& cfg) {
  const AveragingProblem problem = prepare_problem(spec);
  const EvolvingPolynomial ev = solve_triangular(problem.hstar_hat, problem.mu, cfg.order);
  const NormalForm nf = normal_form_limit(ev, problem);
  ojson r = header("normal-form", spec, cfg);
  r["spectrum"] = spectrum_json(problem, cfg.order);
  r["normal_form"]["complex"] = complex_terms(nf.hat);
  r["normal_form"]["real"] = real_terms(nf.real);
  const auto names = invariant_names(problem.theta.layout);
  ojson inv = ojson::array();
  for (const auto& [idx, c] : nf.invariants.poly.terms()) {
    inv.push_back({{"exponents", idx.alpha}, {"re", number(c.real())}, {"im", number(c.imag())}});
  }
  ojson quads = ojson::array();
  const auto q = invariant_quadratics(problem.theta.layout);
  for (std::size_t j = 0; j < q.size(); ++j) quads.push_back({{"name", names[j]}, {"polynomial", real_terms(q[j])}});
  r["normal_form"]["invariant_variables"] = quads;
  r["normal_form"]["invariants"] = inv;
  r["normal_form"]["reality_residual"] = number(nf.reality_residual);
  r["normal_form"]["invariant_residual"] = number(nf.invariant_residual);
  r["warnings"] = ev.warnings;
  return {r, kExitOk};
}

CommandResult generator_command(const ModelSpec& spec, const RunConfig& cfg) {
  const AveragingProblem problem = prepare_problem(spec);
  const EvolvingPolynomial ev = solve_triangular(problem.hstar_hat, problem.mu, cfg.order);
  ojson r = header("generator", spec, cfg);
  r["spectrum"] = spectrum_json(problem, cfg.order);
  ojson samples = ojson::array();
  bool all_zero = true;
  for (int i = 0; i <= 12; ++i) {
    const double delta = i;
    const ComplexPolynomial k = real_generator_at(ev, problem, delta);
    all_zero &= k.is_zero();
    samples.push_back({{"delta", delta}, {"norm", number(coefficient_norm(k))}, {"K", real_terms(k)}});
  }
  r["samples"] = samples;
  r["identically_zero"] = all_zero;
  const DecayFit fit = decay_rate_fit(ev, problem);
  r["decay_fit"] = {{"from", 2.0}, {"to", 12.0}, {"rate", number(fit.rate)}, {"min_divisor", number(fit.min_divisor)}};
  r["warnings"] = ev.warnings;
  return {r, kExitOk};
}

ojson vanishing_json(const VanishingOrderResult& v) {
  ojson dirs = ojson::array();
  for (const auto& d : v.directions)
    dirs.push_back({{"direction", vector_json(d.direction)},
                    {"slope", d.skipped ? ojson(nullptr) : number(d.slope)},
                    {"samples_used", d.samples_used},
                    {"skipped", d.skipped}});
  return {{"epsilons", vector_json(v.epsilons)},
          {"min_slope", number(v.min_slope)},
          {"max_slope", number(v.max_slope)},
          {"skipped", v.skipped},
          {"identically_small", v.identically_small},
          {"directions", dirs}};
}

CommandResult build_f_command(const ModelSpec& spec, const RunConfig& cfg) {
  const AveragingProblem problem = prepare_problem(spec);
  const EvolvingPolynomial ev = solve_triangular(problem.hstar_hat, problem.mu, cfg.order);
  const FlowConfig fc = flow_config(problem, cfg);
  const IntegrableSystem system = build_integrable_system(problem, ev, fc);
  const std::size_t dim = 2 * problem.mu.size();
  const auto pts = requested_points(cfg, dim, 5, 0.1);
  const ComplexPolynomial h = build_hamiltonian(spec);

  ojson r = header("build-F", spec, cfg);
  r["flow"] = flow_json(fc);
  ojson values = ojson::array();
  std::vector<ojson> rows(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    const double g = system.value(pts[i]);
    const double hv = evaluate_real(h, pts[i]);
    rows[i] = {{"point", vector_json(pts[i])}, {"G", number(g)}, {"H", number(hv)}, {"F", number(g - hv)}};
  });
  for (auto& row : rows) values.push_back(std::move(row));
  r["values"] = values;

  VanishingOrderOptions vo;
  vo.seed = cfg.seed;
  const IntegrableSystem tight(problem, system.normal_form(), system.generator(),
                               vanishing_flow_config(fc, vo.eps_min, cfg.order));
  const auto v = vanishing_order_test([&](std::span<const double> p) { return tight.perturbation(p); }, dim, vo);
  r["vanishing_order"] = vanishing_json(v);
  r["vanishing_order"]["threshold"] = cfg.order + 0.8;
  return {r, kExitOk};
}

CommandResult verify_command(const ModelSpec& spec, const RunConfig& cfg) {
  VerifyOptions opt;
  opt.seed = cfg.seed;
  opt.delta_max = cfg.delta_max;
  opt.rtol = cfg.tol;
  opt.conservation.T = cfg.T;
  opt.conservation.dt = cfg.dt;
  opt.with_runtime = cfg.with_runtime;
  const VerificationReport rep = run_verification(spec, cfg.order, opt);
  ojson r = header("verify", spec, cfg);
  ojson checks = ojson::array();
  for (const auto& c : rep.checks) {
    ojson j = {{"name", c.name},
               {"status", c.passed ? "pass" : "fail"},
               {"residual", number(c.residual)},
               {"tolerance", number(c.tolerance)},
               {"detail", c.detail}};
    if (cfg.with_runtime) j["runtime_seconds"] = c.runtime_seconds;
    checks.push_back(std::move(j));
  }
  r["checks"] = checks;
  r["passed"] = rep.passed();
  return {r, rep.passed() ? kExitOk : kExitVerification};
}

CommandResult trajectory_command(const ModelSpec& spec, const RunConfig& cfg) {
  const AveragingProblem problem = prepare_problem(spec);
  const EvolvingPolynomial ev = solve_triangular(problem.hstar_hat, problem.mu, cfg.order);
  const FlowConfig fc = flow_config(problem, cfg);
  const IntegrableSystem system = build_integrable_system(problem, ev, fc);
  const std::size_t dim = 2 * problem.mu.size();
  std::vector<double> p0;
  if (!cfg.points.empty()) {
    p0 = requested_points(cfg, dim, 1, 0.3).front();
  } else {
    p0 = random_unit_directions(dim, 1, cfg.seed).front();
    for (auto& v : p0) v *= 0.3;
  }
  ConservationOptions co;
  co.T = cfg.T;
  co.dt = cfg.dt;
  const ConservationResult res = conservation_test(system, p0, co);

  ojson r = header("trajectory", spec, cfg);
  r["flow"] = flow_json(fc);
  r["T"] = cfg.T;
  r["dt"] = cfg.dt;
  r["initial_point"] = vector_json(p0);
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < res.states.size(); ++i)
    rows.push_back({{"t", res.times[i]},
                    {"state", vector_json(res.states[i])},
                    {"integrals", vector_json(res.integrals[i])},
                    {"G", number(res.energy[i])}});
  r["rows"] = rows;
  r["integral_drift"] = vector_json(res.integral_drift);
  r["energy_drift"] = number(res.energy_drift);
  r["truncated"] = res.truncated;
  if (res.truncated) r["truncation_reason"] = res.truncation_reason;
  return {r, kExitOk};
}

ojson error_report(const std::string& command, const std::string& kind, const std::string& message) {
  ojson r;
  r["schema_version"] = kReportSchemaVersion;
  r["command"] = command;
  r["status"] = "error";
  r["error"] = {{"kind", kind}, {"message", message}};
  return r;
}

}  // namespace

CommandResult run_command(const std::string& command, const ModelSpec& spec, const RunConfig& cfg) {
  if (cfg.order < 3) throw ModelError({"order M must be at least 3"});
  if (!(cfg.dt > 0.0) || !(cfg.T >= 0.0)) throw ModelError({"trajectory needs --dt > 0 and --T >= 0"});
  if (command == "normal-form") return normal_form_command(spec, cfg);
  if (command == "generator") return generator_command(spec, cfg);
  if (command == "build-F") return build_f_command(spec, cfg);
  if (command == "verify") return verify_command(spec, cfg);
  if (command == "trajectory") return trajectory_command(spec, cfg);
  throw ModelError({"unknown command '" + command + "'"});
}

CommandResult run_guarded(const std::string& command, const ModelSpec& spec, const RunConfig& cfg) {
  try {
    return run_command(command, spec, cfg);
  } catch (const ResonanceError& e) {
    ojson r = error_report(command, "resonance", e.what());
    r["error"]["k"] = e.k();
    r["error"]["modulus"] = number(e.modulus());
    return {r, kExitResonance};
  } catch (const ModelError& e) {
    ojson r = error_report(command, "model", e.what());
    r["error"]["violations"] = e.violations();
    return {r, kExitParse};
  } catch (const TheoryViolation& e) {
    return {error_report(command, "theory", e.what()), kExitVerification};
  } catch (const FlowError& e) {
    return {error_report(command, "flow", e.what()), kExitVerification};
  } catch (const std::exception& e) {
    return {error_report(command, "internal", e.what()), kExitFailure};
  }
}

std::vector<std::vector<double>> parse_points(const std::string& text) {
  std::vector<std::vector<double>> pts;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> p;
    std::stringstream coords(item);
    std::string c;
    while (std::getline(coords, c, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        throw ModelError({"cannot parse point coordinate '" + c + "'"});
      }
      if (c.find_first_not_of(" \t", used) != std::string::npos)
        throw ModelError({"cannot parse point coordinate '" + c + "'"});
      p.push_back(v);
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

namespace {

void write_json(std::string& out, const ojson& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case ojson::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += inner + ojson(k).dump() + ": ";
        write_json(out, v, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case ojson::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const ojson& e) { return e.is_structured(); });
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += inner;
        write_json(out, v, indent + 1);
      }
      out += flat ? "]" : "\n" + pad + "]";
      return;
    }
    case ojson::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      // Keep floats recognisable as floats.
      if (std::string_view(buf).find_first_of(".en") == std::string_view::npos) out += ".0";
      return;
    }
    default: out += j.dump();
  }
}

}  // namespace

std::string serialize_report(const ojson& report) {
  std::string out;
  write_json(out, report, 0);
  out += "\n";
  return out;
}

void emit_report(const ojson& report, const std::string& path) {
  const std::string text = serialize_report(report);
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw Error("failed writing report to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text;
  out.close();
  if (!out) throw Error("failed writing report to " + path);
}

}  // namespace avint
