#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "avint/errors.hpp"
#include "avint/model_io.hpp"
#include "avint/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Partial normal forms by continuous averaging"};
  std::string command;
  std::string model_path;
  avint::RunConfig cfg;
  double delta_max = 0.0;
  double tol = 0.0;
  std::string points;

  app.add_option("command", command, "normal-form | generator | build-F | verify | trajectory")
      ->required()
      ->check(CLI::IsMember(avint::known_commands()));
  app.add_option("model", model_path, "model JSON file")->required();
  app.add_option("-M,--order", cfg.order, "working order M (>= 3)")->capture_default_str();
  auto* dm = app.add_option("--delta-max", delta_max, "flow end point (default 30 / min divisor)");
  auto* tl = app.add_option("--tol", tol, "flow relative tolerance");
  app.add_option("--seed", cfg.seed, "seed for random points and directions")->capture_default_str();
  app.add_option("--out", cfg.out, "report path (default stdout)");
  app.add_option("--points", points, "points 'x..,y..;x..,y..' for build-F and trajectory");
  app.add_option("--T", cfg.T, "trajectory length")->capture_default_str();
  app.add_option("--dt", cfg.dt, "trajectory sampling interval")->capture_default_str();
  app.add_flag("--runtime", cfg.with_runtime, "include check runtimes in verify reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return avint::kExitParse;
  }
  if (*dm) cfg.delta_max = delta_max;
  if (*tl) cfg.tol = tol;

  avint::ModelSpec spec;
  try {
    spec = avint::parse_model(model_path);
    cfg.points = avint::parse_points(points);
  } catch (const avint::ModelError& e) {
    std::cerr << "avint: invalid input\n";
    for (const auto& v : e.violations()) std::cerr << "  - " << v << "\n";
    return avint::kExitParse;
  }

  const avint::CommandResult result = avint::run_guarded(command, spec, cfg);
  if (result.exit_code != avint::kExitOk) {
    const auto& r = result.report;
    if (r.contains("error")) std::cerr << "avint: " << r["error"]["message"].get<std::string>() << "\n";
    else std::cerr << "avint: verification failed\n";
  }
  try {
    avint::emit_report(result.report, cfg.out);
  } catch (const std::exception& e) {
    std::cerr << "avint: " << e.what() << "\n";
    return avint::kExitFailure;
  }
  return result.exit_code;
}
