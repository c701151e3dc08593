// kharm <command> --config <path> [--out <prefix>] [--seed <int>]
//
// Exit status: 0 all checks pass, 1 a check or module failed, 2 usage or
// config error.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "kharm/cli/run.hpp"

namespace {

int run_cli(int argc, char** argv) {
  using namespace kharm::cli;
  CLI::App app{"k-harmonic maps toolkit"};
  app.set_version_flag("--version", std::string(kToolVersion));
  std::string command, config_path, out;
  std::optional<std::uint64_t> seed;
  app.add_option("command", command, "tension | energy | ktension | flow | verify | classify | sweep")
      ->required();
  app.add_option("--config", config_path, "run configuration file")->required();
  app.add_option("--out", out, "output prefix (default: out/<config name>)");
  app.add_option("--seed", seed, "overrides the config seed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto cmd = parse_command(command);
  if (!cmd) {
    std::cerr << "error: unknown command '" << command << "'\n";
    return 2;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    if (cfg.command && *cfg.command != *cmd) {
      std::cerr << "error: config " << config_path << " is for command '" << to_string(*cfg.command)
                << "', not '" << command << "'\n";
      return 2;
    }
    cfg.command = cmd;
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.out = out;
    if (cfg.out.empty()) cfg.out = (std::filesystem::path("out") / std::filesystem::path(config_path).stem()).string();
    validate(cfg);
  } catch (const kharm::ParseError& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  Bundle bundle;
  try {
    bundle = run(cfg);
  } catch (const kharm::ParseError& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << config_path << ": invalid input: " << e.what() << "\n";
    return 2;
  }
  try {
    emit(bundle, cfg.out);
  } catch (const std::exception& e) {
    std::cerr << "error: cannot write outputs: " << e.what() << "\n";
    return 1;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (const auto& c : bundle.run.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << csv_number(c.value) << ' '
              << c.relation << ' ' << csv_number(c.limit) << '\n';
  if (!bundle.run.error.empty()) std::cerr << "error: " << command << " failed: " << bundle.run.error << "\n";
  std::cout << command << ": " << (bundle.passed() ? "pass" : "FAIL") << " -> " << cfg.out
            << ".report.json\n";
  std::cerr << "wall clock " << secs << " s\n";
  return bundle.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
