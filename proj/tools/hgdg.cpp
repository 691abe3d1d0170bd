#include "hgdg/runner.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw hgdg::ConfigError("--levels expects comma-separated non-negative integers, got '" + text + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-gravitating flow solver: DGSEM Euler coupled to a hyperbolic gravity solver"};
  app.require_subcommand(1);

  std::string config_path, out_dir, levels_text;
  int threads = 0;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("config", config_path, "Config file (TOML)")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  run->add_option("--threads", threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  run->add_option("--override", overrides, "section.key=value, repeatable");

  auto* conv = app.add_subcommand("convergence", "Run a convergence study over mesh levels");
  conv->add_option("config", config_path, "Config file (TOML)")->required();
  conv->add_option("--levels", levels_text, "Comma-separated uniform levels, e.g. 2,3,4,5");
  conv->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  conv->add_option("--threads", threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  conv->add_option("--override", overrides, "section.key=value, repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  hgdg::RunConfig cfg;
  std::vector<int> levels;
  try {
    cfg = hgdg::load_run_config(config_path, overrides);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (threads > 0) cfg.threads = threads;
    if (conv->parsed()) {
      levels = levels_text.empty() ? cfg.convergence_levels : parse_levels(levels_text);
      if (levels.size() < 2) throw hgdg::ConfigError("convergence needs at least two levels");
    }
  } catch (const hgdg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (run->parsed()) {
      const std::string dir = cfg.output_dir;
      const auto result = hgdg::run_experiment(
          cfg, [&](double t, const hgdg::DGMesh& mesh, const hgdg::Field& u, const hgdg::Field& g) {
            hgdg::write_snapshot(dir, t, mesh, u, g);
          });
      hgdg::write_run_outputs(dir, cfg, result);
      std::cout << fmt::format("{}: t = {:.6g}, {} steps, {} gravity sub-cycles, {:.2f} s\n", result.experiment,
                               result.t_final, result.steps, result.total_subcycles, result.total_seconds);
      for (std::size_t v = 0; v < result.errors.size(); ++v)
        std::cout << fmt::format("  L2({}) = {:.3e}\n", result.variables[v], result.errors[v]);
    } else {
      const auto result = hgdg::run_convergence(cfg, levels);
      hgdg::write_convergence_outputs(cfg.output_dir, result);
      const auto& vars = result.runs.front().variables;
      for (std::size_t v = 0; v < vars.size(); ++v)
        std::cout << fmt::format("  avg EOC({}) = {:.2f}\n", vars[v], result.report.average[v]);
    }
  } catch (const hgdg::DivergenceError& e) {
    std::cerr << "solver diverged: " << e.what() << '\n';
    return kExitSolver;
  } catch (const hgdg::InadmissibleState& e) {
    std::cerr << "inadmissible state: " << e.what() << '\n';
    return kExitSolver;
  } catch (const hgdg::InvalidArgument& e) {
    std::cerr << "invalid setup: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
