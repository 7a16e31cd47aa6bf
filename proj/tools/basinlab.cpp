#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "basinlab/config.hpp"
#include "basinlab/errors.hpp"
#include "basinlab/format.hpp"
#include "basinlab/parallel.hpp"
#include "basinlab/runner.hpp"
#include "basinlab/skew.hpp"

using namespace basinlab;

namespace {

void print_errors(const std::exception& e) {
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) {
    for (const auto& msg : ce->errors()) std::cerr << "error: " << msg << "\n";
  } else {
    std::cerr << "error: " << e.what() << "\n";
  }
}

int cmd_presets() {
  for (const auto& p : skew::presets()) {
    std::cout << p.name << "\n  " << p.summary << "\n";
    for (const auto& pi : p.params) {
      std::cout << "    " << pi.name << " = " << format_real(pi.default_value) << (pi.integer ? " (integer)" : "")
                << "  " << pi.help << "\n";
    }
    std::cout << "  counterexample:";
    for (const auto& [k, v] : p.counterexample) std::cout << " " << k << "=" << format_real(v);
    std::cout << "\n";
  }
  return runner::kOk;
}

int cmd_validate(const std::string& path) {
  try {
    const auto cfg = config::load_config(path);
    for (const auto& c : cfg.checks) {
      std::cout << "pass  " << c.name << "  (witness " << format_real(c.witness) << ")\n";
    }
    std::cout << "config ok: preset " << cfg.preset << ", analysis " << config::analysis_name(cfg.analysis) << "\n";
    return runner::kOk;
  } catch (const std::exception& e) {
    print_errors(e);
    return runner::exit_code_for(e);
  }
}

int cmd_run(const std::string& path, const std::optional<std::uint64_t>& seed, const std::optional<std::string>& out) {
  try {
    auto cfg = config::load_config(path);
    if (seed) cfg.seed = *seed;
    if (out) cfg.output_dir = *out;
    const unsigned workers = resolve_workers(cfg.workers);
    const auto result = runner::run(cfg, workers);
    std::cout << result.summary.dump(2) << "\n";
    std::cerr << "wrote " << result.manifest_path << "\n";
    return result.exit_code;
  } catch (const std::exception& e) {
    print_errors(e);
    return runner::exit_code_for(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"basinlab: seeded experiments on skew products with intermingled basins"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run the analysis described by a config file");
  std::string run_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  run->add_option("config", run_path, "config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "override [run] seed");
  run->add_option("--out", out, "override [run] output directory");

  app.add_subcommand("presets", "list presets and their parameters");

  auto* validate = app.add_subcommand("validate", "parse a config and run the construction checks only");
  std::string validate_path;
  validate->add_option("config", validate_path, "config file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : runner::kUsage;
  }
  if (run->parsed()) return cmd_run(run_path, seed, out);
  if (validate->parsed()) return cmd_validate(validate_path);
  return cmd_presets();
}
