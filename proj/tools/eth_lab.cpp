#include "ethlab/pipeline.hpp"
#include "ethlab/spin_algebra.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

namespace {

std::string columns_help() {
  std::string out = "\nCSV columns (every file starts with '#' lines carrying config_hash and conventions):\n";
  const auto schema = ethlab::output_schema();
  for (const auto& [name, cols] : schema["csv"].items()) {
    out += "  " + name + ".csv:";
    for (const auto& c : cols) out += " " + c.get<std::string>();
    out += "\n";
  }
  out += "\nExit codes: 0 success, 1 validation failure, 2 configuration error or refusal.\n";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact diagonalization and eigenstate-thermalization statistics for SU(2)-symmetric spin chains"};
  app.footer(columns_help());

  std::string subcommand;
  std::string config_path;
  bool paper_defaults = false;
  std::optional<int> n;
  std::optional<std::string> cache_dir, out_dir;
  std::optional<int> threads;
  bool print_schema = false;
  bool cg_fault = false;

  app.add_option("subcommand", subcommand, "spectrum|gapstats|bands|hist|fscan|varratio|dos|validate|all")
      ->check(CLI::IsMember(ethlab::Pipeline::subcommands()));
  app.add_option("--config", config_path, "JSON config file (keys overlay the defaults)");
  app.add_flag("--paper-defaults", paper_defaults, "start from the reference parameters (N = 18)");
  app.add_option("--n", n, "number of qubits (overrides the config)");
  app.add_option("--cache", cache_dir, "spectrum cache directory");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads");
  app.add_flag("--schema", print_schema, "print the config and output schema as JSON and exit");
  app.add_flag("--inject-cg-sign-fault", cg_fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (print_schema) {
    std::cout << ethlab::output_schema().dump(2) << "\n";
    return 0;
  }
  if (subcommand.empty()) {
    std::cerr << "eth-lab: a subcommand is required (see --help)\n";
    return 2;
  }
  if (config_path.empty() && !paper_defaults) {
    std::cerr << "eth-lab: --config FILE or --paper-defaults is required\n";
    return 2;
  }

  std::unique_ptr<ethlab::testing::ScopedCgSignFault> fault;
  if (cg_fault) fault = std::make_unique<ethlab::testing::ScopedCgSignFault>();

  try {
    auto config = paper_defaults ? ethlab::PipelineConfig::paper_defaults() : ethlab::PipelineConfig::defaults();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ethlab::ConfigError("cannot read config file " + config_path);
      const auto j = nlohmann::json::parse(in, nullptr, false);
      if (j.is_discarded()) throw ethlab::ConfigError("config file " + config_path + " is not valid JSON");
      config.apply_json(j);
    }
    if (n) config.model.num_qubits = *n;
    if (cache_dir) config.cache_dir = *cache_dir;
    if (out_dir) config.out_dir = *out_dir;
    if (threads) config.threads = *threads;
    ethlab::Pipeline pipeline(config, std::cerr);
    return pipeline.run(subcommand);
  } catch (const ethlab::ConfigError& e) {
    std::cerr << "eth-lab: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "eth-lab: error: " << e.what() << "\n";
    return 2;
  }
}
