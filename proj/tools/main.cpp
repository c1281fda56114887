// nlfp: one subcommand per study, each driven by a JSON config.
// Exit codes: 0 success, 1 runtime failure, 2 invalid config or arguments,
// 3 Newton non-convergence in solve/nfp-solve. Failures print one JSON object
// on stderr.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "config.hpp"
#include "nlfp/parallel.hpp"
#include "studies.hpp"

namespace {

using nlfp::cli::json;

int report(int code, json body) {
  std::cerr << body.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stationary states of nonlocal Fokker-Planck equations by Newton-Krylov fixed-point solves"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out;
  std::optional<long> workers;
  std::optional<long> seed;
  const char* studies[] = {"solve", "convergence", "diagram", "critical", "basins", "stability", "cs-region", "nfp-solve"};
  for (const char* name : studies) {
    CLI::App* sub = app.add_subcommand(name, std::string("Run the ") + name + " study");
    sub->add_option("-c,--config", config_path, "JSON config file")->required();
    sub->add_option("-o,--out", out, "Output directory (overrides 'output')");
    sub->add_option("-w,--workers", workers, "Worker threads (overrides 'workers' and NLFP_WORKERS)");
    sub->add_option("-s,--seed", seed, "RNG seed (overrides 'seed')");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(2, {{"error", "invalid_arguments"}, {"key", "argv"}, {"message", e.what()}});
  }
  const std::string study = app.get_subcommands().front()->get_name();

  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw nlfp::cli::ConfigError("config", "cannot open " + config_path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw nlfp::cli::ConfigError("config", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw nlfp::cli::ConfigError("config", "top level must be an object");
    // Flags override top-level scalars before validation.
    if (out) doc["output"] = *out;
    if (seed) doc["seed"] = *seed;
    nlfp::cli::RunConfig cfg = nlfp::cli::parse_run_config(doc, study);
    if (workers) {
      if (*workers < 1) throw nlfp::cli::ConfigError("workers", "must be at least 1");
      cfg.workers = static_cast<std::size_t>(*workers);
    }
    const std::filesystem::path base = std::filesystem::absolute(config_path).parent_path();
    nlfp::cli::run_study(cfg, base);
  } catch (const nlfp::cli::ConfigError& e) {
    return report(2, {{"error", "invalid_config"}, {"key", e.key()}, {"message", e.what()}});
  } catch (const nlfp::cli::SolveFailure& e) {
    return report(3, {{"error", "not_converged"}, {"message", e.what()}, {"trace", e.trace()}});
  } catch (const std::exception& e) {
    return report(1, {{"error", "runtime"}, {"message", e.what()}});
  }
  return 0;
}
