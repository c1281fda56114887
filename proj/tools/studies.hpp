#pragma once

#include <filesystem>
#include <stdexcept>

#include "config.hpp"

namespace nlfp::cli {

/// Newton did not converge in the solve study; `trace` is the iteration history.
class SolveFailure : public std::runtime_error {
 public:
  SolveFailure(const std::string& message, json trace) : std::runtime_error(message), trace_(std::move(trace)) {}
  const json& trace() const { return trace_; }

 private:
  json trace_;
};

/// Runs cfg.study and writes its artifacts under cfg.output. `base_dir` resolves
/// relative file references in the config.
void run_study(const RunConfig& cfg, const std::filesystem::path& base_dir);

}  // namespace nlfp::cli
