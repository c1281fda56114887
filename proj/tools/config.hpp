#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlfp/continuation.hpp"
#include "nlfp/models.hpp"
#include "nlfp/solver.hpp"

namespace nlfp::cli {

using json = nlohmann::json;

/// Invalid configuration; `key` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Read-only view of one JSON object that reports errors by key path.
class Reader {
 public:
  Reader(const json& j, std::string path);

  const std::string& path() const { return path_; }
  std::string key_path(const std::string& key) const;
  bool has(const std::string& key) const;
  /// Rejects keys outside `allowed`.
  void allow_only(std::initializer_list<const char*> allowed) const;

  Reader child(const std::string& key) const;
  std::vector<Reader> objects(const std::string& key) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  long integer(const std::string& key, long fallback) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const;
  const json& raw() const { return j_; }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  const json& at(const std::string& key) const;

  const json& j_;
  std::string path_;
};

struct RunConfig {
  json document;
  ProblemSpec problem;
  NewtonConfig newton;
  std::string study;
  std::filesystem::path output = "nlfp_out";
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

/// Parses and validates the whole document except the study block, which the
/// study itself reads. `study` is the subcommand name and must match the one
/// key of the "study" object.
RunConfig parse_run_config(const json& doc, const std::string& study);

KernelSpec parse_kernel(const Reader& r);
Kernel1D parse_kernel_1d(const Reader& r);
NewtonConfig parse_newton(const Reader& r);
GuessSuite parse_suite(const Reader& r);
ContinuationConfig parse_continuation(const Reader& study, const NewtonConfig& newton, std::size_t workers);
DiagramConfig parse_diagram(const Reader& study, const NewtonConfig& newton, std::size_t workers);

/// Initial guess described by a "guess" object for the given problem.
Field parse_guess(const Reader& r, const ProblemSpec& problem);

/// The study block, i.e. document["study"][name].
Reader study_block(const RunConfig& cfg);

}  // namespace nlfp::cli
