#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ipwcdf {

// Bad flags or configuration; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { json, csv, markdown };

struct RunConfig {
  std::string command;  // "simulate" or "analyze"

  // simulate
  std::string scenario = "independent";
  int n = 500;
  int p = 12;
  double gamma0 = 1.0;
  double rho = 0.3;
  int reps = 1000;
  long truth_draws = 10'000'000;

  // analyze
  std::string data;
  std::string outcome;
  std::string treatment;
  std::vector<std::string> confounders;
  int bootstrap = 10000;
  std::string qte_se = "sandwich";  // or "bootstrap"

  // shared
  std::uint64_t seed = 1;
  std::vector<double> q{0.2, 0.25, 0.5, 0.75, 0.8};
  std::vector<double> dte{-3.0, 0.0, 3.0};
  bool dte_at_mean = false;
  double clip_eps = 1e-3;
  double lambda_ratio = 1.0;
  std::string out = "ipwcdf_out";
  OutputFormat format = OutputFormat::markdown;
  int threads = 1;

  void validate() const;  // throws UsageError
  // Settings that determine the results (excludes threads, out and format).
  nlohmann::json resolved() const;
  std::string hash() const;  // FNV-1a of resolved().dump(), hex
};

// Applies the keys of a JSON config object; unknown keys are a UsageError.
void apply_config_json(RunConfig& cfg, const nlohmann::json& j);

std::vector<double> parse_number_list(const std::string& text, const std::string& what);

std::uint64_t fnv1a64(const std::string& bytes);

// Entry point behind the executable. Returns the process exit code:
// 0 success, 1 runtime failure, 2 usage or configuration error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace ipwcdf
