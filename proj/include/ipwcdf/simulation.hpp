#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipwcdf/dataset.hpp"
#include "ipwcdf/effects.hpp"
#include "ipwcdf/pipeline.hpp"
#include "ipwcdf/selection.hpp"

namespace ipwcdf {

enum class Scenario { Independent, Hub, Lattice };

std::string scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);  // throws ValidationError

// Covariate network of the scenario (0-based pairs, lexicographic). Lattice:
// triangles {1,2,3} and {4,5,6}. Hub: stars centred at X1 (spokes 2-6) and X7
// (spokes 8-12).
std::vector<IndexPair> network_edges(Scenario s);

struct ScenarioConfig {
  Scenario scenario = Scenario::Independent;
  int n = 500;
  int p = 12;
  double gamma0 = 1.0;
  double rho = 0.3;
  std::uint64_t seed = 1;

  // I + rho * adjacency; throws ValidationError unless positive definite.
  Eigen::MatrixXd covariance() const;
  std::vector<IndexPair> edges() const { return network_edges(scenario); }
  void validate() const;
};

using Rng = std::mt19937_64;

Eigen::MatrixXd gen_covariates(const ScenarioConfig& cfg, Rng& rng);

// Bernoulli draws with logit P(A=1|X) = 1 + X1 + X3 + sum_{(s,v) in E} Xs Xv.
Eigen::VectorXd gen_treatment(const Eigen::MatrixXd& x, const std::vector<IndexPair>& edges, Rng& rng);

struct OutcomeDraw {
  Eigen::VectorXd y;
  Eigen::VectorXd y1;
  Eigen::VectorXd y0;
};

// y(a) = gamma0 a + 1 + X1 + X3 + sum Xs Xv + eps with eps shared across arms.
OutcomeDraw gen_outcome(const Eigen::MatrixXd& x, const Eigen::VectorXd& a,
                        const std::vector<IndexPair>& edges, double gamma0, Rng& rng);

struct TruthRecord {
  std::vector<EstimandSpec> estimands;
  std::vector<double> true_effect;  // aligned with estimands
  std::vector<int> true_v{0, 2};
  std::vector<IndexPair> true_e;
  Eigen::VectorXd y1;
  Eigen::VectorXd y0;

  double truth(const EstimandSpec& spec) const;
};

// True effect of the scenario. DTE outside Scenario 1 uses a Monte Carlo
// oracle with `mc_draws` draws of Y(0) from a fixed stream.
std::vector<double> true_effects(const ScenarioConfig& cfg, const std::vector<EstimandSpec>& estimands,
                                 long mc_draws = 10'000'000);

struct SimulatedData {
  Dataset data;
  TruthRecord truth;
};

// One replicate drawn from the stream derive_seed(cfg.seed, replicate).
SimulatedData simulate_replicate(const ScenarioConfig& cfg, std::uint64_t replicate,
                                 const std::vector<EstimandSpec>& estimands,
                                 const std::vector<double>& true_effect);

// Nullopt components when a denominator is empty. SEN counts true zeros
// estimated as zero; SPE counts true nonzeros estimated as nonzero, both over
// the concatenated (beta, vec(Theta)) coefficient vector.
struct SelectionRates {
  std::optional<double> sen;
  std::optional<double> spe;
};
SelectionRates compute_sen_spe(const GraphSelection& sel, const TruthRecord& truth);

struct MetricsRow {
  std::string scenario;
  int n = 0;
  std::string method;
  std::string estimand;
  double truth = 0.0;
  int reps = 0;  // successful replicates contributing
  std::optional<double> sen, spe, bias, se, mse, cr;
  std::optional<double> mean_se_hat;  // average of the per-replicate standard errors
};

struct SimulationOptions {
  std::vector<EstimandSpec> estimands{EstimandSpec::ate()};
  std::vector<Method> methods;  // empty: all applicable
  PipelineOptions pipeline;     // estimands field is overwritten
  int threads = 1;
  long truth_mc_draws = 10'000'000;
  double max_failure_rate = 0.05;
};

struct SimulationResult {
  ScenarioConfig config;
  std::vector<MetricsRow> rows;
  int reps = 0;
  int failures = 0;
  std::vector<std::string> failure_messages;
  long sandwich_checks = 0;
  long sandwich_violations = 0;  // variance above the known-propensity plug-in
};

SimulationResult run_replications(const ScenarioConfig& cfg, int reps, const SimulationOptions& opt);

std::string metrics_csv(const std::vector<MetricsRow>& rows);
nlohmann::json metrics_json(const std::vector<MetricsRow>& rows);
// Markdown tables in the layout BIAS / S.E. / MSE / CR grouped by n and estimand.
std::string metrics_markdown(const std::vector<MetricsRow>& rows);

}  // namespace ipwcdf
