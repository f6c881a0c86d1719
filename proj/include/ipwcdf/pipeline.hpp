#pragma once

#include <optional>
#include <vector>

#include "ipwcdf/dataset.hpp"
#include "ipwcdf/effects.hpp"
#include "ipwcdf/inference.hpp"
#include "ipwcdf/propensity.hpp"
#include "ipwcdf/selection.hpp"
#include "ipwcdf/weighted_cdf.hpp"

namespace ipwcdf {

struct PipelineOptions {
  std::vector<EstimandSpec> estimands{EstimandSpec::ate()};
  double lambda_ratio = 1.0;
  int grid_points = 20;
  double grid_min_ratio = 0.01;
  LassoOptions lasso;
  LogisticOptions logistic;
  bool baselines = true;        // IPW/LD for ATE, Firpo for QTE
  bool standard_errors = true;  // sandwich SEs
};

struct EstimateRecord {
  EffectReport report;
  std::optional<SandwichParts> sandwich;
};

struct PipelineResult {
  GraphSelection selection;
  StarDesign star;
  PropensityFit fit;
  std::optional<StarDesign> full_design;  // mains-only propensity for the Firpo baseline
  std::optional<PropensityFit> full_fit;
  WeightedCdf f1;
  WeightedCdf f0;
  std::vector<EstimateRecord> estimates;
};

// Selection on (y, x), network-based propensity, IPW CDFs, point estimates for
// every requested estimand and method, plus sandwich SEs when requested.
PipelineResult run_pipeline(const Dataset& d, const PipelineOptions& opt);

// Point estimates only, in the order of PipelineResult::estimates.
std::vector<double> point_estimates(const Dataset& d, const PipelineOptions& opt);

GraphSelection select_graph(const Dataset& d, const PipelineOptions& opt);

}  // namespace ipwcdf
