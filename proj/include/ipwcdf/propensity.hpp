#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipwcdf/selection.hpp"

namespace ipwcdf {

// [1 | selected mains | selected pairwise products] built from the original
// confounders.
struct StarDesign {
  Eigen::MatrixXd x_star;
  int k = 0;  // selected mains
  int m = 0;  // selected interactions
  std::vector<int> mains;
  std::vector<IndexPair> pairs;
  std::vector<std::string> layout;

  Eigen::Index n() const { return x_star.rows(); }
  Eigen::Index cols() const { return x_star.cols(); }
};

StarDesign build_star_design(const Eigen::MatrixXd& x, const GraphSelection& sel,
                             const std::vector<std::string>& col_names = {});

// Same layout from explicit index lists (mains ascending, pairs lexicographic).
StarDesign build_star_design(const Eigen::MatrixXd& x, std::vector<int> mains,
                             std::vector<IndexPair> pairs,
                             const std::vector<std::string>& col_names = {});

// Intercept plus every main effect, no selection.
StarDesign build_full_main_design(const Eigen::MatrixXd& x,
                                  const std::vector<std::string>& col_names = {});

struct LogisticOptions {
  double tol = 1e-10;  // log-likelihood improvement
  int max_iter = 100;
  double clip_eps = 1e-3;
  double separation_bound = 30.0;  // on the standardized coefficient scale
};

struct PropensityFit {
  Eigen::VectorXd eta_hat;
  Eigen::VectorXd pi_hat;  // clipped to [clip_eps, 1 - clip_eps]
  double loglik = 0.0;
  bool converged = false;
  bool ridge_used = false;
  bool separated = false;
  int iterations = 0;
  double clip_eps = 1e-3;
  Eigen::MatrixXd info_matrix;       // (1/n) sum pi(1-pi) x x'
  std::vector<double> loglik_trace;  // one entry per accepted step, starting value first
};

// Newton-Raphson maximization of the Bernoulli likelihood with step halving.
PropensityFit fit_logistic(const StarDesign& design, const Eigen::VectorXd& a,
                           const LogisticOptions& opt = {});

Eigen::VectorXd predict_propensity(const Eigen::VectorXd& eta, const StarDesign& design,
                                   double clip_eps);
Eigen::VectorXd predict_propensity(const PropensityFit& fit, const StarDesign& design,
                                   double clip_eps);

nlohmann::json to_json(const PropensityFit& fit, const StarDesign& design);

}  // namespace ipwcdf
