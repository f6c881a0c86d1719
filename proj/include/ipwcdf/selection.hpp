#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

namespace ipwcdf {

using IndexPair = std::pair<int, int>;

// Main effects plus all pairwise entry-wise products x_j * x_k (j < k, in
// lexicographic order).
struct InteractionDesign {
  Eigen::MatrixXd x_main;
  Eigen::MatrixXd x_pair;
  std::vector<IndexPair> pair_index;  // 0-based, aligned with x_pair columns

  Eigen::Index n() const { return x_main.rows(); }
  Eigen::Index p() const { return x_main.cols(); }
  Eigen::Index n_pairs() const { return x_pair.cols(); }
};

// Throws DegenerateDesignError when p < 2.
InteractionDesign build_design(const Eigen::MatrixXd& x);

// Design with an empty pair block; used when p == 1.
InteractionDesign mains_only_design(const Eigen::MatrixXd& x);

// Result of the penalized least squares fit
//   ||y - X b - X2 t||^2 + lambda1 |b|_1 + lambda2 |t|_1
// on the centred design whose columns are scaled to squared norm n.
// Coefficients are reported on the original column scale.
struct GraphSelection {
  Eigen::VectorXd beta_hat;   // p
  Eigen::VectorXd theta_hat;  // C(p,2), aligned with InteractionDesign::pair_index
  double intercept = 0.0;
  std::vector<int> v_hat;        // support of beta_hat
  std::vector<IndexPair> e_hat;  // support of theta_hat
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double objective_value = 0.0;  // penalized objective in the standardized problem
  double rss = 0.0;
  int iterations = 0;
  bool converged = false;
  bool monotone = true;  // objective never increased across cycles

  int n_nonzero() const { return static_cast<int>(v_hat.size() + e_hat.size()); }
};

struct LassoOptions {
  double tol = 1e-7;  // max absolute standardized coefficient change per cycle
  int max_iter = 10000;
};

// Standardized problem shared by every fit on one design/response pair. The
// Gram matrix is formed once so coordinate updates cost O(#columns).
class LassoProblem {
 public:
  LassoProblem(const InteractionDesign& design, const Eigen::VectorXd& y);

  Eigen::Index n() const { return n_; }
  Eigen::Index n_main() const { return n_main_; }
  Eigen::Index n_cols() const { return gram_.rows(); }

  // Smallest lambda1 that zeroes every coefficient when lambda2 = ratio * lambda1.
  double lambda_max(double ratio) const;

  // Cyclic coordinate descent with exact soft-threshold updates, warm-started
  // from `start` (standardized scale) when given.
  GraphSelection fit(double lambda1, double lambda2, const LassoOptions& opt,
                     const Eigen::VectorXd* start = nullptr,
                     Eigen::VectorXd* std_coef_out = nullptr) const;

  // Penalized objective at standardized coefficients, from residuals.
  double objective(const Eigen::VectorXd& std_coef, double lambda1, double lambda2) const;

  // Standardized coefficient vector of a selection fitted on this design.
  Eigen::VectorXd standardized(const GraphSelection& sel) const;

  // Gradient of the squared loss at standardized coefficients: -2 Z'(y - Z b).
  Eigen::VectorXd loss_gradient(const Eigen::VectorXd& std_coef) const;

 private:
  GraphSelection finish(const Eigen::VectorXd& b, double lambda1, double lambda2) const;

  Eigen::Index n_ = 0;
  Eigen::Index n_main_ = 0;
  std::vector<IndexPair> pair_index_;
  Eigen::MatrixXd z_;  // centred, scaled design
  Eigen::VectorXd yc_;
  double y_mean_ = 0.0;
  Eigen::VectorXd mean_;
  Eigen::VectorXd scale_;  // 0 marks a constant column, excluded from the fit
  Eigen::MatrixXd gram_;
  Eigen::VectorXd zty_;
  double yty_ = 0.0;
};

GraphSelection fit_lasso(const InteractionDesign& design, const Eigen::VectorXd& y, double lambda1,
                         double lambda2, double tol = 1e-7, int max_iter = 10000);

struct LambdaPoint {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

// Log-spaced grid from lambda_max down to min_ratio * lambda_max with
// lambda2 = ratio * lambda1.
std::vector<LambdaPoint> default_lambda_grid(const LassoProblem& problem, double ratio = 1.0,
                                             int points = 20, double min_ratio = 0.01);

double bic(const GraphSelection& sel, Eigen::Index n);

// Fits every grid point (warm-started along decreasing lambda) and returns the
// BIC minimizer; ties go to the sparser model, then to the larger lambda1.
GraphSelection select_lambda(const InteractionDesign& design, const Eigen::VectorXd& y,
                             const std::vector<LambdaPoint>& grid,
                             const LassoOptions& opt = {});

// select_lambda over default_lambda_grid.
GraphSelection select_lambda_default(const InteractionDesign& design, const Eigen::VectorXd& y,
                                     double ratio = 1.0, const LassoOptions& opt = {});

nlohmann::json to_json(const GraphSelection& sel, const std::vector<std::string>& col_names = {});

}  // namespace ipwcdf
