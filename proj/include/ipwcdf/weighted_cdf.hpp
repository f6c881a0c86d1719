#pragma once

#include <Eigen/Dense>
#include <vector>

#include <json.hpp>

namespace ipwcdf {

enum class Arm { treated, control };

// Normalized weighted step function over the distinct observed outcomes of one
// arm. cum_weight ends exactly at 1; evaluation is right-continuous.
class WeightedCdf {
 public:
  // Atoms with positive weights; ties are merged by summing weights.
  static WeightedCdf from_weighted(std::vector<double> values, std::vector<double> weights);

  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& cum_weight() const { return cum_weight_; }
  // Unnormalized weight of each support point.
  const std::vector<double>& atom_weight() const { return atom_weight_; }
  double raw_weight_total() const { return raw_weight_total_; }
  std::size_t size() const { return support_.size(); }

  // Sum of normalized weights at support points <= y.
  double eval(double y) const;
  // Smallest support value whose cumulative weight is >= q, 0 < q < 1.
  double quantile(double q) const;
  // Weighted mean, computed as sum(w y) / sum(w).
  double mean() const;

 private:
  std::vector<double> support_;
  std::vector<double> cum_weight_;
  std::vector<double> atom_weight_;
  double raw_weight_total_ = 0.0;
};

// Hajek-normalized inverse-probability-weighted counterfactual CDF for one arm:
// weights a/pi (treated) or (1-a)/(1-pi) (control).
WeightedCdf build_ipw_cdf(const Eigen::VectorXd& y, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& pi_hat, Arm arm);

inline double cdf_eval(const WeightedCdf& f, double y) { return f.eval(y); }
inline double cdf_quantile(const WeightedCdf& f, double q) { return f.quantile(q); }
inline double cdf_mean(const WeightedCdf& f) { return f.mean(); }

nlohmann::json to_json(const WeightedCdf& f);

}  // namespace ipwcdf
