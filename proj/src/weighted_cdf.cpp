#include "ipwcdf/weighted_cdf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ipwcdf/errors.hpp"

namespace ipwcdf {

WeightedCdf WeightedCdf::from_weighted(std::vector<double> values, std::vector<double> weights) {
  if (values.size() != weights.size()) throw ValidationError("values and weights differ in length");
  if (values.empty()) throw EmptyDataError("weighted CDF needs at least one atom");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });

  WeightedCdf f;
  for (const std::size_t i : order) {
    const double w = weights[i];
    if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("weights must be positive and finite");
    if (!std::isfinite(values[i])) throw ValidationError("non-finite outcome value");
    if (!f.support_.empty() && f.support_.back() == values[i]) {
      f.atom_weight_.back() += w;
    } else {
      f.support_.push_back(values[i]);
      f.atom_weight_.push_back(w);
    }
  }
  f.raw_weight_total_ = 0.0;
  f.cum_weight_.reserve(f.atom_weight_.size());
  double running = 0.0;
  for (const double w : f.atom_weight_) {
    running += w;
    f.cum_weight_.push_back(running);
  }
  f.raw_weight_total_ = running;
  for (double& c : f.cum_weight_) c /= running;
  // Division can leave the last entry one ulp away from 1.
  f.cum_weight_.back() = 1.0;
  for (std::size_t k = 1; k < f.cum_weight_.size(); ++k)
    f.cum_weight_[k] = std::max(f.cum_weight_[k], f.cum_weight_[k - 1]);
  return f;
}

double WeightedCdf::eval(double y) const {
  const auto it = std::upper_bound(support_.begin(), support_.end(), y);
  if (it == support_.begin()) return 0.0;
  if (it == support_.end()) return 1.0;
  return cum_weight_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double WeightedCdf::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("quantile level must lie in (0, 1)");
  const auto it = std::lower_bound(cum_weight_.begin(), cum_weight_.end(), q);
  return support_[static_cast<std::size_t>(it - cum_weight_.begin())];
}

double WeightedCdf::mean() const {
  double num = 0.0;
  for (std::size_t k = 0; k < support_.size(); ++k) num += atom_weight_[k] * support_[k];
  return num / raw_weight_total_;
}

WeightedCdf build_ipw_cdf(const Eigen::VectorXd& y, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& pi_hat, Arm arm) {
  if (a.size() != y.size() || pi_hat.size() != y.size())
    throw ValidationError("y, a and pi_hat must have equal length");
  std::vector<double> values, weights;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double pi = pi_hat[i];
    if (!(pi > 0.0 && pi < 1.0)) throw ValidationError("propensity scores must lie in (0, 1)");
    if (arm == Arm::treated && a[i] == 1.0) {
      values.push_back(y[i]);
      weights.push_back(1.0 / pi);
    } else if (arm == Arm::control && a[i] == 0.0) {
      values.push_back(y[i]);
      weights.push_back(1.0 / (1.0 - pi));
    }
  }
  if (values.empty())
    throw EmptyDataError(arm == Arm::treated ? "treated arm is empty" : "control arm is empty");
  return WeightedCdf::from_weighted(std::move(values), std::move(weights));
}

nlohmann::json to_json(const WeightedCdf& f) {
  return {{"support", f.support()},
          {"cum_weight", f.cum_weight()},
          {"raw_weight_total", f.raw_weight_total()}};
}

}  // namespace ipwcdf
