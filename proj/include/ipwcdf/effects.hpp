#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "ipwcdf/weighted_cdf.hpp"

namespace ipwcdf {

enum class EstimandKind { ATE, QTE, DTE };

struct EstimandSpec {
  EstimandKind kind = EstimandKind::ATE;
  double param = 0.0;  // quantile level for QTE, evaluation point for DTE

  static EstimandSpec ate() { return {EstimandKind::ATE, 0.0}; }
  static EstimandSpec qte(double q);  // throws unless 0 < q < 1
  static EstimandSpec dte(double y) { return {EstimandKind::DTE, y}; }

  std::string label() const;  // "ATE", "QTE(0.25)", "DTE(-3)"
  bool operator==(const EstimandSpec&) const = default;
};

enum class Method { CDF, IPW, LD, Firpo };

std::string method_name(Method m);

struct EffectReport {
  EstimandSpec estimand;
  Method method = Method::CDF;
  double estimate = 0.0;
  std::optional<double> se;
  std::optional<std::pair<double, double>> ci95;
  std::optional<double> p_value;
};

// Fills ci95 = estimate -/+ 1.96 se and the two-sided normal p-value.
EffectReport make_report(EstimandSpec spec, Method method, double estimate,
                         std::optional<double> se);

// T(F1) - T(F0) for the mean, quantile or probability functional.
double effect_cdf(const WeightedCdf& f1, const WeightedCdf& f0, const EstimandSpec& spec);

// Horvitz-Thompson difference (1/n) sum a y / pi - (1/n) sum (1-a) y / (1-pi).
double ate_ipw(const Eigen::VectorXd& y, const Eigen::VectorXd& a, const Eigen::VectorXd& pi_hat);

// Hajek-normalized difference of weighted arm means.
double ate_ld(const Eigen::VectorXd& y, const Eigen::VectorXd& a, const Eigen::VectorXd& pi_hat);

// Arm-wise minimizer of the weighted check loss (smallest minimizing atom),
// treated minus control.
double qte_firpo(const Eigen::VectorXd& y, const Eigen::VectorXd& a, const Eigen::VectorXd& pi_hat,
                 double q);

// Smallest value minimizing sum w_i rho_q(v_i - xi); closed form.
double weighted_check_quantile(const std::vector<double>& values, const std::vector<double>& weights,
                               double q);

nlohmann::json to_json(const EffectReport& r);

}  // namespace ipwcdf
