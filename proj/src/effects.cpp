#include "ipwcdf/effects.hpp"

#include <cmath>
#include <sstream>

#include "ipwcdf/errors.hpp"
#include "ipwcdf/numeric.hpp"

namespace ipwcdf {

EstimandSpec EstimandSpec::qte(double q) {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("QTE level must lie in (0, 1)");
  return {EstimandKind::QTE, q};
}

std::string EstimandSpec::label() const {
  std::ostringstream os;
  switch (kind) {
    case EstimandKind::ATE:
      return "ATE";
    case EstimandKind::QTE:
      os << "QTE(" << param << ")";
      return os.str();
    case EstimandKind::DTE:
      os << "DTE(" << param << ")";
      return os.str();
  }
  return "?";
}

std::string method_name(Method m) {
  switch (m) {
    case Method::CDF: return "CDF";
    case Method::IPW: return "IPW";
    case Method::LD: return "LD";
    case Method::Firpo: return "Firpo";
  }
  return "?";
}

EffectReport make_report(EstimandSpec spec, Method method, double estimate,
                         std::optional<double> se) {
  EffectReport r{spec, method, estimate, se, std::nullopt, std::nullopt};
  if (se && std::isfinite(*se)) {
    r.ci95 = std::make_pair(estimate - 1.96 * *se, estimate + 1.96 * *se);
    if (*se > 0.0)
      r.p_value = two_sided_p(estimate / *se);
    else
      r.p_value = estimate == 0.0 ? 1.0 : 0.0;
  }
  return r;
}

double effect_cdf(const WeightedCdf& f1, const WeightedCdf& f0, const EstimandSpec& spec) {
  switch (spec.kind) {
    case EstimandKind::ATE: return f1.mean() - f0.mean();
    case EstimandKind::QTE: return f1.quantile(spec.param) - f0.quantile(spec.param);
    case EstimandKind::DTE: return f1.eval(spec.param) - f0.eval(spec.param);
  }
  return 0.0;
}

namespace {

void check_inputs(const Eigen::VectorXd& y, const Eigen::VectorXd& a, const Eigen::VectorXd& pi) {
  if (a.size() != y.size() || pi.size() != y.size())
    throw ValidationError("y, a and pi_hat must have equal length");
}

}  // namespace

double ate_ipw(const Eigen::VectorXd& y, const Eigen::VectorXd& a, const Eigen::VectorXd& pi_hat) {
  check_inputs(y, a, pi_hat);
  double treated = 0.0, control = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    treated += a[i] * y[i] / pi_hat[i];
    control += (1.0 - a[i]) * y[i] / (1.0 - pi_hat[i]);
  }
  const double n = static_cast<double>(y.size());
  return treated / n - control / n;
}

double ate_ld(const Eigen::VectorXd& y, const Eigen::VectorXd& a, const Eigen::VectorXd& pi_hat) {
  check_inputs(y, a, pi_hat);
  double num1 = 0.0, den1 = 0.0, num0 = 0.0, den0 = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double w1 = a[i] / pi_hat[i];
    const double w0 = (1.0 - a[i]) / (1.0 - pi_hat[i]);
    num1 += w1 * y[i];
    den1 += w1;
    num0 += w0 * y[i];
    den0 += w0;
  }
  if (den1 <= 0.0 || den0 <= 0.0) throw EmptyDataError("both arms must be non-empty");
  return num1 / den1 - num0 / den0;
}

double weighted_check_quantile(const std::vector<double>& values, const std::vector<double>& weights,
                               double q) {
  if (!(q > 0.0 && q < 1.0)) throw ValidationError("quantile level must lie in (0, 1)");
  // The check-loss minimizers form [lower, upper] around the weighted q-quantile;
  // the lower end is the inf of the weighted CDF at level q.
  return WeightedCdf::from_weighted(values, weights).quantile(q);
}

double qte_firpo(const Eigen::VectorXd& y, const Eigen::VectorXd& a, const Eigen::VectorXd& pi_hat,
                 double q) {
  check_inputs(y, a, pi_hat);
  std::vector<double> v1, w1, v0, w0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (a[i] == 1.0) {
      v1.push_back(y[i]);
      w1.push_back(1.0 / pi_hat[i]);
    } else {
      v0.push_back(y[i]);
      w0.push_back(1.0 / (1.0 - pi_hat[i]));
    }
  }
  if (v1.empty() || v0.empty()) throw EmptyDataError("both arms must be non-empty");
  return weighted_check_quantile(v1, w1, q) - weighted_check_quantile(v0, w0, q);
}

nlohmann::json to_json(const EffectReport& r) {
  nlohmann::json j;
  j["estimand"] = r.estimand.label();
  j["method"] = method_name(r.method);
  j["estimate"] = r.estimate;
  j["se"] = r.se ? nlohmann::json(*r.se) : nlohmann::json(nullptr);
  if (r.ci95)
    j["ci95"] = {r.ci95->first, r.ci95->second};
  else
    j["ci95"] = nullptr;
  j["p_value"] = r.p_value ? nlohmann::json(*r.p_value) : nlohmann::json(nullptr);
  return j;
}

}  // namespace ipwcdf
