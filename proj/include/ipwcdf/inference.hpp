#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "ipwcdf/dataset.hpp"
#include "ipwcdf/effects.hpp"
#include "ipwcdf/propensity.hpp"
#include "ipwcdf/weighted_cdf.hpp"

namespace ipwcdf {

// Gaussian kernel density on weighted atoms.
class DensityEstimate {
 public:
  DensityEstimate(std::vector<double> atoms, std::vector<double> weights, double bandwidth);

  double operator()(double y) const { return eval(y); }
  double eval(double y) const;
  double bandwidth() const { return bandwidth_; }

 private:
  std::vector<double> atoms_;
  std::vector<double> weights_;  // normalized to sum 1
  double bandwidth_;
};

// Silverman bandwidth 0.9 min(sd, IQR/1.34) n_eff^(-1/5), n_eff = (sum w)^2 / sum w^2.
// Throws DegenerateDensityError for fewer than two atoms or zero spread.
DensityEstimate kde_density(const WeightedCdf& f);

using InfluenceCurve = std::function<double(double)>;

// Plug-in influence curve of the mean, quantile or probability functional at f.
// QTE needs `dens`; throws DegenerateDensityError when the density at the
// quantile is below 1e-6.
InfluenceCurve influence_curve(const EstimandSpec& spec, const WeightedCdf& f,
                               const DensityEstimate* dens = nullptr);

struct SandwichParts {
  Eigen::MatrixXd a_mat;  // (1/n) sum pi(1-pi) x x'
  Eigen::VectorXd b_vec;
  double c_scalar = 0.0;    // variance with the propensity treated as known
  double correction = 0.0;  // b' a^-1 b >= 0
  double variance = 0.0;    // c - correction
  double se = 0.0;          // sqrt(variance / n)
  bool pinv_used = false;
  bool negative_fallback = false;  // variance fell back to c_scalar

  double se_known_propensity(Eigen::Index n) const {
    return std::sqrt(c_scalar / static_cast<double>(n));
  }
};

// Sandwich for a difference of IPW arm functionals with a logistic propensity.
// `phi1` and `phi0` are evaluated at each unit's observed outcome in its own arm;
// `offset` is subtracted from the per-unit contribution before squaring.
SandwichParts ipw_sandwich(const Eigen::VectorXd& y, const Eigen::VectorXd& a,
                           const StarDesign& design, const Eigen::VectorXd& pi_hat,
                           const InfluenceCurve& phi1, const InfluenceCurve& phi0,
                           double offset = 0.0);

// Variance of T(F1) - T(F0) accounting for the estimated propensity.
SandwichParts sandwich_se(const EstimandSpec& spec, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& a, const StarDesign& design,
                          const PropensityFit& fit, const WeightedCdf& f1, const WeightedCdf& f0,
                          const DensityEstimate* dens1 = nullptr,
                          const DensityEstimate* dens0 = nullptr);

// Same correction for the unnormalized Horvitz-Thompson ATE.
SandwichParts ipw_ate_sandwich(const Eigen::VectorXd& y, const Eigen::VectorXd& a,
                               const StarDesign& design, const PropensityFit& fit);

using EstimationPipeline = std::function<std::vector<double>(const Dataset&)>;

struct BootstrapResult {
  std::vector<double> estimate;  // pipeline on the full data
  std::vector<double> se;
  std::vector<double> p_value;
  int reps = 0;
  int failures = 0;  // replicate draws that threw and were redrawn
};

// Nonparametric row bootstrap. Replicate r draws from a stream seeded by
// (seed, r) so results do not depend on the thread count.
BootstrapResult bootstrap_se(const EstimationPipeline& pipeline, const Dataset& d, int reps,
                             std::uint64_t seed, int threads = 1);

}  // namespace ipwcdf
