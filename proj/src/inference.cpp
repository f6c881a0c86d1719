#include "ipwcdf/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ipwcdf/errors.hpp"
#include "ipwcdf/numeric.hpp"
#include "ipwcdf/parallel.hpp"

namespace ipwcdf {

DensityEstimate::DensityEstimate(std::vector<double> atoms, std::vector<double> weights,
                                 double bandwidth)
    : atoms_(std::move(atoms)), weights_(std::move(weights)), bandwidth_(bandwidth) {
  if (atoms_.size() != weights_.size() || atoms_.empty())
    throw ValidationError("density needs matching, non-empty atoms and weights");
  if (!(bandwidth_ > 0.0)) throw DegenerateDensityError("bandwidth must be positive");
  double total = 0.0;
  for (const double w : weights_) total += w;
  for (double& w : weights_) w /= total;
}

double DensityEstimate::eval(double y) const {
  const double inv_h = 1.0 / bandwidth_;
  double acc = 0.0;
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    const double u = (y - atoms_[k]) * inv_h;
    if (std::fabs(u) < 40.0) acc += weights_[k] * std::exp(-0.5 * u * u);
  }
  return acc * inv_h * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
}

DensityEstimate kde_density(const WeightedCdf& f) {
  if (f.size() < 2) throw DegenerateDensityError("density estimate needs at least two atoms");
  const auto& atoms = f.support();
  const auto& w = f.atom_weight();
  const double total = f.raw_weight_total();
  const double mu = f.mean();
  double var = 0.0, sum_sq = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    var += w[k] * (atoms[k] - mu) * (atoms[k] - mu);
    sum_sq += w[k] * w[k];
  }
  const double sd = std::sqrt(var / total);
  const double iqr = f.quantile(0.75) - f.quantile(0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  if (!(spread > 0.0)) throw DegenerateDensityError("sample has zero spread");
  const double n_eff = total * total / sum_sq;
  const double h = 0.9 * spread * std::pow(n_eff, -0.2);
  return DensityEstimate(atoms, w, h);
}

InfluenceCurve influence_curve(const EstimandSpec& spec, const WeightedCdf& f,
                               const DensityEstimate* dens) {
  switch (spec.kind) {
    case EstimandKind::ATE: {
      const double mu = f.mean();
      return [mu](double y) { return y - mu; };
    }
    case EstimandKind::QTE: {
      if (!dens) throw DegenerateDensityError("quantile influence curve needs a density estimate");
      const double q = spec.param;
      const double xi = f.quantile(q);
      const double fx = dens->eval(xi);
      if (!(fx >= 1e-6)) throw DegenerateDensityError("density at the quantile is below 1e-6");
      return [q, xi, fx](double y) { return (q - (y <= xi ? 1.0 : 0.0)) / fx; };
    }
    case EstimandKind::DTE: {
      const double t = spec.param;
      const double ft = f.eval(t);
      return [t, ft](double y) { return (y <= t ? 1.0 : 0.0) - ft; };
    }
  }
  throw ValidationError("unknown estimand");
}

SandwichParts ipw_sandwich(const Eigen::VectorXd& y, const Eigen::VectorXd& a,
                           const StarDesign& design, const Eigen::VectorXd& pi_hat,
                           const InfluenceCurve& phi1, const InfluenceCurve& phi0, double offset) {
  const Eigen::Index n = y.size();
  if (a.size() != n || pi_hat.size() != n || design.n() != n)
    throw ValidationError("sandwich inputs have inconsistent lengths");
  const Eigen::Index q = design.cols();
  const double dn = static_cast<double>(n);

  SandwichParts s;
  s.a_mat = Eigen::MatrixXd::Zero(q, q);
  s.b_vec = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd w(n);
  double c = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pi = pi_hat[i];
    w[i] = pi * (1.0 - pi);
    double contrib, b_weight;
    if (a[i] == 1.0) {
      const double u = phi1(y[i]);
      contrib = u / pi - offset;
      b_weight = u * (1.0 - pi) / pi;
    } else {
      const double u = phi0(y[i]);
      contrib = -u / (1.0 - pi) - offset;
      b_weight = u * pi / (1.0 - pi);
    }
    c += contrib * contrib;
    s.b_vec.noalias() += b_weight * design.x_star.row(i).transpose();
  }
  s.a_mat.selfadjointView<Eigen::Lower>().rankUpdate(design.x_star.transpose() *
                                                     w.cwiseSqrt().asDiagonal());
  s.a_mat.triangularView<Eigen::StrictlyUpper>() = s.a_mat.transpose();
  s.a_mat /= dn;
  s.b_vec /= dn;
  s.c_scalar = c / dn;

  // b' A^+ b through the eigendecomposition keeps the correction nonnegative.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.a_mat);
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double cutoff = 1e-12 * std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
  const Eigen::VectorXd proj = eig.eigenvectors().transpose() * s.b_vec;
  double corr = 0.0;
  for (Eigen::Index k = 0; k < q; ++k) {
    if (lam[k] > cutoff)
      corr += proj[k] * proj[k] / lam[k];
    else
      s.pinv_used = true;
  }
  s.correction = corr;
  s.variance = s.c_scalar - corr;
  if (s.variance < 0.0) {
    s.variance = s.c_scalar;
    s.negative_fallback = true;
  }
  s.se = std::sqrt(s.variance / dn);
  return s;
}

SandwichParts sandwich_se(const EstimandSpec& spec, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& a, const StarDesign& design,
                          const PropensityFit& fit, const WeightedCdf& f1, const WeightedCdf& f0,
                          const DensityEstimate* dens1, const DensityEstimate* dens0) {
  const InfluenceCurve phi1 = influence_curve(spec, f1, dens1);
  const InfluenceCurve phi0 = influence_curve(spec, f0, dens0);
  return ipw_sandwich(y, a, design, fit.pi_hat, phi1, phi0, 0.0);
}

SandwichParts ipw_ate_sandwich(const Eigen::VectorXd& y, const Eigen::VectorXd& a,
                               const StarDesign& design, const PropensityFit& fit) {
  const double tau = ate_ipw(y, a, fit.pi_hat);
  const InfluenceCurve raw = [](double v) { return v; };
  return ipw_sandwich(y, a, design, fit.pi_hat, raw, raw, tau);
}

BootstrapResult bootstrap_se(const EstimationPipeline& pipeline, const Dataset& d, int reps,
                             std::uint64_t seed, int threads) {
  if (reps < 2) throw ValidationError("bootstrap needs at least 2 replicates");
  BootstrapResult out;
  out.reps = reps;
  out.estimate = pipeline(d);
  const std::size_t k = out.estimate.size();
  const auto n = static_cast<std::size_t>(d.n());
  const int max_failures = reps / 10;

  std::vector<std::vector<double>> draws(static_cast<std::size_t>(reps));
  std::vector<int> failures(static_cast<std::size_t>(reps), 0);
  std::atomic<int> total_failures{0};
  parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
    std::mt19937_64 rng(derive_seed(seed, r));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<Eigen::Index> rows(n);
    for (;;) {
      for (auto& row : rows) row = static_cast<Eigen::Index>(pick(rng));
      try {
        auto est = pipeline(d.subset(rows));
        if (est.size() != k) throw EstimationError("pipeline returned a different number of estimates");
        draws[r] = std::move(est);
        return;
      } catch (const EstimationError&) {
        throw;
      } catch (const std::exception&) {
        ++failures[r];
        if (++total_failures > max_failures)
          throw EstimationError("more than 10% of bootstrap replicates failed");
      }
    }
  });
  for (const int f : failures) out.failures += f;

  out.se.assign(k, 0.0);
  out.p_value.assign(k, 1.0);
  for (std::size_t e = 0; e < k; ++e) {
    double mean = 0.0;
    for (const auto& row : draws) mean += row[e];
    mean /= reps;
    double ss = 0.0;
    for (const auto& row : draws) ss += (row[e] - mean) * (row[e] - mean);
    out.se[e] = std::sqrt(ss / (reps - 1));
    const double est = out.estimate[e];
    if (out.se[e] > 0.0)
      out.p_value[e] = two_sided_p(est / out.se[e]);
    else
      out.p_value[e] = est == 0.0 ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace ipwcdf
