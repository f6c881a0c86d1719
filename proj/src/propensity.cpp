#include "ipwcdf/propensity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ipwcdf/errors.hpp"
#include "ipwcdf/numeric.hpp"

namespace ipwcdf {

namespace {

std::string column_label(const std::vector<std::string>& names, int j) {
  if (j < static_cast<int>(names.size())) return names[static_cast<std::size_t>(j)];
  return "X" + std::to_string(j + 1);
}

}  // namespace

StarDesign build_star_design(const Eigen::MatrixXd& x, std::vector<int> mains,
                             std::vector<IndexPair> pairs,
                             const std::vector<std::string>& col_names) {
  std::sort(mains.begin(), mains.end());
  std::sort(pairs.begin(), pairs.end());
  const int p = static_cast<int>(x.cols());
  for (const int r : mains)
    if (r < 0 || r >= p) throw ValidationError("selected main index out of range");
  for (const auto& [s, v] : pairs)
    if (s < 0 || v < 0 || s >= p || v >= p || s == v)
      throw ValidationError("selected pair index out of range");

  StarDesign d;
  d.k = static_cast<int>(mains.size());
  d.m = static_cast<int>(pairs.size());
  d.x_star.resize(x.rows(), 1 + d.k + d.m);
  d.x_star.col(0).setOnes();
  d.layout.push_back("(intercept)");
  Eigen::Index c = 1;
  for (const int r : mains) {
    d.x_star.col(c++) = x.col(r);
    d.layout.push_back(column_label(col_names, r));
  }
  for (const auto& [s, v] : pairs) {
    d.x_star.col(c++) = x.col(s).cwiseProduct(x.col(v));
    d.layout.push_back(column_label(col_names, s) + ":" + column_label(col_names, v));
  }
  d.mains = std::move(mains);
  d.pairs = std::move(pairs);
  return d;
}

StarDesign build_star_design(const Eigen::MatrixXd& x, const GraphSelection& sel,
                             const std::vector<std::string>& col_names) {
  return build_star_design(x, sel.v_hat, sel.e_hat, col_names);
}

StarDesign build_full_main_design(const Eigen::MatrixXd& x, const std::vector<std::string>& col_names) {
  std::vector<int> mains(static_cast<std::size_t>(x.cols()));
  for (int j = 0; j < static_cast<int>(x.cols()); ++j) mains[static_cast<std::size_t>(j)] = j;
  return build_star_design(x, std::move(mains), {}, col_names);
}

Eigen::VectorXd predict_propensity(const Eigen::VectorXd& eta, const StarDesign& design,
                                   double clip_eps) {
  if (eta.size() != design.cols()) throw ValidationError("coefficient length does not match design");
  const Eigen::VectorXd lin = design.x_star * eta;
  Eigen::VectorXd pi(lin.size());
  for (Eigen::Index i = 0; i < lin.size(); ++i)
    pi[i] = std::clamp(logistic(lin[i]), clip_eps, 1.0 - clip_eps);
  return pi;
}

Eigen::VectorXd predict_propensity(const PropensityFit& fit, const StarDesign& design,
                                   double clip_eps) {
  return predict_propensity(fit.eta_hat, design, clip_eps);
}

PropensityFit fit_logistic(const StarDesign& design, const Eigen::VectorXd& a,
                           const LogisticOptions& opt) {
  const Eigen::Index n = design.n();
  const Eigen::Index q = design.cols();
  if (a.size() != n) throw ValidationError("treatment length does not match design rows");
  const double n1 = a.sum();
  if (n1 <= 0.0 || n1 >= static_cast<double>(n)) throw ValidationError("both arms must be non-empty");

  // Standardize the non-intercept columns; the first column is the intercept.
  Eigen::MatrixXd z = design.x_star;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(q);
  for (Eigen::Index j = 1; j < q; ++j) {
    mean[j] = z.col(j).mean();
    z.col(j).array() -= mean[j];
    const double s = std::sqrt(z.col(j).squaredNorm() / static_cast<double>(n));
    if (s > 0.0) {
      scale[j] = s;
      z.col(j) /= s;
    }
  }

  auto loglik = [&](const Eigen::VectorXd& lin) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) ll += a[i] * lin[i] - log1p_exp(lin[i]);
    return ll;
  };

  PropensityFit fit;
  fit.clip_eps = opt.clip_eps;
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(q);
  const double abar = n1 / static_cast<double>(n);
  eta[0] = std::log(abar / (1.0 - abar));
  Eigen::VectorXd lin = z * eta;
  double ll = loglik(lin);
  fit.loglik_trace.push_back(ll);
  double last_improvement = std::numeric_limits<double>::infinity();
  Eigen::VectorXd pi(n), w(n);
  const Eigen::MatrixXd ridge = 1e-8 * Eigen::MatrixXd::Identity(q, q);

  int iter = 0;
  for (; iter < opt.max_iter; ++iter) {
    for (Eigen::Index i = 0; i < n; ++i) {
      pi[i] = logistic(lin[i]);
      w[i] = pi[i] * (1.0 - pi[i]);
    }
    const Eigen::VectorXd score = z.transpose() * (a - pi);
    if (score.lpNorm<Eigen::Infinity>() <= opt.tol * static_cast<double>(n) ||
        last_improvement < opt.tol) {
      fit.converged = true;
      break;
    }
    Eigen::MatrixXd hess = z.transpose() * w.asDiagonal() * z;
    Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-14) {
      llt.compute(hess + ridge * static_cast<double>(n));
      fit.ridge_used = true;
      if (llt.info() != Eigen::Success) break;
    }
    const Eigen::VectorXd step = llt.solve(score);
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd cand, cand_lin;
    double cand_ll = ll;
    for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
      cand = eta + t * step;
      cand_lin = z * cand;
      cand_ll = loglik(cand_lin);
      if (cand_ll >= ll) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No ascent direction left at working precision.
      fit.converged = score.lpNorm<Eigen::Infinity>() <= 1e-6 * static_cast<double>(n);
      break;
    }
    last_improvement = cand_ll - ll;
    eta = std::move(cand);
    lin = std::move(cand_lin);
    ll = cand_ll;
    fit.loglik_trace.push_back(ll);
    if (eta.tail(q - 1).lpNorm<Eigen::Infinity>() > opt.separation_bound) {
      fit.separated = true;
      break;
    }
  }
  fit.iterations = iter;
  if (fit.separated) fit.converged = false;

  Eigen::VectorXd eta_orig(q);
  eta_orig[0] = eta[0];
  for (Eigen::Index j = 1; j < q; ++j) {
    eta_orig[j] = eta[j] / scale[j];
    eta_orig[0] -= eta_orig[j] * mean[j];
  }
  fit.eta_hat = eta_orig;
  fit.loglik = ll;
  fit.pi_hat = predict_propensity(eta_orig, design, opt.clip_eps);
  const Eigen::VectorXd wt = fit.pi_hat.array() * (1.0 - fit.pi_hat.array());
  fit.info_matrix =
      design.x_star.transpose() * wt.asDiagonal() * design.x_star / static_cast<double>(n);
  return fit;
}

nlohmann::json to_json(const PropensityFit& fit, const StarDesign& design) {
  nlohmann::json j;
  auto coefs = nlohmann::json::array();
  for (Eigen::Index c = 0; c < fit.eta_hat.size(); ++c)
    coefs.push_back({{"label", design.layout[static_cast<std::size_t>(c)]}, {"coef", fit.eta_hat[c]}});
  j["coefficients"] = std::move(coefs);
  j["loglik"] = fit.loglik;
  j["converged"] = fit.converged;
  j["separated"] = fit.separated;
  j["ridge_used"] = fit.ridge_used;
  j["iterations"] = fit.iterations;
  j["clip_eps"] = fit.clip_eps;
  j["pi_min"] = fit.pi_hat.minCoeff();
  j["pi_max"] = fit.pi_hat.maxCoeff();
  return j;
}

}  // namespace ipwcdf
