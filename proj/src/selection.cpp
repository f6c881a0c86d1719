#include "ipwcdf/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ipwcdf/errors.hpp"

namespace ipwcdf {

namespace {

InteractionDesign make_design(const Eigen::MatrixXd& x, bool with_pairs) {
  InteractionDesign d;
  d.x_main = x;
  const Eigen::Index p = x.cols();
  const Eigen::Index pairs = with_pairs ? p * (p - 1) / 2 : 0;
  d.x_pair.resize(x.rows(), pairs);
  d.pair_index.reserve(static_cast<std::size_t>(pairs));
  if (with_pairs) {
    Eigen::Index c = 0;
    for (int j = 0; j < p; ++j) {
      for (int k = j + 1; k < p; ++k) {
        d.x_pair.col(c++) = x.col(j).cwiseProduct(x.col(k));
        d.pair_index.emplace_back(j, k);
      }
    }
  }
  return d;
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace

InteractionDesign build_design(const Eigen::MatrixXd& x) {
  if (x.cols() < 2)
    throw DegenerateDesignError("interaction design needs at least 2 confounders, got " +
                                std::to_string(x.cols()));
  return make_design(x, true);
}

InteractionDesign mains_only_design(const Eigen::MatrixXd& x) { return make_design(x, false); }

LassoProblem::LassoProblem(const InteractionDesign& design, const Eigen::VectorXd& y)
    : n_(design.n()), n_main_(design.p()), pair_index_(design.pair_index) {
  if (y.size() != n_) throw ValidationError("response length does not match design rows");
  if (n_ < 2) throw EmptyDataError("lasso needs at least 2 rows");
  const Eigen::Index cols = design.p() + design.n_pairs();
  z_.resize(n_, cols);
  z_ << design.x_main, design.x_pair;
  mean_ = z_.colwise().mean().transpose();
  scale_.resize(cols);
  const double dn = static_cast<double>(n_);
  for (Eigen::Index j = 0; j < cols; ++j) {
    z_.col(j).array() -= mean_[j];
    const double s = std::sqrt(z_.col(j).squaredNorm() / dn);
    if (s > 1e-12 * (1.0 + std::fabs(mean_[j]))) {
      scale_[j] = s;
      z_.col(j) /= s;
    } else {
      scale_[j] = 0.0;
      z_.col(j).setZero();
    }
  }
  y_mean_ = y.mean();
  yc_ = y.array() - y_mean_;
  gram_ = Eigen::MatrixXd::Zero(cols, cols);
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(z_.transpose());
  gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
  zty_ = z_.transpose() * yc_;
  yty_ = yc_.squaredNorm();
}

double LassoProblem::lambda_max(double ratio) const {
  double main_max = 0.0, pair_max = 0.0;
  for (Eigen::Index j = 0; j < n_cols(); ++j) {
    double& slot = j < n_main_ ? main_max : pair_max;
    slot = std::max(slot, 2.0 * std::fabs(zty_[j]));
  }
  if (ratio <= 0.0 || n_cols() == n_main_) return main_max;
  return std::max(main_max, pair_max / ratio);
}

double LassoProblem::objective(const Eigen::VectorXd& b, double lambda1, double lambda2) const {
  const double rss = (yc_ - z_ * b).squaredNorm();
  return rss + lambda1 * b.head(n_main_).lpNorm<1>() +
         lambda2 * b.tail(n_cols() - n_main_).lpNorm<1>();
}

Eigen::VectorXd LassoProblem::loss_gradient(const Eigen::VectorXd& b) const {
  return -2.0 * (z_.transpose() * (yc_ - z_ * b));
}

Eigen::VectorXd LassoProblem::standardized(const GraphSelection& sel) const {
  Eigen::VectorXd b(n_cols());
  b << sel.beta_hat, sel.theta_hat;
  return b.cwiseProduct(scale_);
}

GraphSelection LassoProblem::fit(double lambda1, double lambda2, const LassoOptions& opt,
                                 const Eigen::VectorXd* start, Eigen::VectorXd* std_coef_out) const {
  if (lambda1 < 0.0 || lambda2 < 0.0) throw ValidationError("lambda values must be nonnegative");
  if (!(opt.tol > 0.0)) throw ValidationError("tolerance must be positive");
  const Eigen::Index cols = n_cols();
  Eigen::VectorXd b = start ? *start : Eigen::VectorXd::Zero(cols);
  if (b.size() != cols) throw ValidationError("warm start has the wrong length");
  for (Eigen::Index j = 0; j < cols; ++j)
    if (scale_[j] == 0.0) b[j] = 0.0;
  Eigen::VectorXd gb = gram_ * b;

  auto penalty = [&](const Eigen::VectorXd& v) {
    return lambda1 * v.head(n_main_).lpNorm<1>() + lambda2 * v.tail(cols - n_main_).lpNorm<1>();
  };
  auto smooth = [&] { return yty_ - 2.0 * zty_.dot(b) + b.dot(gb); };

  double obj = smooth() + penalty(b);
  bool converged = false;
  bool monotone = true;
  int iter = 0;
  while (iter < opt.max_iter) {
    ++iter;
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double gjj = gram_(j, j);
      if (gjj <= 0.0) continue;
      const double lam = j < n_main_ ? lambda1 : lambda2;
      const double r = zty_[j] - gb[j] + gjj * b[j];
      const double updated = soft_threshold(r, 0.5 * lam) / gjj;
      const double delta = updated - b[j];
      if (delta != 0.0) {
        b[j] = updated;
        gb.noalias() += delta * gram_.col(j);
        max_change = std::max(max_change, std::fabs(delta));
      }
    }
    const double next = smooth() + penalty(b);
    if (next > obj + 1e-10 * std::max(1.0, std::fabs(obj))) monotone = false;
    obj = next;
    if (max_change < opt.tol) {
      converged = true;
      break;
    }
  }
  GraphSelection sel = finish(b, lambda1, lambda2);
  sel.iterations = iter;
  sel.converged = converged;
  sel.monotone = monotone;
  if (std_coef_out) *std_coef_out = b;
  return sel;
}

GraphSelection LassoProblem::finish(const Eigen::VectorXd& b, double lambda1, double lambda2) const {
  GraphSelection sel;
  sel.lambda1 = lambda1;
  sel.lambda2 = lambda2;
  const Eigen::Index cols = n_cols();
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    if (b[j] != 0.0) coef[j] = b[j] / scale_[j];
  sel.beta_hat = coef.head(n_main_);
  sel.theta_hat = coef.tail(cols - n_main_);
  sel.intercept = y_mean_ - mean_.dot(coef);
  for (Eigen::Index j = 0; j < n_main_; ++j)
    if (sel.beta_hat[j] != 0.0) sel.v_hat.push_back(static_cast<int>(j));
  for (Eigen::Index c = 0; c < cols - n_main_; ++c)
    if (sel.theta_hat[c] != 0.0) sel.e_hat.push_back(pair_index_[static_cast<std::size_t>(c)]);
  sel.rss = (yc_ - z_ * b).squaredNorm();
  sel.objective_value = sel.rss + lambda1 * b.head(n_main_).lpNorm<1>() +
                        lambda2 * b.tail(cols - n_main_).lpNorm<1>();
  return sel;
}

GraphSelection fit_lasso(const InteractionDesign& design, const Eigen::VectorXd& y, double lambda1,
                         double lambda2, double tol, int max_iter) {
  const LassoProblem problem(design, y);
  return problem.fit(lambda1, lambda2, LassoOptions{tol, max_iter});
}

std::vector<LambdaPoint> default_lambda_grid(const LassoProblem& problem, double ratio, int points,
                                             double min_ratio) {
  const double top = problem.lambda_max(ratio);
  if (!(top > 0.0) || points <= 1) return {LambdaPoint{top, ratio * top}};
  std::vector<LambdaPoint> grid;
  grid.reserve(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double l1 = top * std::pow(min_ratio, static_cast<double>(k) / (points - 1));
    grid.push_back({l1, ratio * l1});
  }
  return grid;
}

double bic(const GraphSelection& sel, Eigen::Index n) {
  const double dn = static_cast<double>(n);
  return dn * std::log(std::max(sel.rss / dn, 1e-300)) + std::log(dn) * sel.n_nonzero();
}

namespace {

GraphSelection select_on(const LassoProblem& problem, const std::vector<LambdaPoint>& grid,
                         const LassoOptions& opt) {
  if (grid.empty()) throw ValidationError("lambda grid is empty");
  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    if (grid[l].lambda1 != grid[r].lambda1) return grid[l].lambda1 > grid[r].lambda1;
    return grid[l].lambda2 > grid[r].lambda2;
  });
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(problem.n_cols());
  std::optional<GraphSelection> best;
  double best_bic = 0.0;
  for (const std::size_t g : order) {
    Eigen::VectorXd next;
    GraphSelection sel = problem.fit(grid[g].lambda1, grid[g].lambda2, opt, &warm, &next);
    warm = std::move(next);
    const double score = bic(sel, problem.n());
    if (!best) {
      best = std::move(sel);
      best_bic = score;
      continue;
    }
    const double tie = 1e-9 * std::max(1.0, std::fabs(best_bic));
    bool take = false;
    if (score < best_bic - tie) {
      take = true;
    } else if (std::fabs(score - best_bic) <= tie) {
      if (sel.n_nonzero() < best->n_nonzero())
        take = true;
      else if (sel.n_nonzero() == best->n_nonzero() && sel.lambda1 > best->lambda1)
        take = true;
    }
    if (take) {
      best = std::move(sel);
      best_bic = score;
    }
  }
  return *best;
}

}  // namespace

GraphSelection select_lambda(const InteractionDesign& design, const Eigen::VectorXd& y,
                             const std::vector<LambdaPoint>& grid, const LassoOptions& opt) {
  const LassoProblem problem(design, y);
  return select_on(problem, grid, opt);
}

GraphSelection select_lambda_default(const InteractionDesign& design, const Eigen::VectorXd& y,
                                     double ratio, const LassoOptions& opt) {
  const LassoProblem problem(design, y);
  return select_on(problem, default_lambda_grid(problem, ratio), opt);
}

nlohmann::json to_json(const GraphSelection& sel, const std::vector<std::string>& col_names) {
  auto label = [&](int j) {
    return j < static_cast<int>(col_names.size()) ? col_names[static_cast<std::size_t>(j)]
                                                  : "X" + std::to_string(j + 1);
  };
  nlohmann::json j;
  j["lambda1"] = sel.lambda1;
  j["lambda2"] = sel.lambda2;
  j["objective_value"] = sel.objective_value;
  j["converged"] = sel.converged;
  j["iterations"] = sel.iterations;
  j["intercept"] = sel.intercept;
  j["beta_hat"] = std::vector<double>(sel.beta_hat.data(), sel.beta_hat.data() + sel.beta_hat.size());
  j["theta_hat"] =
      std::vector<double>(sel.theta_hat.data(), sel.theta_hat.data() + sel.theta_hat.size());
  auto mains = nlohmann::json::array();
  for (const int r : sel.v_hat)
    mains.push_back({{"index", r}, {"label", label(r)}, {"coef", sel.beta_hat[r]}});
  j["v_hat"] = std::move(mains);
  // theta_hat is indexed by pair position; recover it from the lexicographic order.
  const int p = static_cast<int>(sel.beta_hat.size());
  auto pair_pos = [p](int s, int v) { return s * (2 * p - s - 1) / 2 + (v - s - 1); };
  auto edges = nlohmann::json::array();
  for (const auto& [s, v] : sel.e_hat)
    edges.push_back({{"from", s},
                     {"to", v},
                     {"label", label(s) + ":" + label(v)},
                     {"coef", sel.theta_hat[pair_pos(s, v)]}});
  j["e_hat"] = std::move(edges);
  return j;
}

}  // namespace ipwcdf
