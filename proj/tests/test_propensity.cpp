#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ipwcdf/errors.hpp"
#include "ipwcdf/numeric.hpp"
#include "ipwcdf/propensity.hpp"

using namespace ipwcdf;

namespace {

Eigen::MatrixXd normal_matrix(Eigen::Index n, Eigen::Index p, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = z(rng);
  return x;
}

Eigen::VectorXd bernoulli(const Eigen::VectorXd& lin, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u;
  Eigen::VectorXd a(lin.size());
  for (Eigen::Index i = 0; i < lin.size(); ++i) a[i] = u(rng) < logistic(lin[i]) ? 1.0 : 0.0;
  return a;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

TEST_CASE("star design lays out intercept, mains and products") {
  Eigen::MatrixXd x(2, 3);
  x << 1, 2, 3,
       4, 5, 6;
  GraphSelection sel;
  sel.v_hat = {2, 0};
  sel.e_hat = {{0, 2}};
  const StarDesign d = build_star_design(x, sel, {"a", "b", "c"});
  REQUIRE(d.cols() == 4);
  CHECK(d.k == 2);
  CHECK(d.m == 1);
  Eigen::MatrixXd expected(2, 4);
  expected << 1, 1, 3, 3,
              1, 4, 6, 24;
  CHECK(d.x_star == expected);
  CHECK(d.layout == std::vector<std::string>{"(intercept)", "a", "c", "a:c"});
  CHECK(d.mains == std::vector<int>{0, 2});

  const StarDesign empty = build_star_design(x, std::vector<int>{}, {});
  CHECK(empty.cols() == 1);
  CHECK(empty.x_star.isOnes());

  const StarDesign full = build_full_main_design(x);
  CHECK(full.layout == std::vector<std::string>{"(intercept)", "X1", "X2", "X3"});

  CHECK_THROWS_AS((build_star_design(x, std::vector<int>{3}, {})), ValidationError);
  CHECK_THROWS_AS((build_star_design(x, std::vector<int>{}, {{1, 1}})), ValidationError);
}

TEST_CASE("binary covariate fit matches the closed form two by two table") {
  // 40 units with x = 0 (10 treated) and 60 units with x = 1 (45 treated).
  Eigen::MatrixXd x(100, 1);
  Eigen::VectorXd a(100);
  for (int i = 0; i < 100; ++i) {
    x(i, 0) = i < 40 ? 0.0 : 1.0;
    a[i] = (i < 10 || (i >= 40 && i < 85)) ? 1.0 : 0.0;
  }
  const StarDesign d = build_full_main_design(x);
  const PropensityFit fit = fit_logistic(d, a);
  CHECK(fit.converged);
  CHECK(fit.eta_hat[0] == doctest::Approx(logit(0.25)).epsilon(1e-8));
  CHECK(fit.eta_hat[1] == doctest::Approx(logit(0.75) - logit(0.25)).epsilon(1e-8));
  CHECK(fit.pi_hat[0] == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(fit.pi_hat[99] == doctest::Approx(0.75).epsilon(1e-10));
  const double ll = 10 * std::log(0.25) + 30 * std::log(0.75) + 45 * std::log(0.75) +
                    15 * std::log(0.25);
  CHECK(fit.loglik == doctest::Approx(ll).epsilon(1e-10));
}

TEST_CASE("intercept-only fits") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(10, 1);
  Eigen::VectorXd a(10);
  a << 1, 0, 1, 0, 1, 0, 1, 0, 1, 0;
  const StarDesign d = build_star_design(x, std::vector<int>{}, {});
  const PropensityFit fit = fit_logistic(d, a);
  CHECK(fit.eta_hat[0] == doctest::Approx(0.0).epsilon(1e-12));
  for (const double p : fit.pi_hat) CHECK(p == doctest::Approx(0.5));

  std::mt19937_64 rng(2);
  const Eigen::MatrixXd big = normal_matrix(10000, 1, rng);
  const Eigen::VectorXd coin = bernoulli(Eigen::VectorXd::Zero(10000), rng);
  const PropensityFit null = fit_logistic(build_full_main_design(big), coin);
  CHECK(std::fabs(null.eta_hat[1]) < 0.05);
  CHECK(std::fabs(null.eta_hat[0]) < 0.05);
}

TEST_CASE("correctly specified model recovers the coefficients") {
  std::mt19937_64 rng(7);
  const Eigen::Index n = 10000;
  const Eigen::MatrixXd x = normal_matrix(n, 4, rng);
  const Eigen::VectorXd lin = (1.0 + x.col(0).array() + x.col(2).array()).matrix();
  const Eigen::VectorXd a = bernoulli(lin, rng);
  const StarDesign d = build_star_design(x, std::vector<int>{0, 2}, {});
  const PropensityFit fit = fit_logistic(d, a, LogisticOptions{1e-10, 100, 1e-12});
  REQUIRE(fit.converged);
  const Eigen::MatrixXd cov = fit.info_matrix.inverse() / static_cast<double>(n);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const double se = std::sqrt(cov(j, j));
    CHECK(std::fabs(fit.eta_hat[j] - 1.0) <= 3.0 * se);
  }
}

TEST_CASE("maximum likelihood properties") {
  std::mt19937_64 rng(13);
  const Eigen::Index n = 800;
  const Eigen::MatrixXd x = normal_matrix(n, 3, rng);
  const Eigen::VectorXd lin =
      (0.3 + 0.8 * x.col(0).array() - 0.5 * x.col(1).array() * x.col(2).array()).matrix();
  const Eigen::VectorXd a = bernoulli(lin, rng);
  const StarDesign d = build_star_design(x, std::vector<int>{0, 1, 2}, {{1, 2}});
  const PropensityFit fit = fit_logistic(d, a, LogisticOptions{1e-12, 100, 1e-12});
  REQUIRE(fit.converged);
  CHECK_FALSE(fit.separated);
  CHECK_FALSE(fit.ridge_used);
  for (std::size_t k = 1; k < fit.loglik_trace.size(); ++k)
    CHECK(fit.loglik_trace[k] >= fit.loglik_trace[k - 1]);

  Eigen::VectorXd raw(n);
  const Eigen::VectorXd eta_lin = d.x_star * fit.eta_hat;
  for (Eigen::Index i = 0; i < n; ++i) raw[i] = logistic(eta_lin[i]);
  const Eigen::VectorXd score = d.x_star.transpose() * (a - raw);
  CHECK(score.lpNorm<Eigen::Infinity>() < 1e-6);

  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) ll += a[i] * eta_lin[i] - log1p_exp(eta_lin[i]);
  CHECK(fit.loglik == doctest::Approx(ll).epsilon(1e-10));

  Eigen::VectorXd w = raw.array() * (1.0 - raw.array());
  const Eigen::MatrixXd info = d.x_star.transpose() * w.asDiagonal() * d.x_star / double(n);
  CHECK((info - fit.info_matrix).cwiseAbs().maxCoeff() < 1e-10);

  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd probe = fit.eta_hat;
    std::normal_distribution<double> z;
    for (auto& e : probe) e += 0.01 * z(rng);
    const Eigen::VectorXd pl = d.x_star * probe;
    double other = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) other += a[i] * pl[i] - log1p_exp(pl[i]);
    CHECK(other <= fit.loglik + 1e-9);
  }
}

TEST_CASE("mirrored data give a zero intercept") {
  std::mt19937_64 rng(19);
  const Eigen::Index half = 300;
  const Eigen::MatrixXd base = normal_matrix(half, 2, rng);
  const Eigen::VectorXd a0 = bernoulli((0.9 * base.col(0)).eval(), rng);
  Eigen::MatrixXd x(2 * half, 2);
  Eigen::VectorXd a(2 * half);
  x << base, -base;
  a << a0, (1.0 - a0.array()).matrix();
  const PropensityFit fit = fit_logistic(build_full_main_design(x), a);
  CHECK(fit.converged);
  CHECK(std::fabs(fit.eta_hat[0]) < 1e-8);
  CHECK((fit.pi_hat.head(half) + fit.pi_hat.tail(half)).isApproxToConstant(1.0, 1e-10));
}

TEST_CASE("prediction applies the logistic link and clipping") {
  const StarDesign d = build_star_design(Eigen::MatrixXd::Zero(3, 1), std::vector<int>{}, {});
  CHECK(predict_propensity(Eigen::VectorXd::Zero(1), d, 1e-3)[0] == doctest::Approx(0.5));
  CHECK(predict_propensity(Eigen::VectorXd::Constant(1, 40.0), d, 0.01)[0] == 0.99);
  CHECK(predict_propensity(Eigen::VectorXd::Constant(1, -40.0), d, 0.01)[0] == 0.01);
  CHECK(predict_propensity(Eigen::VectorXd::Constant(1, std::log(3.0)), d, 1e-3)[0] ==
        doctest::Approx(0.75).epsilon(1e-14));
  CHECK_THROWS_AS((predict_propensity(Eigen::VectorXd::Zero(2), d, 1e-3)), ValidationError);
}

TEST_CASE("separation and ridge flags") {
  Eigen::MatrixXd x(20, 1);
  Eigen::VectorXd a(20);
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = i - 9.5;
    a[i] = i >= 10 ? 1.0 : 0.0;
  }
  const PropensityFit sep = fit_logistic(build_full_main_design(x), a);
  CHECK(sep.separated);
  CHECK_FALSE(sep.converged);
  CHECK(sep.pi_hat.minCoeff() >= 1e-3);
  CHECK(sep.pi_hat.maxCoeff() <= 1.0 - 1e-3);

  std::mt19937_64 rng(23);
  Eigen::MatrixXd dup = normal_matrix(200, 2, rng);
  dup.col(1) = dup.col(0);
  const Eigen::VectorXd ad = bernoulli((0.5 * dup.col(0)).eval(), rng);
  const PropensityFit ridge = fit_logistic(build_full_main_design(dup), ad);
  CHECK(ridge.ridge_used);
  CHECK(ridge.pi_hat.allFinite());

  CHECK_THROWS_AS((fit_logistic(build_full_main_design(x), Eigen::VectorXd::Ones(20))),
                  ValidationError);
  CHECK_THROWS_AS((fit_logistic(build_full_main_design(x), Eigen::VectorXd::Ones(3))),
                  ValidationError);
}

TEST_CASE("propensity serializes with layout labels") {
  std::mt19937_64 rng(29);
  const Eigen::MatrixXd x = normal_matrix(100, 2, rng);
  const Eigen::VectorXd a = bernoulli(x.col(0), rng);
  const StarDesign d = build_full_main_design(x, {"age", "dose"});
  const PropensityFit fit = fit_logistic(d, a);
  const auto j = to_json(fit, d);
  REQUIRE(j["coefficients"].size() == 3);
  CHECK(j["coefficients"][1]["label"] == "age");
  CHECK(j["coefficients"][2]["coef"].get<double>() == fit.eta_hat[2]);
  CHECK(j["pi_min"].get<double>() == fit.pi_hat.minCoeff());
}
