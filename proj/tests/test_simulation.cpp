#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ipwcdf/errors.hpp"
#include "ipwcdf/numeric.hpp"
#include "ipwcdf/simulation.hpp"

using namespace ipwcdf;

namespace {

double corr(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const Eigen::ArrayXd a = u.array() - u.mean();
  const Eigen::ArrayXd b = v.array() - v.mean();
  return (a * b).sum() / std::sqrt((a * a).sum() * (b * b).sum());
}

ScenarioConfig config(Scenario s, int n, std::uint64_t seed = 1) {
  ScenarioConfig cfg;
  cfg.scenario = s;
  cfg.n = n;
  cfg.seed = seed;
  return cfg;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("scenario names and networks") {
  for (const Scenario s : {Scenario::Independent, Scenario::Hub, Scenario::Lattice})
    CHECK(parse_scenario(scenario_name(s)) == s);
  CHECK_THROWS_AS((parse_scenario("ring")), ValidationError);
  CHECK(network_edges(Scenario::Independent).empty());
  CHECK(network_edges(Scenario::Hub).size() == 10);
  CHECK(network_edges(Scenario::Lattice).size() == 6);
  for (const auto& [s, v] : network_edges(Scenario::Hub)) CHECK((s == 0 || s == 6));
  const auto lattice = network_edges(Scenario::Lattice);
  CHECK(std::is_sorted(lattice.begin(), lattice.end()));
}

TEST_CASE("configuration validation") {
  CHECK_NOTHROW((config(Scenario::Hub, 10).validate()));
  ScenarioConfig small = config(Scenario::Independent, 10);
  small.p = 2;
  CHECK_THROWS_AS((small.validate()), ValidationError);
  ScenarioConfig narrow = config(Scenario::Hub, 10);
  narrow.p = 8;
  CHECK_THROWS_AS((narrow.validate()), ValidationError);
  ScenarioConfig strong = config(Scenario::Hub, 10);
  strong.rho = 0.5;
  CHECK_THROWS_AS((strong.validate()), ValidationError);
  ScenarioConfig tiny = config(Scenario::Independent, 1);
  CHECK_THROWS_AS((tiny.validate()), ValidationError);

  const Eigen::MatrixXd sigma = config(Scenario::Lattice, 10).covariance();
  CHECK(sigma(0, 1) == 0.3);
  CHECK(sigma(4, 5) == 0.3);
  CHECK(sigma(2, 3) == 0.0);
  CHECK(sigma.diagonal().isOnes());
}

TEST_CASE("covariates follow the scenario covariance") {
  Rng rng(2);
  const Eigen::MatrixXd ind = gen_covariates(config(Scenario::Independent, 100000), rng);
  const Eigen::MatrixXd cov_i =
      (ind.rowwise() - ind.colwise().mean()).transpose() * (ind.rowwise() - ind.colwise().mean()) /
      99999.0;
  CHECK((cov_i - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() < 0.05);

  const Eigen::MatrixXd lat = gen_covariates(config(Scenario::Lattice, 100000), rng);
  CHECK(corr(lat.col(0), lat.col(1)) == doctest::Approx(0.3).epsilon(0.05));
  CHECK(corr(lat.col(3), lat.col(5)) == doctest::Approx(0.3).epsilon(0.05));
  CHECK(std::fabs(corr(lat.col(0), lat.col(6))) < 0.02);

  const Eigen::MatrixXd hub = gen_covariates(config(Scenario::Hub, 100000), rng);
  CHECK(corr(hub.col(0), hub.col(4)) == doctest::Approx(0.3).epsilon(0.05));
  CHECK(corr(hub.col(6), hub.col(11)) == doctest::Approx(0.3).epsilon(0.05));
  CHECK(std::fabs(corr(hub.col(1), hub.col(2))) < 0.02);
  for (Eigen::Index j = 0; j < 12; ++j) CHECK(std::fabs(hub.col(j).mean()) < 0.02);
}

TEST_CASE("treatment assignment follows the logistic model") {
  Rng rng(3);
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(200000, 3);
  const Eigen::VectorXd a0 = gen_treatment(zero, {}, rng);
  const double p1 = logistic(1.0);
  CHECK(p1 == doctest::Approx(0.731).epsilon(1e-3));
  CHECK(std::fabs(a0.mean() - p1) < 4.0 * std::sqrt(p1 * (1 - p1) / 200000));

  // E logistic(1 + S) with S ~ N(0, 2), by quadrature.
  double oracle = 0.0;
  const double step = 1e-3;
  for (double s = -12.0; s <= 12.0; s += step)
    oracle += step * logistic(1.0 + s) * std::exp(-s * s / 4.0) / std::sqrt(4.0 * M_PI);
  const ScenarioConfig cfg = config(Scenario::Independent, 200000);
  const Eigen::MatrixXd x = gen_covariates(cfg, rng);
  const Eigen::VectorXd a = gen_treatment(x, {}, rng);
  CHECK(std::fabs(a.mean() - oracle) < 4.0 * std::sqrt(oracle * (1 - oracle) / 200000));
}

TEST_CASE("potential outcomes share the noise") {
  Rng rng(5);
  const ScenarioConfig cfg = config(Scenario::Independent, 100000);
  const Eigen::MatrixXd x = gen_covariates(cfg, rng);
  const Eigen::VectorXd a = gen_treatment(x, {}, rng);
  const OutcomeDraw out = gen_outcome(x, a, {}, 1.5, rng);
  CHECK((out.y1 - out.y0).isApproxToConstant(1.5, 1e-12));
  for (Eigen::Index i = 0; i < 100; ++i) CHECK(out.y[i] == (a[i] == 1.0 ? out.y1[i] : out.y0[i]));
  const double mean = out.y0.mean();
  const double var = (out.y0.array() - mean).square().sum() / 99999.0;
  CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
  CHECK(var == doctest::Approx(3.0).epsilon(0.03));

  Eigen::MatrixXd one = Eigen::MatrixXd::Zero(1, 12);
  one(0, 0) = 2.0;
  one(0, 1) = 3.0;
  one(0, 2) = -1.0;
  Rng r1(9), r2(9);
  const OutcomeDraw with = gen_outcome(one, Eigen::VectorXd::Zero(1), {{0, 1}}, 1.0, r1);
  const OutcomeDraw without = gen_outcome(one, Eigen::VectorXd::Zero(1), {}, 1.0, r2);
  CHECK(with.y0[0] - without.y0[0] == doctest::Approx(6.0));
}

TEST_CASE("true effects") {
  const ScenarioConfig ind = config(Scenario::Independent, 10);
  const std::vector<EstimandSpec> specs{EstimandSpec::ate(), EstimandSpec::qte(0.25),
                                        EstimandSpec::dte(0.0), EstimandSpec::dte(-3.0)};
  const auto t = true_effects(ind, specs);
  CHECK(t[0] == 1.0);
  CHECK(t[1] == 1.0);
  CHECK(t[2] == doctest::Approx(normal_cdf(-2.0 / std::sqrt(3.0)) - normal_cdf(-1.0 / std::sqrt(3.0))));
  CHECK(t[3] == doctest::Approx(normal_cdf(-5.0 / std::sqrt(3.0)) - normal_cdf(-4.0 / std::sqrt(3.0))));

  // The Monte Carlo truth agrees with a separate draw from the generators.
  for (const Scenario s : {Scenario::Hub, Scenario::Lattice}) {
    const ScenarioConfig cfg = config(s, 400000, 77);
    const auto mc = true_effects(cfg, {EstimandSpec::dte(0.0), EstimandSpec::dte(3.0)}, 1000000);
    Rng rng(derive_seed(77, 0));
    const Eigen::MatrixXd x = gen_covariates(cfg, rng);
    const OutcomeDraw out = gen_outcome(x, Eigen::VectorXd::Zero(cfg.n), cfg.edges(), 1.0, rng);
    for (const auto& [k, point] : {std::pair{0, 0.0}, std::pair{1, 3.0}}) {
      const double f0_t = (out.y0.array() <= point).cast<double>().mean();
      const double f0_s = (out.y0.array() <= point - 1.0).cast<double>().mean();
      CHECK(std::fabs(mc[static_cast<std::size_t>(k)] - (f0_s - f0_t)) < 0.004);
    }
  }
}

TEST_CASE("replicates are reproducible streams") {
  const ScenarioConfig cfg = config(Scenario::Lattice, 50, 11);
  const auto specs = std::vector<EstimandSpec>{EstimandSpec::ate()};
  const SimulatedData a = simulate_replicate(cfg, 3, specs, {1.0});
  const SimulatedData b = simulate_replicate(cfg, 3, specs, {1.0});
  const SimulatedData c = simulate_replicate(cfg, 4, specs, {1.0});
  CHECK(a.data.y() == b.data.y());
  CHECK(a.data.x() == b.data.x());
  CHECK(a.data.a() == b.data.a());
  CHECK(a.data.y() != c.data.y());
  CHECK(a.truth.true_e == network_edges(Scenario::Lattice));
  CHECK(a.truth.true_v == std::vector<int>{0, 2});
  CHECK(a.truth.truth(EstimandSpec::ate()) == 1.0);
  CHECK_THROWS_AS((a.truth.truth(EstimandSpec::dte(0))), ValidationError);
}

TEST_CASE("selection rates over the coefficient vector") {
  TruthRecord truth;
  truth.true_v = {0, 2};
  truth.true_e = {{0, 1}};
  GraphSelection perfect;
  perfect.beta_hat = Eigen::VectorXd::Zero(4);
  perfect.theta_hat = Eigen::VectorXd::Zero(6);
  perfect.beta_hat[0] = 1.0;
  perfect.beta_hat[2] = -0.5;
  perfect.theta_hat[0] = 0.2;
  auto r = compute_sen_spe(perfect, truth);
  CHECK(*r.sen == 1.0);
  CHECK(*r.spe == 1.0);

  GraphSelection zero;
  zero.beta_hat = Eigen::VectorXd::Zero(4);
  zero.theta_hat = Eigen::VectorXd::Zero(6);
  r = compute_sen_spe(zero, truth);
  CHECK(*r.sen == 1.0);
  CHECK(*r.spe == 0.0);

  GraphSelection dense;
  dense.beta_hat = Eigen::VectorXd::Ones(4);
  dense.theta_hat = Eigen::VectorXd::Ones(6);
  r = compute_sen_spe(dense, truth);
  CHECK(*r.sen == 0.0);
  CHECK(*r.spe == 1.0);

  GraphSelection one_wrong = perfect;
  one_wrong.theta_hat[5] = 0.1;
  r = compute_sen_spe(one_wrong, truth);
  CHECK(*r.sen == doctest::Approx(6.0 / 7.0));

  TruthRecord none;
  none.true_v = {};
  r = compute_sen_spe(zero, none);
  CHECK(*r.sen == 1.0);
  CHECK_FALSE(r.spe);

  TruthRecord full;
  full.true_v = {0, 1};
  full.true_e = {{0, 1}};
  GraphSelection two;
  two.beta_hat = Eigen::VectorXd::Ones(2);
  two.theta_hat = Eigen::VectorXd::Ones(1);
  r = compute_sen_spe(two, full);
  CHECK_FALSE(r.sen);
  CHECK(*r.spe == 1.0);
}

TEST_CASE("replication metrics are internally consistent") {
  SimulationOptions opt;
  opt.estimands = {EstimandSpec::ate(), EstimandSpec::qte(0.5), EstimandSpec::dte(0.0)};
  const SimulationResult res = run_replications(config(Scenario::Independent, 300, 5), 30, opt);
  CHECK(res.reps == 30);
  CHECK(res.failures == 0);
  REQUIRE(res.rows.size() == 6);
  std::vector<std::string> labels;
  for (const auto& r : res.rows) labels.push_back(r.estimand + "/" + r.method);
  CHECK(labels == std::vector<std::string>{"ATE/IPW", "ATE/LD", "ATE/CDF", "QTE(0.5)/Firpo",
                                           "QTE(0.5)/CDF", "DTE(0)/CDF"});
  for (const auto& r : res.rows) {
    CHECK(r.reps == 30);
    const double decomposed = *r.bias * *r.bias + *r.se * *r.se * 29.0 / 30.0;
    CHECK(*r.mse == doctest::Approx(decomposed).epsilon(1e-10));
    REQUIRE(r.cr);
    CHECK(*r.cr >= 0.0);
    CHECK(*r.cr <= 1.0);
    CHECK(r.sen.has_value() == (r.method == "CDF"));
  }
  CHECK(res.sandwich_checks > 0);
  CHECK(res.sandwich_violations == 0);

  const SimulationResult single = run_replications(config(Scenario::Independent, 200, 5), 1, opt);
  for (const auto& r : single.rows) {
    CHECK(r.reps == 1);
    CHECK_FALSE(r.se);
    CHECK_FALSE(r.cr);
    CHECK(r.bias);
  }
  CHECK(metrics_json(single.rows)[0]["se"].is_null());

  SimulationOptions only = opt;
  only.methods = {Method::CDF};
  const SimulationResult cdf = run_replications(config(Scenario::Independent, 200, 5), 3, only);
  CHECK(cdf.rows.size() == 3);
  CHECK_THROWS_AS((run_replications(config(Scenario::Independent, 200, 5), 0, opt)),
                  ValidationError);
}

TEST_CASE("null treatment effect gives an unbiased mean contrast") {
  ScenarioConfig cfg = config(Scenario::Independent, 500, 9);
  cfg.gamma0 = 0.0;
  SimulationOptions opt;
  opt.methods = {Method::CDF};
  const SimulationResult res = run_replications(cfg, 60, opt);
  REQUIRE(res.rows.size() == 1);
  const auto& r = res.rows[0];
  CHECK(r.truth == 0.0);
  CHECK(std::fabs(*r.bias) < 3.0 * *r.se / std::sqrt(60.0));
}

TEST_CASE("simulation output does not depend on the thread count") {
  SimulationOptions opt;
  opt.estimands = {EstimandSpec::ate(), EstimandSpec::dte(0.0)};
  const ScenarioConfig cfg = config(Scenario::Hub, 200, 3);
  opt.threads = 1;
  opt.truth_mc_draws = 100000;
  const auto one = metrics_csv(run_replications(cfg, 12, opt).rows);
  opt.threads = 3;
  const auto three = metrics_csv(run_replications(cfg, 12, opt).rows);
  CHECK(one == three);
}

TEST_CASE("metrics tables") {
  MetricsRow r;
  r.scenario = "lattice";
  r.n = 500;
  r.method = "CDF";
  r.estimand = "ATE";
  r.truth = 1.0;
  r.reps = 10;
  r.sen = 0.99;
  r.spe = 1.0;
  r.bias = 0.0123456;
  r.se = 0.2;
  r.mse = 0.04;
  r.cr = 0.95;
  MetricsRow q = r;
  q.method = "Firpo";
  q.estimand = "QTE(0.25)";
  q.sen.reset();
  q.spe.reset();

  const auto csv = lines(metrics_csv({r, q}));
  REQUIRE(csv.size() == 3);
  CHECK(csv[0] == "scenario,n,estimand,method,truth,reps,sen,spe,bias,se,mse,cr,mean_se_hat");
  CHECK(csv[1] == "lattice,500,ATE,CDF,1,10,0.99,1,0.0123456,0.2,0.04,0.95,");
  CHECK(csv[2] == "lattice,500,QTE(0.25),Firpo,1,10,,,0.0123456,0.2,0.04,0.95,");

  const std::string md = metrics_markdown({r, q});
  CHECK(md.find("### ATE (lattice)") != std::string::npos);
  CHECK(md.find("### QTE (lattice)") != std::string::npos);
  CHECK(md.find("| 500 | CDF | 0.990 | 1.000 | 0.012 | 0.200 | 0.040 | 0.950 |") !=
        std::string::npos);
  CHECK(md.find("| 500 | QTE(0.25) | Firpo | - | - | 0.012 |") != std::string::npos);
  CHECK(md.find("DTE") == std::string::npos);

  const auto j = metrics_json({r, q});
  CHECK(j.size() == 2);
  CHECK(j[1]["sen"].is_null());
  CHECK(j[0]["bias"].get<double>() == 0.0123456);
}
