#include "ipwcdf/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "ipwcdf/errors.hpp"
#include "ipwcdf/numeric.hpp"
#include "ipwcdf/parallel.hpp"

namespace ipwcdf {

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::Independent: return "independent";
    case Scenario::Hub: return "hub";
    case Scenario::Lattice: return "lattice";
  }
  return "?";
}

Scenario parse_scenario(const std::string& name) {
  if (name == "independent") return Scenario::Independent;
  if (name == "hub") return Scenario::Hub;
  if (name == "lattice") return Scenario::Lattice;
  throw ValidationError("unknown scenario '" + name + "' (expected independent, hub or lattice)");
}

std::vector<IndexPair> network_edges(Scenario s) {
  switch (s) {
    case Scenario::Independent: return {};
    case Scenario::Lattice: return {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}};
    case Scenario::Hub:
      return {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {6, 7}, {6, 8}, {6, 9}, {6, 10}, {6, 11}};
  }
  return {};
}

void ScenarioConfig::validate() const {
  if (n < 2) throw ValidationError("n must be at least 2");
  if (p < 3) throw ValidationError("p must be at least 3 (the outcome model uses X1 and X3)");
  for (const auto& [s, v] : edges())
    if (v >= p) throw ValidationError("scenario network needs p >= " + std::to_string(v + 1));
  (void)covariance();
}

Eigen::MatrixXd ScenarioConfig::covariance() const {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(p, p);
  for (const auto& [s, v] : edges()) {
    if (v >= p) throw ValidationError("scenario network needs p >= " + std::to_string(v + 1));
    sigma(s, v) = sigma(v, s) = rho;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw ValidationError("covariance matrix is not positive definite");
  return sigma;
}

Eigen::MatrixXd gen_covariates(const ScenarioConfig& cfg, Rng& rng) {
  const Eigen::MatrixXd sigma = cfg.covariance();
  const Eigen::MatrixXd lower = sigma.llt().matrixL();
  std::normal_distribution<double> normal;
  Eigen::MatrixXd z(cfg.n, cfg.p);
  for (int i = 0; i < cfg.n; ++i)
    for (int j = 0; j < cfg.p; ++j) z(i, j) = normal(rng);
  if (cfg.scenario == Scenario::Independent) return z;
  return z * lower.transpose();
}

namespace {

double network_term(const Eigen::MatrixXd& x, Eigen::Index i, const std::vector<IndexPair>& edges) {
  double s = 0.0;
  for (const auto& [a, b] : edges) s += x(i, a) * x(i, b);
  return s;
}

}  // namespace

Eigen::VectorXd gen_treatment(const Eigen::MatrixXd& x, const std::vector<IndexPair>& edges, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd a(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double lin = 1.0 + x(i, 0) + x(i, 2) + network_term(x, i, edges);
    a[i] = unif(rng) < logistic(lin) ? 1.0 : 0.0;
  }
  return a;
}

OutcomeDraw gen_outcome(const Eigen::MatrixXd& x, const Eigen::VectorXd& a,
                        const std::vector<IndexPair>& edges, double gamma0, Rng& rng) {
  std::normal_distribution<double> normal;
  const Eigen::Index n = x.rows();
  OutcomeDraw out{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double eps = normal(rng);
    out.y0[i] = 1.0 + x(i, 0) + x(i, 2) + network_term(x, i, edges) + eps;
    out.y1[i] = out.y0[i] + gamma0;
    out.y[i] = a[i] == 1.0 ? out.y1[i] : out.y0[i];
  }
  return out;
}

double TruthRecord::truth(const EstimandSpec& spec) const {
  for (std::size_t k = 0; k < estimands.size(); ++k)
    if (estimands[k] == spec) return true_effect[k];
  throw ValidationError("no true value recorded for " + spec.label());
}

std::vector<double> true_effects(const ScenarioConfig& cfg, const std::vector<EstimandSpec>& estimands,
                                 long mc_draws) {
  // Y(1) = Y(0) + gamma0 for every unit, so ATE and every QTE equal gamma0.
  std::vector<double> out(estimands.size(), cfg.gamma0);
  std::vector<double> points;
  for (const auto& e : estimands) {
    if (e.kind != EstimandKind::DTE) continue;
    points.push_back(e.param);
    points.push_back(e.param - cfg.gamma0);
  }
  if (points.empty()) return out;

  std::map<double, double> f0;  // F0 at each needed point
  if (cfg.scenario == Scenario::Independent) {
    for (const double t : points) f0[t] = normal_cdf((t - 1.0) / std::sqrt(3.0));
  } else {
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    std::vector<long> below(points.size(), 0);
    const Eigen::MatrixXd lower = cfg.covariance().llt().matrixL();
    const auto edges = cfg.edges();
    Rng rng(derive_seed(0x7275746873ULL, static_cast<std::uint64_t>(cfg.scenario)));
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(cfg.p), x(cfg.p);
    for (long draw = 0; draw < mc_draws; ++draw) {
      for (int j = 0; j < cfg.p; ++j) z[j] = normal(rng);
      x.noalias() = lower.triangularView<Eigen::Lower>() * z;
      double y0 = 1.0 + x[0] + x[2] + normal(rng);
      for (const auto& [s, v] : edges) y0 += x[s] * x[v];
      const auto it = std::lower_bound(points.begin(), points.end(), y0);
      if (it != points.end()) ++below[static_cast<std::size_t>(it - points.begin())];
    }
    long running = 0;
    for (std::size_t k = 0; k < points.size(); ++k) {
      running += below[k];
      f0[points[k]] = static_cast<double>(running) / static_cast<double>(mc_draws);
    }
  }
  for (std::size_t k = 0; k < estimands.size(); ++k) {
    const auto& e = estimands[k];
    if (e.kind == EstimandKind::DTE) out[k] = f0.at(e.param - cfg.gamma0) - f0.at(e.param);
  }
  return out;
}

SimulatedData simulate_replicate(const ScenarioConfig& cfg, std::uint64_t replicate,
                                 const std::vector<EstimandSpec>& estimands,
                                 const std::vector<double>& true_effect) {
  Rng rng(derive_seed(cfg.seed, replicate));
  const auto edges = cfg.edges();
  Eigen::MatrixXd x = gen_covariates(cfg, rng);
  Eigen::VectorXd a = gen_treatment(x, edges, rng);
  OutcomeDraw draw = gen_outcome(x, a, edges, cfg.gamma0, rng);
  TruthRecord truth;
  truth.estimands = estimands;
  truth.true_effect = true_effect;
  truth.true_e = edges;
  truth.y1 = std::move(draw.y1);
  truth.y0 = std::move(draw.y0);
  return SimulatedData{Dataset(std::move(draw.y), std::move(a), std::move(x)), std::move(truth)};
}

SelectionRates compute_sen_spe(const GraphSelection& sel, const TruthRecord& truth) {
  const int p = static_cast<int>(sel.beta_hat.size());
  const std::set<int> tv(truth.true_v.begin(), truth.true_v.end());
  const std::set<IndexPair> te(truth.true_e.begin(), truth.true_e.end());
  long zero_total = 0, zero_hit = 0, nonzero_total = 0, nonzero_hit = 0;
  auto tally = [&](bool truly_nonzero, bool est_nonzero) {
    if (truly_nonzero) {
      ++nonzero_total;
      if (est_nonzero) ++nonzero_hit;
    } else {
      ++zero_total;
      if (!est_nonzero) ++zero_hit;
    }
  };
  for (int j = 0; j < p; ++j) tally(tv.count(j) > 0, sel.beta_hat[j] != 0.0);
  Eigen::Index c = 0;
  for (int s = 0; s < p; ++s)
    for (int v = s + 1; v < p; ++v, ++c)
      tally(te.count({s, v}) > 0, c < sel.theta_hat.size() && sel.theta_hat[c] != 0.0);
  SelectionRates r;
  if (zero_total > 0) r.sen = static_cast<double>(zero_hit) / static_cast<double>(zero_total);
  if (nonzero_total > 0) r.spe = static_cast<double>(nonzero_hit) / static_cast<double>(nonzero_total);
  return r;
}

namespace {

struct ReplicateOutcome {
  bool ok = false;
  std::string error;
  SelectionRates rates;
  std::vector<Method> methods;
  std::vector<EstimandSpec> estimands;
  std::vector<double> estimate;
  std::vector<std::optional<double>> se;
  long sandwich_checks = 0;
  long sandwich_violations = 0;
};

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

SimulationResult run_replications(const ScenarioConfig& cfg, int reps, const SimulationOptions& opt) {
  if (reps < 1) throw ValidationError("reps must be at least 1");
  cfg.validate();
  const std::vector<double> truth = true_effects(cfg, opt.estimands, opt.truth_mc_draws);
  PipelineOptions popt = opt.pipeline;
  popt.estimands = opt.estimands;

  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), opt.threads, [&](std::size_t r) {
    ReplicateOutcome& out = outcomes[r];
    try {
      const SimulatedData sim = simulate_replicate(cfg, r, opt.estimands, truth);
      const PipelineResult res = run_pipeline(sim.data, popt);
      out.rates = compute_sen_spe(res.selection, sim.truth);
      for (const auto& rec : res.estimates) {
        out.methods.push_back(rec.report.method);
        out.estimands.push_back(rec.report.estimand);
        out.estimate.push_back(rec.report.estimate);
        out.se.push_back(rec.report.se);
        if (rec.sandwich) {
          ++out.sandwich_checks;
          const auto& s = *rec.sandwich;
          if (!(s.correction >= 0.0) || s.variance > s.c_scalar) ++out.sandwich_violations;
        }
      }
      out.ok = true;
    } catch (const std::exception& e) {
      out.ok = false;
      out.error = "replicate " + std::to_string(r) + ": " + e.what();
    }
  });

  SimulationResult result;
  result.config = cfg;
  result.reps = reps;
  const ReplicateOutcome* layout = nullptr;
  for (const auto& o : outcomes) {
    if (!o.ok) {
      ++result.failures;
      result.failure_messages.push_back(o.error);
      continue;
    }
    if (!layout) layout = &o;
    result.sandwich_checks += o.sandwich_checks;
    result.sandwich_violations += o.sandwich_violations;
  }
  if (result.failures > opt.max_failure_rate * reps || !layout) {
    throw EstimationError("simulation failed in " + std::to_string(result.failures) + " of " +
                          std::to_string(reps) + " replicates" +
                          (result.failure_messages.empty() ? "" : "; first: " + result.failure_messages[0]));
  }

  std::vector<double> sens, spes;
  for (const auto& o : outcomes) {
    if (!o.ok) continue;
    if (o.rates.sen) sens.push_back(*o.rates.sen);
    if (o.rates.spe) spes.push_back(*o.rates.spe);
  }

  for (std::size_t k = 0; k < layout->estimate.size(); ++k) {
    const Method method = layout->methods[k];
    if (!opt.methods.empty() &&
        std::find(opt.methods.begin(), opt.methods.end(), method) == opt.methods.end())
      continue;
    const EstimandSpec& spec = layout->estimands[k];
    MetricsRow row;
    row.scenario = scenario_name(cfg.scenario);
    row.n = cfg.n;
    row.method = method_name(method);
    row.estimand = spec.label();
    row.truth = truth[static_cast<std::size_t>(
        std::find(opt.estimands.begin(), opt.estimands.end(), spec) - opt.estimands.begin())];
    std::vector<double> est, se_hat;
    long covered = 0;
    for (const auto& o : outcomes) {
      if (!o.ok) continue;
      est.push_back(o.estimate[k]);
      if (o.se[k]) {
        se_hat.push_back(*o.se[k]);
        const double lo = o.estimate[k] - 1.96 * *o.se[k];
        const double hi = o.estimate[k] + 1.96 * *o.se[k];
        if (lo <= row.truth && row.truth <= hi) ++covered;
      }
    }
    row.reps = static_cast<int>(est.size());
    const double mean = *mean_of(est);
    row.bias = mean - row.truth;
    double sq = 0.0, ss = 0.0;
    for (const double e : est) {
      sq += (e - row.truth) * (e - row.truth);
      ss += (e - mean) * (e - mean);
    }
    row.mse = sq / static_cast<double>(est.size());
    if (est.size() >= 2) {
      row.se = std::sqrt(ss / static_cast<double>(est.size() - 1));
      if (!se_hat.empty()) row.cr = static_cast<double>(covered) / static_cast<double>(se_hat.size());
    }
    row.mean_se_hat = mean_of(se_hat);
    if (method == Method::CDF) {
      row.sen = mean_of(sens);
      row.spe = mean_of(spes);
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

namespace {

std::string num(const std::optional<double>& v, const char* fmt = "%.10g") {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, *v);
  return buf;
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "-";
  return num(v, "%.3f");
}

}  // namespace

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream os;
  os << "scenario,n,estimand,method,truth,reps,sen,spe,bias,se,mse,cr,mean_se_hat\n";
  for (const auto& r : rows) {
    os << r.scenario << ',' << r.n << ',' << r.estimand << ',' << r.method << ',' << num(r.truth)
       << ',' << r.reps << ',' << num(r.sen) << ',' << num(r.spe) << ',' << num(r.bias) << ','
       << num(r.se) << ',' << num(r.mse) << ',' << num(r.cr) << ',' << num(r.mean_se_hat) << '\n';
  }
  return os.str();
}

nlohmann::json metrics_json(const std::vector<MetricsRow>& rows) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  auto arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"scenario", r.scenario},
                   {"n", r.n},
                   {"estimand", r.estimand},
                   {"method", r.method},
                   {"truth", r.truth},
                   {"reps", r.reps},
                   {"sen", opt(r.sen)},
                   {"spe", opt(r.spe)},
                   {"bias", opt(r.bias)},
                   {"se", opt(r.se)},
                   {"mse", opt(r.mse)},
                   {"cr", opt(r.cr)},
                   {"mean_se_hat", opt(r.mean_se_hat)}});
  }
  return arr;
}

std::string metrics_markdown(const std::vector<MetricsRow>& rows) {
  std::ostringstream os;
  auto kind_of = [](const std::string& label) { return label.substr(0, 3); };
  for (const char* kind : {"ATE", "QTE", "DTE"}) {
    std::vector<const MetricsRow*> sel;
    for (const auto& r : rows)
      if (kind_of(r.estimand) == kind) sel.push_back(&r);
    if (sel.empty()) continue;
    const bool with_estimand = std::string(kind) != "ATE";
    os << "### " << kind << " (" << sel.front()->scenario << ")\n\n";
    os << "| n |" << (with_estimand ? " Estimand |" : "")
       << " Method | SEN | SPE | BIAS | S.E. | MSE | CR |\n";
    os << "|---|" << (with_estimand ? "---|" : "") << "---|---|---|---|---|---|---|\n";
    for (const auto* r : sel) {
      os << "| " << r->n << " |";
      if (with_estimand) os << ' ' << r->estimand << " |";
      os << ' ' << r->method << " | " << cell(r->sen) << " | " << cell(r->spe) << " | "
         << cell(r->bias) << " | " << cell(r->se) << " | " << cell(r->mse) << " | " << cell(r->cr)
         << " |\n";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace ipwcdf
