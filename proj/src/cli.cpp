#include "ipwcdf/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ipwcdf/dataset.hpp"
#include "ipwcdf/errors.hpp"
#include "ipwcdf/inference.hpp"
#include "ipwcdf/numeric.hpp"
#include "ipwcdf/parallel.hpp"
#include "ipwcdf/pipeline.hpp"
#include "ipwcdf/simulation.hpp"
#include "ipwcdf/version.hpp"

namespace ipwcdf {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

OutputFormat parse_format(const std::string& s) {
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  if (s == "markdown" || s == "md") return OutputFormat::markdown;
  throw UsageError("unknown format '" + s + "' (expected json, csv or markdown)");
}

void set_dte(RunConfig& cfg, const std::string& text) {
  if (trim(text) == "mean") {
    cfg.dte.clear();
    cfg.dte_at_mean = true;
  } else {
    cfg.dte = parse_number_list(text, "--dte");
    cfg.dte_at_mean = false;
  }
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (trim(text) == "none") return out;
  for (const auto& item : split_list(text)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !std::isfinite(v))
      throw UsageError(what + ": '" + item + "' is not a number");
    out.push_back(v);
  }
  return out;
}

void RunConfig::validate() const {
  if (command != "simulate" && command != "analyze") throw UsageError("unknown command '" + command + "'");
  for (const double v : q)
    if (!(v > 0.0 && v < 1.0)) throw UsageError("quantile levels must lie in (0, 1)");
  if (!(clip_eps > 0.0 && clip_eps < 0.5)) throw UsageError("--clip-eps must lie in (0, 0.5)");
  if (!(lambda_ratio > 0.0) || !std::isfinite(lambda_ratio)) throw UsageError("--lambda-ratio must be positive");
  if (threads < 1) throw UsageError("--threads must be at least 1");
  if (out.empty()) throw UsageError("--out must name a directory");
  if (command == "simulate") {
    try {
      (void)parse_scenario(scenario);
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
    if (n < 2) throw UsageError("--n must be at least 2");
    if (p < 3) throw UsageError("--p must be at least 3");
    if (reps < 1) throw UsageError("--reps must be at least 1");
    if (truth_draws < 1) throw UsageError("--truth-draws must be at least 1");
    if (dte_at_mean) throw UsageError("--dte mean is only available for analyze");
  } else {
    if (data.empty()) throw UsageError("analyze needs --data");
    if (outcome.empty() || treatment.empty() || confounders.empty())
      throw UsageError("analyze needs --outcome, --treatment and --confounders");
    if (bootstrap == 1 || bootstrap < 0) throw UsageError("--bootstrap must be 0 or at least 2");
    if (qte_se != "sandwich" && qte_se != "bootstrap")
      throw UsageError("--qte-se must be sandwich or bootstrap");
    if (qte_se == "bootstrap" && bootstrap == 0) throw UsageError("--qte-se bootstrap needs --bootstrap > 0");
  }
}

json RunConfig::resolved() const {
  json j;
  j["command"] = command;
  j["seed"] = seed;
  j["q"] = q;
  if (dte_at_mean)
    j["dte"] = "mean";
  else
    j["dte"] = dte;
  j["clip_eps"] = clip_eps;
  j["lambda_ratio"] = lambda_ratio;
  if (command == "simulate") {
    j["scenario"] = scenario;
    j["n"] = n;
    j["p"] = p;
    j["gamma0"] = gamma0;
    j["rho"] = rho;
    j["reps"] = reps;
    j["truth_draws"] = truth_draws;
    j["replicate_seed_0"] = derive_seed(seed, 0);
  } else {
    j["data"] = data;
    j["outcome"] = outcome;
    j["treatment"] = treatment;
    j["confounders"] = confounders;
    j["bootstrap"] = bootstrap;
    j["qte_se"] = qte_se;
    j["bootstrap_seed_0"] = derive_seed(seed, 0);
  }
  return j;
}

std::string RunConfig::hash() const { return hex64(fnv1a64(resolved().dump())); }

void apply_config_json(RunConfig& cfg, const json& j) {
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      auto list_text = [&v]() {
        if (v.is_string()) return v.get<std::string>();
        std::string s;
        for (const auto& e : v) {
          if (!s.empty()) s += ",";
          s += e.is_string() ? e.get<std::string>() : e.dump();
        }
        return s;
      };
      if (key == "scenario") cfg.scenario = v.get<std::string>();
      else if (key == "n") cfg.n = v.get<int>();
      else if (key == "p") cfg.p = v.get<int>();
      else if (key == "gamma0") cfg.gamma0 = v.get<double>();
      else if (key == "rho") cfg.rho = v.get<double>();
      else if (key == "reps") cfg.reps = v.get<int>();
      else if (key == "truth_draws") cfg.truth_draws = v.get<long>();
      else if (key == "data") cfg.data = v.get<std::string>();
      else if (key == "outcome") cfg.outcome = v.get<std::string>();
      else if (key == "treatment") cfg.treatment = v.get<std::string>();
      else if (key == "confounders") cfg.confounders = split_list(list_text());
      else if (key == "bootstrap") cfg.bootstrap = v.get<int>();
      else if (key == "qte_se") cfg.qte_se = v.get<std::string>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "q") cfg.q = parse_number_list(list_text(), "q");
      else if (key == "dte") set_dte(cfg, list_text());
      else if (key == "clip_eps") cfg.clip_eps = v.get<double>();
      else if (key == "lambda_ratio") cfg.lambda_ratio = v.get<double>();
      else if (key == "out") cfg.out = v.get<std::string>();
      else if (key == "format") cfg.format = parse_format(v.get<std::string>());
      else if (key == "threads") cfg.threads = v.get<int>();
      else throw UsageError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("config file: ") + e.what());
  }
}

namespace {

std::vector<EstimandSpec> estimands_of(const RunConfig& cfg, double mean_y) {
  std::vector<EstimandSpec> e{EstimandSpec::ate()};
  for (const double q : cfg.q) e.push_back(EstimandSpec::qte(q));
  if (cfg.dte_at_mean) e.push_back(EstimandSpec::dte(mean_y));
  for (const double y : cfg.dte) e.push_back(EstimandSpec::dte(y));
  return e;
}

PipelineOptions pipeline_options(const RunConfig& cfg) {
  PipelineOptions opt;
  opt.lambda_ratio = cfg.lambda_ratio;
  opt.logistic.clip_eps = cfg.clip_eps;
  return opt;
}

fs::path prepare_out_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw UsageError("cannot create output directory " + cfg.out);
  const fs::path probe = dir / ".ipwcdf_write_test";
  {
    std::ofstream f(probe);
    if (!f) throw UsageError("output directory " + cfg.out + " is not writable");
  }
  fs::remove(probe, ec);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
  if (!f) throw std::runtime_error("failed to write " + path.string());
}

std::string with_provenance_columns(const std::string& csv, const std::string& hash) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      out << line << ",version,config_hash\n";
      header = false;
    } else {
      out << line << ',' << kVersion << ',' << hash << '\n';
    }
  }
  return out.str();
}

void emit(std::ostream& out, OutputFormat f, const std::string& js, const std::string& csv,
          const std::string& md) {
  switch (f) {
    case OutputFormat::json: out << js; break;
    case OutputFormat::csv: out << csv; break;
    case OutputFormat::markdown: out << md; break;
  }
}

std::string label_of(const std::vector<std::string>& names, int j) {
  if (j < static_cast<int>(names.size())) return names[static_cast<std::size_t>(j)];
  return "X" + std::to_string(j + 1);
}

json graph_json(const std::vector<std::string>& names, const std::vector<int>& mains,
                const std::vector<IndexPair>& edges, const Eigen::VectorXd* theta,
                const std::vector<IndexPair>* pair_index) {
  json nodes = json::array();
  for (int j = 0; j < static_cast<int>(names.size()); ++j) {
    const bool selected = std::find(mains.begin(), mains.end(), j) != mains.end();
    nodes.push_back({{"id", names[static_cast<std::size_t>(j)]}, {"main_effect", selected}});
  }
  json links = json::array();
  for (const auto& [s, v] : edges) {
    json e{{"source", label_of(names, s)}, {"target", label_of(names, v)}};
    if (theta && pair_index) {
      const auto it = std::find(pair_index->begin(), pair_index->end(), IndexPair{s, v});
      if (it != pair_index->end()) e["weight"] = (*theta)[it - pair_index->begin()];
    }
    links.push_back(std::move(e));
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(links)}};
}

std::string cell(const std::optional<double>& v, const char* f = "%.3f") {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, f, *v);
  return buf;
}

std::string num(const std::optional<double>& v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", *v);
  return buf;
}

std::string p_cell(const std::optional<double>& p) {
  if (!p) return "-";
  if (*p < 0.001) return "<0.001";
  return cell(p);
}

}  // namespace

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  cfg.validate();
  const fs::path dir = prepare_out_dir(cfg);
  ScenarioConfig sc;
  sc.scenario = parse_scenario(cfg.scenario);
  sc.n = cfg.n;
  sc.p = cfg.p;
  sc.gamma0 = cfg.gamma0;
  sc.rho = cfg.rho;
  sc.seed = cfg.seed;
  try {
    sc.validate();
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }

  SimulationOptions opt;
  opt.estimands = estimands_of(cfg, 0.0);
  opt.pipeline = pipeline_options(cfg);
  opt.threads = cfg.threads;
  opt.truth_mc_draws = cfg.truth_draws;

  const std::string hash = cfg.hash();
  err << "simulate: scenario " << cfg.scenario << ", n " << cfg.n << ", " << cfg.reps
      << " replicates, " << opt.estimands.size() << " estimands, " << cfg.threads << " threads\n";
  const SimulationResult res = run_replications(sc, cfg.reps, opt);
  err << "simulate: done, " << res.failures << " failed replicates\n";
  for (const auto& m : res.failure_messages) err << "  " << m << '\n';

  const std::vector<double> truth = true_effects(sc, opt.estimands, opt.truth_mc_draws);
  json truth_json = json::array();
  for (std::size_t k = 0; k < truth.size(); ++k)
    truth_json.push_back({{"estimand", opt.estimands[k].label()}, {"value", truth[k]}});

  std::vector<std::string> names;
  for (int j = 0; j < cfg.p; ++j) names.push_back("X" + std::to_string(j + 1));
  const json graph = {{"scenario", cfg.scenario},
                      {"true_graph", graph_json(names, {0, 2}, sc.edges(), nullptr, nullptr)}};

  json report;
  report["tool"] = "ipwcdf";
  report["version"] = kVersion;
  report["config"] = cfg.resolved();
  report["config_hash"] = hash;
  report["replicates"] = res.reps;
  report["failures"] = res.failures;
  report["failure_messages"] = res.failure_messages;
  report["sandwich_checks"] = res.sandwich_checks;
  report["sandwich_violations"] = res.sandwich_violations;
  report["truth"] = std::move(truth_json);
  report["metrics"] = metrics_json(res.rows);

  const std::string js = report.dump(2) + "\n";
  const std::string csv = with_provenance_columns(metrics_csv(res.rows), hash);
  std::ostringstream md;
  md << "## Simulation: " << cfg.scenario << " scenario, n = " << cfg.n << ", " << cfg.reps
     << " replicates\n\n"
     << "ipwcdf " << kVersion << ", config " << hash << ", seed " << cfg.seed << "\n\n"
     << metrics_markdown(res.rows);

  write_file(dir / "report.json", js);
  write_file(dir / "metrics.csv", csv);
  write_file(dir / "tables.md", md.str());
  write_file(dir / "graph.json", graph.dump(2) + "\n");
  emit(out, cfg.format, js, csv, md.str());
  return 0;
}

int cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  cfg.validate();
  const fs::path dir = prepare_out_dir(cfg);
  ColumnSpec spec{cfg.outcome, cfg.treatment, cfg.confounders};
  std::optional<LoadResult> loaded;
  std::string data_hash;
  try {
    spec.validate();
    loaded.emplace(load_csv(cfg.data, spec));
    std::ifstream f(cfg.data, std::ios::binary);
    data_hash = hex64(fnv1a64(std::string(std::istreambuf_iterator<char>(f), {})));
  } catch (const SchemaError& e) {
    throw UsageError(e.what());
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  } catch (const EmptyDataError& e) {
    throw UsageError(e.what());
  }
  const Dataset& d = loaded->data;
  err << "analyze: " << d.n() << " rows (" << loaded->dropped << " dropped), " << d.p()
      << " confounders\n";

  PipelineOptions opt = pipeline_options(cfg);
  opt.estimands = estimands_of(cfg, d.y().mean());
  const PipelineResult res = run_pipeline(d, opt);

  std::optional<BootstrapResult> boot;
  if (cfg.bootstrap > 0) {
    err << "analyze: bootstrap with " << cfg.bootstrap << " replicates on " << cfg.threads << " threads\n";
    const EstimationPipeline pipe = [&opt](const Dataset& b) { return point_estimates(b, opt); };
    boot = bootstrap_se(pipe, d, cfg.bootstrap, cfg.seed, cfg.threads);
    err << "analyze: bootstrap done, " << boot->failures << " redrawn replicates\n";
  }

  json estimates = json::array();
  std::ostringstream csv;
  csv << "estimand,method,estimate,se,se_source,ci_low,ci_high,p_value,sandwich_se,bootstrap_se,"
         "version,config_hash\n";
  std::ostringstream md;
  const std::string hash = cfg.hash();
  md << "## Estimated causal effects\n\n"
     << "ipwcdf " << kVersion << ", config " << hash << ", n = " << d.n() << "\n\n"
     << "| Estimand | Method | EST | S.E. | p-value |\n|---|---|---|---|---|\n";
  for (std::size_t k = 0; k < res.estimates.size(); ++k) {
    const auto& rec = res.estimates[k];
    const EstimandSpec& es = rec.report.estimand;
    const std::optional<double> sandwich = rec.report.se;
    std::optional<double> bse;
    if (boot) bse = boot->se[k];
    std::optional<double> se;
    std::string source = "none";
    const bool prefer_boot = es.kind != EstimandKind::QTE || cfg.qte_se == "bootstrap";
    if (prefer_boot && bse) {
      se = bse;
      source = "bootstrap";
    } else if (sandwich) {
      se = sandwich;
      source = "sandwich";
    } else if (bse) {
      se = bse;
      source = "bootstrap";
    }
    const EffectReport r = make_report(es, rec.report.method, rec.report.estimate, se);
    json j = to_json(r);
    j["se_source"] = source;
    j["sandwich_se"] = sandwich ? json(*sandwich) : json(nullptr);
    j["bootstrap_se"] = bse ? json(*bse) : json(nullptr);
    if (rec.sandwich) j["sandwich_negative_fallback"] = rec.sandwich->negative_fallback;
    estimates.push_back(std::move(j));

    std::optional<double> lo, hi;
    if (r.ci95) {
      lo = r.ci95->first;
      hi = r.ci95->second;
    }
    csv << es.label() << ',' << method_name(r.method) << ',' << num(r.estimate) << ',' << num(se) << ','
        << source << ',' << num(lo) << ',' << num(hi) << ',' << num(r.p_value) << ',' << num(sandwich)
        << ',' << num(bse) << ',' << kVersion << ',' << hash << '\n';
    md << "| " << es.label() << " | " << method_name(r.method) << " | " << cell(r.estimate) << " | "
       << cell(se) << " | " << p_cell(r.p_value) << " |\n";
  }

  const auto& names = d.col_names();
  json report;
  report["tool"] = "ipwcdf";
  report["version"] = kVersion;
  json resolved = cfg.resolved();
  if (cfg.dte_at_mean) resolved["dte_mean_point"] = d.y().mean();
  report["config"] = std::move(resolved);
  report["config_hash"] = hash;
  report["data"] = {{"rows", d.n()},
                    {"dropped_rows", loaded->dropped},
                    {"treated", d.n_treated()},
                    {"control", d.n_control()},
                    {"confounders", names},
                    {"file_hash", data_hash}};
  report["selection"] = to_json(res.selection, names);
  report["propensity"] = to_json(res.fit, res.star);
  if (res.full_fit) report["full_propensity"] = to_json(*res.full_fit, *res.full_design);
  if (boot)
    report["bootstrap"] = {{"replicates", boot->reps}, {"redrawn", boot->failures}, {"seed", cfg.seed}};
  report["estimates"] = std::move(estimates);

  std::vector<IndexPair> pair_index;
  for (int s = 0; s < static_cast<int>(d.p()); ++s)
    for (int v = s + 1; v < static_cast<int>(d.p()); ++v) pair_index.emplace_back(s, v);
  const json graph = graph_json(names, res.selection.v_hat, res.selection.e_hat,
                                &res.selection.theta_hat, &pair_index);

  const std::string js = report.dump(2) + "\n";
  write_file(dir / "report.json", js);
  write_file(dir / "metrics.csv", csv.str());
  write_file(dir / "tables.md", md.str());
  write_file(dir / "graph.json", graph.dump(2) + "\n");
  emit(out, cfg.format, js, csv.str(), md.str());
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal effects from inverse-probability-weighted CDFs with network-based confounder selection",
               "ipwcdf"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo study on the synthetic scenarios");
  CLI::App* ana = app.add_subcommand("analyze", "Estimate effects on a CSV dataset");

  std::string scenario, data, outcome, treatment, confounders, qte_se, q, dte, out_dir, format,
      config_path;
  int n = 0, p = 0, reps = 0, bootstrap = 0, threads = 0;
  long truth_draws = 0;
  double gamma0 = 0, rho = 0, clip_eps = 0, lambda_ratio = 0;
  std::uint64_t seed = 0;

  sim->add_option("--scenario", scenario, "independent, hub or lattice");
  sim->add_option("--n", n, "sample size per replicate");
  sim->add_option("--p", p, "number of confounders");
  sim->add_option("--gamma0", gamma0, "true treatment effect");
  sim->add_option("--rho", rho, "covariance on network edges");
  sim->add_option("--reps", reps, "number of replicates");
  sim->add_option("--truth-draws", truth_draws, "Monte Carlo draws for DTE truth in network scenarios");
  ana->add_option("--data", data, "CSV file with a header row");
  ana->add_option("--outcome", outcome, "outcome column");
  ana->add_option("--treatment", treatment, "binary treatment column");
  ana->add_option("--confounders", confounders, "comma-separated confounder columns");
  ana->add_option("--bootstrap", bootstrap, "bootstrap replicates (0 disables)");
  ana->add_option("--qte-se", qte_se, "QTE standard errors: sandwich or bootstrap");
  for (CLI::App* sub : {sim, ana}) {
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--q", q, "quantile levels, e.g. 0.25,0.5 (none for no QTE)");
    sub->add_option("--dte", dte, "DTE evaluation points, e.g. -3,0,3, or mean (analyze)");
    sub->add_option("--clip-eps", clip_eps, "propensity clipping bound");
    sub->add_option("--lambda-ratio", lambda_ratio, "lambda2 / lambda1");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--format", format, "stdout rendering: json, csv or markdown");
    sub->add_option("--threads", threads, "worker threads (default: IPWCDF_THREADS or all cores)");
    sub->add_option("--config", config_path, "JSON config file; flags take precedence");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = sim->parsed() ? sim : ana;
  RunConfig cfg;
  cfg.command = sub->get_name();
  cfg.threads = default_thread_count();
  if (cfg.command == "analyze") {
    cfg.dte.clear();
    cfg.dte_at_mean = true;
  }
  try {
    if (sub->get_option("--config")->count() > 0) {
      std::ifstream f(config_path);
      if (!f) throw UsageError("cannot read config file " + config_path);
      json j;
      try {
        j = json::parse(f);
      } catch (const json::exception& e) {
        throw UsageError("config file " + config_path + ": " + e.what());
      }
      apply_config_json(cfg, j);
    }
    auto given = [sub](const char* name) {
      const CLI::Option* o = sub->get_option_no_throw(name);
      return o != nullptr && o->count() > 0;
    };
    if (given("--scenario")) cfg.scenario = scenario;
    if (given("--n")) cfg.n = n;
    if (given("--p")) cfg.p = p;
    if (given("--gamma0")) cfg.gamma0 = gamma0;
    if (given("--rho")) cfg.rho = rho;
    if (given("--reps")) cfg.reps = reps;
    if (given("--truth-draws")) cfg.truth_draws = truth_draws;
    if (given("--data")) cfg.data = data;
    if (given("--outcome")) cfg.outcome = outcome;
    if (given("--treatment")) cfg.treatment = treatment;
    if (given("--confounders")) cfg.confounders = split_list(confounders);
    if (given("--bootstrap")) cfg.bootstrap = bootstrap;
    if (given("--qte-se")) cfg.qte_se = qte_se;
    if (given("--seed")) cfg.seed = seed;
    if (given("--q")) cfg.q = parse_number_list(q, "--q");
    if (given("--dte")) set_dte(cfg, dte);
    if (given("--clip-eps")) cfg.clip_eps = clip_eps;
    if (given("--lambda-ratio")) cfg.lambda_ratio = lambda_ratio;
    if (given("--out")) cfg.out = out_dir;
    if (given("--format")) cfg.format = parse_format(format);
    if (given("--threads")) cfg.threads = threads;
    cfg.validate();
    return cfg.command == "simulate" ? cmd_simulate(cfg, out, err) : cmd_analyze(cfg, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace ipwcdf
