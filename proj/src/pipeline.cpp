#include "ipwcdf/pipeline.hpp"

#include "ipwcdf/errors.hpp"

namespace ipwcdf {

GraphSelection select_graph(const Dataset& d, const PipelineOptions& opt) {
  const InteractionDesign design = d.p() >= 2 ? build_design(d.x()) : mains_only_design(d.x());
  const LassoProblem problem(design, d.y());
  const auto grid = default_lambda_grid(problem, opt.lambda_ratio, opt.grid_points, opt.grid_min_ratio);
  return select_lambda(design, d.y(), grid, opt.lasso);
}

namespace {

struct Context {
  const Dataset& d;
  const PipelineOptions& opt;
  PipelineResult& out;
  std::optional<DensityEstimate> dens1, dens0, full_dens1, full_dens0;
  std::optional<WeightedCdf> full_f1, full_f0;
  bool dens_tried = false, full_dens_tried = false;

  void ensure_density() {
    if (dens_tried) return;
    dens_tried = true;
    try {
      dens1 = kde_density(out.f1);
      dens0 = kde_density(out.f0);
    } catch (const DegenerateDensityError&) {
      dens1.reset();
      dens0.reset();
    }
  }

  void ensure_full() {
    if (out.full_fit) return;
    out.full_design = build_full_main_design(d.x(), d.col_names());
    out.full_fit = fit_logistic(*out.full_design, d.a(), opt.logistic);
    full_f1 = build_ipw_cdf(d.y(), d.a(), out.full_fit->pi_hat, Arm::treated);
    full_f0 = build_ipw_cdf(d.y(), d.a(), out.full_fit->pi_hat, Arm::control);
  }

  void ensure_full_density() {
    if (full_dens_tried) return;
    full_dens_tried = true;
    try {
      full_dens1 = kde_density(*full_f1);
      full_dens0 = kde_density(*full_f0);
    } catch (const DegenerateDensityError&) {
      full_dens1.reset();
      full_dens0.reset();
    }
  }

  void add(const EstimandSpec& spec, Method method, double estimate,
           std::optional<SandwichParts> parts) {
    std::optional<double> se;
    if (parts) se = parts->se;
    out.estimates.push_back({make_report(spec, method, estimate, se), std::move(parts)});
  }

  // QTE sandwich; absent when the density at the quantile is degenerate.
  std::optional<SandwichParts> qte_sandwich(const EstimandSpec& spec, const StarDesign& design,
                                            const PropensityFit& fit, const WeightedCdf& f1,
                                            const WeightedCdf& f0,
                                            const std::optional<DensityEstimate>& d1,
                                            const std::optional<DensityEstimate>& d0) {
    if (!d1 || !d0) return std::nullopt;
    try {
      return sandwich_se(spec, d.y(), d.a(), design, fit, f1, f0, &*d1, &*d0);
    } catch (const DegenerateDensityError&) {
      return std::nullopt;
    }
  }
};

}  // namespace

PipelineResult run_pipeline(const Dataset& d, const PipelineOptions& opt) {
  GraphSelection sel = select_graph(d, opt);
  StarDesign star = build_star_design(d.x(), sel, d.col_names());
  PropensityFit fit = fit_logistic(star, d.a(), opt.logistic);
  WeightedCdf f1 = build_ipw_cdf(d.y(), d.a(), fit.pi_hat, Arm::treated);
  WeightedCdf f0 = build_ipw_cdf(d.y(), d.a(), fit.pi_hat, Arm::control);
  PipelineResult out{std::move(sel), std::move(star), std::move(fit), std::nullopt, std::nullopt,
                     std::move(f1), std::move(f0), {}};
  Context ctx{d, opt, out, {}, {}, {}, {}, {}, {}};
  const bool se = opt.standard_errors;

  for (const auto& spec : opt.estimands) {
    const double est = effect_cdf(out.f1, out.f0, spec);
    switch (spec.kind) {
      case EstimandKind::ATE: {
        std::optional<SandwichParts> parts;
        if (se) parts = sandwich_se(spec, d.y(), d.a(), out.star, out.fit, out.f1, out.f0);
        if (opt.baselines) {
          std::optional<SandwichParts> ipw_parts;
          if (se) ipw_parts = ipw_ate_sandwich(d.y(), d.a(), out.star, out.fit);
          ctx.add(spec, Method::IPW, ate_ipw(d.y(), d.a(), out.fit.pi_hat), std::move(ipw_parts));
          ctx.add(spec, Method::LD, ate_ld(d.y(), d.a(), out.fit.pi_hat), parts);
        }
        ctx.add(spec, Method::CDF, est, std::move(parts));
        break;
      }
      case EstimandKind::QTE: {
        if (opt.baselines) {
          ctx.ensure_full();
          const double firpo = qte_firpo(d.y(), d.a(), out.full_fit->pi_hat, spec.param);
          std::optional<SandwichParts> parts;
          if (se) {
            ctx.ensure_full_density();
            parts = ctx.qte_sandwich(spec, *out.full_design, *out.full_fit, *ctx.full_f1,
                                     *ctx.full_f0, ctx.full_dens1, ctx.full_dens0);
          }
          ctx.add(spec, Method::Firpo, firpo, std::move(parts));
        }
        std::optional<SandwichParts> parts;
        if (se) {
          ctx.ensure_density();
          parts = ctx.qte_sandwich(spec, out.star, out.fit, out.f1, out.f0, ctx.dens1, ctx.dens0);
        }
        ctx.add(spec, Method::CDF, est, std::move(parts));
        break;
      }
      case EstimandKind::DTE: {
        std::optional<SandwichParts> parts;
        if (se) parts = sandwich_se(spec, d.y(), d.a(), out.star, out.fit, out.f1, out.f0);
        ctx.add(spec, Method::CDF, est, std::move(parts));
        break;
      }
    }
  }
  return out;
}

std::vector<double> point_estimates(const Dataset& d, const PipelineOptions& opt) {
  PipelineOptions light = opt;
  light.standard_errors = false;
  const PipelineResult r = run_pipeline(d, light);
  std::vector<double> est;
  est.reserve(r.estimates.size());
  for (const auto& e : r.estimates) est.push_back(e.report.estimate);
  return est;
}

}  // namespace ipwcdf
