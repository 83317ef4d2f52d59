#include "rotspec/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rotspec/errors.hpp"
#include "rotspec/levmar.hpp"

namespace rotspec {

const char* field_form_name(FieldForm f) {
  return f == FieldForm::power_law ? "power_law" : "quadratic";
}

FieldForm field_form_from_name(const std::string& name) {
  if (name == "power_law") return FieldForm::power_law;
  if (name == "quadratic") return FieldForm::quadratic;
  throw UsageError("unknown field model form '" + name + "' (power_law or quadratic)");
}

double FieldModel::v2(double p_gpa) const {
  if (p_gpa < 0.0) throw ValidationError("pressure must be >= 0");
  if (form == FieldForm::power_law) return p_gpa == 0.0 ? 0.0 : a * std::pow(p_gpa, b);
  return c1 * p_gpa + c2 * p_gpa * p_gpa;
}

double FieldModel::softening(double t_k) const {
  return std::max(0.0, 1.0 - soften_ct_per_k * (t_k - soften_t0_k));
}

void FieldModel::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c1) || !std::isfinite(c2))
    throw ValidationError("field model parameters must be finite");
  if (soften_ct_per_k < 0.0) throw ValidationError("softening coefficient must be >= 0");
}

void FrequencyDataset::validate() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const FrequencyPoint& r = rows[i];
    if (!(r.p_gpa > 0.0) || !(r.t_k > 0.0) || r.freq_cm1 < 0.0)
      throw ValidationError("dataset row " + std::to_string(i) +
                            ": requires P > 0, T > 0 and frequency >= 0");
  }
}

namespace {

double exact_j1_splitting(const Isotope& iso, double v2, int jmax) {
  CrystalField field;
  field.v2_cm1 = v2;
  field.jmax = jmax;
  const LevelDiagram diagram = level_diagram_exact(iso, field, 4);
  return std::abs(diagram.energy(1, 0) - diagram.energy(1, 1));
}

FieldModel fit_rows(const std::vector<const FrequencyPoint*>& rows, FieldForm form,
                    const FieldFitOptions& options, std::vector<double>* residuals,
                    std::vector<double>* pulls, double* chi2,
                    std::vector<double>* param_sigmas = nullptr) {
  if (rows.size() < 2)
    throw ValidationError("field model fit needs at least 2 rows, got " +
                          std::to_string(rows.size()));

  FieldModel model;
  model.form = form;
  model.soften_ct_per_k = options.softening_ct_per_k;
  model.soften_t0_k = options.softening_t0_k;

  // Internal parameterization keeps a > 0 via log.
  std::vector<double> init;
  if (form == FieldForm::power_law) {
    const FrequencyPoint& lo = *rows.front();
    const FrequencyPoint& hi = *rows.back();
    double b0 = 1.0;
    if (hi.p_gpa != lo.p_gpa && lo.freq_cm1 > 0.0 && hi.freq_cm1 > 0.0)
      b0 = std::log(hi.freq_cm1 / lo.freq_cm1) / std::log(hi.p_gpa / lo.p_gpa);
    const double s0 = model.softening(lo.t_k);
    const double v2_anchor = lo.freq_cm1 / 0.6 / (s0 > 0.0 ? s0 : 1.0);
    double a0 = v2_anchor > 0.0 ? v2_anchor / std::pow(lo.p_gpa, b0) : 1.0;
    init = {std::log(std::max(a0, 1e-12)), b0};
  } else {
    double c1_0 = 0.0;
    for (const auto* r : rows) c1_0 += r->freq_cm1 / 0.6 / r->p_gpa;
    c1_0 /= static_cast<double>(rows.size());
    init = {c1_0, 0.0};
  }
  if (options.fit_softening) init.push_back(options.softening_ct_per_k);

  auto model_from = [&](const std::vector<double>& u) {
    FieldModel m = model;
    if (form == FieldForm::power_law) {
      m.a = std::exp(u[0]);
      m.b = u[1];
    } else {
      m.c1 = u[0];
      m.c2 = u[1];
    }
    if (options.fit_softening) m.soften_ct_per_k = std::max(0.0, u[2]);
    return m;
  };

  ResidualFn residual_fn = [&](const std::vector<double>& u, std::vector<double>& r) {
    const FieldModel m = model_from(u);
    r.clear();
    for (const auto* row : rows) {
      const double v2 = m.v2(row->p_gpa) * m.softening(row->t_k);
      const double pred = options.use_exact_mapping
                              ? exact_j1_splitting(options.iso_for_exact, v2, options.jmax)
                              : 0.6 * v2;
      const double sigma = row->sigma_cm1 > 0.0 ? row->sigma_cm1 : 1.0;
      r.push_back((pred - row->freq_cm1) / sigma);
    }
  };

  const LevMarResult lm =
      levmar(residual_fn, std::nullopt, init, static_cast<int>(rows.size()));
  if (lm.status == LevMarStatus::singular)
    throw ConvergenceError("field model fit became singular");

  FieldModel fitted = model_from(lm.params);
  fitted.fitted_pmin_gpa = rows.front()->p_gpa;
  fitted.fitted_pmax_gpa = rows.front()->p_gpa;
  for (const auto* r : rows) {
    fitted.fitted_pmin_gpa = std::min(fitted.fitted_pmin_gpa, r->p_gpa);
    fitted.fitted_pmax_gpa = std::max(fitted.fitted_pmax_gpa, r->p_gpa);
  }

  if (residuals) {
    std::vector<double> pull_vec;
    residual_fn(lm.params, pull_vec);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double sigma = rows[i]->sigma_cm1 > 0.0 ? rows[i]->sigma_cm1 : 1.0;
      residuals->push_back(-pull_vec[i] * sigma);
      pulls->push_back(-pull_vec[i]);
    }
    *chi2 += lm.chi2;
  }
  if (param_sigmas && !lm.covariance.empty()) {
    const std::size_t np = lm.params.size();
    auto cdiag = [&](std::size_t i) {
      const double v = lm.covariance[i * np + i];
      return v > 0.0 ? std::sqrt(v) : 0.0;
    };
    if (form == FieldForm::power_law) {
      param_sigmas->push_back(fitted.a * cdiag(0));  // a = exp(u0)
      param_sigmas->push_back(cdiag(1));
    } else {
      param_sigmas->push_back(cdiag(0));
      param_sigmas->push_back(cdiag(1));
    }
    if (options.fit_softening) param_sigmas->push_back(cdiag(2));
  }
  return fitted;
}

}  // namespace

FieldFitResult fit_field_model(const FrequencyDataset& data, FieldForm form,
                               const FieldFitOptions& options) {
  data.validate();
  if (options.use_exact_mapping) options.iso_for_exact.validate();
  if (data.rows.size() < 2)
    throw ValidationError("field model fit needs at least 2 rows");

  std::set<std::string> phases;
  for (const auto& r : data.rows) phases.insert(r.phase);
  if (phases.size() > 1)
    throw ValidationError("field model fit expects a single-phase subset, got " +
                          std::to_string(phases.size()) + " phases");
  const bool phase2 = !data.rows.empty() && data.rows.front().phase == "II";

  FieldFitResult result;
  result.used_exact_mapping = options.use_exact_mapping;

  std::vector<const FrequencyPoint*> all;
  for (const auto& r : data.rows) all.push_back(&r);
  result.model = fit_rows(all, form, options, &result.residuals_cm1, &result.pulls,
                          &result.chi2, &result.param_sigmas);

  if (phase2) {
    std::map<int, std::vector<const FrequencyPoint*>> by_site;
    for (const auto& r : data.rows) {
      if (r.site < 0)
        throw ValidationError("phase II rows must carry site indices");
      by_site[r.site].push_back(&r);
    }
    for (const auto& [site, rows] : by_site)
      result.site_models[site] = fit_rows(rows, form, options, nullptr, nullptr, nullptr);
  }

  // Monotonicity scan over the fitted range.
  const double pmin = result.model.fitted_pmin_gpa, pmax = result.model.fitted_pmax_gpa;
  double prev = result.model.v2(pmin);
  for (int i = 1; i <= 64; ++i) {
    const double p = pmin + (pmax - pmin) * i / 64.0;
    const double v = result.model.v2(p);
    if (v < prev - 1e-9) {
      result.monotone_warning = true;
      break;
    }
    prev = v;
  }
  return result;
}

Prediction predict_zero_roton(const FieldModel& model, double p_gpa, double t_k,
                              const Isotope& iso) {
  (void)iso;  // the first-order splitting carries no B
  model.validate();
  Prediction out;
  out.freq_cm1 = 0.6 * model.v2(p_gpa) * model.softening(t_k);
  if (model.fitted_pmax_gpa > model.fitted_pmin_gpa) {
    const double margin = 0.1 * (model.fitted_pmax_gpa - model.fitted_pmin_gpa);
    out.extrapolated =
        p_gpa < model.fitted_pmin_gpa - margin || p_gpa > model.fitted_pmax_gpa + margin;
  }
  return out;
}

MappingDiagnostic mapping_diagnostic(const FieldModel& model, const Isotope& iso,
                                     double p_gpa, double t_k, int jmax) {
  MappingDiagnostic diag;
  diag.v2_cm1 = model.v2(p_gpa) * model.softening(t_k);
  diag.first_order_cm1 = 0.6 * diag.v2_cm1;
  diag.exact_cm1 = exact_j1_splitting(iso, diag.v2_cm1, jmax);
  diag.difference_cm1 = diag.exact_cm1 - diag.first_order_cm1;
  return diag;
}

OverlapResult overlap_pressure(const FieldModel& model,
                               const std::vector<std::pair<Isotope, double>>& composition,
                               const OverlapOptions& options) {
  model.validate();
  if (composition.empty()) throw ValidationError("overlap needs a composition");
  bool any = false;
  for (const auto& [iso, frac] : composition) {
    iso.validate();
    if (frac > 0.0) any = true;
  }
  if (!any) throw ValidationError("overlap composition has no positive fractions");

  const bool pure_d2 = composition.size() == 1 && composition.front().first.label == "D2";
  const bool split_sites = pure_d2 || !options.mixture_suppresses_phase2;

  const double s = model.softening(options.t_k);
  auto b_min_at = [&](double p) {
    double b_min = 0.0;
    bool first = true;
    for (const auto& [iso, frac] : composition) {
      if (frac <= 0.0) continue;
      double b = iso.b_cm1;
      const auto slope = options.db_dp_cm1_per_gpa.find(iso.label);
      if (slope != options.db_dp_cm1_per_gpa.end()) b += slope->second * p;
      if (first || b < b_min) b_min = b;
      first = false;
    }
    return b_min;
  };
  auto gap = [&](double p) {
    double scale = 1.0;
    if (split_sites && p >= options.d2_phase2_pressure_gpa)
      scale = options.d2_top_site_scale;
    const double v2 = model.v2(p) * s * scale;
    const double zero_roton_top = 0.6 * v2;
    const double s00_lower_edge = 6.0 * b_min_at(p) - (2.0 / 7.0) * v2;
    return zero_roton_top + 2.0 * options.fwhm_cm1 - s00_lower_edge;
  };

  OverlapResult result;
  if (gap(options.p_max_gpa) < 0.0) return result;  // none in range
  if (gap(options.p_min_gpa) >= 0.0) {
    result.found = true;
    result.p_gpa = options.p_min_gpa;
    return result;
  }
  double lo = options.p_min_gpa, hi = options.p_max_gpa;
  while (hi - lo > options.tol_gpa) {
    const double mid = 0.5 * (lo + hi);
    if (gap(mid) >= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  result.found = true;
  result.p_gpa = hi;
  return result;
}

}  // namespace rotspec
