#ifndef ROTSPEC_CALIBRATE_HPP
#define ROTSPEC_CALIBRATE_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rotspec/crystalfield.hpp"
#include "rotspec/rotor.hpp"

namespace rotspec {

enum class FieldForm { power_law, quadratic };

const char* field_form_name(FieldForm f);
FieldForm field_form_from_name(const std::string& name);

// V2(P) with a linear temperature softening factor. The functional forms are
// artifact choices, labeled as such in reports.
struct FieldModel {
  FieldForm form = FieldForm::power_law;
  double a = 0.0, b = 1.0;    // power_law: V2 = a P^b
  double c1 = 0.0, c2 = 0.0;  // quadratic: V2 = c1 P + c2 P^2
  double soften_ct_per_k = 0.0;
  double soften_t0_k = 10.0;
  double fitted_pmin_gpa = 0.0, fitted_pmax_gpa = 0.0;  // 0/0 = unknown

  double v2(double p_gpa) const;
  double softening(double t_k) const;  // max(0, 1 - cT (T - T0))
  void validate() const;
};

struct FrequencyPoint {
  double p_gpa = 0.0;
  double t_k = 0.0;
  std::string label;  // isotope or mixture label
  std::string phase;  // "I", "II", "fluid", ...
  int site = -1;      // phase-II site index, -1 when not applicable
  double freq_cm1 = 0.0;
  double sigma_cm1 = 1.0;
};

struct FrequencyDataset {
  std::vector<FrequencyPoint> rows;
  void validate() const;
};

struct FieldFitOptions {
  // Recalibrate through exact diagonalization instead of the first-order
  // omega = (3/5) V2 mapping; relevant when V2/B gets large.
  bool use_exact_mapping = false;
  Isotope iso_for_exact;  // required when use_exact_mapping
  int jmax = 20;
  bool fit_softening = false;   // otherwise cT is taken from `softening_ct`
  double softening_ct_per_k = 0.0;
  double softening_t0_k = 10.0;
};

struct FieldFitResult {
  FieldModel model;                       // pooled fit over all rows
  std::map<int, FieldModel> site_models;  // per-site fits for phase II data
  std::vector<double> residuals_cm1;      // observed - predicted, row order
  std::vector<double> pulls;              // residual / sigma
  std::vector<double> param_sigmas;       // one-sigma for (a, b) or (c1, c2) [, cT]
  double chi2 = 0.0;
  bool monotone_warning = false;  // fitted V2 not increasing over the data range
  bool used_exact_mapping = false;
};

// Least squares of omega(P, T) = (3/5) V2(P) s(T) to a single-phase dataset.
// Phase II rows must carry site indices and get one V2(P) per site.
FieldFitResult fit_field_model(const FrequencyDataset& data, FieldForm form,
                               const FieldFitOptions& options = {});

struct Prediction {
  double freq_cm1 = 0.0;
  bool extrapolated = false;  // P outside the fitted range
};

// First-order zero-roton frequency (3/5) V2(P) s(T). Carries no rotational
// constant, so the result is identical for every isotope argument.
Prediction predict_zero_roton(const FieldModel& model, double p_gpa, double t_k,
                              const Isotope& iso);

// J=1 splitting from exact diagonalization at the same V2, and its distance
// from the first-order mapping; reported as a diagnostic.
struct MappingDiagnostic {
  double v2_cm1 = 0.0;
  double first_order_cm1 = 0.0;
  double exact_cm1 = 0.0;
  double difference_cm1 = 0.0;
};

MappingDiagnostic mapping_diagnostic(const FieldModel& model, const Isotope& iso,
                                     double p_gpa, double t_k, int jmax = 20);

struct OverlapOptions {
  double fwhm_cm1 = 3.0;
  double t_k = 10.0;
  double p_min_gpa = 0.5;
  double p_max_gpa = 300.0;
  double tol_gpa = 0.1;
  // Pure D2 acquires split sites above its phase II pressure; the top site
  // scale moves its highest zero-roton component toward S0(0).
  double d2_phase2_pressure_gpa = 25.0;
  double d2_top_site_scale = 1.25;
  bool mixture_suppresses_phase2 = true;
  // Optional linear pressure dependence of B per isotope label; moves the
  // S0(0) edge with compression.
  std::map<std::string, double> db_dp_cm1_per_gpa;
};

struct OverlapResult {
  bool found = false;
  double p_gpa = 0.0;
};

// Lowest pressure where the zero-roton center + 2 fwhm reaches the lower
// edge of the nearest S0(0) component; bisection to tol_gpa.
OverlapResult overlap_pressure(const FieldModel& model,
                               const std::vector<std::pair<Isotope, double>>& composition,
                               const OverlapOptions& options = {});

}  // namespace rotspec

#endif
