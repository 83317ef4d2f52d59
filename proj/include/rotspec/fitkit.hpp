#ifndef ROTSPEC_FITKIT_HPP
#define ROTSPEC_FITKIT_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rotspec/levmar.hpp"
#include "rotspec/lineshape.hpp"

namespace rotspec {

// One model parameter: either free within [lo, hi], fixed at init, or linked
// to the same kind of parameter of an earlier peak.
struct ParamSpec {
  double init = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool fixed = false;
  int link = -1;

  static ParamSpec free_param(double init, double lo, double hi) {
    return {init, lo, hi, false, -1};
  }
  static ParamSpec fixed_param(double value) { return {value, value, value, true, -1}; }
  static ParamSpec linked(int peak) { return {0.0, 0.0, 0.0, false, peak}; }
};

struct PeakSpec {
  ParamSpec center, amplitude, fwhm, eta;
};

struct PeakModelSpec {
  std::string label = "custom";
  std::vector<PeakSpec> peaks;
  int baseline_order = 1;  // polynomial order 0..2
  bool ordered_centers = false;
  bool physical = true;  // phenomenological templates are excluded from physics reports
  std::optional<std::pair<double, double>> window;  // fit range in cm^-1

  void validate() const;
  std::string to_text() const;
  static PeakModelSpec from_text(const std::string& text);
};

struct FittedParam {
  double value = 0.0;
  double sigma = 0.0;
  bool at_bound = false;
  bool fixed = false;
  int ext_index = -1;  // column in FitResult::ext_cov, -1 for fixed params
};

struct FittedPeak {
  FittedParam center, amplitude, fwhm, eta;
  bool unresolved = false;
};

enum class FitStatus { converged, max_iter, singular, unresolved };

const char* fit_status_name(FitStatus s);

struct FitResult {
  std::string model_label;
  bool physical = true;
  std::vector<FittedPeak> peaks;  // sorted by fitted center
  std::vector<FittedParam> baseline;
  double chi2 = 0.0;
  double chi2_reduced = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  FitStatus status = FitStatus::converged;
  int n_samples = 0;
  int n_free = 0;
  // Covariance over the external parameters (4 per peak then baseline),
  // already permuted to the sorted peak order.
  std::vector<double> ext_cov;

  double covariance(int ext_i, int ext_j) const;
};

struct FitOptions {
  LevMarOptions lm;            // lambda0 1e-3, x10 / /10, 200 iterations
  int min_local_points = 5;    // valid samples near a center needed to localize it
  double overlap_fraction = 0.25;  // centers closer than fwhm/4 flag "unresolved"
};

// Unit-area pseudo-Voigt value and partials; the fit Jacobian is assembled
// from these.
struct PseudoVoigtDerivs {
  double value = 0.0;
  double d_center = 0.0;
  double d_fwhm = 0.0;
  double d_eta = 0.0;
};

PseudoVoigtDerivs pseudo_voigt_derivs(double x, double center, double fwhm, double eta);

// Bounded multi-peak least squares on the valid samples of a spectrum.
// Bounds are enforced by a smooth sinusoidal transformation; accepted steps
// never increase chi^2. Peaks whose centers cannot be localized (inside a
// masked region, or closer than fwhm/4 to a neighbor) flag the fit
// "unresolved".
FitResult fit_peaks(const Spectrum& spec, const PeakModelSpec& model,
                    const FitOptions& options = {});

// Named model templates.
std::vector<std::string> template_names();
PeakModelSpec template_model(const std::string& name);  // UsageError lists names

// Re-seeds centers, amplitudes and the fit window from predicted sticks of a
// branch (j_label < 0 accepts any J). Sticks with zero weight are ignored.
void seed_from_sticks(PeakModelSpec& model, const std::vector<Transition>& sticks,
                      Branch branch, int j_label, const PeakProfile& profile);

// Center differences of a fitted S0(0) triplet with propagated one-sigma
// uncertainties. Labels assume the positive-V2 ordering (|m|=2 lowest).
struct SplittingReport {
  double d02 = 0.0, d02_sigma = 0.0;  // highest - lowest center
  double d01 = 0.0, d01_sigma = 0.0;  // highest - middle
  double d12 = 0.0, d12_sigma = 0.0;  // middle - lowest
};

SplittingReport splitting_report(const FitResult& fit);

}  // namespace rotspec

#endif
