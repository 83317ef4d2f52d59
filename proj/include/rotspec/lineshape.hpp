#ifndef ROTSPEC_LINESHAPE_HPP
#define ROTSPEC_LINESHAPE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rotspec/raman.hpp"

namespace rotspec {

// Unit-area pseudo-Voigt: (1 - eta) Gaussian + eta Lorentzian, common fwhm.
struct PeakProfile {
  double fwhm_cm1 = 3.0;
  double eta = 0.5;

  void validate() const;
  double value(double x) const;  // x = distance from center
};

struct SpectrumMeta {
  double pressure_gpa = 0.0;
  double temperature_k = 0.0;
  std::string composition;  // e.g. "H2" or "H2:0.5,D2:0.5"
  double cutoff_cm1 = 0.0;
  bool grid_warning = false;    // sticks fell outside the grid
  bool resorted_on_load = false;
};

struct Spectrum {
  std::vector<double> grid;       // strictly ascending wavenumbers
  std::vector<double> intensity;  // may be negative for measured data
  std::vector<std::uint8_t> valid;  // 0 = excluded from fits
  SpectrumMeta meta;

  std::size_t size() const { return grid.size(); }
  void validate() const;
};

std::string format_composition(const std::vector<std::pair<std::string, double>>& parts);
std::vector<std::pair<std::string, double>> parse_composition(const std::string& text);

std::vector<double> make_grid(double min_cm1, double max_cm1, double step_cm1);

// One crystal-field environment with its share of the molecules.
struct Site {
  double weight = 1.0;
  CrystalField field;
};

struct SiteModel {
  std::vector<Site> sites;

  static SiteModel single(const CrystalField& field) { return {{{1.0, field}}}; }
  void validate() const;  // weights >= 0, sum to 1 within 1e-9
};

// Sum of stick weights convolved with the profile on the given grid. Sticks
// with nonzero weight outside the grid raise the metadata warning flag only.
Spectrum broaden(const std::vector<Transition>& sticks, const PeakProfile& profile,
                 const std::vector<double>& grid);

// Marks |wavenumber| < cutoff invalid (excluded from fits, not zeroed) and
// records the cutoff in the metadata.
Spectrum apply_elastic_mask(Spectrum spec, double cutoff_cm1);

struct SynthComponent {
  Isotope iso;
  double mole_fraction = 1.0;
  SiteModel sites;
};

struct SynthOptions {
  bool include_anti_stokes = true;
  bool use_exact_diagram = false;
  int jmax_report = 8;  // highest J used when generating sticks
  int jmax_sum = 30;    // partition-sum truncation for populations
  double noise_rel = 0.0;  // gaussian noise amplitude relative to peak intensity
  std::uint64_t seed = 0;
  std::map<std::string, double> frozen_ortho;  // per isotope label
  SelectionRules rules;
};

// Merged stick list over all components and sites, weights scaled by mole
// fraction and site weight. Used by synth and for seeding fit templates.
std::vector<Transition> predict_sticks(const std::vector<SynthComponent>& components,
                                       double t_k, const SynthOptions& options = {});

// Superposition of per-isotope, per-site spectra scaled by mole fraction and
// site weight; deterministic for fixed inputs and seed.
Spectrum synth(const std::vector<SynthComponent>& components, double p_gpa, double t_k,
               const PeakProfile& profile, const std::vector<double>& grid,
               const SynthOptions& options = {});

}  // namespace rotspec

#endif
