#ifndef ROTSPEC_CONFIG_HPP
#define ROTSPEC_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rotspec/calibrate.hpp"
#include "rotspec/lineshape.hpp"
#include "rotspec/population.hpp"

namespace rotspec {

// Everything physical lives in one annotated key = value document; the
// compiled-in copy (default_config_text) is the authoritative defaults file
// and `rotspec config --dump` writes it back out. Unknown keys are rejected
// with file and line.
struct RunConfig {
  std::map<std::string, Isotope> isotopes;  // keyed by label
  // Optional linear pressure dependence of B, per isotope label; zero keeps
  // the rotational constant fixed.
  std::map<std::string, double> db_dp_cm1_per_gpa;
  double v2_sign = 1.0;
  double v4_cm1 = 0.0;
  int jmax_basis = 20;
  int jmax_report = 8;
  int jmax_sum = 30;
  std::map<std::string, double> frozen_ortho;  // per isotope label
  ConversionKinetics kinetics;
  FieldModel field_model;
  PeakProfile profile;
  double mask_cutoff_cm1 = 25.0;
  double grid_min_cm1 = 5.0, grid_max_cm1 = 1200.0, grid_step_cm1 = 0.5;
  double d2_phase2_pressure_gpa = 25.0;
  std::vector<double> d2_site_scales = {0.80, 0.95, 1.10, 1.25};
  std::vector<double> d2_site_weights = {0.25, 0.25, 0.25, 0.25};
  bool mixture_suppresses_phase2 = true;
  double overlap_max_pressure_gpa = 300.0;
  std::uint64_t seed = 20260809;
  std::string output_dir = "runs";

  static RunConfig defaults();
  static RunConfig load(const std::string& path);  // defaults + file overrides

  void apply_text(const std::string& text, const std::string& where);
  void apply_file(const std::string& path);
  void validate() const;

  const Isotope& isotope(const std::string& label) const;
  // Isotope with B evaluated at pressure through the optional linear slope.
  Isotope isotope_at(const std::string& label, double p_gpa) const;
  std::vector<double> grid() const;

  // Crystal field at (P, T) through the configured field model and sign
  // convention.
  CrystalField resolve_field(double p_gpa, double t_k) const;

  // Site structure for one species at pressure P: pure D2 above its phase II
  // pressure splits into the configured sites, everything else is single.
  SiteModel site_model(const std::string& iso_label, double p_gpa,
                       const CrystalField& base, bool is_mixture) const;

  OverlapOptions overlap_options() const;

  // Canonical dump (stable key order, fmt_g9 values); its hash goes into run
  // manifests.
  std::string canonical_text() const;
  std::string hash() const;
};

const char* default_config_text();

}  // namespace rotspec

#endif
