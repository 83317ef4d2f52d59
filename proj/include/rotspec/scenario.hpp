#ifndef ROTSPEC_SCENARIO_HPP
#define ROTSPEC_SCENARIO_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rotspec/config.hpp"
#include "rotspec/fitkit.hpp"

namespace rotspec {

// A scenario is data: a named (P, T, hold-time) sweep with composition,
// kinetics switch, profile, noise and seed, loaded from a plain-text
// document (see scenarios/SCHEMA.txt).
struct Scenario {
  std::string name;
  std::vector<std::pair<std::string, double>> composition;
  std::vector<double> pressures_gpa;
  std::vector<double> temperatures_k;
  std::vector<double> hold_hours = {0.0};
  bool kinetics_on = false;
  PeakProfile profile;
  double noise_rel = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> templates;
  bool use_exact_diagram = false;
  std::optional<double> mask_cutoff_cm1;  // config default when absent

  void validate() const;
  static Scenario from_text(const std::string& text, const std::string& where);
};

Scenario load_scenario(const std::string& path);

struct PointResult {
  int index = 0;
  double p_gpa = 0.0, t_k = 0.0, hold_hours = 0.0;
  bool ok = false;
  std::string error;  // error class and message for failed points
  std::map<std::string, double> ortho_fraction;  // after any kinetics hold
  std::map<std::string, FitResult> fits;         // by template name
  std::string spectrum_path;
};

struct ScenarioBundle {
  Scenario scenario;
  std::string out_dir;
  std::vector<PointResult> points;
};

// Runs composition -> populations (with kinetics history) -> sticks -> synth
// -> mask -> template fits for every (P, T, hold) point, persisting spectra,
// fit reports, the frequency table and a log under out_dir. Stage failures
// are recorded per point; the bundle completes with partial results.
ScenarioBundle run_scenario(const Scenario& scenario, const RunConfig& config,
                            const std::string& out_dir);

}  // namespace rotspec

#endif
