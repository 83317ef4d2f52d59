#ifndef ROTSPEC_POPULATION_HPP
#define ROTSPEC_POPULATION_HPP

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rotspec/crystalfield.hpp"
#include "rotspec/rotor.hpp"

namespace rotspec {

// Per-species level occupations. `fractions` maps (J, |mJ|) to the total
// fraction in that level (summed over the +-mJ pair), normalized to 1 per
// species; the share carried by the whole species is `mole_fraction`.
struct IsotopePopulation {
  Isotope iso;
  double mole_fraction = 1.0;
  std::optional<double> ortho_fraction;  // absent for HD
  std::map<std::pair<int, int>, double> fractions;
  // Context the occupations were computed in, needed to re-equilibrate.
  CrystalField field;
  int jmax_sum = 30;

  double fraction(int j, int abs_mj) const;
  double scaled_fraction(int j, int abs_mj) const { return mole_fraction * fraction(j, abs_mj); }
};

struct PopulationState {
  double t_k = 0.0;
  std::vector<IsotopePopulation> species;

  const IsotopePopulation& species_for(const std::string& label) const;
  void validate() const;
};

// k(P) = k0 exp(alpha (P - P0)); defaults give k(25 GPa)/k(7 GPa) = 100.
struct ConversionKinetics {
  double k0_per_hour = 0.05;
  double p0_gpa = 7.0;
  double alpha_per_gpa = std::log(100.0) / 18.0;
  // D2 converts much slower than H2; this scale is a placeholder value and
  // is flagged as such in reports.
  double d2_rate_scale = 1.0 / 30.0;
  bool enabled_in_mixtures = false;

  double rate_per_hour(double p_gpa) const {
    return k0_per_hour * std::exp(alpha_per_gpa * (p_gpa - p0_gpa));
  }
  void validate() const;
};

// Boltzmann occupations over the perturbative level diagram (spin weights
// included). With frozen_ortho the even-J and odd-J manifolds are normalized
// separately to the frozen split; T = 0 is accepted only in that case.
PopulationState equilibrium_populations(const Isotope& iso, double t_k,
                                        const CrystalField& field,
                                        std::optional<double> frozen_ortho = std::nullopt,
                                        int jmax_sum = 30);

// Relaxes each species' ortho fraction toward its equilibrium value at T by
// exact exponential integration over dt, then re-thermalizes within the
// manifolds. Conversion is skipped for HD, and for mixtures unless
// kin.enabled_in_mixtures.
PopulationState evolve_ortho_para(const PopulationState& state, const ConversionKinetics& kin,
                                  double p_gpa, double t_k, double dt_hours);

// Independent per-isotope equilibria scaled by mole fraction. Fractions must
// sum to 1 within 1e-9.
PopulationState mixture_population(
    const std::vector<std::pair<Isotope, double>>& components, double t_k,
    const CrystalField& field, const std::map<std::string, double>& frozen_ortho_by_label,
    int jmax_sum = 30);

}  // namespace rotspec

#endif
