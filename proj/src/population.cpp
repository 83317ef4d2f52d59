#include "rotspec/population.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rotspec/errors.hpp"

namespace rotspec {

double IsotopePopulation::fraction(int j, int abs_mj) const {
  const auto it = fractions.find({j, abs_mj});
  return it == fractions.end() ? 0.0 : it->second;
}

const IsotopePopulation& PopulationState::species_for(const std::string& label) const {
  for (const auto& s : species)
    if (s.iso.label == label) return s;
  throw ValidationError("population state has no species '" + label + "'");
}

void PopulationState::validate() const {
  for (const auto& s : species) {
    double total = 0.0, ortho = 0.0;
    for (const auto& [key, f] : s.fractions) {
      if (f < 0.0) throw ValidationError("negative level fraction");
      total += f;
      if (s.iso.has_ortho_para() && key.first % 2 == s.iso.ortho_parity()) ortho += f;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw ValidationError("per-isotope fractions of " + s.iso.label + " do not sum to 1");
    if (s.ortho_fraction && std::abs(ortho - *s.ortho_fraction) > 1e-12)
      throw ValidationError("ortho fraction inconsistent with manifold sum");
  }
}

void ConversionKinetics::validate() const {
  if (!(k0_per_hour > 0.0)) throw ValidationError("kinetics k0 must be > 0");
  if (!(p0_gpa > 0.0)) throw ValidationError("kinetics P0 must be > 0");
  if (!std::isfinite(alpha_per_gpa)) throw ValidationError("kinetics alpha must be finite");
  if (!(d2_rate_scale > 0.0)) throw ValidationError("kinetics D2 rate scale must be > 0");
}

namespace {

// Boltzmann weights within one parity manifold, normalized to `share`.
// T = 0 puts everything in the manifold's lowest level(s).
void fill_manifold(const Isotope& iso, const LevelDiagram& levels, int parity, double share,
                   double t_k, std::map<std::pair<int, int>, double>& out) {
  double emin = std::numeric_limits<double>::infinity();
  for (const auto& e : levels.entries)
    if (e.j % 2 == parity) emin = std::min(emin, e.energy_cm1);

  double z = 0.0;
  std::map<std::pair<int, int>, double> w;
  for (const auto& e : levels.entries) {
    if (e.j % 2 != parity) continue;
    double boltz;
    if (t_k == 0.0) {
      boltz = std::abs(e.energy_cm1 - emin) < 1e-12 ? 1.0 : 0.0;
    } else {
      boltz = std::exp(-(e.energy_cm1 - emin) / thermal_wavenumber(t_k));
    }
    const double weight = iso.spin_weight(e.j) * e.degeneracy * boltz;
    w[{e.j, e.abs_mj}] = weight;
    z += weight;
  }
  for (const auto& [key, weight] : w) out[key] += share * weight / z;
}

IsotopePopulation equilibrium_one(const Isotope& iso, double t_k, const CrystalField& field,
                                  std::optional<double> frozen_ortho, int jmax_sum) {
  iso.validate();
  if (t_k < 0.0) throw ValidationError("temperature must be >= 0");
  if (frozen_ortho) {
    if (!iso.has_ortho_para())
      throw ValidationError(iso.label + " has no ortho/para partition to freeze");
    if (*frozen_ortho < 0.0 || *frozen_ortho > 1.0)
      throw ValidationError("frozen ortho fraction must be in [0, 1]");
  }
  if (t_k == 0.0 && !frozen_ortho)
    throw ValidationError("T = 0 requires a frozen ortho fraction");

  const LevelDiagram levels = level_diagram_perturbative(iso, field, jmax_sum);

  IsotopePopulation pop;
  pop.iso = iso;
  pop.field = field;
  pop.jmax_sum = jmax_sum;

  if (frozen_ortho) {
    const int op = iso.ortho_parity();
    fill_manifold(iso, levels, op, *frozen_ortho, t_k, pop.fractions);
    fill_manifold(iso, levels, 1 - op, 1.0 - *frozen_ortho, t_k, pop.fractions);
    pop.ortho_fraction = *frozen_ortho;
  } else {
    // Single partition sum over both manifolds.
    double emin = std::numeric_limits<double>::infinity();
    for (const auto& e : levels.entries) emin = std::min(emin, e.energy_cm1);
    double z = 0.0;
    for (const auto& e : levels.entries) {
      const double weight = iso.spin_weight(e.j) * e.degeneracy *
                            std::exp(-(e.energy_cm1 - emin) / thermal_wavenumber(t_k));
      pop.fractions[{e.j, e.abs_mj}] = weight;
      z += weight;
    }
    double ortho = 0.0;
    for (auto& [key, f] : pop.fractions) {
      f /= z;
      if (iso.has_ortho_para() && key.first % 2 == iso.ortho_parity()) ortho += f;
    }
    if (iso.has_ortho_para()) pop.ortho_fraction = ortho;
  }
  return pop;
}

}  // namespace

PopulationState equilibrium_populations(const Isotope& iso, double t_k,
                                        const CrystalField& field,
                                        std::optional<double> frozen_ortho, int jmax_sum) {
  PopulationState state;
  state.t_k = t_k;
  state.species.push_back(equilibrium_one(iso, t_k, field, frozen_ortho, jmax_sum));
  state.validate();
  return state;
}

PopulationState evolve_ortho_para(const PopulationState& state, const ConversionKinetics& kin,
                                  double p_gpa, double t_k, double dt_hours) {
  kin.validate();
  if (dt_hours < 0.0) throw ValidationError("evolve_ortho_para: dt must be >= 0");
  if (dt_hours == 0.0) return state;

  const bool is_mixture = state.species.size() > 1;
  PopulationState next;
  next.t_k = t_k;
  for (const auto& s : state.species) {
    if (!s.iso.has_ortho_para() || !s.ortho_fraction ||
        (is_mixture && !kin.enabled_in_mixtures)) {
      next.species.push_back(s);
      continue;
    }
    const double x_eq =
        equilibrium_one(s.iso, t_k, s.field, std::nullopt, s.jmax_sum).ortho_fraction.value();
    double k = kin.rate_per_hour(p_gpa);
    if (s.iso.label == "D2") k *= kin.d2_rate_scale;
    const double x_new = x_eq + (*s.ortho_fraction - x_eq) * std::exp(-k * dt_hours);

    IsotopePopulation evolved = equilibrium_one(s.iso, t_k, s.field, x_new, s.jmax_sum);
    evolved.mole_fraction = s.mole_fraction;
    next.species.push_back(std::move(evolved));
  }
  next.validate();
  return next;
}

PopulationState mixture_population(
    const std::vector<std::pair<Isotope, double>>& components, double t_k,
    const CrystalField& field, const std::map<std::string, double>& frozen_ortho_by_label,
    int jmax_sum) {
  if (components.empty()) throw ValidationError("mixture needs at least one component");
  double total = 0.0;
  for (const auto& [iso, frac] : components) {
    if (frac < 0.0) throw ValidationError("mole fraction must be >= 0");
    total += frac;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ValidationError("mole fractions must sum to 1 within 1e-9");

  PopulationState state;
  state.t_k = t_k;
  for (const auto& [iso, frac] : components) {
    std::optional<double> frozen;
    const auto it = frozen_ortho_by_label.find(iso.label);
    if (it != frozen_ortho_by_label.end()) frozen = it->second;
    IsotopePopulation pop = equilibrium_one(iso, t_k, field, frozen, jmax_sum);
    pop.mole_fraction = frac;
    state.species.push_back(std::move(pop));
  }
  state.validate();
  return state;
}

}  // namespace rotspec
