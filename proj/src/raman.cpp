#include "rotspec/raman.hpp"

#include <algorithm>
#include <cmath>

#include "rotspec/angular.hpp"
#include "rotspec/errors.hpp"

namespace rotspec {

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::zero_roton: return "zero_roton";
    case Branch::s0: return "S0";
    case Branch::anti_stokes_zero_roton: return "anti_stokes_zero_roton";
    case Branch::anti_stokes_s0: return "anti_stokes_S0";
  }
  return "?";
}

const char* convention_name(CountConvention c) {
  return c == CountConvention::level_pairs ? "level_pairs" : "state_pairs";
}

const char* j3_count_note() {
  return "literature tabulations sometimes quote 14 zero-roton transitions for J=3; "
         "neither counting convention yields that number (level_pairs 5, state_pairs 10)";
}

void SelectionRules::validate() const {
  for (int dj : allowed_dj)
    if (dj != -2 && dj != 0 && dj != 2)
      throw ValidationError("allowed_dj must be a subset of {-2, 0, +2}");
  if (max_abs_dm < 0 || max_abs_dm > 2)
    throw ValidationError("max_abs_dm must be in [0, 2]");
}

namespace {

std::vector<int> signed_states(int abs_mj) {
  if (abs_mj == 0) return {0};
  return {-abs_mj, abs_mj};
}

int degeneracy(int abs_mj) { return abs_mj == 0 ? 1 : 2; }

// Line strength of a level pair: sum of |<jf mf|C^2_q|ji mi>|^2 over the
// signed states of both levels.
double level_pair_strength(int ji, int abs_mi, int jf, int abs_mf) {
  double total = 0.0;
  for (int mi : signed_states(abs_mi)) {
    for (int mf : signed_states(abs_mf)) {
      if (std::abs(mf - mi) > 2) continue;
      const double e = angular::c2_element(jf, mf, mf - mi, ji, mi);
      total += e * e;
    }
  }
  return total;
}

double state_pair_strength(int ji, int mi, int jf, int mf) {
  if (std::abs(mf - mi) > 2) return 0.0;
  const double e = angular::c2_element(jf, mf, mf - mi, ji, mi);
  return e * e;
}

Transition make_transition(const LevelEntry& lo, const LevelEntry& hi, int m_lo, int m_hi,
                           Branch branch, CountConvention conv) {
  Transition t;
  t.from = {lo.j, lo.abs_mj};
  t.to = {hi.j, hi.abs_mj};
  t.m_from = m_lo;
  t.m_to = m_hi;
  t.shift_cm1 = hi.energy_cm1 - lo.energy_cm1;
  t.branch = branch;
  t.j_label = lo.j;
  t.convention = conv;
  return t;
}

}  // namespace

std::vector<Transition> enumerate_transitions(const LevelDiagram& levels,
                                              const SelectionRules& rules) {
  rules.validate();
  levels.validate();
  const bool want_dj0 = rules.allowed_dj.count(0) > 0;
  const bool want_dj2 = rules.allowed_dj.count(2) > 0 || rules.allowed_dj.count(-2) > 0;

  std::vector<Transition> out;

  if (want_dj0) {
    for (std::size_t a = 0; a < levels.entries.size(); ++a) {
      for (std::size_t b = a + 1; b < levels.entries.size(); ++b) {
        const LevelEntry& ea = levels.entries[a];
        const LevelEntry& eb = levels.entries[b];
        if (ea.j != eb.j) continue;
        if (std::abs(ea.abs_mj - eb.abs_mj) > rules.max_abs_dm) continue;
        const bool zero_shift = ea.energy_cm1 == eb.energy_cm1;
        if (zero_shift && !rules.include_zero_shift) continue;
        const LevelEntry& lo = ea.energy_cm1 <= eb.energy_cm1 ? ea : eb;
        const LevelEntry& hi = ea.energy_cm1 <= eb.energy_cm1 ? eb : ea;
        if (rules.convention == CountConvention::level_pairs) {
          out.push_back(make_transition(lo, hi, lo.abs_mj, hi.abs_mj, Branch::zero_roton,
                                        rules.convention));
        } else {
          for (int ma : signed_states(lo.abs_mj)) {
            for (int mb : signed_states(hi.abs_mj)) {
              if (std::abs(mb - ma) > rules.max_abs_dm) continue;
              out.push_back(
                  make_transition(lo, hi, ma, mb, Branch::zero_roton, rules.convention));
            }
          }
        }
      }
      // Same-level signed pairs only matter for bookkeeping runs.
      if (rules.include_zero_shift &&
          rules.convention == CountConvention::state_pairs) {
        const LevelEntry& e = levels.entries[a];
        if (e.abs_mj > 0 && 2 * e.abs_mj <= rules.max_abs_dm)
          out.push_back(make_transition(e, e, -e.abs_mj, e.abs_mj, Branch::zero_roton,
                                        rules.convention));
      }
    }
  }

  if (want_dj2) {
    for (const auto& ea : levels.entries) {
      for (const auto& eb : levels.entries) {
        if (eb.j != ea.j + 2) continue;
        if (std::abs(ea.abs_mj - eb.abs_mj) > rules.max_abs_dm) continue;
        if (rules.convention == CountConvention::level_pairs) {
          out.push_back(
              make_transition(ea, eb, ea.abs_mj, eb.abs_mj, Branch::s0, rules.convention));
        } else {
          for (int ma : signed_states(ea.abs_mj)) {
            for (int mb : signed_states(eb.abs_mj)) {
              if (std::abs(mb - ma) > rules.max_abs_dm) continue;
              out.push_back(make_transition(ea, eb, ma, mb, Branch::s0, rules.convention));
            }
          }
        }
      }
    }
  }
  return out;
}

std::vector<Transition> intensity_weights(std::vector<Transition> transitions,
                                          const PopulationState& pop, const Isotope& iso) {
  const IsotopePopulation& species = pop.species_for(iso.label);
  for (auto& t : transitions) {
    if (species.fractions.find({t.from.j, t.from.abs_mj}) == species.fractions.end() ||
        species.fractions.find({t.to.j, t.to.abs_mj}) == species.fractions.end())
      throw ValidationError("transition references a level absent from the population state");

    if (t.convention == CountConvention::level_pairs) {
      t.angular = level_pair_strength(t.from.j, t.from.abs_mj, t.to.j, t.to.abs_mj);
    } else {
      t.angular = state_pair_strength(t.from.j, t.m_from, t.to.j, t.m_to);
    }
    const double per_state =
        species.fraction(t.from.j, t.from.abs_mj) / degeneracy(t.from.abs_mj);
    t.weight = species.mole_fraction * per_state * t.angular;
  }
  return transitions;
}

std::vector<Transition> stick_spectrum(const std::vector<Transition>& weighted,
                                       const PopulationState& pop, const Isotope& iso,
                                       double t_k, bool include_anti_stokes) {
  if (include_anti_stokes && !(t_k > 0.0))
    throw ValidationError("anti-Stokes sticks require T > 0");
  const IsotopePopulation& species = pop.species_for(iso.label);

  std::vector<Transition> out = weighted;
  if (!include_anti_stokes) return out;

  for (const auto& t : weighted) {
    Transition anti = t;
    std::swap(anti.from, anti.to);
    std::swap(anti.m_from, anti.m_to);
    anti.shift_cm1 = -t.shift_cm1;
    anti.branch = t.branch == Branch::zero_roton ? Branch::anti_stokes_zero_roton
                                                 : Branch::anti_stokes_s0;
    const double per_state =
        species.fraction(anti.from.j, anti.from.abs_mj) / degeneracy(anti.from.abs_mj);
    anti.weight = species.mole_fraction * per_state * anti.angular;
    out.push_back(anti);
  }
  return out;
}

}  // namespace rotspec
