#ifndef ROTSPEC_RAMAN_HPP
#define ROTSPEC_RAMAN_HPP

#include <set>
#include <vector>

#include "rotspec/crystalfield.hpp"
#include "rotspec/population.hpp"

namespace rotspec {

enum class Branch { zero_roton, s0, anti_stokes_zero_roton, anti_stokes_s0 };

const char* branch_name(Branch b);

// level_pairs counts one line per pair of (J, |mJ|) levels; state_pairs
// counts one line per pair of signed-m states with distinct energies.
enum class CountConvention { level_pairs, state_pairs };

const char* convention_name(CountConvention c);

struct SelectionRules {
  std::set<int> allowed_dj = {-2, 0, 2};
  int max_abs_dm = 2;
  CountConvention convention = CountConvention::level_pairs;
  bool include_zero_shift = false;  // zero-shift pairs sit under the elastic line

  void validate() const;
};

struct LevelRef {
  int j = 0;
  int abs_mj = 0;
};

struct Transition {
  LevelRef from, to;      // from = lower level; shift Stokes-positive
  int m_from = 0, m_to = 0;  // signed states under state_pairs, else |m| values
  double shift_cm1 = 0.0;
  double angular = 0.0;   // rank-2 line strength summed over signed states
  double weight = 0.0;    // per-state initial population x angular x mole fraction
  Branch branch = Branch::zero_roton;
  int j_label = 0;        // initial J, kept for S0(J) tagging and fit seeding
  CountConvention convention = CountConvention::level_pairs;
};

// Raman-allowed lines over a level diagram. Delta J = 0 lines connect
// distinct-|mJ| levels within one J; Delta J = 2 lines connect J to J+2.
// Both respect the |Delta m| cap; zero-shift pairs are excluded unless
// requested.
std::vector<Transition> enumerate_transitions(const LevelDiagram& levels,
                                              const SelectionRules& rules);

// Known discrepancy, reported rather than reconciled: some literature
// tabulations quote 14 zero-roton transitions for J=3, which neither
// counting convention reproduces (level_pairs 5, state_pairs 10).
const char* j3_count_note();

// Fills angular line strengths and population weights. Transitions must refer
// to levels present in the population state for `iso`.
std::vector<Transition> intensity_weights(std::vector<Transition> transitions,
                                          const PopulationState& pop, const Isotope& iso);

// Adds anti-Stokes partners at -shift, weighted by the upper level's
// per-state population. Stokes weights pass through unchanged.
std::vector<Transition> stick_spectrum(const std::vector<Transition>& weighted,
                                       const PopulationState& pop, const Isotope& iso,
                                       double t_k, bool include_anti_stokes);

}  // namespace rotspec

#endif
