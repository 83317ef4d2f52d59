#ifndef ROTSPEC_CRYSTALFIELD_HPP
#define ROTSPEC_CRYSTALFIELD_HPP

#include <vector>

#include "rotspec/rotor.hpp"

namespace rotspec {

// Axial crystal field H' = V2 P2(cos theta) + V4 P4(cos theta). The sign
// convention is positive V2, which puts E(1,+-1) below E(1,0); it is
// configurable and recorded in reports.
struct CrystalField {
  double v2_cm1 = 0.0;
  double v4_cm1 = 0.0;
  int jmax = 20;  // basis truncation for exact diagonalization

  void validate() const;
};

struct LevelEntry {
  int j = 0;
  int abs_mj = 0;
  double energy_cm1 = 0.0;
  int degeneracy = 1;  // 1 for mJ = 0, else 2
};

struct LevelDiagram {
  std::vector<LevelEntry> entries;  // sorted by (J, |mJ|)

  bool has(int j, int abs_mj) const;
  const LevelEntry& find(int j, int abs_mj) const;  // throws ValidationError
  double energy(int j, int abs_mj) const;
  int max_j() const;
  void validate() const;
};

// First-order expectation value <J mJ|P2|J mJ>; zero for J = 0.
// Throws for |mJ| > J.
double p2_expectation(int j, int mj);

// E(J, mJ) = E_rotor(J) + V2 <P2> + V4 <P4>, levels up to jmax_report.
LevelDiagram level_diagram_perturbative(const Isotope& iso, const CrystalField& field,
                                        int jmax_report);

// Diagonalizes H = E_rotor(L^2) + V2 P2 + V4 P4 in the |J, mJ> basis up to
// field.jmax, block by (mJ, parity); entries labeled by dominant-J overlap
// (ties to the lower J) and reported for J <= min(j_report, jmax - 4), where
// j_report < 0 means jmax - 4. Throws TruncationError when any reported
// level is not stable to 1e-6 cm^-1 under jmax -> jmax + 2.
LevelDiagram level_diagram_exact(const Isotope& iso, const CrystalField& field,
                                 int j_report = -1);

}  // namespace rotspec

#endif
