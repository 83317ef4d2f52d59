#ifndef ROTSPEC_ROTOR_HPP
#define ROTSPEC_ROTOR_HPP

#include <string>

#include "rotspec/constants.hpp"

namespace rotspec {

// A rotor species. Spin weights follow nuclear-spin statistics: the manifold
// with the larger weight is the ortho one (H2: odd J, D2: even J). HD has
// equal weights and no ortho/para partition.
struct Isotope {
  std::string label;       // "H2", "D2" or "HD"
  double b_cm1 = 0.0;      // rotational constant
  double d_cm1 = 0.0;      // centrifugal distortion, zero unless configured
  int spin_weight_even_j = 1;
  int spin_weight_odd_j = 1;

  bool has_ortho_para() const { return spin_weight_even_j != spin_weight_odd_j; }
  // Parity (0 = even J, 1 = odd J) of the ortho manifold. Only meaningful
  // when has_ortho_para().
  int ortho_parity() const { return spin_weight_odd_j > spin_weight_even_j ? 1 : 0; }
  int spin_weight(int j) const { return j % 2 == 0 ? spin_weight_even_j : spin_weight_odd_j; }

  void validate() const;  // throws ValidationError
};

// E(J) = B J(J+1) - D J^2 (J+1)^2, in cm^-1.
double free_rotor_energy(int j, double b_cm1, double d_cm1 = 0.0);

// S0(J) Raman shift E(J+2) - E(J); equals B(4J+6) for D = 0.
double roton_shift_s0(int j, double b_cm1, double d_cm1 = 0.0);

double kelvin_to_wavenumber(double t_k);
double wavenumber_to_kelvin(double w_cm1);

// Thermal energy kB*T expressed in cm^-1.
double thermal_wavenumber(double t_k);

}  // namespace rotspec

#endif
