#include "rotspec/rotor.hpp"

#include <cmath>

#include "rotspec/errors.hpp"

namespace rotspec {

void Isotope::validate() const {
  if (label != "H2" && label != "D2" && label != "HD")
    throw ValidationError("isotope label must be H2, D2 or HD, got '" + label + "'");
  if (!(b_cm1 > 0.0) || !std::isfinite(b_cm1))
    throw ValidationError("isotope " + label + ": rotational constant must be positive");
  if (d_cm1 < 0.0 || !std::isfinite(d_cm1))
    throw ValidationError("isotope " + label + ": centrifugal constant must be >= 0");
  if (spin_weight_even_j < 1 || spin_weight_odd_j < 1)
    throw ValidationError("isotope " + label + ": spin weights must be positive integers");
}

double free_rotor_energy(int j, double b_cm1, double d_cm1) {
  if (j < 0) throw ValidationError("free_rotor_energy: J must be >= 0");
  if (!(b_cm1 > 0.0)) throw ValidationError("free_rotor_energy: B must be > 0");
  const double jj = static_cast<double>(j) * (j + 1);
  return b_cm1 * jj - d_cm1 * jj * jj;
}

double roton_shift_s0(int j, double b_cm1, double d_cm1) {
  return free_rotor_energy(j + 2, b_cm1, d_cm1) - free_rotor_energy(j, b_cm1, d_cm1);
}

double kelvin_to_wavenumber(double t_k) {
  if (t_k < 0.0) throw ValidationError("kelvin_to_wavenumber: temperature must be >= 0");
  return t_k / kKelvinPerWavenumber;
}

double wavenumber_to_kelvin(double w_cm1) {
  if (w_cm1 < 0.0) throw ValidationError("wavenumber_to_kelvin: input must be >= 0");
  return w_cm1 * kKelvinPerWavenumber;
}

double thermal_wavenumber(double t_k) { return kelvin_to_wavenumber(t_k); }

}  // namespace rotspec
