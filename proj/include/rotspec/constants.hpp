#ifndef ROTSPEC_CONSTANTS_HPP
#define ROTSPEC_CONSTANTS_HPP

namespace rotspec {

// hc/kB in K*cm. h, c and kB are exact SI constants, so this value is exact
// to double precision.
inline constexpr double kKelvinPerWavenumber = 1.4387768775039338;

inline constexpr double kPi = 3.14159265358979323846;

struct UnitConstants {
  double kelvin_per_wavenumber = kKelvinPerWavenumber;  // K*cm
};

}  // namespace rotspec

#endif
