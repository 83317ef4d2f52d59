#ifndef ROTSPEC_ANGULAR_HPP
#define ROTSPEC_ANGULAR_HPP

#include <vector>

namespace rotspec::angular {

// Fully normalized associated Legendre function with Condon-Shortley phase:
// Y_lm(theta,phi) = normalized_assoc_legendre(l, m, cos theta) * e^{i m phi} / sqrt(2 pi),
// so that int_{-1}^{1} barP_l^m barP_l'^m dx = delta_{l l'}.
// Negative m handled via barP_l^{-m} = (-1)^m barP_l^m.
double normalized_assoc_legendre(int l, int m, double x);

// Plain Legendre polynomial P_l(x).
double legendre(int l, double x);

struct GaussLegendreRule {
  std::vector<double> x;  // nodes in (-1, 1)
  std::vector<double> w;  // weights, sum to 2
};

// n-point rule; exact for polynomials of degree <= 2n-1.
GaussLegendreRule gauss_legendre(int n);

// Wigner 3j symbol for integer angular momenta.
double wigner3j(int j1, int j2, int j3, int m1, int m2, int m3);

// <J m|P2|J m> = [J(J+1) - 3 m^2] / [(2J-1)(2J+3)], zero for J = 0.
double p2_diagonal(int j, int m);

// <J+2, m|P2|J, m>.
double p2_coupling(int j, int m);

// <jf mf|C^2_q|ji mi> with C^2_q = sqrt(4 pi / 5) Y_2q, via 3j symbols.
double c2_element(int jf, int mf, int q, int ji, int mi);

// --- quadrature oracle -----------------------------------------------------
// Gauss-Legendre evaluation of the same matrix elements, independent of the
// closed forms above. With >= 64 nodes these integrals of polynomial
// integrands are exact to rounding.

// <jf m|P_L|ji m> (diagonal in m).
double legendre_matrix_element_quadrature(int jf, int ji, int m, int order_l,
                                          int nodes = 96);

// <jf mf|C^2_q|ji mi> by quadrature over cos(theta); the azimuthal integral
// enforces mf = mi + q analytically.
double c2_element_quadrature(int jf, int mf, int q, int ji, int mi, int nodes = 96);

}  // namespace rotspec::angular

#endif
