#include "rotspec/angular.hpp"

#include <array>
#include <cmath>
#include <cstdlib>

#include "rotspec/constants.hpp"
#include "rotspec/errors.hpp"

namespace rotspec::angular {

namespace {

// Factorials up to 170 fit in a double.
const std::array<double, 171>& factorial_table() {
  static const std::array<double, 171> table = [] {
    std::array<double, 171> t{};
    t[0] = 1.0;
    for (int i = 1; i <= 170; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  return table;
}

double fct(int n) {
  if (n < 0 || n > 170) throw ValidationError("factorial argument out of range");
  return factorial_table()[static_cast<std::size_t>(n)];
}

}  // namespace

double normalized_assoc_legendre(int l, int m, double x) {
  if (l < 0) throw ValidationError("normalized_assoc_legendre: l must be >= 0");
  const int am = std::abs(m);
  if (am > l) throw ValidationError("normalized_assoc_legendre: |m| > l");

  // barP_m^m with Condon-Shortley phase; the (2k-1)/(2k) product keeps the
  // normalization factor in range for large m.
  double pmm = std::sqrt((2.0 * am + 1.0) / 2.0);
  if (am > 0) {
    const double s2 = (1.0 - x) * (1.0 + x);
    double prod = 1.0;
    for (int k = 1; k <= am; ++k) prod *= (2.0 * k - 1.0) / (2.0 * k);
    pmm *= std::sqrt(prod) * std::pow(s2, 0.5 * am);
    if (am % 2 == 1) pmm = -pmm;
  }
  double result;
  if (l == am) {
    result = pmm;
  } else {
    double pm1 = x * std::sqrt(2.0 * am + 3.0) * pmm;  // barP_{m+1}^m
    if (l == am + 1) {
      result = pm1;
    } else {
      double plm = 0.0;
      for (int ll = am + 2; ll <= l; ++ll) {
        const double a = std::sqrt((4.0 * ll * ll - 1.0) / (static_cast<double>(ll) * ll - am * am));
        const double b =
            std::sqrt(((ll - 1.0) * (ll - 1.0) - am * am) / (4.0 * (ll - 1.0) * (ll - 1.0) - 1.0));
        plm = a * (x * pm1 - b * pmm);
        pmm = pm1;
        pm1 = plm;
      }
      result = plm;
    }
  }
  if (m < 0 && am % 2 == 1) result = -result;
  return result;
}

double legendre(int l, double x) {
  if (l < 0) throw ValidationError("legendre: l must be >= 0");
  if (l == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int ll = 2; ll <= l; ++ll) {
    const double p2 = ((2.0 * ll - 1.0) * x * p1 - (ll - 1.0) * p0) / ll;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw ValidationError("gauss_legendre: need at least one node");
  GaussLegendreRule rule;
  rule.x.resize(static_cast<std::size_t>(n));
  rule.w.resize(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration from the Chebyshev-like initial guess.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int ll = 2; ll <= n; ++ll) {
        const double p2 = ((2.0 * ll - 1.0) * x * p1 - (ll - 1.0) * p0) / ll;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.x[static_cast<std::size_t>(i)] = -x;
    rule.x[static_cast<std::size_t>(n - 1 - i)] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.w[static_cast<std::size_t>(i)] = w;
    rule.w[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return rule;
}

double wigner3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  if (m1 + m2 + m3 != 0) return 0.0;
  if (j3 < std::abs(j1 - j2) || j3 > j1 + j2) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;

  const double delta = std::sqrt(fct(j1 + j2 - j3) * fct(j1 - j2 + j3) * fct(-j1 + j2 + j3) /
                                 fct(j1 + j2 + j3 + 1));
  const double norm = std::sqrt(fct(j1 + m1) * fct(j1 - m1) * fct(j2 + m2) * fct(j2 - m2) *
                                fct(j3 + m3) * fct(j3 - m3));

  const int kmin = std::max({0, j2 - j3 - m1, j1 - j3 + m2});
  const int kmax = std::min({j1 + j2 - j3, j1 - m1, j2 + m2});
  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double term = fct(k) * fct(j1 + j2 - j3 - k) * fct(j1 - m1 - k) * fct(j2 + m2 - k) *
                        fct(j3 - j2 + m1 + k) * fct(j3 - j1 - m2 + k);
    sum += (k % 2 == 0 ? 1.0 : -1.0) / term;
  }
  const int phase = j1 - j2 - m3;
  const double sign = (((phase % 2) + 2) % 2 == 0) ? 1.0 : -1.0;
  return sign * delta * norm * sum;
}

double p2_diagonal(int j, int m) {
  if (std::abs(m) > j) throw ValidationError("p2_diagonal: |m| > J");
  if (j == 0) return 0.0;
  return (static_cast<double>(j) * (j + 1) - 3.0 * m * m) /
         ((2.0 * j - 1.0) * (2.0 * j + 3.0));
}

double p2_coupling(int j, int m) {
  if (j < 0 || std::abs(m) > j) throw ValidationError("p2_coupling: bad (J, m)");
  const double jp1 = j + 1.0, jp2 = j + 2.0;
  const double num = (jp1 * jp1 - m * m) * (jp2 * jp2 - m * m);
  const double den = (2.0 * j + 1.0) * (2.0 * j + 3.0) * (2.0 * j + 3.0) * (2.0 * j + 5.0);
  return 1.5 * std::sqrt(num / den);
}

double c2_element(int jf, int mf, int q, int ji, int mi) {
  if (std::abs(mf) > jf || std::abs(mi) > ji)
    throw ValidationError("c2_element: |m| > J");
  if (mf != mi + q) return 0.0;
  const double sign = (((mf % 2) + 2) % 2 == 0) ? 1.0 : -1.0;
  return sign * std::sqrt((2.0 * ji + 1.0) * (2.0 * jf + 1.0)) *
         wigner3j(ji, 2, jf, mi, q, -mf) * wigner3j(ji, 2, jf, 0, 0, 0);
}

double legendre_matrix_element_quadrature(int jf, int ji, int m, int order_l, int nodes) {
  if (nodes < 64) nodes = 64;
  const GaussLegendreRule rule = gauss_legendre(nodes);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    const double x = rule.x[i];
    sum += rule.w[i] * normalized_assoc_legendre(jf, m, x) * legendre(order_l, x) *
           normalized_assoc_legendre(ji, m, x);
  }
  return sum;
}

double c2_element_quadrature(int jf, int mf, int q, int ji, int mi, int nodes) {
  if (mf != mi + q) return 0.0;
  if (nodes < 64) nodes = 64;
  const GaussLegendreRule rule = gauss_legendre(nodes);
  // C^2_q = sqrt(2/5) barP_2^q(x) e^{i q phi}; the phi integral is 1 here.
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    const double x = rule.x[i];
    sum += rule.w[i] * normalized_assoc_legendre(jf, mf, x) *
           normalized_assoc_legendre(2, q, x) * normalized_assoc_legendre(ji, mi, x);
  }
  return std::sqrt(2.0 / 5.0) * sum;
}

}  // namespace rotspec::angular
