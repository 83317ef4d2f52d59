#include <doctest.h>

#include <cmath>
#include <random>

#include "rotspec/angular.hpp"
#include "rotspec/errors.hpp"

using namespace rotspec;
using namespace rotspec::angular;

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
  const GaussLegendreRule rule = gauss_legendre(64);
  double wsum = 0.0;
  for (double w : rule.w) wsum += w;
  CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));

  // int x^k over [-1,1] = 0 (odd) or 2/(k+1) (even), exact up to degree 127.
  for (int k = 0; k <= 20; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) sum += rule.w[i] * std::pow(rule.x[i], k);
    const double expected = k % 2 == 1 ? 0.0 : 2.0 / (k + 1);
    CHECK(sum == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("normalized associated legendre functions are orthonormal") {
  const GaussLegendreRule rule = gauss_legendre(96);
  for (int m : {0, 1, 3}) {
    for (int la = m; la <= m + 4; ++la) {
      for (int lb = m; lb <= m + 4; ++lb) {
        double sum = 0.0;
        for (std::size_t i = 0; i < rule.x.size(); ++i)
          sum += rule.w[i] * normalized_assoc_legendre(la, m, rule.x[i]) *
                 normalized_assoc_legendre(lb, m, rule.x[i]);
        CHECK(sum == doctest::Approx(la == lb ? 1.0 : 0.0).epsilon(1e-12));
      }
    }
  }
  // Condon-Shortley phase and negative-m identity.
  CHECK(normalized_assoc_legendre(1, 1, 0.3) < 0.0);
  CHECK(normalized_assoc_legendre(3, -2, 0.4) ==
        doctest::Approx(normalized_assoc_legendre(3, 2, 0.4)).epsilon(1e-14));
  CHECK(normalized_assoc_legendre(3, -1, 0.4) ==
        doctest::Approx(-normalized_assoc_legendre(3, 1, 0.4)).epsilon(1e-14));
}

TEST_CASE("wigner3j against independently computed references") {
  // Reference values computed with an independent computer-algebra system.
  struct Case {
    int j1, j2, j3, m1, m2, m3;
    double value;
  };
  const Case cases[] = {
      {1, 2, 1, 0, 0, 0, 0.3651483716701107},
      {2, 2, 2, 1, 0, -1, 0.11952286093343936},
      {3, 2, 3, 2, -2, 0, -0.2182178902359924},
      {2, 2, 4, 0, 0, 0, 0.23904572186687872},
      {4, 2, 2, 0, 0, 0, 0.23904572186687872},
      {3, 2, 1, 1, 1, -2, 0.0},
      {5, 2, 3, 0, 0, 0, -0.20806259464411975},
      {6, 2, 4, 3, -1, -2, -0.19789097796726146},
      {2, 2, 3, 0, 0, 0, 0.0},
      {10, 2, 8, 4, 1, -5, 0.05245929835764225},
  };
  for (const auto& c : cases)
    CHECK(wigner3j(c.j1, c.j2, c.j3, c.m1, c.m2, c.m3) ==
          doctest::Approx(c.value).epsilon(1e-12));
  // Selection rules.
  CHECK(wigner3j(1, 2, 1, 1, 1, 1) == 0.0);
  CHECK(wigner3j(1, 2, 5, 0, 0, 0) == 0.0);
}

TEST_CASE("p2 matrix elements: closed forms vs quadrature oracle") {
  CHECK(p2_diagonal(1, 0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(p2_diagonal(1, 1) == doctest::Approx(-0.2).epsilon(1e-14));
  CHECK(p2_diagonal(2, 0) == doctest::Approx(2.0 / 7.0).epsilon(1e-14));
  CHECK(p2_diagonal(2, 1) == doctest::Approx(1.0 / 7.0).epsilon(1e-14));
  CHECK(p2_diagonal(2, 2) == doctest::Approx(-2.0 / 7.0).epsilon(1e-14));
  CHECK(p2_diagonal(0, 0) == 0.0);

  for (int j = 0; j <= 10; ++j) {
    for (int m = 0; m <= j; ++m) {
      CHECK(p2_diagonal(j, m) ==
            doctest::Approx(legendre_matrix_element_quadrature(j, j, m, 2)).epsilon(1e-10));
      CHECK(p2_coupling(j, m) ==
            doctest::Approx(legendre_matrix_element_quadrature(j + 2, j, m, 2)).epsilon(1e-8));
    }
  }
}

TEST_CASE("P2 is traceless within each J manifold") {
  for (int j = 1; j <= 8; ++j) {
    double trace = 0.0;
    for (int m = 0; m <= j; ++m) trace += (m == 0 ? 1.0 : 2.0) * p2_diagonal(j, m);
    CHECK(trace == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("rank-2 tensor elements vs references and quadrature") {
  struct Case {
    int jf, mf, q, ji, mi;
    double value;
  };
  const Case cases[] = {
      {2, 0, 0, 0, 0, 0.4472135954999579},   {1, 0, 0, 1, 0, 0.4},
      {1, 1, 0, 1, 1, -0.2},                 {1, 0, -1, 1, 1, -0.34641016151377546},
      {3, 1, 1, 1, 0, 0.3703280399090206},   {2, 2, 2, 2, 0, -0.2857142857142857},
      {4, 3, 2, 2, 1, 0.37796447300922725},  {3, 3, 2, 3, 1, -0.21081851067789195},
  };
  for (const auto& c : cases)
    CHECK(c2_element(c.jf, c.mf, c.q, c.ji, c.mi) == doctest::Approx(c.value).epsilon(1e-12));

  std::mt19937 rng(977);
  std::uniform_int_distribution<int> jdist(0, 8);
  int tested = 0;
  while (tested < 60) {
    const int ji = jdist(rng);
    const int jf = jdist(rng);
    if (std::abs(jf - ji) > 2) continue;
    std::uniform_int_distribution<int> mdist(-ji, ji);
    const int mi = ji == 0 ? 0 : mdist(rng);
    std::uniform_int_distribution<int> qdist(-2, 2);
    const int q = qdist(rng);
    if (std::abs(mi + q) > jf) continue;
    CHECK(c2_element(jf, mi + q, q, ji, mi) ==
          doctest::Approx(c2_element_quadrature(jf, mi + q, q, ji, mi)).epsilon(1e-10));
    ++tested;
  }
}

TEST_CASE("angular domain errors") {
  CHECK_THROWS_AS(p2_diagonal(1, 2), ValidationError);
  CHECK_THROWS_AS(normalized_assoc_legendre(2, 3, 0.0), ValidationError);
}
