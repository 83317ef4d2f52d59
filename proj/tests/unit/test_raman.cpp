#include <doctest.h>

#include <cmath>
#include <set>

#include "rotspec/angular.hpp"
#include "rotspec/config.hpp"
#include "rotspec/errors.hpp"
#include "rotspec/raman.hpp"

using namespace rotspec;

namespace {

Isotope h2() { return RunConfig::defaults().isotope("H2"); }
Isotope d2() { return RunConfig::defaults().isotope("D2"); }

// Brute-force pair scan over signed mJ states of one J manifold: counts
// distinct-energy pairs with |delta m| <= cap, either as |m| level pairs or
// as signed state pairs.
int oracle_zero_roton_count(int j, int max_abs_dm, CountConvention conv) {
  std::set<std::pair<int, int>> level_pairs;
  std::set<std::pair<int, int>> state_pairs;
  for (int ma = -j; ma <= j; ++ma) {
    for (int mb = -j; mb <= j; ++mb) {
      if (std::abs(ma) == std::abs(mb)) continue;  // same energy
      if (std::abs(mb - ma) > max_abs_dm) continue;
      const int la = std::abs(ma), lb = std::abs(mb);
      level_pairs.insert({std::min(la, lb), std::max(la, lb)});
      state_pairs.insert({std::min(ma, mb), std::max(ma, mb)});
    }
  }
  return conv == CountConvention::level_pairs ? static_cast<int>(level_pairs.size())
                                              : static_cast<int>(state_pairs.size());
}

LevelDiagram manifold(const Isotope& iso, double v2, int j) {
  CrystalField field;
  field.v2_cm1 = v2;
  const LevelDiagram all = level_diagram_perturbative(iso, field, j);
  LevelDiagram out;
  for (const auto& e : all.entries)
    if (e.j == j) out.entries.push_back(e);
  return out;
}

int count_zero_roton(const LevelDiagram& levels, CountConvention conv, int cap = 2) {
  SelectionRules rules;
  rules.convention = conv;
  rules.max_abs_dm = cap;
  int n = 0;
  for (const auto& t : enumerate_transitions(levels, rules))
    if (t.branch == Branch::zero_roton) ++n;
  return n;
}

}  // namespace

TEST_CASE("zero-roton line counts per manifold") {
  CHECK(count_zero_roton(manifold(h2(), 100.0, 1), CountConvention::level_pairs) == 1);
  CHECK(count_zero_roton(manifold(h2(), 100.0, 2), CountConvention::level_pairs) == 3);
  CHECK(count_zero_roton(manifold(h2(), 100.0, 3), CountConvention::level_pairs) == 5);
  CHECK(count_zero_roton(manifold(h2(), 100.0, 2), CountConvention::state_pairs) == 6);
  CHECK(count_zero_roton(manifold(h2(), 100.0, 3), CountConvention::state_pairs) == 10);

  // Neither convention silently reproduces a count of 14 for J=3.
  CHECK(count_zero_roton(manifold(h2(), 100.0, 3), CountConvention::level_pairs) != 14);
  CHECK(count_zero_roton(manifold(h2(), 100.0, 3), CountConvention::state_pairs) != 14);
}

TEST_CASE("counts match the brute-force pair scan for J <= 6 and every cap") {
  for (int j = 1; j <= 6; ++j) {
    for (int cap = 0; cap <= 2; ++cap) {
      for (const auto conv : {CountConvention::level_pairs, CountConvention::state_pairs}) {
        CHECK(count_zero_roton(manifold(h2(), 100.0, j), conv, cap) ==
              oracle_zero_roton_count(j, cap, conv));
      }
    }
  }
}

TEST_CASE("level_pairs count is C(n,2) minus delta-m-forbidden pairs") {
  for (int j = 1; j <= 6; ++j) {
    const int n = j + 1;  // distinct |m| levels
    int forbidden = 0;
    for (int a = 0; a <= j; ++a)
      for (int b = a + 1; b <= j; ++b)
        if (b - a > 2) ++forbidden;
    CHECK(count_zero_roton(manifold(h2(), 100.0, j), CountConvention::level_pairs) ==
          n * (n - 1) / 2 - forbidden);
  }
}

TEST_CASE("zero-shift pairs are excluded unless requested") {
  // V2 = 0 keeps every mJ level degenerate: no zero-roton lines.
  const LevelDiagram degenerate = manifold(h2(), 0.0, 2);
  SelectionRules rules;
  CHECK(enumerate_transitions(degenerate, rules).empty());
  rules.include_zero_shift = true;
  CHECK(enumerate_transitions(degenerate, rules).size() == 3);
}

TEST_CASE("every delta-J=0 shift equals a level difference; S0 lines tagged by J") {
  CrystalField field;
  field.v2_cm1 = 125.0;
  const LevelDiagram diagram = level_diagram_perturbative(h2(), field, 4);
  SelectionRules rules;
  for (const auto& t : enumerate_transitions(diagram, rules)) {
    const double expect = diagram.energy(t.to.j, t.to.abs_mj) -
                          diagram.energy(t.from.j, t.from.abs_mj);
    CHECK(t.shift_cm1 == doctest::Approx(expect).epsilon(1e-14));
    CHECK(t.shift_cm1 > 0.0);
    if (t.branch == Branch::zero_roton) CHECK(t.from.j == t.to.j);
    if (t.branch == Branch::s0) {
      CHECK(t.to.j == t.from.j + 2);
      CHECK(t.j_label == t.from.j);
    }
  }
}

TEST_CASE("intensity weights") {
  CrystalField field;
  field.v2_cm1 = 125.0;
  const Isotope iso = h2();
  const LevelDiagram diagram = level_diagram_perturbative(iso, field, 4);
  const PopulationState pop = equilibrium_populations(iso, 10.0, field, 0.75);
  SelectionRules rules;
  const auto weighted = intensity_weights(enumerate_transitions(diagram, rules), pop, iso);

  SUBCASE("weights are nonnegative and finite; empty levels give zero") {
    for (const auto& t : weighted) {
      CHECK(t.weight >= 0.0);
      CHECK(std::isfinite(t.weight));
      if (pop.species_for("H2").fraction(t.from.j, t.from.abs_mj) == 0.0)
        CHECK(t.weight == 0.0);
    }
  }

  SUBCASE("J=1 zero-roton angular factor matches the quadrature oracle") {
    for (const auto& t : weighted) {
      if (t.branch != Branch::zero_roton || t.from.j != 1) continue;
      double oracle = 0.0;
      for (int mi : {-1, 1}) {
        const double e = angular::c2_element_quadrature(1, 0, -mi, 1, mi);
        oracle += e * e;
      }
      CHECK(t.angular == doctest::Approx(oracle).epsilon(1e-10));
      CHECK(t.angular == doctest::Approx(6.0 / 25.0).epsilon(1e-12));
    }
  }

  SUBCASE("weights are homogeneous in the species amount") {
    PopulationState half = pop;
    half.species[0].mole_fraction = 0.5;
    const auto scaled = intensity_weights(enumerate_transitions(diagram, rules), half, iso);
    for (std::size_t i = 0; i < weighted.size(); ++i)
      CHECK(scaled[i].weight == doctest::Approx(0.5 * weighted[i].weight).epsilon(1e-14));
  }

  SUBCASE("level_pairs and state_pairs agree on total weight per level pair") {
    SelectionRules state_rules;
    state_rules.convention = CountConvention::state_pairs;
    const auto state_weighted =
        intensity_weights(enumerate_transitions(diagram, state_rules), pop, iso);
    for (const auto& lp : weighted) {
      double total = 0.0;
      for (const auto& sp : state_weighted)
        if (sp.from.j == lp.from.j && sp.from.abs_mj == lp.from.abs_mj &&
            sp.to.j == lp.to.j && sp.to.abs_mj == lp.to.abs_mj)
          total += sp.weight;
      CHECK(total == doctest::Approx(lp.weight).epsilon(1e-12));
    }
  }

  SUBCASE("mismatched diagram rejected") {
    const LevelDiagram big = level_diagram_perturbative(iso, field, 12);
    const PopulationState small_pop =
        equilibrium_populations(iso, 10.0, field, 0.75, 4);
    auto lines = enumerate_transitions(big, rules);
    CHECK_THROWS_AS(intensity_weights(lines, small_pop, iso), ValidationError);
  }
}

TEST_CASE("zero-roton positions coincide across isotopes, weights differ") {
  CrystalField field;
  field.v2_cm1 = 125.0;
  SelectionRules rules;
  auto line_of = [&](const Isotope& iso, double frozen) {
    const LevelDiagram diagram = level_diagram_perturbative(iso, field, 2);
    const PopulationState pop = equilibrium_populations(iso, 10.0, field, frozen);
    for (const auto& t :
         intensity_weights(enumerate_transitions(diagram, rules), pop, iso))
      if (t.branch == Branch::zero_roton && t.from.j == 1) return t;
    throw std::runtime_error("no zero roton line");
  };
  const Transition th2 = line_of(h2(), 0.75);
  const Transition td2 = line_of(d2(), 1.0 / 3.0);
  // B cancels in the difference (up to rounding in the level energies).
  CHECK(th2.shift_cm1 == doctest::Approx(td2.shift_cm1).epsilon(1e-12));
  CHECK(th2.weight != td2.weight);
}

TEST_CASE("anti-Stokes branch") {
  CrystalField field;
  field.v2_cm1 = 125.0;
  const Isotope iso = h2();
  const LevelDiagram diagram = level_diagram_perturbative(iso, field, 4);
  SelectionRules rules;

  SUBCASE("suppression factor at 10 K") {
    const PopulationState pop = equilibrium_populations(iso, 10.0, field, 0.75);
    const auto weighted =
        intensity_weights(enumerate_transitions(diagram, rules), pop, iso);
    const auto sticks = stick_spectrum(weighted, pop, iso, 10.0, true);
    for (const auto& t : sticks) {
      if (t.branch != Branch::anti_stokes_zero_roton || t.to.j != 1) continue;
      // Partner of the 75 cm^-1 J=1 line: population ratio under 1e-4.
      const Transition* stokes = nullptr;
      for (const auto& s : sticks)
        if (s.branch == Branch::zero_roton && s.from.j == 1) stokes = &s;
      REQUIRE(stokes != nullptr);
      CHECK(t.shift_cm1 == doctest::Approx(-stokes->shift_cm1));
      const double ratio = t.weight / stokes->weight;
      CHECK(ratio == doctest::Approx(std::exp(-75.0 * kKelvinPerWavenumber / 10.0))
                         .epsilon(1e-6));
      CHECK(ratio < 1e-4);
    }
  }

  SUBCASE("no negative shifts without the flag") {
    const PopulationState pop = equilibrium_populations(iso, 10.0, field, 0.75);
    const auto weighted =
        intensity_weights(enumerate_transitions(diagram, rules), pop, iso);
    for (const auto& t : stick_spectrum(weighted, pop, iso, 10.0, false))
      CHECK(t.shift_cm1 > 0.0);
  }

  SUBCASE("thermal activation strictly grows the stick count") {
    auto count_visible = [&](double t_k) {
      const PopulationState pop = equilibrium_populations(iso, t_k, field, 0.75);
      const auto weighted =
          intensity_weights(enumerate_transitions(diagram, rules), pop, iso);
      int n = 0;
      for (const auto& t : stick_spectrum(weighted, pop, iso, t_k, true))
        if (t.weight > 1e-6) ++n;
      return n;
    };
    CHECK(count_visible(300.0) > count_visible(10.0));
  }

  SUBCASE("anti-Stokes needs T > 0") {
    const PopulationState pop = equilibrium_populations(iso, 10.0, field, 0.75);
    const auto weighted =
        intensity_weights(enumerate_transitions(diagram, rules), pop, iso);
    CHECK_THROWS_AS(stick_spectrum(weighted, pop, iso, 0.0, true), ValidationError);
  }
}

TEST_CASE("selection rule validation") {
  SelectionRules rules;
  rules.allowed_dj = {1};
  CHECK_THROWS_AS(rules.validate(), ValidationError);
  rules.allowed_dj = {0, 2};
  rules.max_abs_dm = 3;
  CHECK_THROWS_AS(rules.validate(), ValidationError);
}
