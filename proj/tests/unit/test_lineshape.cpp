#include <doctest.h>

#include <cmath>

#include "rotspec/config.hpp"
#include "rotspec/errors.hpp"
#include "rotspec/lineshape.hpp"

using namespace rotspec;

namespace {

Isotope h2() { return RunConfig::defaults().isotope("H2"); }
Isotope d2() { return RunConfig::defaults().isotope("D2"); }

// Peak-finding oracle: strictly-greater-than-neighbors local maxima above a
// floor.
std::vector<double> find_peaks(const Spectrum& spec, double floor) {
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < spec.size(); ++i)
    if (spec.intensity[i] > floor && spec.intensity[i] > spec.intensity[i - 1] &&
        spec.intensity[i] > spec.intensity[i + 1])
      peaks.push_back(spec.grid[i]);
  return peaks;
}

Transition stick(double shift, double weight) {
  Transition t;
  t.shift_cm1 = shift;
  t.weight = weight;
  t.branch = Branch::zero_roton;
  return t;
}

double trapezoid(const Spectrum& spec) {
  double area = 0.0;
  for (std::size_t i = 1; i < spec.size(); ++i)
    area += 0.5 * (spec.intensity[i] + spec.intensity[i - 1]) *
            (spec.grid[i] - spec.grid[i - 1]);
  return area;
}

}  // namespace

TEST_CASE("profile validation and unit-area Gaussian maximum") {
  PeakProfile p;
  p.fwhm_cm1 = 2.0;
  p.eta = 0.0;
  p.validate();
  // Peak value of a unit-area Gaussian: (2/fwhm) sqrt(ln2/pi).
  CHECK(p.value(0.0) ==
        doctest::Approx((2.0 / p.fwhm_cm1) * std::sqrt(std::log(2.0) / kPi)).epsilon(1e-14));
  // fwhm means what it says for both shapes.
  for (double eta : {0.0, 1.0, 0.3}) {
    p.eta = eta;
    CHECK(p.value(p.fwhm_cm1 / 2.0) == doctest::Approx(0.5 * p.value(0.0)).epsilon(1e-12));
  }
  p.fwhm_cm1 = -1.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.fwhm_cm1 = 1.0;
  p.eta = 1.5;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("broaden") {
  PeakProfile profile;
  profile.fwhm_cm1 = 2.0;
  profile.eta = 0.0;
  const std::vector<double> grid = make_grid(0.0, 200.0, 0.25);

  SUBCASE("empty stick list gives the zero spectrum") {
    const Spectrum spec = broaden({}, profile, grid);
    for (double v : spec.intensity) CHECK(v == 0.0);
    CHECK_FALSE(spec.meta.grid_warning);
  }

  SUBCASE("single unit stick reproduces the closed-form maximum on-grid") {
    const Spectrum spec = broaden({stick(100.0, 1.0)}, profile, grid);
    // 100.0 is on the grid, so the sampled max is the analytic peak value.
    double top = 0.0;
    for (double v : spec.intensity) top = std::max(top, v);
    CHECK(top ==
          doctest::Approx((2.0 / profile.fwhm_cm1) * std::sqrt(std::log(2.0) / kPi))
              .epsilon(1e-12));
  }

  SUBCASE("well-separated sticks give maxima at the stick positions") {
    const double sep = 5.0 * profile.fwhm_cm1;
    const Spectrum spec =
        broaden({stick(80.0, 1.0), stick(80.0 + sep, 0.7)}, profile, grid);
    const auto peaks = find_peaks(spec, 1e-4);
    REQUIRE(peaks.size() == 2);
    CHECK(std::abs(peaks[0] - 80.0) <= 0.05 * profile.fwhm_cm1);
    CHECK(std::abs(peaks[1] - 80.0 - sep) <= 0.05 * profile.fwhm_cm1);
  }

  SUBCASE("area conservation with adequate margins") {
    // Gaussian: +-10 fwhm margins hold 0.5%. A Lorentzian admixture needs
    // wider margins; eta = 0.15 keeps the tail loss inside the tolerance.
    for (double eta : {0.0, 0.15}) {
      PeakProfile p;
      p.fwhm_cm1 = 2.0;
      p.eta = eta;
      const Spectrum spec = broaden({stick(100.0, 2.0), stick(120.0, 1.0)}, p,
                                    make_grid(100.0 - 20.0 * 2.0, 120.0 + 20.0 * 2.0, 0.1));
      CHECK(trapezoid(spec) == doctest::Approx(3.0).epsilon(0.005));
    }
  }

  SUBCASE("sticks outside the grid raise the warning flag only") {
    const Spectrum spec = broaden({stick(500.0, 1.0)}, profile, make_grid(0.0, 100.0, 1.0));
    CHECK(spec.meta.grid_warning);
  }
}

TEST_CASE("elastic mask") {
  PeakProfile profile;
  const std::vector<double> grid = make_grid(5.0, 100.0, 0.5);
  Spectrum spec = broaden({stick(20.0, 1.0), stick(60.0, 1.0)}, profile, grid);

  SUBCASE("cutoff 0 is the identity on validity") {
    const Spectrum same = apply_elastic_mask(spec, 0.0);
    for (std::size_t i = 0; i < same.size(); ++i) CHECK(same.valid[i] == 1);
  }
  SUBCASE("masking excludes samples but keeps values; idempotent") {
    const Spectrum masked = apply_elastic_mask(spec, 25.0);
    CHECK(masked.meta.cutoff_cm1 == 25.0);
    for (std::size_t i = 0; i < masked.size(); ++i) {
      CHECK(masked.valid[i] == (std::abs(masked.grid[i]) < 25.0 ? 0 : 1));
      CHECK(masked.intensity[i] == spec.intensity[i]);
    }
    const Spectrum twice = apply_elastic_mask(masked, 25.0);
    CHECK(twice.valid == masked.valid);
    CHECK(twice.intensity == masked.intensity);
    CHECK(twice.meta.cutoff_cm1 == masked.meta.cutoff_cm1);
  }
  SUBCASE("negative cutoff rejected") {
    CHECK_THROWS_AS(apply_elastic_mask(spec, -1.0), ValidationError);
  }
}

TEST_CASE("composition strings") {
  CHECK(format_composition({{"H2", 1.0}}) == "H2");
  CHECK(format_composition({{"H2", 0.5}, {"D2", 0.5}}) == "H2:0.5,D2:0.5");
  const auto parsed = parse_composition("H2:0.5,D2:0.5");
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].first == "H2");
  CHECK(parsed[0].second == 0.5);
  CHECK(parse_composition("D2").front().second == 1.0);
  CHECK_THROWS_AS(parse_composition(""), ParseError);
  CHECK_THROWS_AS(parse_composition("H2:x"), ParseError);
}

TEST_CASE("synth") {
  const RunConfig cfg = RunConfig::defaults();
  PeakProfile profile = cfg.profile;
  const std::vector<double> grid = make_grid(5.0, 500.0, 0.5);
  CrystalField field;
  field.v2_cm1 = 125.0;

  SynthOptions opt;
  opt.frozen_ortho = {{"H2", 0.75}, {"D2", 1.0 / 3.0}};

  SUBCASE("one isotope, one site equals broaden(stick_spectrum(...))") {
    const std::vector<SynthComponent> comps = {{h2(), 1.0, SiteModel::single(field)}};
    const Spectrum via_synth = synth(comps, 50.0, 10.0, profile, grid, opt);
    const Spectrum direct = broaden(predict_sticks(comps, 10.0, opt), profile, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      CHECK(via_synth.intensity[i] == doctest::Approx(direct.intensity[i]).epsilon(1e-14));
    CHECK(via_synth.meta.composition == "H2");
    CHECK(via_synth.meta.pressure_gpa == 50.0);
  }

  SUBCASE("linearity: mixture equals the weighted sum of components") {
    const std::vector<SynthComponent> mix = {{h2(), 0.5, SiteModel::single(field)},
                                             {d2(), 0.5, SiteModel::single(field)}};
    const Spectrum both = synth(mix, 50.0, 10.0, profile, grid, opt);
    const Spectrum only_h2 =
        synth({{h2(), 1.0, SiteModel::single(field)}}, 50.0, 10.0, profile, grid, opt);
    const Spectrum only_d2 =
        synth({{d2(), 1.0, SiteModel::single(field)}}, 50.0, 10.0, profile, grid, opt);
    for (std::size_t i = 0; i < grid.size(); ++i)
      CHECK(both.intensity[i] ==
            doctest::Approx(0.5 * only_h2.intensity[i] + 0.5 * only_d2.intensity[i])
                .epsilon(1e-10));
  }

  SUBCASE("equal V2 for both isotopes gives one symmetric zero-roton peak") {
    const std::vector<SynthComponent> mix = {{h2(), 0.5, SiteModel::single(field)},
                                             {d2(), 0.5, SiteModel::single(field)}};
    const Spectrum spec = synth(mix, 50.0, 10.0, profile, make_grid(40.0, 110.0, 0.1), opt);
    const auto peaks = find_peaks(spec, 1e-5);
    REQUIRE(peaks.size() == 1);
    CHECK(std::abs(peaks[0] - 75.0) < 0.05);
    // Symmetry around the peak.
    for (double d : {1.0, 2.0, 5.0}) {
      const std::size_t c = static_cast<std::size_t>((peaks[0] - 40.0) / 0.1 + 0.5);
      const std::size_t k = static_cast<std::size_t>(d / 0.1 + 0.5);
      CHECK(spec.intensity[c + k] ==
            doctest::Approx(spec.intensity[c - k]).epsilon(1e-3));
    }
  }

  SUBCASE("four D2 sites give four resolvable maxima when separated") {
    // Sites 2*fwhm apart around V2 = 125.
    PeakProfile narrow;
    narrow.fwhm_cm1 = 2.0;
    narrow.eta = 0.3;
    SiteModel sites;
    for (int i = 0; i < 4; ++i) {
      CrystalField f = field;
      // Zero roton at 0.6 V2: spacing 2*fwhm needs dV2 = 2*fwhm/0.6.
      f.v2_cm1 = 125.0 + (i - 1.5) * 2.0 * narrow.fwhm_cm1 / 0.6;
      sites.sites.push_back({0.25, f});
    }
    const Spectrum spec = synth({{d2(), 1.0, sites}}, 30.0, 10.0, narrow,
                                make_grid(40.0, 110.0, 0.1), opt);
    CHECK(find_peaks(spec, 1e-4).size() == 4);
  }

  SUBCASE("noise is deterministic under the seed") {
    SynthOptions noisy = opt;
    noisy.noise_rel = 0.01;
    noisy.seed = 42;
    const std::vector<SynthComponent> comps = {{h2(), 1.0, SiteModel::single(field)}};
    const Spectrum a = synth(comps, 50.0, 10.0, profile, grid, noisy);
    const Spectrum b = synth(comps, 50.0, 10.0, profile, grid, noisy);
    CHECK(a.intensity == b.intensity);
    noisy.seed = 43;
    const Spectrum c = synth(comps, 50.0, 10.0, profile, grid, noisy);
    CHECK(a.intensity != c.intensity);
  }

  SUBCASE("bad compositions rejected") {
    CHECK_THROWS_AS(synth({}, 50.0, 10.0, profile, grid, opt), ValidationError);
    CHECK_THROWS_AS(
        synth({{h2(), 0.7, SiteModel::single(field)}}, 50.0, 10.0, profile, grid, opt),
        ValidationError);
  }
}
