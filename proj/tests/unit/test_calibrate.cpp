#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "rotspec/calibrate.hpp"
#include "rotspec/config.hpp"
#include "rotspec/errors.hpp"

using namespace rotspec;

namespace {

FrequencyDataset anchors() {
  FrequencyDataset data;
  data.rows.push_back({50.0, 10.0, "H2+D2", "I", -1, 75.0, 1.0});
  data.rows.push_back({124.0, 10.0, "H2", "I", -1, 150.0, 1.0});
  return data;
}

Isotope h2() { return RunConfig::defaults().isotope("H2"); }
Isotope d2() { return RunConfig::defaults().isotope("D2"); }

}  // namespace

TEST_CASE("power law through the two text anchors") {
  const FieldFitResult fit = fit_field_model(anchors(), FieldForm::power_law);
  // Both anchors reproduced well under 0.5 cm^-1.
  const Prediction p50 = predict_zero_roton(fit.model, 50.0, 10.0, h2());
  const Prediction p124 = predict_zero_roton(fit.model, 124.0, 10.0, h2());
  CHECK(std::abs(p50.freq_cm1 - 75.0) < 0.5);
  CHECK(std::abs(p124.freq_cm1 - 150.0) < 0.5);
  // Inverted anchors at the V2 level.
  CHECK(fit.model.v2(50.0) == doctest::Approx(125.0).epsilon(1e-6));
  CHECK(fit.model.v2(124.0) == doctest::Approx(250.0).epsilon(1e-6));
  CHECK_FALSE(fit.monotone_warning);
}

TEST_CASE("zero-roton prediction is isotope independent and vanishes at P = 0") {
  const FieldFitResult fit = fit_field_model(anchors(), FieldForm::power_law);
  for (double p : {5.0, 22.5, 50.0, 96.0}) {
    for (double t : {10.0, 150.0, 300.0}) {
      const Prediction a = predict_zero_roton(fit.model, p, t, h2());
      const Prediction b = predict_zero_roton(fit.model, p, t, d2());
      CHECK(std::memcmp(&a.freq_cm1, &b.freq_cm1, sizeof(double)) == 0);  // bit-identical
    }
  }
  CHECK(predict_zero_roton(fit.model, 0.0, 10.0, h2()).freq_cm1 == 0.0);
  CHECK(predict_zero_roton(fit.model, 22.5, 10.0, h2()).extrapolated);
  CHECK_FALSE(predict_zero_roton(fit.model, 60.0, 10.0, h2()).extrapolated);
}

TEST_CASE("softening is monotone non-increasing in T") {
  FieldModel model;
  model.a = 6.3;
  model.b = 0.76;
  model.soften_ct_per_k = 8e-4;
  double prev = predict_zero_roton(model, 31.0, 10.0, h2()).freq_cm1;
  for (double t = 50.0; t <= 1400.0; t += 50.0) {
    const double cur = predict_zero_roton(model, 31.0, t, h2()).freq_cm1;
    CHECK(cur <= prev + 1e-12);
    CHECK(cur >= 0.0);  // clamped, never negative
    prev = cur;
  }
  CHECK(model.softening(model.soften_t0_k) == 1.0);
}

TEST_CASE("synthetic power-law roundtrip recovers parameters within 2 sigma") {
  const double a_true = 5.0, b_true = 0.8;
  std::mt19937 rng(404);
  std::normal_distribution<double> noise(0.0, 0.8);
  FrequencyDataset data;
  for (int i = 0; i < 24; ++i) {
    const double p = 10.0 + 5.0 * i;
    FrequencyPoint row;
    row.p_gpa = p;
    row.t_k = 10.0;
    row.label = "H2";
    row.phase = "I";
    row.freq_cm1 = 0.6 * a_true * std::pow(p, b_true) + noise(rng);
    row.sigma_cm1 = 0.8;
    data.rows.push_back(row);
  }
  const FieldFitResult fit = fit_field_model(data, FieldForm::power_law);
  REQUIRE(fit.param_sigmas.size() == 2);
  CHECK(std::abs(fit.model.a - a_true) <= 2.0 * fit.param_sigmas[0]);
  CHECK(std::abs(fit.model.b - b_true) <= 2.0 * fit.param_sigmas[1]);
  CHECK(fit.residuals_cm1.size() == data.rows.size());
}

TEST_CASE("non-monotone fitted V2 raises the warning") {
  // A quadratic with a negative curvature peaks inside the data range.
  FrequencyDataset data;
  for (double p : {10.0, 30.0, 50.0, 70.0, 90.0}) {
    FrequencyPoint row;
    row.p_gpa = p;
    row.t_k = 10.0;
    row.label = "H2";
    row.phase = "I";
    row.freq_cm1 = 0.6 * (2.0 * p - 0.02 * p * p);
    data.rows.push_back(row);
  }
  const FieldFitResult fit = fit_field_model(data, FieldForm::quadratic);
  CHECK(fit.model.c2 < 0.0);
  CHECK(fit.monotone_warning);
}

TEST_CASE("quadratic form fits an exact quadratic") {
  FrequencyDataset data;
  for (double p : {10.0, 30.0, 60.0, 90.0}) {
    FrequencyPoint row;
    row.p_gpa = p;
    row.t_k = 10.0;
    row.label = "H2";
    row.phase = "I";
    row.freq_cm1 = 0.6 * (2.0 * p + 0.01 * p * p);
    data.rows.push_back(row);
  }
  const FieldFitResult fit = fit_field_model(data, FieldForm::quadratic);
  CHECK(fit.model.c1 == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(fit.model.c2 == doctest::Approx(0.01).epsilon(1e-4));
}

TEST_CASE("phase II rows fit one model per site") {
  FrequencyDataset data;
  for (int site = 0; site < 2; ++site) {
    const double scale = site == 0 ? 0.9 : 1.2;
    for (double p : {30.0, 40.0, 50.0}) {
      FrequencyPoint row;
      row.p_gpa = p;
      row.t_k = 10.0;
      row.label = "D2";
      row.phase = "II";
      row.site = site;
      row.freq_cm1 = 0.6 * scale * 6.0 * std::pow(p, 0.75);
      data.rows.push_back(row);
    }
  }
  const FieldFitResult fit = fit_field_model(data, FieldForm::power_law);
  REQUIRE(fit.site_models.size() == 2);
  CHECK(fit.site_models.at(1).v2(40.0) / fit.site_models.at(0).v2(40.0) ==
        doctest::Approx(1.2 / 0.9).epsilon(1e-6));

  // Missing site index on a phase II row is rejected.
  data.rows.front().site = -1;
  CHECK_THROWS_AS(fit_field_model(data, FieldForm::power_law), ValidationError);
}

TEST_CASE("fit preconditions") {
  FrequencyDataset one;
  one.rows.push_back({50.0, 10.0, "H2", "I", -1, 75.0, 1.0});
  CHECK_THROWS_AS(fit_field_model(one, FieldForm::power_law), ValidationError);

  FrequencyDataset mixed = anchors();
  mixed.rows.push_back({30.0, 10.0, "D2", "II", 0, 50.0, 1.0});
  CHECK_THROWS_AS(fit_field_model(mixed, FieldForm::power_law), ValidationError);

  FrequencyDataset bad = anchors();
  bad.rows.front().p_gpa = -3.0;
  CHECK_THROWS_AS(fit_field_model(bad, FieldForm::power_law), ValidationError);
}

TEST_CASE("exact-mapping diagnostic at large V2/B") {
  const FieldFitResult fit = fit_field_model(anchors(), FieldForm::power_law);
  const MappingDiagnostic diag = mapping_diagnostic(fit.model, d2(), 50.0, 10.0);
  CHECK(diag.v2_cm1 == doctest::Approx(125.0).epsilon(1e-6));
  CHECK(diag.first_order_cm1 == doctest::Approx(75.0).epsilon(1e-6));
  // Frozen from the independent diagonalization oracle.
  CHECK(diag.exact_cm1 == doctest::Approx(71.148333).epsilon(1e-5));
  CHECK(diag.difference_cm1 < 0.0);
}

TEST_CASE("exact mapping calibration compensates the first-order bias") {
  // Generate data from the exact J=1 splitting of D2, then fit through the
  // exact mapping: the recovered V2(P) matches the generator.
  const double a_true = 6.0, b_true = 0.75;
  FrequencyDataset data;
  for (double p : {30.0, 60.0}) {
    FieldModel gen;
    gen.a = a_true;
    gen.b = b_true;
    const MappingDiagnostic d = mapping_diagnostic(gen, d2(), p, 10.0);
    FrequencyPoint row;
    row.p_gpa = p;
    row.t_k = 10.0;
    row.label = "D2";
    row.phase = "I";
    row.freq_cm1 = d.exact_cm1;
    data.rows.push_back(row);
  }
  FieldFitOptions opt;
  opt.use_exact_mapping = true;
  opt.iso_for_exact = d2();
  const FieldFitResult fit = fit_field_model(data, FieldForm::power_law, opt);
  CHECK(fit.used_exact_mapping);
  CHECK(fit.model.v2(45.0) ==
        doctest::Approx(a_true * std::pow(45.0, b_true)).epsilon(1e-3));
}

TEST_CASE("overlap pressures") {
  const RunConfig cfg = RunConfig::defaults();
  const FieldFitResult fit = fit_field_model(anchors(), FieldForm::power_law);
  const OverlapOptions opt = cfg.overlap_options();

  SUBCASE("no crossing for a null field model") {
    FieldModel null_model;
    null_model.a = 0.0;
    null_model.b = 1.0;
    const OverlapResult res = overlap_pressure(null_model, {{d2(), 1.0}}, opt);
    CHECK_FALSE(res.found);
  }
  SUBCASE("D2 crossing comes below H2 for the same model") {
    const OverlapResult rd2 = overlap_pressure(fit.model, {{d2(), 1.0}}, opt);
    const OverlapResult rh2 = overlap_pressure(fit.model, {{h2(), 1.0}}, opt);
    REQUIRE(rd2.found);
    REQUIRE(rh2.found);
    CHECK(rd2.p_gpa < rh2.p_gpa);
  }
  SUBCASE("calibrated ordering D2 < mixture < H2") {
    const OverlapResult rd2 = overlap_pressure(fit.model, {{d2(), 1.0}}, opt);
    const OverlapResult rmix =
        overlap_pressure(fit.model, {{h2(), 0.5}, {d2(), 0.5}}, opt);
    const OverlapResult rh2 = overlap_pressure(fit.model, {{h2(), 1.0}}, opt);
    REQUIRE((rd2.found && rmix.found && rh2.found));
    CHECK(rd2.p_gpa < rmix.p_gpa);
    CHECK(rmix.p_gpa < rh2.p_gpa);
  }
  SUBCASE("bisection resolves the crossing to the stated tolerance") {
    const OverlapResult res = overlap_pressure(fit.model, {{d2(), 1.0}}, opt);
    REQUIRE(res.found);
    // Just below the reported pressure there is no overlap yet.
    OverlapOptions tight = opt;
    tight.p_max_gpa = res.p_gpa - 2.0 * opt.tol_gpa;
    CHECK_FALSE(overlap_pressure(fit.model, {{d2(), 1.0}}, tight).found);
  }
  SUBCASE("a softening B(P) pulls the crossing down in pressure") {
    const OverlapResult base = overlap_pressure(fit.model, {{d2(), 1.0}}, opt);
    OverlapOptions soft = opt;
    soft.db_dp_cm1_per_gpa["D2"] = -0.15;
    const OverlapResult early = overlap_pressure(fit.model, {{d2(), 1.0}}, soft);
    REQUIRE((base.found && early.found));
    CHECK(early.p_gpa < base.p_gpa);
  }
}

TEST_CASE("dataset and form-name validation") {
  CHECK_THROWS_AS(field_form_from_name("cubic"), UsageError);
  CHECK(field_form_from_name("power_law") == FieldForm::power_law);
  FieldModel m;
  m.soften_ct_per_k = -1.0;
  CHECK_THROWS_AS(m.validate(), ValidationError);
  CHECK_THROWS_AS(m.v2(-1.0), ValidationError);
}
