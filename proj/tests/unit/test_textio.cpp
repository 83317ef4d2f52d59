#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <random>

#include "rotspec/errors.hpp"
#include "rotspec/textio.hpp"

using namespace rotspec;

namespace {

Spectrum random_spectrum(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ndist(8, 40);
  std::uniform_real_distribution<double> step(0.1, 2.0), val(-0.5, 2.0), start(-30.0, 30.0);
  std::bernoulli_distribution flag(0.15);
  Spectrum spec;
  const int n = ndist(rng);
  double x = start(rng);
  for (int i = 0; i < n; ++i) {
    x += step(rng);
    spec.grid.push_back(x);
    spec.intensity.push_back(val(rng));
    spec.valid.push_back(flag(rng) ? 0 : 1);
  }
  if (!spec.valid.empty()) spec.valid.front() = 1;  // keep at least one run
  spec.meta.pressure_gpa = 31.0;
  spec.meta.temperature_k = 10.0;
  spec.meta.composition = "H2:0.5,D2:0.5";
  spec.meta.cutoff_cm1 = 25.0;
  return spec;
}

}  // namespace

TEST_CASE("fmt_g9") {
  CHECK(fmt_g9(0.0) == "0");
  CHECK(fmt_g9(-0.0) == "0");  // negative zero normalized
  CHECK(fmt_g9(75.0) == "75");
  CHECK(fmt_g9(0.123456789123) == "0.123456789");
  CHECK(fmt_g9(1e-12) == "1e-12");
}

TEST_CASE("spectrum write/load canonical roundtrip on random instances") {
  std::mt19937_64 rng(20260809);
  for (int trial = 0; trial < 40; ++trial) {
    const Spectrum spec = random_spectrum(rng);
    const std::string text = spectrum_to_text(spec);
    const Spectrum loaded = spectrum_from_text(text, "mem");
    CHECK(spectrum_to_text(loaded) == text);  // canonical fixed point
    CHECK(loaded.meta.pressure_gpa == spec.meta.pressure_gpa);
    CHECK(loaded.meta.cutoff_cm1 == spec.meta.cutoff_cm1);
    CHECK(loaded.meta.composition == spec.meta.composition);
    CHECK(loaded.valid == spec.valid);
  }
}

TEST_CASE("loading tolerates comments, blank lines, and unsorted rows") {
  const std::string text =
      "# rotspec spectrum\n"
      "# pressure_gpa: 31\n"
      "\n"
      "# a free-form comment without a colon-value\n"
      "10 1\n"
      "5 0.5\n"
      "15 2\n"
      "20 2\n"
      "25 2\n"
      "30 2\n"
      "35 2\n"
      "40 2\n";
  const Spectrum spec = spectrum_from_text(text, "mem");
  CHECK(spec.meta.pressure_gpa == 31.0);
  CHECK(spec.meta.resorted_on_load);
  CHECK(spec.grid.front() == 5.0);
  CHECK(spec.intensity.front() == 0.5);
  CHECK(spec.size() == 8);
}

TEST_CASE("spectrum load rejections") {
  SUBCASE("non-numeric row carries its line number") {
    try {
      spectrum_from_text("1 1\n2 2\n3 x\n4 4\n5 5\n6 6\n7 7\n8 8\n", "input.txt");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("input.txt:3") != std::string::npos);
    }
  }
  SUBCASE("three-column rows rejected") {
    CHECK_THROWS_AS(
        spectrum_from_text("1 1 9\n2 2 9\n3 3 9\n4 4 9\n5 5 9\n6 6 9\n7 7 9\n8 8 9\n", "m"),
        ParseError);
  }
  SUBCASE("fewer than 8 samples rejected") {
    CHECK_THROWS_AS(spectrum_from_text("1 1\n2 2\n", "m"), ValidationError);
  }
  SUBCASE("duplicate wavenumbers violate the ascending-grid invariant") {
    CHECK_THROWS_AS(
        spectrum_from_text("1 1\n1 2\n3 3\n4 4\n5 5\n6 6\n7 7\n8 8\n", "m"),
        ValidationError);
  }
}

TEST_CASE("validity runs") {
  const std::string text =
      "# validity: 0-2,5-7\n"
      "1 1\n2 1\n3 1\n4 1\n5 1\n6 1\n7 1\n8 1\n";
  const Spectrum spec = spectrum_from_text(text, "m");
  const std::vector<std::uint8_t> expect = {1, 1, 1, 0, 0, 1, 1, 1};
  CHECK(spec.valid == expect);
  // And the writer reproduces the same runs.
  CHECK(spectrum_to_text(spec).find("# validity: 0-2,5-7") != std::string::npos);
}

TEST_CASE("dataset parsing") {
  const std::string text =
      "# comment\n"
      "p_gpa t_k label phase site freq_cm1 sigma_cm1\n"
      "50 10 H2+D2 I - 75 1\n"
      "30 10 D2 II 2 51 0.5\n";
  const FrequencyDataset data = dataset_from_text(text, "d");
  REQUIRE(data.rows.size() == 2);
  CHECK(data.rows[0].site == -1);
  CHECK(data.rows[1].site == 2);
  CHECK(data.rows[1].phase == "II");

  CHECK_THROWS_AS(dataset_from_text("bad header\n1 2 3 4 5 6 7\n", "d"), ParseError);
  CHECK_THROWS_AS(
      dataset_from_text("p_gpa t_k label phase site freq_cm1 sigma_cm1\n1 2 a I -\n", "d"),
      ParseError);
}

TEST_CASE("atomic writes leave no temporaries") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("rotspec_textio_test_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  const std::string path = (dir / "sub" / "file.txt").string();
  write_text_atomic(path, "payload\n");
  CHECK(read_text(path) == "payload\n");
  CHECK_FALSE(fs::exists(path + ".tmp"));
  // Overwrite works and is atomic at the rename level.
  write_text_atomic(path, "payload2\n");
  CHECK(read_text(path) == "payload2\n");
  fs::remove_all(dir);
  CHECK_THROWS_AS(read_text((dir / "missing.txt").string()), IoError);
}

TEST_CASE("stick list serialization") {
  Transition t;
  t.from = {1, 1};
  t.to = {1, 0};
  t.shift_cm1 = 75.0;
  t.weight = 0.09;
  t.branch = Branch::zero_roton;
  Transition s = t;
  s.from = {0, 0};
  s.to = {2, 2};
  s.shift_cm1 = 318.886;
  s.branch = Branch::s0;
  const std::string text = sticks_to_text({t, s});
  CHECK(text.find("75 0.09 zero_roton 1 1 1 0") != std::string::npos);
  CHECK(text.find("318.886 0.09 S0 0 0 2 2") != std::string::npos);
}

TEST_CASE("report layout is stable") {
  Report rep;
  rep.section("alpha");
  rep.kv("x", 1.5);
  rep.kv("flag", true);
  rep.section("beta");
  rep.kv("name", "value");
  CHECK(rep.text() == "[alpha]\nx = 1.5\nflag = true\n\n[beta]\nname = value\n");
}
