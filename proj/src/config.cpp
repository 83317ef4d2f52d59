#include "rotspec/config.hpp"

#include <cmath>
#include <sstream>

#include "rotspec/errors.hpp"
#include "rotspec/textio.hpp"

namespace rotspec {

const char* default_config_text() {
  // Single source of physical defaults. B(H2) reproduces the 170 K / 510 K
  // level energies; B(D2) is the homonuclear factor-2 scaling. The kinetics
  // slope gives k(25 GPa)/k(7 GPa) = 100; the power law puts V2 = 125 cm^-1
  // at 50 GPa and 250 cm^-1 at 124 GPa (zero roton 75 / 150 cm^-1).
  return R"(# rotspec configuration. All physical defaults live in this document;
# override any key via --config FILE. Unknown keys are rejected.

# Rotational constants (cm^-1), centrifugal and pressure hooks (off by
# default), and nuclear-spin weights.
isotope.h2.b_cm1 = 59.1
isotope.h2.d_cm1 = 0
isotope.h2.db_dp_cm1_per_gpa = 0
isotope.h2.spin_even = 1
isotope.h2.spin_odd = 3
isotope.d2.b_cm1 = 29.55
isotope.d2.d_cm1 = 0
isotope.d2.db_dp_cm1_per_gpa = 0
isotope.d2.spin_even = 6
isotope.d2.spin_odd = 3
isotope.hd.b_cm1 = 44.325
isotope.hd.d_cm1 = 0
isotope.hd.db_dp_cm1_per_gpa = 0
isotope.hd.spin_even = 1
isotope.hd.spin_odd = 1

# Crystal field. v2_sign +1 puts E(1,+-1) below E(1,0); the convention is
# recorded in every report.
field.v2_sign = 1
field.v4_cm1 = 0
field.jmax_basis = 20
field.jmax_report = 8

# Populations.
populations.jmax_sum = 30
populations.frozen_ortho.h2 = 0.75
populations.frozen_ortho.d2 = 0.666666666666667

# Ortho-para conversion kinetics k(P) = k0 exp(alpha (P - P0)).
# alpha = ln(100)/18 per GPa. The D2 scale is a placeholder (flagged in
# reports); conversion is disabled in mixtures unless re-enabled.
kinetics.k0_per_hour = 0.05
kinetics.p0_gpa = 7
kinetics.alpha_per_gpa = 0.255842788110449
kinetics.d2_rate_scale = 0.0333333333333333
kinetics.enable_in_mixtures = false

# Crystal-field strength vs pressure and temperature softening.
fieldmodel.form = power_law
fieldmodel.a = 6.31426760415358
fieldmodel.b = 0.763160636135319
fieldmodel.c1 = 0
fieldmodel.c2 = 0
fieldmodel.soften_ct_per_k = 0.0008
fieldmodel.soften_t0_k = 10

# Default peak profile and elastic-line mask.
profile.fwhm_cm1 = 3
profile.eta = 0.5
mask.cutoff_cm1 = 25

# Synthesis grid (cm^-1).
grid.min_cm1 = 5
grid.max_cm1 = 1200
grid.step_cm1 = 0.5

# D2 phase II multi-site splitting: per-site V2 scales and weights; the
# mixture does not reach phase II in the modeled range.
phase2.d2_pressure_gpa = 25
phase2.d2_site_scales = 0.8,0.95,1.1,1.25
phase2.d2_site_weights = 0.25,0.25,0.25,0.25
phase2.mixture_suppressed = true

# Overlap search.
overlap.max_pressure_gpa = 300

# Run control.
run.seed = 20260809
run.output_dir = runs
)";
}

namespace {

double parse_double(const std::string& s, const std::string& where, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ParseError(where, line, "bad number '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& where, int line) {
  const double v = parse_double(s, where, line);
  if (v != std::floor(v)) throw ParseError(where, line, "expected an integer, got '" + s + "'");
  return static_cast<int>(v);
}

bool parse_bool(const std::string& s, const std::string& where, int line) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ParseError(where, line, "expected true or false, got '" + s + "'");
}

std::vector<double> parse_list(const std::string& s, const std::string& where, int line) {
  std::vector<double> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) out.push_back(parse_double(item, where, line));
  if (out.empty()) throw ParseError(where, line, "empty list");
  return out;
}

std::string iso_key_label(const std::string& token) {
  if (token == "h2") return "H2";
  if (token == "d2") return "D2";
  if (token == "hd") return "HD";
  return "";
}

}  // namespace

void RunConfig::apply_text(const std::string& text, const std::string& where) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where, lineno, "expected key = value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(where, lineno, "empty key");

    auto d = [&] { return parse_double(value, where, lineno); };
    auto i = [&] { return parse_int(value, where, lineno); };
    auto b = [&] { return parse_bool(value, where, lineno); };

    // isotope.<label>.<field>
    if (key.rfind("isotope.", 0) == 0) {
      const auto rest = key.substr(8);
      const auto dot = rest.find('.');
      const std::string label = iso_key_label(dot == std::string::npos ? rest : rest.substr(0, dot));
      if (label.empty() || dot == std::string::npos)
        throw ParseError(where, lineno, "unknown key '" + key + "'");
      Isotope& iso = isotopes[label];
      if (iso.label.empty()) {
        iso.label = label;
        iso.spin_weight_even_j = iso.spin_weight_odd_j = 1;
      }
      const std::string field = rest.substr(dot + 1);
      if (field == "b_cm1") iso.b_cm1 = d();
      else if (field == "d_cm1") iso.d_cm1 = d();
      else if (field == "db_dp_cm1_per_gpa") db_dp_cm1_per_gpa[label] = d();
      else if (field == "spin_even") iso.spin_weight_even_j = i();
      else if (field == "spin_odd") iso.spin_weight_odd_j = i();
      else throw ParseError(where, lineno, "unknown key '" + key + "'");
      continue;
    }
    if (key == "field.v2_sign") {
      v2_sign = d();
      if (v2_sign != 1.0 && v2_sign != -1.0)
        throw ParseError(where, lineno, "field.v2_sign must be 1 or -1");
    } else if (key == "field.v4_cm1") v4_cm1 = d();
    else if (key == "field.jmax_basis") jmax_basis = i();
    else if (key == "field.jmax_report") jmax_report = i();
    else if (key == "populations.jmax_sum") jmax_sum = i();
    else if (key == "populations.frozen_ortho.h2") frozen_ortho["H2"] = d();
    else if (key == "populations.frozen_ortho.d2") frozen_ortho["D2"] = d();
    else if (key == "kinetics.k0_per_hour") kinetics.k0_per_hour = d();
    else if (key == "kinetics.p0_gpa") kinetics.p0_gpa = d();
    else if (key == "kinetics.alpha_per_gpa") kinetics.alpha_per_gpa = d();
    else if (key == "kinetics.d2_rate_scale") kinetics.d2_rate_scale = d();
    else if (key == "kinetics.enable_in_mixtures") kinetics.enabled_in_mixtures = b();
    else if (key == "fieldmodel.form") field_model.form = field_form_from_name(value);
    else if (key == "fieldmodel.a") field_model.a = d();
    else if (key == "fieldmodel.b") field_model.b = d();
    else if (key == "fieldmodel.c1") field_model.c1 = d();
    else if (key == "fieldmodel.c2") field_model.c2 = d();
    else if (key == "fieldmodel.soften_ct_per_k") field_model.soften_ct_per_k = d();
    else if (key == "fieldmodel.soften_t0_k") field_model.soften_t0_k = d();
    else if (key == "profile.fwhm_cm1") profile.fwhm_cm1 = d();
    else if (key == "profile.eta") profile.eta = d();
    else if (key == "mask.cutoff_cm1") mask_cutoff_cm1 = d();
    else if (key == "grid.min_cm1") grid_min_cm1 = d();
    else if (key == "grid.max_cm1") grid_max_cm1 = d();
    else if (key == "grid.step_cm1") grid_step_cm1 = d();
    else if (key == "phase2.d2_pressure_gpa") d2_phase2_pressure_gpa = d();
    else if (key == "phase2.d2_site_scales") d2_site_scales = parse_list(value, where, lineno);
    else if (key == "phase2.d2_site_weights") d2_site_weights = parse_list(value, where, lineno);
    else if (key == "phase2.mixture_suppressed") mixture_suppresses_phase2 = b();
    else if (key == "overlap.max_pressure_gpa") overlap_max_pressure_gpa = d();
    else if (key == "run.seed") seed = static_cast<std::uint64_t>(d());
    else if (key == "run.output_dir") output_dir = value;
    else throw ParseError(where, lineno, "unknown key '" + key + "'");
  }
}

void RunConfig::apply_file(const std::string& path) {
  apply_text(read_text(path), path);
}

RunConfig RunConfig::defaults() {
  RunConfig cfg;
  cfg.apply_text(default_config_text(), "<defaults>");
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  RunConfig cfg = defaults();
  cfg.apply_file(path);
  cfg.validate();
  return cfg;
}

void RunConfig::validate() const {
  for (const char* label : {"H2", "D2", "HD"}) {
    const auto it = isotopes.find(label);
    if (it == isotopes.end())
      throw ValidationError(std::string("config missing isotope ") + label);
    it->second.validate();
  }
  kinetics.validate();
  field_model.validate();
  profile.validate();
  if (mask_cutoff_cm1 < 0.0) throw ValidationError("mask cutoff must be >= 0");
  if (!(grid_step_cm1 > 0.0) || !(grid_max_cm1 > grid_min_cm1))
    throw ValidationError("grid requires max > min and step > 0");
  if (jmax_basis < 4) throw ValidationError("field.jmax_basis must be >= 4");
  if (jmax_report < 2) throw ValidationError("field.jmax_report must be >= 2");
  if (jmax_sum < 4) throw ValidationError("populations.jmax_sum must be >= 4");
  for (const auto& [label, x] : frozen_ortho)
    if (x < 0.0 || x > 1.0)
      throw ValidationError("frozen ortho fraction for " + label + " must be in [0, 1]");
  for (const auto& [label, slope] : db_dp_cm1_per_gpa)
    if (!std::isfinite(slope))
      throw ValidationError("B pressure slope for " + label + " must be finite");
  if (d2_site_scales.size() != d2_site_weights.size() || d2_site_scales.empty())
    throw ValidationError("phase2 site scales and weights must be non-empty, equal length");
  double wsum = 0.0;
  for (double w : d2_site_weights) {
    if (w < 0.0) throw ValidationError("phase2 site weights must be >= 0");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw ValidationError("phase2 site weights must sum to 1");
  if (!(overlap_max_pressure_gpa > 0.0))
    throw ValidationError("overlap.max_pressure_gpa must be > 0");
}

const Isotope& RunConfig::isotope(const std::string& label) const {
  const auto it = isotopes.find(label);
  if (it == isotopes.end()) throw UsageError("unknown isotope '" + label + "'");
  return it->second;
}

Isotope RunConfig::isotope_at(const std::string& label, double p_gpa) const {
  Isotope iso = isotope(label);
  const auto it = db_dp_cm1_per_gpa.find(label);
  if (it != db_dp_cm1_per_gpa.end() && it->second != 0.0) {
    iso.b_cm1 += it->second * p_gpa;
    iso.validate();
  }
  return iso;
}

std::vector<double> RunConfig::grid() const {
  return make_grid(grid_min_cm1, grid_max_cm1, grid_step_cm1);
}

CrystalField RunConfig::resolve_field(double p_gpa, double t_k) const {
  CrystalField field;
  field.v2_cm1 = v2_sign * field_model.v2(p_gpa) * field_model.softening(t_k);
  field.v4_cm1 = v4_cm1;
  field.jmax = jmax_basis;
  return field;
}

SiteModel RunConfig::site_model(const std::string& iso_label, double p_gpa,
                                const CrystalField& base, bool is_mixture) const {
  const bool split = iso_label == "D2" && p_gpa >= d2_phase2_pressure_gpa &&
                     !(is_mixture && mixture_suppresses_phase2);
  if (!split) return SiteModel::single(base);
  SiteModel model;
  for (std::size_t i = 0; i < d2_site_scales.size(); ++i) {
    CrystalField f = base;
    f.v2_cm1 = base.v2_cm1 * d2_site_scales[i];
    model.sites.push_back({d2_site_weights[i], f});
  }
  model.validate();
  return model;
}

OverlapOptions RunConfig::overlap_options() const {
  OverlapOptions opt;
  opt.fwhm_cm1 = profile.fwhm_cm1;
  opt.p_max_gpa = overlap_max_pressure_gpa;
  opt.d2_phase2_pressure_gpa = d2_phase2_pressure_gpa;
  double top = 1.0;
  for (double s : d2_site_scales) top = std::max(top, s);
  opt.d2_top_site_scale = top;
  opt.mixture_suppresses_phase2 = mixture_suppresses_phase2;
  opt.db_dp_cm1_per_gpa = db_dp_cm1_per_gpa;
  return opt;
}

std::string RunConfig::canonical_text() const {
  // Plain key = value lines (no section header) so the dump parses back
  // through apply_text unchanged.
  Report rep;
  for (const char* label : {"H2", "D2", "HD"}) {
    const Isotope& iso = isotope(label);
    std::string prefix = "isotope.";
    prefix += label == std::string("H2") ? "h2" : label == std::string("D2") ? "d2" : "hd";
    rep.kv(prefix + ".b_cm1", iso.b_cm1);
    rep.kv(prefix + ".d_cm1", iso.d_cm1);
    const auto slope = db_dp_cm1_per_gpa.find(label);
    rep.kv(prefix + ".db_dp_cm1_per_gpa",
           slope == db_dp_cm1_per_gpa.end() ? 0.0 : slope->second);
    rep.kv(prefix + ".spin_even", iso.spin_weight_even_j);
    rep.kv(prefix + ".spin_odd", iso.spin_weight_odd_j);
  }
  rep.kv("field.v2_sign", v2_sign);
  rep.kv("field.v4_cm1", v4_cm1);
  rep.kv("field.jmax_basis", jmax_basis);
  rep.kv("field.jmax_report", jmax_report);
  rep.kv("populations.jmax_sum", jmax_sum);
  for (const char* label : {"H2", "D2"}) {
    const auto it = frozen_ortho.find(label);
    if (it != frozen_ortho.end())
      rep.kv(std::string("populations.frozen_ortho.") + (label == std::string("H2") ? "h2" : "d2"),
             it->second);
  }
  rep.kv("kinetics.k0_per_hour", kinetics.k0_per_hour);
  rep.kv("kinetics.p0_gpa", kinetics.p0_gpa);
  rep.kv("kinetics.alpha_per_gpa", kinetics.alpha_per_gpa);
  rep.kv("kinetics.d2_rate_scale", kinetics.d2_rate_scale);
  rep.kv("kinetics.enable_in_mixtures", kinetics.enabled_in_mixtures);
  rep.kv("fieldmodel.form", field_form_name(field_model.form));
  rep.kv("fieldmodel.a", field_model.a);
  rep.kv("fieldmodel.b", field_model.b);
  rep.kv("fieldmodel.c1", field_model.c1);
  rep.kv("fieldmodel.c2", field_model.c2);
  rep.kv("fieldmodel.soften_ct_per_k", field_model.soften_ct_per_k);
  rep.kv("fieldmodel.soften_t0_k", field_model.soften_t0_k);
  rep.kv("profile.fwhm_cm1", profile.fwhm_cm1);
  rep.kv("profile.eta", profile.eta);
  rep.kv("mask.cutoff_cm1", mask_cutoff_cm1);
  rep.kv("grid.min_cm1", grid_min_cm1);
  rep.kv("grid.max_cm1", grid_max_cm1);
  rep.kv("grid.step_cm1", grid_step_cm1);
  rep.kv("phase2.d2_pressure_gpa", d2_phase2_pressure_gpa);
  std::string scales, weights;
  for (std::size_t i = 0; i < d2_site_scales.size(); ++i) {
    scales += (i ? "," : "") + fmt_g9(d2_site_scales[i]);
    weights += (i ? "," : "") + fmt_g9(d2_site_weights[i]);
  }
  rep.kv("phase2.d2_site_scales", scales);
  rep.kv("phase2.d2_site_weights", weights);
  rep.kv("phase2.mixture_suppressed", mixture_suppresses_phase2);
  rep.kv("overlap.max_pressure_gpa", overlap_max_pressure_gpa);
  rep.kv("run.seed", seed);
  rep.kv("run.output_dir", output_dir);
  return rep.text();
}

std::string RunConfig::hash() const { return hash_hex(canonical_text()); }

}  // namespace rotspec
