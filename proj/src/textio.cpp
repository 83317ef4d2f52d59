#include "rotspec/textio.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rotspec/errors.hpp"
#include "rotspec/version.hpp"

namespace rotspec {

std::string fmt_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(const std::string& text) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(text)));
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("rename to " + path + " failed: " + ec.message());
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void Report::section(const std::string& name) {
  if (!text_.empty()) text_ += "\n";
  text_ += "[" + name + "]\n";
}
void Report::kv(const std::string& key, const std::string& value) {
  text_ += key + " = " + value + "\n";
}
void Report::kv(const std::string& key, const char* value) { kv(key, std::string(value)); }
void Report::kv(const std::string& key, double value) { kv(key, fmt_g9(value)); }
void Report::kv(const std::string& key, int value) { kv(key, std::to_string(value)); }
void Report::kv(const std::string& key, std::uint64_t value) { kv(key, std::to_string(value)); }
void Report::kv(const std::string& key, bool value) {
  kv(key, value ? std::string("true") : std::string("false"));
}
void Report::raw(const std::string& line) { text_ += line + "\n"; }

namespace {

std::string validity_runs(const std::vector<std::uint8_t>& valid) {
  std::ostringstream os;
  bool first = true;
  std::size_t i = 0;
  while (i < valid.size()) {
    if (!valid[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < valid.size() && valid[j + 1]) ++j;
    if (!first) os << ",";
    os << i << "-" << j;
    first = false;
    i = j + 1;
  }
  return os.str();
}

std::vector<std::pair<std::size_t, std::size_t>> parse_runs(const std::string& text,
                                                            const std::string& where,
                                                            int line) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) throw ParseError(where, line, "bad validity run");
    try {
      runs.emplace_back(std::stoul(item.substr(0, dash)), std::stoul(item.substr(dash + 1)));
    } catch (const std::exception&) {
      throw ParseError(where, line, "bad validity run '" + item + "'");
    }
  }
  return runs;
}

}  // namespace

std::string spectrum_to_text(const Spectrum& spec) {
  spec.validate();
  std::ostringstream os;
  os << "# rotspec spectrum\n";
  os << "# pressure_gpa: " << fmt_g9(spec.meta.pressure_gpa) << "\n";
  os << "# temperature_k: " << fmt_g9(spec.meta.temperature_k) << "\n";
  if (!spec.meta.composition.empty()) os << "# composition: " << spec.meta.composition << "\n";
  os << "# cutoff_cm1: " << fmt_g9(spec.meta.cutoff_cm1) << "\n";
  const bool all_valid =
      std::all_of(spec.valid.begin(), spec.valid.end(), [](std::uint8_t v) { return v != 0; });
  if (!all_valid) os << "# validity: " << validity_runs(spec.valid) << "\n";
  os << "# columns: wavenumber_cm1 intensity\n";
  for (std::size_t i = 0; i < spec.size(); ++i)
    os << fmt_g9(spec.grid[i]) << " " << fmt_g9(spec.intensity[i]) << "\n";
  return os.str();
}

Spectrum spectrum_from_text(const std::string& text, const std::string& where) {
  Spectrum spec;
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  bool have_runs = false;

  struct Row {
    double x, y;
    std::uint8_t valid;
  };
  std::vector<Row> rows;

  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(first + 1, colon - first - 1);
      key.erase(0, key.find_first_not_of(" \t"));
      key.erase(key.find_last_not_of(" \t") + 1);
      std::string value = line.substr(colon + 1);
      value.erase(0, value.find_first_not_of(" \t"));
      value.erase(value.find_last_not_of(" \t") + 1);
      try {
        if (key == "pressure_gpa") spec.meta.pressure_gpa = std::stod(value);
        else if (key == "temperature_k") spec.meta.temperature_k = std::stod(value);
        else if (key == "composition") spec.meta.composition = value;
        else if (key == "cutoff_cm1") spec.meta.cutoff_cm1 = std::stod(value);
        else if (key == "validity") {
          runs = parse_runs(value, where, lineno);
          have_runs = true;
        }
        // other commented keys are plain comments
      } catch (const ParseError&) {
        throw;
      } catch (const std::exception&) {
        throw ParseError(where, lineno, "bad metadata value for '" + key + "'");
      }
      continue;
    }
    std::istringstream ls(line);
    std::string a, b, extra;
    ls >> a >> b;
    if (b.empty()) throw ParseError(where, lineno, "expected two columns");
    if (ls >> extra) throw ParseError(where, lineno, "expected two columns, got more");
    Row row{0.0, 0.0, 1};
    try {
      std::size_t used = 0;
      row.x = std::stod(a, &used);
      if (used != a.size()) throw std::invalid_argument("");
      row.y = std::stod(b, &used);
      if (used != b.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ParseError(where, lineno, "non-numeric row");
    }
    rows.push_back(row);
  }

  if (rows.size() < 8)
    throw ValidationError(where + ": spectrum has " + std::to_string(rows.size()) +
                          " samples; at least 8 required");

  if (have_runs) {
    for (auto& r : rows) r.valid = 0;
    for (const auto& [lo, hi] : runs)
      for (std::size_t i = lo; i <= hi && i < rows.size(); ++i) rows[i].valid = 1;
  }

  const bool sorted = std::is_sorted(rows.begin(), rows.end(),
                                     [](const Row& a, const Row& b) { return a.x < b.x; });
  if (!sorted) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.x < b.x; });
    spec.meta.resorted_on_load = true;
  }
  for (const auto& r : rows) {
    spec.grid.push_back(r.x);
    spec.intensity.push_back(r.y);
    spec.valid.push_back(r.valid);
  }
  spec.validate();
  return spec;
}

void save_spectrum(const std::string& path, const Spectrum& spec) {
  write_text_atomic(path, spectrum_to_text(spec));
}

Spectrum load_spectrum(const std::string& path) {
  return spectrum_from_text(read_text(path), path);
}

std::string sticks_to_text(const std::vector<Transition>& sticks) {
  std::ostringstream os;
  os << "# rotspec sticks\n";
  os << "# columns: shift_cm1 weight branch J absm Jp absmp\n";
  for (const auto& t : sticks)
    os << fmt_g9(t.shift_cm1) << " " << fmt_g9(t.weight) << " " << branch_name(t.branch)
       << " " << t.from.j << " " << t.from.abs_mj << " " << t.to.j << " " << t.to.abs_mj
       << "\n";
  return os.str();
}

FrequencyDataset dataset_from_text(const std::string& text, const std::string& where) {
  FrequencyDataset data;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    if (!have_header) {
      std::istringstream hs(line);
      std::vector<std::string> cols;
      std::string c;
      while (hs >> c) cols.push_back(c);
      const std::vector<std::string> want = {"p_gpa", "t_k",      "label",    "phase",
                                             "site",  "freq_cm1", "sigma_cm1"};
      if (cols != want)
        throw ParseError(where, lineno,
                         "header row must be: p_gpa t_k label phase site freq_cm1 sigma_cm1");
      have_header = true;
      continue;
    }
    std::istringstream ls(line);
    std::string p, t, label, phase, site, freq, sigma;
    if (!(ls >> p >> t >> label >> phase >> site >> freq >> sigma))
      throw ParseError(where, lineno, "expected 7 columns");
    FrequencyPoint row;
    try {
      row.p_gpa = std::stod(p);
      row.t_k = std::stod(t);
      row.label = label;
      row.phase = phase;
      row.site = site == "-" ? -1 : std::stoi(site);
      row.freq_cm1 = std::stod(freq);
      row.sigma_cm1 = std::stod(sigma);
    } catch (const std::exception&) {
      throw ParseError(where, lineno, "non-numeric field");
    }
    data.rows.push_back(row);
  }
  if (!have_header) throw ParseError(where + ": missing dataset header row");
  data.validate();
  return data;
}

FrequencyDataset load_dataset(const std::string& path) {
  return dataset_from_text(read_text(path), path);
}

void report_level_diagram(Report& rep, const LevelDiagram& diagram, const Isotope& iso,
                          const CrystalField& field, const std::string& method) {
  rep.section("level_diagram");
  rep.kv("isotope", iso.label);
  rep.kv("b_cm1", iso.b_cm1);
  rep.kv("d_cm1", iso.d_cm1);
  rep.kv("v2_cm1", field.v2_cm1);
  rep.kv("v4_cm1", field.v4_cm1);
  rep.kv("jmax_basis", field.jmax);
  rep.kv("method", method);
  rep.kv("sign_convention",
         field.v2_cm1 >= 0.0 ? "positive_v2_lowers_high_abs_mj" : "negative_v2_raises_high_abs_mj");
  rep.kv("levels", diagram.entries.size());
  rep.raw("# J |mJ| energy_cm1 degeneracy");
  for (const auto& e : diagram.entries) {
    std::ostringstream os;
    os << "level = " << e.j << " " << e.abs_mj << " " << fmt_g9(e.energy_cm1) << " "
       << e.degeneracy;
    rep.raw(os.str());
  }
}

void report_fit(Report& rep, const FitResult& fit) {
  rep.section("fit");
  rep.kv("template", fit.model_label);
  rep.kv("physical", fit.physical);
  rep.kv("status", fit_status_name(fit.status));
  rep.kv("iterations", fit.iterations);
  rep.kv("grad_norm", fit.grad_norm);
  rep.kv("chi2", fit.chi2);
  rep.kv("chi2_reduced", fit.chi2_reduced);
  rep.kv("n_samples", fit.n_samples);
  rep.kv("n_free_parameters", fit.n_free);
  rep.kv("peaks", fit.peaks.size());
  rep.raw("# peak center sigma amplitude sigma fwhm sigma eta sigma flags");
  for (std::size_t k = 0; k < fit.peaks.size(); ++k) {
    const FittedPeak& p = fit.peaks[k];
    std::ostringstream os;
    os << "peak." << k << " = " << fmt_g9(p.center.value) << " " << fmt_g9(p.center.sigma)
       << " " << fmt_g9(p.amplitude.value) << " " << fmt_g9(p.amplitude.sigma) << " "
       << fmt_g9(p.fwhm.value) << " " << fmt_g9(p.fwhm.sigma) << " " << fmt_g9(p.eta.value)
       << " " << fmt_g9(p.eta.sigma) << " ";
    std::string flags;
    if (p.unresolved) flags += "unresolved";
    for (const FittedParam* fp : {&p.center, &p.amplitude, &p.fwhm, &p.eta})
      if (fp->at_bound) {
        flags += flags.empty() ? "at_bound" : ",at_bound";
        break;
      }
    os << (flags.empty() ? "-" : flags);
    rep.raw(os.str());
  }
  for (std::size_t j = 0; j < fit.baseline.size(); ++j) {
    std::ostringstream os;
    os << "baseline." << j << " = " << fmt_g9(fit.baseline[j].value) << " "
       << fmt_g9(fit.baseline[j].sigma);
    rep.raw(os.str());
  }
}

void report_field_fit(Report& rep, const FieldFitResult& fit) {
  rep.section("field_model");
  rep.kv("form", field_form_name(fit.model.form));
  rep.kv("form_note", "functional form is an artifact choice, not a measured law");
  if (fit.model.form == FieldForm::power_law) {
    rep.kv("a", fit.model.a);
    rep.kv("b", fit.model.b);
  } else {
    rep.kv("c1", fit.model.c1);
    rep.kv("c2", fit.model.c2);
  }
  rep.kv("soften_ct_per_k", fit.model.soften_ct_per_k);
  rep.kv("soften_t0_k", fit.model.soften_t0_k);
  rep.kv("fitted_pmin_gpa", fit.model.fitted_pmin_gpa);
  rep.kv("fitted_pmax_gpa", fit.model.fitted_pmax_gpa);
  rep.kv("mapping", fit.used_exact_mapping ? "exact_diagonalization" : "first_order");
  rep.kv("chi2", fit.chi2);
  rep.kv("monotone_warning", fit.monotone_warning);
  for (std::size_t i = 0; i < fit.residuals_cm1.size(); ++i) {
    std::ostringstream os;
    os << "residual." << i << " = " << fmt_g9(fit.residuals_cm1[i]) << " pull "
       << fmt_g9(fit.pulls[i]);
    rep.raw(os.str());
  }
  for (const auto& [site, model] : fit.site_models) {
    rep.section("site_model_" + std::to_string(site));
    rep.kv("form", field_form_name(model.form));
    if (model.form == FieldForm::power_law) {
      rep.kv("a", model.a);
      rep.kv("b", model.b);
    } else {
      rep.kv("c1", model.c1);
      rep.kv("c2", model.c2);
    }
  }
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::string& args, const std::string& config_hash,
                    std::uint64_t seed) {
  Report rep;
  rep.section("manifest");
  rep.kv("tool", std::string("rotspec ") + kVersion);
  rep.kv("command", command);
  rep.kv("args", args.empty() ? "-" : args);
  rep.kv("config_hash", config_hash);
  rep.kv("seed", seed);
  write_text_atomic(path, rep.text());
}

}  // namespace rotspec
