#include "rotspec/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "rotspec/errors.hpp"
#include "rotspec/textio.hpp"

namespace rotspec {

void Scenario::validate() const {
  if (name.empty()) throw ValidationError("scenario needs a name");
  if (composition.empty()) throw ValidationError("scenario needs a composition");
  double total = 0.0;
  for (const auto& [label, frac] : composition) {
    if (frac < 0.0) throw ValidationError("scenario mole fractions must be >= 0");
    total += frac;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ValidationError("scenario mole fractions must sum to 1");
  if (pressures_gpa.empty() || temperatures_k.empty() || hold_hours.empty())
    throw ValidationError("scenario needs pressures, temperatures and hold times");
  profile.validate();
  if (noise_rel < 0.0) throw ValidationError("scenario noise must be >= 0");
  for (const auto& t : templates) template_model(t);  // throws on unknown names
}

Scenario Scenario::from_text(const std::string& text, const std::string& where) {
  Scenario s;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto parse_doubles = [&](const std::string& value, int ln) {
    std::vector<double> out;
    std::istringstream vs(value);
    std::string item;
    while (std::getline(vs, item, ',')) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ParseError(where, ln, "bad number '" + item + "'");
      }
    }
    if (out.empty()) throw ParseError(where, ln, "empty list");
    return out;
  };
  bool have_holds = false;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where, lineno, "expected key = value");
    auto trim = [](std::string str) {
      const auto a = str.find_first_not_of(" \t\r");
      const auto b = str.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : str.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "name") s.name = value;
    else if (key == "composition") s.composition = parse_composition(value);
    else if (key == "pressures_gpa") s.pressures_gpa = parse_doubles(value, lineno);
    else if (key == "temperatures_k") s.temperatures_k = parse_doubles(value, lineno);
    else if (key == "hold_hours") {
      s.hold_hours = parse_doubles(value, lineno);
      have_holds = true;
    } else if (key == "kinetics") {
      if (value == "on") s.kinetics_on = true;
      else if (value == "off") s.kinetics_on = false;
      else throw ParseError(where, lineno, "kinetics must be on or off");
    } else if (key == "profile_fwhm_cm1") s.profile.fwhm_cm1 = std::stod(value);
    else if (key == "profile_eta") s.profile.eta = std::stod(value);
    else if (key == "noise_rel") s.noise_rel = std::stod(value);
    else if (key == "seed") s.seed = std::stoull(value);
    else if (key == "templates") {
      s.templates.clear();
      std::istringstream ts(value);
      std::string item;
      while (std::getline(ts, item, ',')) s.templates.push_back(item);
    } else if (key == "use_exact_diagram") {
      if (value == "true") s.use_exact_diagram = true;
      else if (value == "false") s.use_exact_diagram = false;
      else throw ParseError(where, lineno, "expected true or false");
    } else if (key == "mask_cutoff_cm1") s.mask_cutoff_cm1 = std::stod(value);
    else throw ParseError(where, lineno, "unknown key '" + key + "'");
  }
  if (!have_holds) s.hold_hours = {0.0};
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  return Scenario::from_text(read_text(path), path);
}

namespace {

std::string point_tag(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "point_%03d", index);
  return buf;
}

struct TemplateSeed {
  Branch branch;
  int j_label;
};

TemplateSeed seed_selector(const std::string& template_name) {
  if (template_name == "S0_0_triplet") return {Branch::s0, 0};
  if (template_name == "S0_1_phenomenological") return {Branch::s0, 1};
  return {Branch::zero_roton, -1};
}

}  // namespace

ScenarioBundle run_scenario(const Scenario& scenario, const RunConfig& config,
                            const std::string& out_dir) {
  scenario.validate();
  config.validate();
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "spectra");
  fs::create_directories(fs::path(out_dir) / "fits");
  fs::create_directories(fs::path(out_dir) / "tables");

  ScenarioBundle bundle;
  bundle.scenario = scenario;
  bundle.out_dir = out_dir;

  const bool is_mixture = scenario.composition.size() > 1;
  const std::vector<double> grid = config.grid();
  const double cutoff = scenario.mask_cutoff_cm1.value_or(config.mask_cutoff_cm1);

  std::ostringstream log;
  log << "scenario " << scenario.name << "\n";

  Report freq_table;
  freq_table.section("frequencies");
  freq_table.raw("# point p_gpa t_k hold_hours template peak center_cm1 center_sigma "
                 "amplitude_cm1 fwhm_cm1 eta status");

  int index = 0;
  for (double p : scenario.pressures_gpa) {
    for (double t : scenario.temperatures_k) {
      for (double hold : scenario.hold_hours) {
        PointResult point;
        point.index = index;
        point.p_gpa = p;
        point.t_k = t;
        point.hold_hours = hold;
        const std::string tag = point_tag(index);
        ++index;

        try {
          const CrystalField base = config.resolve_field(p, t);

          // Ortho-para history: evolve the frozen loading split at (P, T)
          // over the hold time, then synthesize with the evolved split.
          std::map<std::string, double> frozen;
          for (const auto& [label, frac] : scenario.composition) {
            const auto it = config.frozen_ortho.find(label);
            if (it != config.frozen_ortho.end()) frozen[label] = it->second;
          }
          if (scenario.kinetics_on && hold > 0.0) {
            std::vector<std::pair<Isotope, double>> comps;
            for (const auto& [label, frac] : scenario.composition)
              comps.emplace_back(config.isotope_at(label, p), frac);
            PopulationState state =
                mixture_population(comps, t, base, frozen, config.jmax_sum);
            state = evolve_ortho_para(state, config.kinetics, p, t, hold);
            for (const auto& sp : state.species)
              if (sp.ortho_fraction) frozen[sp.iso.label] = *sp.ortho_fraction;
          }
          point.ortho_fraction = frozen;

          std::vector<SynthComponent> components;
          for (const auto& [label, frac] : scenario.composition) {
            SynthComponent c;
            c.iso = config.isotope_at(label, p);
            c.mole_fraction = frac;
            c.sites = config.site_model(label, p, base, is_mixture);
            components.push_back(std::move(c));
          }

          SynthOptions opt;
          opt.include_anti_stokes = true;
          opt.use_exact_diagram = scenario.use_exact_diagram;
          opt.jmax_report = config.jmax_report;
          opt.jmax_sum = config.jmax_sum;
          opt.frozen_ortho = frozen;
          opt.noise_rel = scenario.noise_rel;
          opt.seed = scenario.seed * 1000003ull + static_cast<std::uint64_t>(point.index);

          Spectrum spec = synth(components, p, t, scenario.profile, grid, opt);
          spec = apply_elastic_mask(std::move(spec), cutoff);

          const std::string spec_path =
              (fs::path(out_dir) / "spectra" / (tag + ".txt")).string();
          const std::string spec_text = spectrum_to_text(spec);
          write_text_atomic(spec_path, spec_text);
          point.spectrum_path = spec_path;
          // Fit what was persisted, so rerunning a fit on the bundle's
          // spectrum file reproduces the bundle's fit byte for byte.
          spec = spectrum_from_text(spec_text, spec_path);

          // Noiseless stick prediction, persisted and used for template
          // seeding.
          SynthOptions seed_opt = opt;
          seed_opt.noise_rel = 0.0;
          const std::vector<Transition> sticks = predict_sticks(components, t, seed_opt);
          write_text_atomic((fs::path(out_dir) / "spectra" / (tag + "_sticks.txt")).string(),
                            sticks_to_text(sticks));

          for (const auto& template_name : scenario.templates) {
            PeakModelSpec model = template_model(template_name);
            const TemplateSeed sel = seed_selector(template_name);
            try {
              seed_from_sticks(model, sticks, sel.branch, sel.j_label, scenario.profile);
              const FitResult fit = fit_peaks(spec, model);

              Report fit_rep;
              report_fit(fit_rep, fit);
              write_text_atomic(
                  (fs::path(out_dir) / "fits" / (tag + "_" + template_name + ".txt")).string(),
                  fit_rep.text());

              for (std::size_t k = 0; k < fit.peaks.size(); ++k) {
                const FittedPeak& pk = fit.peaks[k];
                std::ostringstream row;
                row << tag << " " << fmt_g9(p) << " " << fmt_g9(t) << " " << fmt_g9(hold)
                    << " " << template_name << " " << k << " " << fmt_g9(pk.center.value)
                    << " " << fmt_g9(pk.center.sigma) << " " << fmt_g9(pk.amplitude.value)
                    << " " << fmt_g9(pk.fwhm.value) << " " << fmt_g9(pk.eta.value) << " "
                    << fit_status_name(fit.status);
                freq_table.raw(row.str());
              }
              point.fits.emplace(template_name, fit);
            } catch (const Error& e) {
              log << tag << " " << template_name << " failed: "
                  << error_class_name(e.error_class()) << ": " << e.what() << "\n";
            }
          }
          point.ok = true;
          log << tag << " ok";
          for (const auto& [label, x] : point.ortho_fraction)
            log << " x_ortho[" << label << "]=" << fmt_g9(x);
          log << "\n";
        } catch (const Error& e) {
          point.ok = false;
          point.error = std::string(error_class_name(e.error_class())) + ": " + e.what();
          log << tag << " failed: " << point.error << "\n";
        }
        bundle.points.push_back(std::move(point));
      }
    }
  }

  write_text_atomic((fs::path(out_dir) / "tables" / "frequencies.txt").string(),
                    freq_table.text());
  write_text_atomic((fs::path(out_dir) / "log.txt").string(), log.str());
  write_text_atomic((fs::path(out_dir) / "config.txt").string(), config.canonical_text());
  write_manifest((fs::path(out_dir) / "manifest.txt").string(), "scenario", scenario.name,
                 config.hash(), scenario.seed);
  return bundle;
}

}  // namespace rotspec
