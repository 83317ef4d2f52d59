// Command-line front end: levels, transitions, synth, fit, calibrate,
// kinetics, scenario, config.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "rotspec/config.hpp"
#include "rotspec/errors.hpp"
#include "rotspec/scenario.hpp"
#include "rotspec/textio.hpp"
#include "rotspec/version.hpp"

namespace fs = std::filesystem;
using namespace rotspec;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

RunConfig make_config(const GlobalArgs& g) {
  RunConfig cfg = g.config_path.empty() ? RunConfig::defaults() : RunConfig::load(g.config_path);
  if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
  if (g.seed) cfg.seed = *g.seed;
  cfg.validate();
  return cfg;
}

std::string join_args(int argc, char** argv) {
  std::string out;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) out += " ";
    out += argv[i];
  }
  return out;
}

void emit(const RunConfig& cfg, const std::string& command, const std::string& args,
          const std::string& filename, const std::string& content) {
  std::cout << content;
  write_text_atomic((fs::path(cfg.output_dir) / filename).string(), content);
  write_text_atomic((fs::path(cfg.output_dir) / "config.txt").string(),
                    cfg.canonical_text());
  write_manifest((fs::path(cfg.output_dir) / "manifest.txt").string(), command, args,
                 cfg.hash(), cfg.seed);
}

std::vector<std::pair<Isotope, double>> resolve_composition(const RunConfig& cfg,
                                                            const std::string& text,
                                                            double p_gpa = 0.0) {
  std::vector<std::pair<Isotope, double>> out;
  for (const auto& [label, frac] : parse_composition(text))
    out.emplace_back(cfg.isotope_at(label, p_gpa), frac);
  return out;
}

int cmd_levels(const GlobalArgs& g, const std::string& args, const std::string& iso_label,
               std::optional<double> v2, std::optional<double> pressure, double temperature,
               double v4, bool exact, int jmax_report_arg) {
  const RunConfig cfg = make_config(g);
  const Isotope iso =
      pressure ? cfg.isotope_at(iso_label, *pressure) : cfg.isotope(iso_label);

  CrystalField field;
  if (pressure) {
    field = cfg.resolve_field(*pressure, temperature);
  } else if (v2) {
    field.v2_cm1 = *v2;
    field.jmax = cfg.jmax_basis;
  } else {
    throw UsageError("levels needs either --v2 or --pressure");
  }
  if (v4 != 0.0) field.v4_cm1 = v4;
  const int jmax_report = jmax_report_arg > 0 ? jmax_report_arg : cfg.jmax_report;

  const LevelDiagram diagram = exact
                                   ? level_diagram_exact(iso, field, jmax_report)
                                   : level_diagram_perturbative(iso, field, jmax_report);
  Report rep;
  report_level_diagram(rep, diagram, iso, field, exact ? "exact_diagonalization" : "first_order");
  if (diagram.has(1, 0) && diagram.has(1, 1)) {
    rep.kv("j1_splitting_cm1", std::abs(diagram.energy(1, 0) - diagram.energy(1, 1)));
  }
  emit(cfg, "levels", args, "levels.txt", rep.text());
  return 0;
}

int cmd_transitions(const GlobalArgs& g, const std::string& args, int j,
                    const std::string& iso_label, double v2, bool full,
                    bool include_zero_shift) {
  const RunConfig cfg = make_config(g);
  const Isotope iso = cfg.isotope(iso_label);
  CrystalField field;
  field.v2_cm1 = v2;
  field.jmax = cfg.jmax_basis;

  Report rep;
  rep.section("transitions");
  rep.kv("isotope", iso.label);
  rep.kv("v2_cm1", field.v2_cm1);

  if (!full) {
    // Zero-roton counts for one J manifold under both conventions.
    LevelDiagram manifold;
    const LevelDiagram all = level_diagram_perturbative(iso, field, std::max(j, 2));
    for (const auto& e : all.entries)
      if (e.j == j) manifold.entries.push_back(e);
    rep.kv("J", j);
    for (const CountConvention conv :
         {CountConvention::level_pairs, CountConvention::state_pairs}) {
      SelectionRules rules;
      rules.convention = conv;
      rules.include_zero_shift = include_zero_shift;
      const auto lines = enumerate_transitions(manifold, rules);
      rep.kv(std::string("zero_roton_count.") + convention_name(conv), lines.size());
    }
    if (j == 3) rep.kv("note", j3_count_note());
  } else {
    const LevelDiagram diagram = level_diagram_perturbative(iso, field, cfg.jmax_report);
    SelectionRules rules;
    rules.include_zero_shift = include_zero_shift;
    const auto lines = enumerate_transitions(diagram, rules);
    rep.kv("convention", convention_name(rules.convention));
    rep.kv("lines", lines.size());
    rep.raw("# branch J |m| -> J' |m'| shift_cm1");
    for (const auto& t : lines) {
      std::ostringstream os;
      os << "line = " << branch_name(t.branch) << " " << t.from.j << " " << t.from.abs_mj
         << " -> " << t.to.j << " " << t.to.abs_mj << " " << fmt_g9(t.shift_cm1);
      rep.raw(os.str());
    }
  }
  emit(cfg, "transitions", args, "transitions.txt", rep.text());
  return 0;
}

int cmd_synth(const GlobalArgs& g, const std::string& args, const std::string& composition,
              double pressure, double temperature, std::optional<double> v2, double noise,
              bool no_anti_stokes, bool exact, bool no_mask, std::string out_file,
              const std::string& sticks_out) {
  const RunConfig cfg = make_config(g);
  const auto comps = resolve_composition(cfg, composition, pressure);

  const CrystalField base = v2 ? CrystalField{*v2, cfg.v4_cm1, cfg.jmax_basis}
                               : cfg.resolve_field(pressure, temperature);
  std::vector<SynthComponent> components;
  for (const auto& [iso, frac] : comps)
    components.push_back(
        {iso, frac, cfg.site_model(iso.label, pressure, base, comps.size() > 1)});

  SynthOptions opt;
  opt.include_anti_stokes = !no_anti_stokes;
  opt.use_exact_diagram = exact;
  opt.jmax_report = cfg.jmax_report;
  opt.jmax_sum = cfg.jmax_sum;
  opt.noise_rel = noise;
  opt.seed = cfg.seed;
  for (const auto& [iso, frac] : comps) {
    const auto it = cfg.frozen_ortho.find(iso.label);
    if (it != cfg.frozen_ortho.end()) opt.frozen_ortho[iso.label] = it->second;
  }

  Spectrum spec = synth(components, pressure, temperature, cfg.profile, cfg.grid(), opt);
  if (!no_mask) spec = apply_elastic_mask(std::move(spec), cfg.mask_cutoff_cm1);

  if (out_file.empty()) out_file = (fs::path(cfg.output_dir) / "spectrum.txt").string();
  save_spectrum(out_file, spec);
  if (!sticks_out.empty()) {
    SynthOptions clean = opt;
    clean.noise_rel = 0.0;
    write_text_atomic(sticks_out, sticks_to_text(predict_sticks(components, temperature, clean)));
  }
  write_text_atomic((fs::path(cfg.output_dir) / "config.txt").string(),
                    cfg.canonical_text());
  write_manifest((fs::path(cfg.output_dir) / "manifest.txt").string(), "synth", args,
                 cfg.hash(), cfg.seed);
  std::cout << "wrote " << out_file << " (" << spec.size() << " samples)\n";
  return 0;
}

int cmd_fit(const GlobalArgs& g, const std::string& args, const std::string& input,
            const std::string& template_name, const std::string& model_file,
            std::vector<double> window, bool no_seed) {
  const RunConfig cfg = make_config(g);
  const Spectrum spec = load_spectrum(input);
  if (spec.meta.resorted_on_load)
    std::cerr << "warning: input samples were unsorted; re-sorted on load\n";

  PeakModelSpec model;
  if (!model_file.empty())
    model = PeakModelSpec::from_text(read_text(model_file));
  else
    model = template_model(template_name);

  if (!no_seed && model_file.empty() && !spec.meta.composition.empty() &&
      spec.meta.temperature_k > 0.0) {
    // Seed centers from the forward model at the spectrum's (P, T).
    const auto comps =
        resolve_composition(cfg, spec.meta.composition, spec.meta.pressure_gpa);
    const CrystalField base =
        cfg.resolve_field(spec.meta.pressure_gpa, spec.meta.temperature_k);
    std::vector<SynthComponent> components;
    for (const auto& [iso, frac] : comps)
      components.push_back({iso, frac,
                            cfg.site_model(iso.label, spec.meta.pressure_gpa, base,
                                           comps.size() > 1)});
    SynthOptions opt;
    opt.jmax_report = cfg.jmax_report;
    opt.jmax_sum = cfg.jmax_sum;
    for (const auto& [iso, frac] : comps) {
      const auto it = cfg.frozen_ortho.find(iso.label);
      if (it != cfg.frozen_ortho.end()) opt.frozen_ortho[iso.label] = it->second;
    }
    const auto sticks = predict_sticks(components, spec.meta.temperature_k, opt);
    Branch branch = Branch::zero_roton;
    int j_label = -1;
    if (template_name == "S0_0_triplet") branch = Branch::s0, j_label = 0;
    if (template_name == "S0_1_phenomenological") branch = Branch::s0, j_label = 1;
    seed_from_sticks(model, sticks, branch, j_label, cfg.profile);
  }
  if (window.size() == 2) model.window = {window[0], window[1]};

  const FitResult fit = fit_peaks(spec, model);
  Report rep;
  report_fit(rep, fit);
  if (fit.model_label == "S0_0_triplet" &&
      (fit.status == FitStatus::converged || fit.status == FitStatus::unresolved)) {
    const SplittingReport sr = splitting_report(fit);
    rep.section("splittings");
    rep.kv("note", "labels assume positive v2 (|m|=2 component lowest)");
    rep.kv("d02_cm1", sr.d02);
    rep.kv("d02_sigma", sr.d02_sigma);
    rep.kv("d01_cm1", sr.d01);
    rep.kv("d01_sigma", sr.d01_sigma);
    rep.kv("d12_cm1", sr.d12);
    rep.kv("d12_sigma", sr.d12_sigma);
  }
  emit(cfg, "fit", args, "fit.txt", rep.text());
  return fit.status == FitStatus::singular ? static_cast<int>(ErrorClass::convergence) : 0;
}

int cmd_calibrate(const GlobalArgs& g, const std::string& args, const std::string& data_path,
                  const std::string& form_name, bool exact_mapping,
                  const std::string& exact_iso, bool fit_softening) {
  const RunConfig cfg = make_config(g);
  const FrequencyDataset data = load_dataset(data_path);
  FieldFitOptions opt;
  opt.use_exact_mapping = exact_mapping;
  if (exact_mapping) opt.iso_for_exact = cfg.isotope(exact_iso);
  opt.jmax = cfg.jmax_basis;
  opt.fit_softening = fit_softening;
  opt.softening_ct_per_k = cfg.field_model.soften_ct_per_k;
  opt.softening_t0_k = cfg.field_model.soften_t0_k;

  const FieldFitResult fit = fit_field_model(data, field_form_from_name(form_name), opt);

  Report rep;
  report_field_fit(rep, fit);

  // First-order vs exact mapping diagnostic at the top of the fitted range.
  const MappingDiagnostic diag =
      mapping_diagnostic(fit.model, cfg.isotope("D2"), fit.model.fitted_pmax_gpa, 10.0,
                         cfg.jmax_basis);
  rep.section("mapping_diagnostic");
  rep.kv("p_gpa", fit.model.fitted_pmax_gpa);
  rep.kv("v2_cm1", diag.v2_cm1);
  rep.kv("first_order_cm1", diag.first_order_cm1);
  rep.kv("exact_cm1", diag.exact_cm1);
  rep.kv("difference_cm1", diag.difference_cm1);

  rep.section("overlap_pressures");
  const OverlapOptions oopt = cfg.overlap_options();
  for (const std::string comp : {"D2", "H2:0.5,D2:0.5", "H2"}) {
    const auto result = overlap_pressure(fit.model, resolve_composition(cfg, comp), oopt);
    rep.kv("overlap." + comp,
           result.found ? fmt_g9(result.p_gpa) + " GPa" : std::string("none-in-range"));
  }
  emit(cfg, "calibrate", args, "fieldmodel.txt", rep.text());
  return 0;
}

int cmd_kinetics(const GlobalArgs& g, const std::string& args, const std::string& iso_label,
                 double pressure, double temperature, double hours, int steps) {
  const RunConfig cfg = make_config(g);
  const Isotope iso = cfg.isotope_at(iso_label, pressure);
  const CrystalField field = cfg.resolve_field(pressure, temperature);

  std::optional<double> frozen;
  const auto it = cfg.frozen_ortho.find(iso.label);
  if (it != cfg.frozen_ortho.end()) frozen = it->second;

  Report rep;
  rep.section("kinetics");
  rep.kv("isotope", iso.label);
  rep.kv("pressure_gpa", pressure);
  rep.kv("temperature_k", temperature);
  rep.kv("k0_per_hour", cfg.kinetics.k0_per_hour);
  rep.kv("alpha_per_gpa", cfg.kinetics.alpha_per_gpa);
  double rate = cfg.kinetics.rate_per_hour(pressure);
  if (iso.label == "D2") {
    rate *= cfg.kinetics.d2_rate_scale;
    rep.kv("d2_rate_scale", cfg.kinetics.d2_rate_scale);
    rep.kv("d2_rate_note", "placeholder value; source data gives no number");
  }
  rep.kv("rate_per_hour", rate);
  rep.raw("# t_hours x_ortho");
  PopulationState state =
      equilibrium_populations(iso, temperature, field, frozen, cfg.jmax_sum);
  const double dt = steps > 0 ? hours / steps : hours;
  for (int i = 0; i <= steps; ++i) {
    std::ostringstream os;
    os << "x = " << fmt_g9(i * dt) << " "
       << fmt_g9(state.species.front().ortho_fraction.value_or(0.0));
    rep.raw(os.str());
    if (i < steps)
      state = evolve_ortho_para(state, cfg.kinetics, pressure, temperature, dt);
  }
  emit(cfg, "kinetics", args, "kinetics.txt", rep.text());
  return 0;
}

int cmd_scenario(const GlobalArgs& g, const std::string& args, const std::string& name,
                 const std::string& file, const std::string& dir) {
  const RunConfig cfg = make_config(g);
  std::string path = file;
  if (path.empty()) {
    if (name.empty()) throw UsageError("scenario needs --name or --file");
    path = (fs::path(dir) / (name + ".scn")).string();
    if (!fs::exists(path))
      throw IoError("scenario document not found: " + path);
  }
  Scenario scenario = load_scenario(path);
  if (g.seed) scenario.seed = *g.seed;
  const std::string out_dir =
      (fs::path(cfg.output_dir) / ("scenario_" + scenario.name)).string();
  const ScenarioBundle bundle = run_scenario(scenario, cfg, out_dir);
  write_text_atomic((fs::path(cfg.output_dir) / "config.txt").string(),
                    cfg.canonical_text());
  write_manifest((fs::path(cfg.output_dir) / "manifest.txt").string(), "scenario", args,
                 cfg.hash(), scenario.seed);

  int failed = 0;
  for (const auto& p : bundle.points)
    if (!p.ok) ++failed;
  std::cout << "scenario " << scenario.name << ": " << bundle.points.size() << " points, "
            << failed << " failed; bundle at " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rotational Raman toolkit for dense hydrogens"};
  app.set_version_flag("--version", std::string("rotspec ") + kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs g;
  app.add_option("--config", g.config_path, "configuration overrides file");
  app.add_option("--out", g.out_dir, "output directory");
  std::uint64_t seed_arg = 0;
  auto* seed_opt = app.add_option("--seed", seed_arg, "seed override");

  const std::string args = join_args(argc, argv);

  // levels
  auto* levels = app.add_subcommand("levels", "print a (J, mJ) level diagram");
  std::string iso_label = "H2";
  double v2_arg = 0.0, v4_arg = 0.0, pressure = 0.0, temperature = 10.0;
  bool exact = false;
  int jmax_report = 0;
  levels->add_option("--isotope", iso_label, "H2, D2 or HD");
  auto* v2_opt = levels->add_option("--v2", v2_arg, "field strength V2 in cm^-1");
  auto* p_opt = levels->add_option("--pressure", pressure, "resolve V2 from the field model");
  levels->add_option("--temperature", temperature, "temperature for softening (K)");
  levels->add_option("--v4", v4_arg, "optional V4 term in cm^-1");
  levels->add_flag("--exact", exact, "diagonalize instead of first-order theory");
  levels->add_option("--jmax-report", jmax_report, "highest J to report");

  // transitions
  auto* transitions = app.add_subcommand("transitions", "enumerate Raman-allowed lines");
  int j_manifold = 2;
  std::string trans_iso = "H2";
  double trans_v2 = 100.0;
  bool full = false;
  transitions->add_option("--J", j_manifold, "J manifold for zero-roton counting");
  transitions->add_option("--isotope", trans_iso, "isotope label");
  transitions->add_option("--v2", trans_v2, "field strength in cm^-1");
  transitions->add_flag("--full", full, "list every line of the full diagram");
  bool include_zero_shift = false;
  transitions->add_flag("--include-zero-shift", include_zero_shift,
                        "count zero-shift pairs for bookkeeping");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "synthesize a spectrum");
  std::string composition = "H2";
  double synth_p = 31.0, synth_t = 10.0, noise = 0.0;
  double synth_v2_arg = 0.0;
  bool no_anti_stokes = false, synth_exact = false, no_mask = false;
  std::string out_file;
  synth_cmd->add_option("--composition", composition, "e.g. H2 or H2:0.5,D2:0.5");
  synth_cmd->add_option("--pressure", synth_p, "GPa");
  synth_cmd->add_option("--temperature", synth_t, "K");
  auto* synth_v2_opt =
      synth_cmd->add_option("--v2", synth_v2_arg, "explicit V2 (bypasses field model)");
  synth_cmd->add_option("--noise", noise, "relative gaussian noise amplitude");
  synth_cmd->add_flag("--no-anti-stokes", no_anti_stokes, "drop anti-Stokes sticks");
  synth_cmd->add_flag("--exact", synth_exact, "use exact diagonalization diagrams");
  synth_cmd->add_flag("--no-mask", no_mask, "skip the elastic-line mask");
  synth_cmd->add_option("--out-file", out_file, "spectrum file to write");
  std::string sticks_out;
  synth_cmd->add_option("--sticks-out", sticks_out, "also write the predicted stick list");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit peaks in a spectrum");
  std::string input, template_name = "zero_roton_single", model_file;
  std::vector<double> window;
  bool no_seed = false;
  fit_cmd->add_option("--input", input, "spectrum file")->required();
  fit_cmd->add_option("--template", template_name, "model template name");
  fit_cmd->add_option("--model", model_file, "custom peak model document");
  fit_cmd->add_option("--window", window, "fit window lo hi (cm^-1)")->expected(2);
  fit_cmd->add_flag("--no-seed", no_seed, "skip seeding from the forward model");

  // calibrate
  auto* cal_cmd = app.add_subcommand("calibrate", "fit V2(P) to a frequency dataset");
  std::string data_path, form_name = "power_law", exact_iso = "D2";
  bool exact_mapping = false, fit_softening = false;
  cal_cmd->add_option("--data", data_path, "frequency dataset file")->required();
  cal_cmd->add_option("--form", form_name, "power_law or quadratic");
  cal_cmd->add_flag("--exact-mapping", exact_mapping,
                    "calibrate through exact diagonalization");
  cal_cmd->add_option("--exact-isotope", exact_iso, "isotope for the exact mapping");
  cal_cmd->add_flag("--fit-softening", fit_softening, "fit the temperature softening slope");

  // kinetics
  auto* kin_cmd = app.add_subcommand("kinetics", "ortho-para conversion time series");
  std::string kin_iso = "H2";
  double kin_p = 25.0, kin_t = 10.0, kin_hours = 1.0;
  int kin_steps = 10;
  kin_cmd->add_option("--isotope", kin_iso, "isotope label");
  kin_cmd->add_option("--pressure", kin_p, "GPa");
  kin_cmd->add_option("--temperature", kin_t, "K");
  kin_cmd->add_option("--hours", kin_hours, "total hold time");
  kin_cmd->add_option("--steps", kin_steps, "number of output steps");

  // scenario
  auto* scn_cmd = app.add_subcommand("scenario", "run a named scenario bundle");
  std::string scn_name, scn_file, scn_dir = "scenarios";
  scn_cmd->add_option("--name", scn_name, "scenario name (looked up in --dir)");
  scn_cmd->add_option("--file", scn_file, "scenario document path");
  scn_cmd->add_option("--dir", scn_dir, "scenario directory");

  // config
  auto* cfg_cmd = app.add_subcommand("config", "configuration utilities");
  bool dump = false, dump_canonical = false;
  std::string dump_template;
  cfg_cmd->add_flag("--dump", dump, "print the annotated default configuration");
  cfg_cmd->add_flag("--dump-canonical", dump_canonical,
                    "print the merged configuration in canonical form");
  cfg_cmd->add_option("--dump-template", dump_template,
                      "print a peak model template as an editable document");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: usage: " << e.what() << "\n";
    return static_cast<int>(ErrorClass::usage);
  }

  try {
    if (seed_opt->count()) g.seed = seed_arg;
    if (levels->parsed())
      return cmd_levels(g, args, iso_label,
                        v2_opt->count() ? std::optional<double>(v2_arg) : std::nullopt,
                        p_opt->count() ? std::optional<double>(pressure) : std::nullopt,
                        temperature, v4_arg, exact, jmax_report);
    if (transitions->parsed())
      return cmd_transitions(g, args, j_manifold, trans_iso, trans_v2, full,
                             include_zero_shift);
    if (synth_cmd->parsed())
      return cmd_synth(g, args, composition, synth_p, synth_t,
                       synth_v2_opt->count() ? std::optional<double>(synth_v2_arg)
                                             : std::nullopt,
                       noise, no_anti_stokes, synth_exact, no_mask, out_file, sticks_out);
    if (fit_cmd->parsed())
      return cmd_fit(g, args, input, template_name, model_file, window, no_seed);
    if (cal_cmd->parsed())
      return cmd_calibrate(g, args, data_path, form_name, exact_mapping, exact_iso,
                           fit_softening);
    if (kin_cmd->parsed())
      return cmd_kinetics(g, args, kin_iso, kin_p, kin_t, kin_hours, kin_steps);
    if (scn_cmd->parsed()) return cmd_scenario(g, args, scn_name, scn_file, scn_dir);
    if (cfg_cmd->parsed()) {
      if (!dump_template.empty())
        std::cout << template_model(dump_template).to_text();
      else if (dump_canonical)
        std::cout << make_config(g).canonical_text();
      else if (dump)
        std::cout << default_config_text();
      else
        throw UsageError("config needs --dump, --dump-canonical or --dump-template");
      return 0;
    }
    throw UsageError("no subcommand given");
  } catch (const Error& e) {
    std::cerr << "error: " << error_class_name(e.error_class()) << ": " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
}
