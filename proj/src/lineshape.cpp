#include "rotspec/lineshape.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rotspec/constants.hpp"
#include "rotspec/errors.hpp"

namespace rotspec {

void PeakProfile::validate() const {
  if (!(fwhm_cm1 > 0.0)) throw ValidationError("peak fwhm must be > 0");
  if (eta < 0.0 || eta > 1.0) throw ValidationError("peak eta must be in [0, 1]");
}

double PeakProfile::value(double x) const {
  static const double kLn2 = std::log(2.0);
  const double g = (2.0 / fwhm_cm1) * std::sqrt(kLn2 / kPi) *
                   std::exp(-4.0 * kLn2 * x * x / (fwhm_cm1 * fwhm_cm1));
  const double l = (2.0 / (kPi * fwhm_cm1)) / (1.0 + 4.0 * x * x / (fwhm_cm1 * fwhm_cm1));
  return (1.0 - eta) * g + eta * l;
}

void Spectrum::validate() const {
  if (grid.size() != intensity.size() || grid.size() != valid.size())
    throw ValidationError("spectrum arrays must have equal length");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw ValidationError("spectrum grid must be strictly ascending");
}

std::string format_composition(const std::vector<std::pair<std::string, double>>& parts) {
  std::ostringstream os;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) os << ",";
    os << parts[i].first;
    if (parts.size() > 1 || parts[i].second != 1.0) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.9g", parts[i].second);
      os << ":" << buf;
    }
  }
  return os.str();
}

std::vector<std::pair<std::string, double>> parse_composition(const std::string& text) {
  std::vector<std::pair<std::string, double>> parts;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      parts.emplace_back(item, 1.0);
    } else {
      try {
        parts.emplace_back(item.substr(0, colon), std::stod(item.substr(colon + 1)));
      } catch (const std::exception&) {
        throw ParseError("bad composition entry '" + item + "'");
      }
    }
  }
  if (parts.empty()) throw ParseError("empty composition '" + text + "'");
  return parts;
}

std::vector<double> make_grid(double min_cm1, double max_cm1, double step_cm1) {
  if (!(step_cm1 > 0.0) || !(max_cm1 > min_cm1))
    throw ValidationError("grid requires max > min and step > 0");
  std::vector<double> grid;
  const int n = static_cast<int>(std::floor((max_cm1 - min_cm1) / step_cm1 + 1e-9)) + 1;
  grid.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) grid.push_back(min_cm1 + i * step_cm1);
  return grid;
}

void SiteModel::validate() const {
  if (sites.empty()) throw ValidationError("site model needs at least one site");
  double total = 0.0;
  for (const auto& s : sites) {
    if (s.weight < 0.0) throw ValidationError("site weights must be >= 0");
    s.field.validate();
    total += s.weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ValidationError("site weights must sum to 1 within 1e-9");
}

Spectrum broaden(const std::vector<Transition>& sticks, const PeakProfile& profile,
                 const std::vector<double>& grid) {
  profile.validate();
  Spectrum spec;
  spec.grid = grid;
  spec.intensity.assign(grid.size(), 0.0);
  spec.valid.assign(grid.size(), 1);
  spec.validate();
  if (grid.empty()) return spec;

  for (const auto& s : sticks) {
    if (s.weight == 0.0) continue;
    if (s.shift_cm1 < grid.front() || s.shift_cm1 > grid.back())
      spec.meta.grid_warning = true;
    for (std::size_t i = 0; i < grid.size(); ++i)
      spec.intensity[i] += s.weight * profile.value(grid[i] - s.shift_cm1);
  }
  return spec;
}

Spectrum apply_elastic_mask(Spectrum spec, double cutoff_cm1) {
  if (cutoff_cm1 < 0.0) throw ValidationError("mask cutoff must be >= 0");
  spec.validate();
  for (std::size_t i = 0; i < spec.grid.size(); ++i)
    if (std::abs(spec.grid[i]) < cutoff_cm1) spec.valid[i] = 0;
  spec.meta.cutoff_cm1 = cutoff_cm1;
  return spec;
}

namespace {

// Box-Muller on raw mt19937_64 draws; avoids distribution objects so the
// byte stream is identical across standard libraries.
class GaussianRng {
public:
  explicit GaussianRng(std::uint64_t seed) : rng_(seed) {}
  double next() {
    const double u1 = ((rng_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    const double u2 = ((rng_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

private:
  std::mt19937_64 rng_;
};

}  // namespace

std::vector<Transition> predict_sticks(const std::vector<SynthComponent>& components,
                                       double t_k, const SynthOptions& options) {
  if (components.empty()) throw ValidationError("synth needs at least one component");
  double total_fraction = 0.0;
  for (const auto& c : components) {
    c.iso.validate();
    c.sites.validate();
    if (c.mole_fraction < 0.0) throw ValidationError("mole fraction must be >= 0");
    total_fraction += c.mole_fraction;
  }
  if (std::abs(total_fraction - 1.0) > 1e-9)
    throw ValidationError("mole fractions must sum to 1 within 1e-9");

  std::vector<Transition> merged;
  for (const auto& c : components) {
    std::optional<double> frozen;
    const auto it = options.frozen_ortho.find(c.iso.label);
    if (it != options.frozen_ortho.end()) frozen = it->second;

    for (const auto& site : c.sites.sites) {
      const LevelDiagram diagram =
          options.use_exact_diagram
              ? level_diagram_exact(c.iso, site.field, options.jmax_report)
              : level_diagram_perturbative(c.iso, site.field, options.jmax_report);
      const PopulationState pop =
          equilibrium_populations(c.iso, t_k, site.field, frozen, options.jmax_sum);
      std::vector<Transition> sticks =
          intensity_weights(enumerate_transitions(diagram, options.rules), pop, c.iso);
      sticks = stick_spectrum(sticks, pop, c.iso, t_k, options.include_anti_stokes);

      const double scale = c.mole_fraction * site.weight;
      for (auto& s : sticks) {
        s.weight *= scale;
        merged.push_back(s);
      }
    }
  }
  return merged;
}

Spectrum synth(const std::vector<SynthComponent>& components, double p_gpa, double t_k,
               const PeakProfile& profile, const std::vector<double>& grid,
               const SynthOptions& options) {
  profile.validate();
  const std::vector<Transition> sticks = predict_sticks(components, t_k, options);

  std::vector<std::pair<std::string, double>> comp_label;
  for (const auto& c : components) comp_label.emplace_back(c.iso.label, c.mole_fraction);

  Spectrum total = broaden(sticks, profile, grid);

  if (options.noise_rel > 0.0) {
    double peak = 0.0;
    for (double v : total.intensity) peak = std::max(peak, std::abs(v));
    GaussianRng rng(options.seed);
    const double sigma = options.noise_rel * peak;
    for (auto& v : total.intensity) v += sigma * rng.next();
  }

  total.meta.pressure_gpa = p_gpa;
  total.meta.temperature_k = t_k;
  total.meta.composition = format_composition(comp_label);
  return total;
}

}  // namespace rotspec
