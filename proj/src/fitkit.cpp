#include "rotspec/fitkit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "rotspec/constants.hpp"
#include "rotspec/errors.hpp"

namespace rotspec {

namespace {

const double kLn2 = std::log(2.0);

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v == 0.0 ? 0.0 : v);
  return buf;
}

enum Kind { kCenter = 0, kAmplitude = 1, kFwhm = 2, kEta = 3 };

const ParamSpec& param_of(const PeakSpec& p, int kind) {
  switch (kind) {
    case kCenter: return p.center;
    case kAmplitude: return p.amplitude;
    case kFwhm: return p.fwhm;
    default: return p.eta;
  }
}

const char* kind_name(int kind) {
  switch (kind) {
    case kCenter: return "center";
    case kAmplitude: return "amplitude";
    case kFwhm: return "fwhm";
    default: return "eta";
  }
}

}  // namespace

const char* fit_status_name(FitStatus s) {
  switch (s) {
    case FitStatus::converged: return "converged";
    case FitStatus::max_iter: return "max_iter";
    case FitStatus::singular: return "singular";
    case FitStatus::unresolved: return "unresolved";
  }
  return "?";
}

double FitResult::covariance(int ext_i, int ext_j) const {
  const int n = static_cast<int>(peaks.size()) * 4 + static_cast<int>(baseline.size());
  if (ext_i < 0 || ext_j < 0 || ext_i >= n || ext_j >= n)
    throw ValidationError("covariance index out of range");
  return ext_cov[static_cast<std::size_t>(ext_i) * n + ext_j];
}

void PeakModelSpec::validate() const {
  if (peaks.empty()) throw ValidationError("peak model needs at least one peak");
  if (baseline_order < 0 || baseline_order > 2)
    throw ValidationError("baseline order must be 0, 1 or 2");
  if (window && !(window->first < window->second))
    throw ValidationError("fit window must have lo < hi");

  for (std::size_t k = 0; k < peaks.size(); ++k) {
    for (int kind = 0; kind < 4; ++kind) {
      const ParamSpec& p = param_of(peaks[k], kind);
      std::ostringstream where;
      where << "peak " << k << " " << kind_name(kind);
      if (p.link >= 0) {
        if (p.fixed) throw ValidationError(where.str() + ": cannot be both fixed and linked");
        if (p.link >= static_cast<int>(peaks.size()) || p.link == static_cast<int>(k))
          throw ValidationError(where.str() + ": link target out of range");
        const ParamSpec& target = param_of(peaks[static_cast<std::size_t>(p.link)], kind);
        if (target.fixed || target.link >= 0)
          throw ValidationError(where.str() + ": link target must be a free parameter");
        if (ordered_centers && kind == kCenter)
          throw ValidationError(where.str() + ": links not allowed on ordered centers");
        continue;
      }
      if (p.fixed) continue;
      if (!(p.lo < p.hi)) throw ValidationError(where.str() + ": bounds must have lo < hi");
      if (p.init < p.lo || p.init > p.hi)
        throw ValidationError(where.str() + ": init outside bounds");
      if (kind == kFwhm && !(p.lo > 0.0))
        throw ValidationError(where.str() + ": fwhm lower bound must be > 0");
      if (kind == kEta && (p.lo < 0.0 || p.hi > 1.0))
        throw ValidationError(where.str() + ": eta bounds must stay in [0, 1]");
    }
    if (ordered_centers) {
      const ParamSpec& c = peaks[k].center;
      if (c.fixed || c.link >= 0)
        throw ValidationError("ordered centers must all be free parameters");
      if (k > 0 && !(peaks[k].center.init > peaks[k - 1].center.init))
        throw ValidationError("ordered centers require strictly ascending inits");
    }
  }
}

std::string PeakModelSpec::to_text() const {
  std::ostringstream os;
  os << "# rotspec peak model\n";
  os << "label = " << label << "\n";
  os << "physical = " << (physical ? "true" : "false") << "\n";
  os << "baseline_order = " << baseline_order << "\n";
  os << "ordered_centers = " << (ordered_centers ? "true" : "false") << "\n";
  if (window)
    os << "window = " << fmt(window->first) << " " << fmt(window->second) << "\n";
  else
    os << "window = none\n";
  os << "npeaks = " << peaks.size() << "\n";
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    for (int kind = 0; kind < 4; ++kind) {
      const ParamSpec& p = param_of(peaks[k], kind);
      os << "peak." << k << "." << kind_name(kind) << " = ";
      if (p.link >= 0)
        os << "link " << p.link;
      else if (p.fixed)
        os << "fixed " << fmt(p.init);
      else
        os << "free " << fmt(p.init) << " " << fmt(p.lo) << " " << fmt(p.hi);
      os << "\n";
    }
  }
  return os.str();
}

PeakModelSpec PeakModelSpec::from_text(const std::string& text) {
  PeakModelSpec model;
  model.peaks.clear();
  std::map<std::string, std::pair<std::string, int>> kv;  // key -> (value, line)
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
    if (eq == std::string::npos) throw ParseError("peak model", lineno, "expected key = value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (kv.count(key)) throw ParseError("peak model", lineno, "duplicate key '" + key + "'");
    kv[key] = {value, lineno};
  }

  auto take = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("peak model: missing key '" + key + "'");
    auto res = it->second;
    kv.erase(it);
    return res;
  };
  auto parse_double = [](const std::string& s, int lineno) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ParseError("peak model", lineno, "bad number '" + s + "'");
    }
  };
  auto parse_bool = [](const std::pair<std::string, int>& v) {
    if (v.first == "true") return true;
    if (v.first == "false") return false;
    throw ParseError("peak model", v.second, "expected true or false");
  };

  model.label = take("label").first;
  model.physical = parse_bool(take("physical"));
  {
    const auto v = take("baseline_order");
    model.baseline_order = static_cast<int>(parse_double(v.first, v.second));
  }
  model.ordered_centers = parse_bool(take("ordered_centers"));
  {
    const auto v = take("window");
    if (v.first != "none") {
      std::istringstream ws(v.first);
      double lo = 0, hi = 0;
      if (!(ws >> lo >> hi)) throw ParseError("peak model", v.second, "bad window");
      model.window = {lo, hi};
    }
  }
  const auto npeaks_v = take("npeaks");
  const int npeaks = static_cast<int>(parse_double(npeaks_v.first, npeaks_v.second));
  if (npeaks < 1) throw ParseError("peak model", npeaks_v.second, "npeaks must be >= 1");

  model.peaks.resize(static_cast<std::size_t>(npeaks));
  for (int k = 0; k < npeaks; ++k) {
    for (int kind = 0; kind < 4; ++kind) {
      std::ostringstream key;
      key << "peak." << k << "." << kind_name(kind);
      const auto v = take(key.str());
      std::istringstream ps(v.first);
      std::string mode;
      ps >> mode;
      ParamSpec p;
      if (mode == "link") {
        int target = -1;
        if (!(ps >> target)) throw ParseError("peak model", v.second, "bad link target");
        p = ParamSpec::linked(target);
      } else if (mode == "fixed") {
        std::string num;
        if (!(ps >> num)) throw ParseError("peak model", v.second, "bad fixed value");
        p = ParamSpec::fixed_param(parse_double(num, v.second));
      } else if (mode == "free") {
        std::string a, b, c;
        if (!(ps >> a >> b >> c)) throw ParseError("peak model", v.second, "bad free parameter");
        p = ParamSpec::free_param(parse_double(a, v.second), parse_double(b, v.second),
                                  parse_double(c, v.second));
      } else {
        throw ParseError("peak model", v.second, "expected free/fixed/link");
      }
      switch (kind) {
        case kCenter: model.peaks[static_cast<std::size_t>(k)].center = p; break;
        case kAmplitude: model.peaks[static_cast<std::size_t>(k)].amplitude = p; break;
        case kFwhm: model.peaks[static_cast<std::size_t>(k)].fwhm = p; break;
        default: model.peaks[static_cast<std::size_t>(k)].eta = p; break;
      }
    }
  }
  if (!kv.empty()) {
    const auto& bad = *kv.begin();
    throw ParseError("peak model", bad.second.second, "unknown key '" + bad.first + "'");
  }
  model.validate();
  return model;
}

namespace {

// Internal optimizer coordinates: bounded slots map u -> lo + (hi-lo)(1+sin u)/2,
// baseline slots are unbounded identities.
struct Slot {
  double lo = 0.0, hi = 0.0;
  bool bounded = true;
  double u0 = 0.0;
};

double slot_value(const Slot& s, double u) {
  if (!s.bounded) return u;
  return s.lo + (s.hi - s.lo) * 0.5 * (1.0 + std::sin(u));
}

double slot_deriv(const Slot& s, double u) {
  if (!s.bounded) return 1.0;
  return (s.hi - s.lo) * 0.5 * std::cos(u);
}

Slot make_bounded_slot(double init, double lo, double hi) {
  Slot s;
  s.lo = lo;
  s.hi = hi;
  // Keep the start strictly interior so the transform has slope.
  const double margin = 1e-9 * (hi - lo);
  const double p0 = std::min(std::max(init, lo + margin), hi - margin);
  s.u0 = std::asin(2.0 * (p0 - lo) / (hi - lo) - 1.0);
  return s;
}

// Value of one peak parameter as a sum of slot values.
struct Binding {
  double constant = 0.0;
  std::vector<int> slots;
};

}  // namespace

PseudoVoigtDerivs pseudo_voigt_derivs(double x, double c, double f, double eta) {
  const double d = x - c;
  const double inv_f = 1.0 / f;
  const double g = 2.0 * inv_f * std::sqrt(kLn2 / kPi) *
                   std::exp(-4.0 * kLn2 * d * d * inv_f * inv_f);
  const double u = 4.0 * d * d * inv_f * inv_f;
  const double l = 2.0 / (kPi * f) / (1.0 + u);

  PseudoVoigtDerivs out;
  out.value = (1.0 - eta) * g + eta * l;
  const double dg_dd = g * (-8.0 * kLn2 * d * inv_f * inv_f);
  const double dl_dd = -l / (1.0 + u) * 8.0 * d * inv_f * inv_f;
  out.d_center = -((1.0 - eta) * dg_dd + eta * dl_dd);
  const double dg_df = g * (-inv_f + 8.0 * kLn2 * d * d * inv_f * inv_f * inv_f);
  const double dl_df =
      (2.0 / (kPi * f * f)) * (-1.0 / (1.0 + u) + u / ((1.0 + u) * (1.0 + u)) * 2.0);
  out.d_fwhm = (1.0 - eta) * dg_df + eta * dl_df;
  out.d_eta = l - g;
  return out;
}

FitResult fit_peaks(const Spectrum& spec, const PeakModelSpec& model,
                    const FitOptions& options) {
  model.validate();
  spec.validate();

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (!spec.valid[i]) continue;
    if (model.window &&
        (spec.grid[i] < model.window->first || spec.grid[i] > model.window->second))
      continue;
    xs.push_back(spec.grid[i]);
    ys.push_back(spec.intensity[i]);
  }
  const int n = static_cast<int>(xs.size());
  const int npeaks = static_cast<int>(model.peaks.size());
  const int nbase = model.baseline_order + 1;

  // Slot assembly.
  std::vector<Slot> slots;
  std::vector<std::array<Binding, 4>> bindings(static_cast<std::size_t>(npeaks));
  std::vector<int> center_chain;  // ordered-centers slot chain
  for (int k = 0; k < npeaks; ++k) {
    for (int kind = 0; kind < 4; ++kind) {
      const ParamSpec& p = param_of(model.peaks[static_cast<std::size_t>(k)], kind);
      Binding& b = bindings[static_cast<std::size_t>(k)][static_cast<std::size_t>(kind)];
      if (model.ordered_centers && kind == kCenter) {
        if (k == 0) {
          slots.push_back(make_bounded_slot(p.init, p.lo, p.hi));
          center_chain = {static_cast<int>(slots.size()) - 1};
        } else {
          const ParamSpec& first = model.peaks.front().center;
          const ParamSpec& prev = model.peaks[static_cast<std::size_t>(k - 1)].center;
          const double span = model.peaks.back().center.hi - first.lo;
          slots.push_back(make_bounded_slot(p.init - prev.init, 1e-3, std::max(span, 1.0)));
          center_chain.push_back(static_cast<int>(slots.size()) - 1);
        }
        b.slots = center_chain;
      } else if (p.link >= 0) {
        b = bindings[static_cast<std::size_t>(p.link)][static_cast<std::size_t>(kind)];
      } else if (p.fixed) {
        b.constant = p.init;
      } else {
        slots.push_back(make_bounded_slot(p.init, p.lo, p.hi));
        b.slots = {static_cast<int>(slots.size()) - 1};
      }
    }
  }
  std::vector<int> base_slots;
  for (int j = 0; j < nbase; ++j) {
    Slot s;
    s.bounded = false;
    s.u0 = 0.0;
    slots.push_back(s);
    base_slots.push_back(static_cast<int>(slots.size()) - 1);
  }
  const int n_free = static_cast<int>(slots.size());
  if (n <= n_free)
    throw ValidationError("fit needs more unmasked samples than free parameters (" +
                          std::to_string(n) + " samples, " + std::to_string(n_free) +
                          " parameters)");

  const double xmid = 0.5 * (xs.front() + xs.back());
  const double xhalf = std::max(0.5 * (xs.back() - xs.front()), 1.0);

  auto peak_params = [&](const std::vector<double>& u, int k, double out[4]) {
    for (int kind = 0; kind < 4; ++kind) {
      const Binding& b = bindings[static_cast<std::size_t>(k)][static_cast<std::size_t>(kind)];
      double v = b.constant;
      for (int s : b.slots) v += slot_value(slots[static_cast<std::size_t>(s)],
                                            u[static_cast<std::size_t>(s)]);
      out[kind] = v;
    }
  };

  ResidualFn residual = [&](const std::vector<double>& u, std::vector<double>& r) {
    r.assign(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < npeaks; ++k) {
      double p[4];
      peak_params(u, k, p);
      for (int i = 0; i < n; ++i) {
        const double d = xs[static_cast<std::size_t>(i)] - p[kCenter];
        const double f = p[kFwhm];
        const double g = 2.0 / f * std::sqrt(kLn2 / kPi) *
                         std::exp(-4.0 * kLn2 * d * d / (f * f));
        const double l = 2.0 / (kPi * f) / (1.0 + 4.0 * d * d / (f * f));
        r[static_cast<std::size_t>(i)] +=
            p[kAmplitude] * ((1.0 - p[kEta]) * g + p[kEta] * l);
      }
    }
    for (int i = 0; i < n; ++i) {
      const double t = (xs[static_cast<std::size_t>(i)] - xmid) / xhalf;
      double tb = 1.0, bl = 0.0;
      for (int j = 0; j < nbase; ++j) {
        bl += u[static_cast<std::size_t>(base_slots[static_cast<std::size_t>(j)])] * tb;
        tb *= t;
      }
      r[static_cast<std::size_t>(i)] += bl - ys[static_cast<std::size_t>(i)];
    }
  };

  JacobianFn jacobian = [&](const std::vector<double>& u, std::vector<double>& flat) {
    flat.assign(static_cast<std::size_t>(n) * n_free, 0.0);
    for (int k = 0; k < npeaks; ++k) {
      double p[4];
      peak_params(u, k, p);
      for (int i = 0; i < n; ++i) {
        const PseudoVoigtDerivs d =
            pseudo_voigt_derivs(xs[static_cast<std::size_t>(i)], p[kCenter], p[kFwhm], p[kEta]);
        const double partial[4] = {p[kAmplitude] * d.d_center, d.value,
                                   p[kAmplitude] * d.d_fwhm, p[kAmplitude] * d.d_eta};
        for (int kind = 0; kind < 4; ++kind) {
          const Binding& b =
              bindings[static_cast<std::size_t>(k)][static_cast<std::size_t>(kind)];
          for (int s : b.slots)
            flat[static_cast<std::size_t>(i) * n_free + s] +=
                partial[kind] * slot_deriv(slots[static_cast<std::size_t>(s)],
                                           u[static_cast<std::size_t>(s)]);
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      const double t = (xs[static_cast<std::size_t>(i)] - xmid) / xhalf;
      double tb = 1.0;
      for (int j = 0; j < nbase; ++j) {
        flat[static_cast<std::size_t>(i) * n_free +
             base_slots[static_cast<std::size_t>(j)]] = tb;
        tb *= t;
      }
    }
  };

  std::vector<double> u0;
  for (const Slot& s : slots) u0.push_back(s.u0);
  const LevMarResult lm = levmar(residual, jacobian, u0, n, options.lm);

  FitResult result;
  result.model_label = model.label;
  result.physical = model.physical;
  result.n_samples = n;
  result.n_free = n_free;
  result.chi2 = lm.chi2;
  result.chi2_reduced = n > n_free ? lm.chi2 / (n - n_free) : 0.0;
  result.iterations = lm.iterations;
  result.grad_norm = lm.grad_norm;
  switch (lm.status) {
    case LevMarStatus::converged: result.status = FitStatus::converged; break;
    case LevMarStatus::max_iter: result.status = FitStatus::max_iter; break;
    case LevMarStatus::singular: result.status = FitStatus::singular; break;
  }

  // External parameters: 4 per peak, then baseline. ext = M u-cov M^T with
  // M the chain-rule map through the bound transform.
  const int n_ext = 4 * npeaks + nbase;
  std::vector<double> mmap(static_cast<std::size_t>(n_ext) * n_free, 0.0);
  auto fill_ext = [&](int ext, const Binding& b) {
    for (int s : b.slots)
      mmap[static_cast<std::size_t>(ext) * n_free + s] +=
          slot_deriv(slots[static_cast<std::size_t>(s)], lm.params[static_cast<std::size_t>(s)]);
  };

  result.peaks.resize(static_cast<std::size_t>(npeaks));
  for (int k = 0; k < npeaks; ++k) {
    double p[4];
    peak_params(lm.params, k, p);
    for (int kind = 0; kind < 4; ++kind) {
      const ParamSpec& ps = param_of(model.peaks[static_cast<std::size_t>(k)], kind);
      const Binding& b = bindings[static_cast<std::size_t>(k)][static_cast<std::size_t>(kind)];
      FittedParam fp;
      fp.value = p[kind];
      fp.ext_index = 4 * k + kind;
      fp.fixed = ps.fixed;
      fill_ext(4 * k + kind, b);
      // At-bound detection on the slot actually owning this parameter.
      if (!b.slots.empty()) {
        const int s = b.slots.back();
        const Slot& slot = slots[static_cast<std::size_t>(s)];
        if (slot.bounded) {
          const double sin_u = std::sin(lm.params[static_cast<std::size_t>(s)]);
          fp.at_bound = std::abs(sin_u) > 1.0 - 1e-7;
        }
      }
      FittedPeak& peak = result.peaks[static_cast<std::size_t>(k)];
      switch (kind) {
        case kCenter: peak.center = fp; break;
        case kAmplitude: peak.amplitude = fp; break;
        case kFwhm: peak.fwhm = fp; break;
        default: peak.eta = fp; break;
      }
    }
  }
  result.baseline.resize(static_cast<std::size_t>(nbase));
  for (int j = 0; j < nbase; ++j) {
    FittedParam fp;
    fp.value = lm.params[static_cast<std::size_t>(base_slots[static_cast<std::size_t>(j)])];
    fp.ext_index = 4 * npeaks + j;
    mmap[static_cast<std::size_t>(4 * npeaks + j) * n_free +
         base_slots[static_cast<std::size_t>(j)]] = 1.0;
    result.baseline[static_cast<std::size_t>(j)] = fp;
  }

  result.ext_cov.assign(static_cast<std::size_t>(n_ext) * n_ext, 0.0);
  if (!lm.covariance.empty()) {
    for (int a = 0; a < n_ext; ++a) {
      for (int b = 0; b < n_ext; ++b) {
        double acc = 0.0;
        for (int s = 0; s < n_free; ++s) {
          const double ma = mmap[static_cast<std::size_t>(a) * n_free + s];
          if (ma == 0.0) continue;
          for (int t = 0; t < n_free; ++t) {
            const double mb = mmap[static_cast<std::size_t>(b) * n_free + t];
            if (mb == 0.0) continue;
            acc += ma * lm.covariance[static_cast<std::size_t>(s) * n_free + t] * mb;
          }
        }
        result.ext_cov[static_cast<std::size_t>(a) * n_ext + b] = acc;
      }
    }
  }
  auto sigma_of = [&](int ext) {
    const double v = result.ext_cov[static_cast<std::size_t>(ext) * n_ext + ext];
    return v > 0.0 ? std::sqrt(v) : 0.0;
  };
  for (auto& peak : result.peaks) {
    peak.center.sigma = sigma_of(peak.center.ext_index);
    peak.amplitude.sigma = sigma_of(peak.amplitude.ext_index);
    peak.fwhm.sigma = sigma_of(peak.fwhm.ext_index);
    peak.eta.sigma = sigma_of(peak.eta.ext_index);
  }
  for (auto& b : result.baseline) b.sigma = sigma_of(b.ext_index);

  // Localization and overlap checks.
  const double mean_dx = n > 1 ? (xs.back() - xs.front()) / (n - 1) : 1.0;
  bool any_unresolved = false;
  for (auto& peak : result.peaks) {
    const double halfwidth = std::max(peak.fwhm.value, 2.0 * mean_dx);
    int nearby = 0;
    for (double x : xs)
      if (std::abs(x - peak.center.value) <= halfwidth) ++nearby;
    if (nearby < options.min_local_points) {
      peak.unresolved = true;
      any_unresolved = true;
    }
  }
  for (std::size_t a = 0; a < result.peaks.size(); ++a) {
    for (std::size_t b = a + 1; b < result.peaks.size(); ++b) {
      const double sep = std::abs(result.peaks[a].center.value - result.peaks[b].center.value);
      const double width = std::max(result.peaks[a].fwhm.value, result.peaks[b].fwhm.value);
      if (sep < options.overlap_fraction * width) {
        result.peaks[a].unresolved = result.peaks[b].unresolved = true;
        any_unresolved = true;
      }
    }
  }
  if (any_unresolved && result.status != FitStatus::singular)
    result.status = FitStatus::unresolved;

  // Canonical peak order: ascending center; the covariance follows.
  std::vector<std::size_t> order(result.peaks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.peaks[a].center.value < result.peaks[b].center.value;
  });
  std::vector<int> ext_perm(static_cast<std::size_t>(n_ext));
  for (std::size_t newk = 0; newk < order.size(); ++newk)
    for (int kind = 0; kind < 4; ++kind)
      ext_perm[4 * newk + static_cast<std::size_t>(kind)] =
          4 * static_cast<int>(order[newk]) + kind;
  for (int j = 0; j < nbase; ++j)
    ext_perm[static_cast<std::size_t>(4 * npeaks + j)] = 4 * npeaks + j;

  std::vector<FittedPeak> sorted;
  sorted.reserve(result.peaks.size());
  for (std::size_t newk = 0; newk < order.size(); ++newk) {
    FittedPeak p = result.peaks[order[newk]];
    p.center.ext_index = static_cast<int>(4 * newk) + kCenter;
    p.amplitude.ext_index = static_cast<int>(4 * newk) + kAmplitude;
    p.fwhm.ext_index = static_cast<int>(4 * newk) + kFwhm;
    p.eta.ext_index = static_cast<int>(4 * newk) + kEta;
    sorted.push_back(std::move(p));
  }
  result.peaks = std::move(sorted);
  std::vector<double> cov_sorted(static_cast<std::size_t>(n_ext) * n_ext, 0.0);
  for (int a = 0; a < n_ext; ++a)
    for (int b = 0; b < n_ext; ++b)
      cov_sorted[static_cast<std::size_t>(a) * n_ext + b] =
          result.ext_cov[static_cast<std::size_t>(ext_perm[static_cast<std::size_t>(a)]) *
                             n_ext +
                         ext_perm[static_cast<std::size_t>(b)]];
  result.ext_cov = std::move(cov_sorted);

  return result;
}

std::vector<std::string> template_names() {
  return {"zero_roton_single", "S0_0_triplet", "S0_1_phenomenological",
          "zero_roton_D2II_quad"};
}

PeakModelSpec template_model(const std::string& name) {
  PeakModelSpec m;
  m.label = name;
  if (name == "zero_roton_single") {
    PeakSpec p;
    p.center = ParamSpec::free_param(60.0, 10.0, 400.0);
    p.amplitude = ParamSpec::free_param(1.0, 0.0, 1e9);
    p.fwhm = ParamSpec::free_param(3.0, 0.3, 40.0);
    p.eta = ParamSpec::free_param(0.5, 0.0, 1.0);
    m.peaks = {p};
    return m;
  }
  if (name == "S0_0_triplet") {
    for (int k = 0; k < 3; ++k) {
      PeakSpec p;
      p.center = ParamSpec::free_param(150.0 + 40.0 * k, 20.0, 1150.0);
      p.amplitude = ParamSpec::free_param(1.0, 0.0, 1e9);
      p.fwhm = ParamSpec::free_param(3.0, 0.3, 40.0);
      p.eta = k == 0 ? ParamSpec::free_param(0.5, 0.0, 1.0) : ParamSpec::linked(0);
      m.peaks.push_back(p);
    }
    return m;
  }
  if (name == "S0_1_phenomenological") {
    // Components of this band have no level-pair meaning; the fit is kept
    // out of physics reports.
    m.physical = false;
    for (int k = 0; k < 3; ++k) {
      PeakSpec p;
      p.center = ParamSpec::free_param(450.0 + 60.0 * k, 20.0, 1150.0);
      p.amplitude = ParamSpec::free_param(1.0, 0.0, 1e9);
      p.fwhm = k == 0 ? ParamSpec::free_param(6.0, 0.3, 80.0) : ParamSpec::linked(0);
      p.eta = k == 0 ? ParamSpec::free_param(0.5, 0.0, 1.0) : ParamSpec::linked(0);
      m.peaks.push_back(p);
    }
    return m;
  }
  if (name == "zero_roton_D2II_quad") {
    m.ordered_centers = true;
    for (int k = 0; k < 4; ++k) {
      PeakSpec p;
      p.center = ParamSpec::free_param(40.0 + 12.0 * k, 10.0, 400.0);
      p.amplitude = ParamSpec::free_param(1.0, 0.0, 1e9);
      p.fwhm = k == 0 ? ParamSpec::free_param(3.0, 0.3, 40.0) : ParamSpec::linked(0);
      p.eta = k == 0 ? ParamSpec::free_param(0.5, 0.0, 1.0) : ParamSpec::linked(0);
      m.peaks.push_back(p);
    }
    return m;
  }
  std::string names;
  for (const auto& n : template_names()) names += (names.empty() ? "" : ", ") + n;
  throw UsageError("unknown template '" + name + "'; available: " + names);
}

void seed_from_sticks(PeakModelSpec& model, const std::vector<Transition>& sticks,
                      Branch branch, int j_label, const PeakProfile& profile) {
  profile.validate();
  std::vector<const Transition*> pool;
  double top = 0.0;
  for (const auto& t : sticks) {
    if (t.branch != branch || t.weight <= 0.0 || t.shift_cm1 <= 0.0) continue;
    if (j_label >= 0 && t.j_label != j_label) continue;
    pool.push_back(&t);
    top = std::max(top, t.weight);
  }
  // Sticks at a negligible fraction of the band cannot anchor a peak.
  std::erase_if(pool, [&](const Transition* t) { return t->weight < 1e-6 * top; });
  const std::size_t npeaks = model.peaks.size();
  if (pool.size() < npeaks)
    throw ValidationError("only " + std::to_string(pool.size()) +
                          " predicted sticks available to seed " + std::to_string(npeaks) +
                          " peaks of template " + model.label);
  std::stable_sort(pool.begin(), pool.end(),
                   [](const Transition* a, const Transition* b) { return a->weight > b->weight; });
  pool.resize(npeaks);
  std::stable_sort(pool.begin(), pool.end(), [](const Transition* a, const Transition* b) {
    return a->shift_cm1 < b->shift_cm1;
  });

  const double w = std::max(5.0 * profile.fwhm_cm1, 10.0);
  double lo_edge = pool.front()->shift_cm1, hi_edge = pool.back()->shift_cm1;
  for (std::size_t k = 0; k < npeaks; ++k) {
    PeakSpec& p = model.peaks[k];
    const double c = pool[k]->shift_cm1;
    const double a = pool[k]->weight;
    if (!p.center.fixed && p.center.link < 0)
      p.center = ParamSpec::free_param(c, c - w, c + w);
    if (!p.amplitude.fixed && p.amplitude.link < 0)
      p.amplitude = ParamSpec::free_param(a, 0.0, std::max(100.0 * a, 1.0));
    if (!p.fwhm.fixed && p.fwhm.link < 0)
      p.fwhm = ParamSpec::free_param(profile.fwhm_cm1, profile.fwhm_cm1 / 4.0,
                                     profile.fwhm_cm1 * 6.0);
    if (!p.eta.fixed && p.eta.link < 0)
      p.eta = ParamSpec::free_param(profile.eta, 0.0, 1.0);
  }
  model.window = {lo_edge - 10.0 * profile.fwhm_cm1, hi_edge + 10.0 * profile.fwhm_cm1};
  model.validate();
}

SplittingReport splitting_report(const FitResult& fit) {
  if (fit.model_label != "S0_0_triplet")
    throw UsageError("splitting report requires an S0_0_triplet fit, got " + fit.model_label);
  if (fit.status == FitStatus::max_iter || fit.status == FitStatus::singular)
    throw ConvergenceError(std::string("splitting report refused: fit status = ") +
                           fit_status_name(fit.status));
  if (fit.peaks.size() != 3) throw ValidationError("triplet fit must have 3 peaks");

  auto diff_sigma = [&](const FittedParam& a, const FittedParam& b) {
    const double var = fit.covariance(a.ext_index, a.ext_index) +
                       fit.covariance(b.ext_index, b.ext_index) -
                       2.0 * fit.covariance(a.ext_index, b.ext_index);
    return var > 0.0 ? std::sqrt(var) : 0.0;
  };
  const FittedParam& c_low = fit.peaks[0].center;   // |m| = 2 for positive V2
  const FittedParam& c_mid = fit.peaks[1].center;   // |m| = 1
  const FittedParam& c_high = fit.peaks[2].center;  // |m| = 0

  SplittingReport rep;
  rep.d02 = c_high.value - c_low.value;
  rep.d02_sigma = diff_sigma(c_high, c_low);
  rep.d01 = c_high.value - c_mid.value;
  rep.d01_sigma = diff_sigma(c_high, c_mid);
  rep.d12 = c_mid.value - c_low.value;
  rep.d12_sigma = diff_sigma(c_mid, c_low);
  return rep;
}

}  // namespace rotspec
