#ifndef ROTSPEC_TEXTIO_HPP
#define ROTSPEC_TEXTIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rotspec/calibrate.hpp"
#include "rotspec/fitkit.hpp"
#include "rotspec/lineshape.hpp"

namespace rotspec {

// Fixed 9-significant-digit formatting used by every emitter, so repeated
// runs are byte-identical and reports diff cleanly.
std::string fmt_g9(double v);

std::uint64_t fnv1a64(const std::string& text);
std::string hash_hex(const std::string& text);

// Writes via a temporary file and rename; never leaves partial files.
void write_text_atomic(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

// Structured report: [section] headers and key = value lines with stable
// ordering; numbers go through fmt_g9.
class Report {
public:
  void section(const std::string& name);
  void kv(const std::string& key, const std::string& value);
  void kv(const std::string& key, const char* value);
  void kv(const std::string& key, double value);
  void kv(const std::string& key, int value);
  void kv(const std::string& key, std::uint64_t value);
  void kv(const std::string& key, bool value);
  void raw(const std::string& line);
  const std::string& text() const { return text_; }

private:
  std::string text_;
};

// --- spectra -----------------------------------------------------------
// Two-column text with a commented metadata header; see README for the key
// list. Loading tolerates comments and blank lines, re-sorts unsorted grids
// (flagged in metadata) and rejects files with fewer than 8 samples.
std::string spectrum_to_text(const Spectrum& spec);
Spectrum spectrum_from_text(const std::string& text, const std::string& where);
void save_spectrum(const std::string& path, const Spectrum& spec);
Spectrum load_spectrum(const std::string& path);

// --- stick lists -----------------------------------------------------------
// Delimited text: shift_cm1 weight branch J |m| J' |m'|.
std::string sticks_to_text(const std::vector<Transition>& sticks);

// --- frequency datasets --------------------------------------------------
// Delimited text with a header row:
//   p_gpa t_k label phase site freq_cm1 sigma_cm1
// site is an integer or "-".
FrequencyDataset dataset_from_text(const std::string& text, const std::string& where);
FrequencyDataset load_dataset(const std::string& path);

// --- report builders -------------------------------------------------------
void report_level_diagram(Report& rep, const LevelDiagram& diagram, const Isotope& iso,
                          const CrystalField& field, const std::string& method);
void report_fit(Report& rep, const FitResult& fit);
void report_field_fit(Report& rep, const FieldFitResult& fit);

void write_manifest(const std::string& path, const std::string& command,
                    const std::string& args, const std::string& config_hash,
                    std::uint64_t seed);

}  // namespace rotspec

#endif
