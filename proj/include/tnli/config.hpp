#pragma once

// Run configuration: a key/value text file with dotted section names and
// explicit unit suffixes, e.g.
//
//   schema_version = 1
//   optics.lambda = 795 nm
//   [optics]
//   p_lo_probe = 110 uW
//
// Values are normalised to SI on load. Unknown keys, duplicate keys, missing
// units and out-of-range values are errors.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tnli/spectrum.hpp"
#include "tnli/tnli_model.hpp"

namespace tnli::config {

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
  int schema_version = kSchemaVersion;
  model::TnliConfig optics;
  model::CantileverParams cantilever;
  spectrum::AnalyzerSettings analyzer;
  spectrum::SynthesisSettings synthesis;
  std::uint64_t seed = 737;

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// Schema or value error; `field()` names the offending key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Dimension { None, Length, Power, Frequency, Time, Angle, Voltage, Stiffness, LengthPerVolt, Count };

/// Parses "<number> <unit>" into SI for the given dimension. When
/// `unit_required` is false a bare number is taken as SI.
double parse_quantity(std::string_view text, Dimension dim, bool unit_required = true);

/// Canonical SI unit suffix written to snapshots ("m", "W", "Hz", ...).
std::string_view si_unit(Dimension dim);

RunConfig parse_config(std::string_view text);

/// Path, the name "paper_default", or a run manifest (JSON) carrying a config snapshot.
RunConfig load_config(const std::string& source);

/// Canonical snapshot; parse_config(to_text(c)) == c exactly.
std::string to_text(const RunConfig& config);

/// Applies "key=value" (value in file syntax).
void apply_override(RunConfig& config, std::string_view assignment);

std::vector<std::string> field_names();
/// Fields that can be swept (numeric, including integers).
std::vector<std::string> numeric_field_names();
Dimension field_dimension(std::string_view key);
double get_numeric(const RunConfig& config, std::string_view key);
void set_numeric(RunConfig& config, std::string_view key, double value_si);

std::string_view bundled_paper_default();

}  // namespace tnli::config
