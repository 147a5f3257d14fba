#include "tnli/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <span>
#include <sstream>

#include <json.hpp>

#include "tnli/constants.hpp"

namespace tnli::config {
namespace {

struct Unit {
  std::string_view suffix;
  double scale;
};

// First entry of each table is the canonical SI unit.
constexpr std::array kLengthUnits{Unit{"m", 1.0},    Unit{"mm", 1e-3},  Unit{"um", 1e-6},
                                  Unit{"nm", 1e-9},  Unit{"pm", 1e-12}, Unit{"fm", 1e-15},
                                  Unit{"am", 1e-18}, Unit{"zm", 1e-21}};
constexpr std::array kPowerUnits{Unit{"W", 1.0}, Unit{"mW", 1e-3}, Unit{"uW", 1e-6},
                                 Unit{"nW", 1e-9}, Unit{"pW", 1e-12}};
constexpr std::array kFrequencyUnits{Unit{"Hz", 1.0}, Unit{"kHz", 1e3}, Unit{"MHz", 1e6},
                                     Unit{"GHz", 1e9}};
constexpr std::array kTimeUnits{Unit{"s", 1.0}, Unit{"ms", 1e-3}, Unit{"us", 1e-6},
                                Unit{"ns", 1e-9}};
constexpr std::array kAngleUnits{Unit{"rad", 1.0}, Unit{"mrad", 1e-3}, Unit{"urad", 1e-6},
                                 Unit{"deg", constants::pi / 180.0}};
constexpr std::array kVoltageUnits{Unit{"V", 1.0}, Unit{"mV", 1e-3}, Unit{"uV", 1e-6}};
constexpr std::array kStiffnessUnits{Unit{"N/m", 1.0}, Unit{"mN/m", 1e-3}};
constexpr std::array kLengthPerVoltUnits{Unit{"m/V", 1.0},     Unit{"nm/V", 1e-9},
                                         Unit{"pm/V", 1e-12},  Unit{"fm/V", 1e-15},
                                         Unit{"pm/mV", 1e-9},  Unit{"fm/mV", 1e-12}};

std::span<const Unit> units_for(Dimension dim) {
  switch (dim) {
    case Dimension::Length: return kLengthUnits;
    case Dimension::Power: return kPowerUnits;
    case Dimension::Frequency: return kFrequencyUnits;
    case Dimension::Time: return kTimeUnits;
    case Dimension::Angle: return kAngleUnits;
    case Dimension::Voltage: return kVoltageUnits;
    case Dimension::Stiffness: return kStiffnessUnits;
    case Dimension::LengthPerVolt: return kLengthPerVoltUnits;
    case Dimension::None:
    case Dimension::Count: return {};
  }
  return {};
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string unit_list(Dimension dim) {
  std::string out;
  for (const auto& u : units_for(dim)) {
    if (!out.empty()) out += ", ";
    out += u.suffix;
  }
  return out;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

enum class Kind { Real, Integer, Seed, Topology, GainFromR };

struct Field {
  std::string_view key;
  Kind kind;
  Dimension dim;
  std::function<double&(RunConfig&)> ref;  // Real fields only
};

const std::vector<Field>& schema() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;
    auto real = [&f](std::string_view key, Dimension dim, std::function<double&(RunConfig&)> ref) {
      f.push_back({key, Kind::Real, dim, std::move(ref)});
    };
    f.push_back({"schema_version", Kind::Integer, Dimension::Count, {}});
    f.push_back({"seed", Kind::Seed, Dimension::Count, {}});
    real("interferometer.gain", Dimension::None, [](RunConfig& c) -> double& { return c.optics.gain; });
    f.push_back({"interferometer.r", Kind::GainFromR, Dimension::None, {}});
    real("interferometer.eta", Dimension::None, [](RunConfig& c) -> double& { return c.optics.eta; });
    real("interferometer.theta_p", Dimension::Angle, [](RunConfig& c) -> double& { return c.optics.theta_p; });
    real("interferometer.theta_c", Dimension::Angle, [](RunConfig& c) -> double& { return c.optics.theta_c; });
    real("interferometer.phi", Dimension::Angle, [](RunConfig& c) -> double& { return c.optics.phi; });
    f.push_back({"interferometer.topology", Kind::Topology, Dimension::None, {}});
    real("interferometer.cantilever_reflectivity", Dimension::None,
         [](RunConfig& c) -> double& { return c.optics.cantilever_reflectivity; });
    real("optics.lambda", Dimension::Length, [](RunConfig& c) -> double& { return c.optics.wavelength; });
    real("optics.p_probe", Dimension::Power, [](RunConfig& c) -> double& { return c.optics.p_probe; });
    real("optics.p_conj", Dimension::Power, [](RunConfig& c) -> double& { return c.optics.p_conj; });
    real("optics.p_lo_probe", Dimension::Power, [](RunConfig& c) -> double& { return c.optics.p_lo_probe; });
    real("optics.p_lo_conj", Dimension::Power, [](RunConfig& c) -> double& { return c.optics.p_lo_conj; });
    real("optics.delta_f", Dimension::Frequency, [](RunConfig& c) -> double& { return c.optics.delta_f; });
    real("cantilever.k", Dimension::Stiffness, [](RunConfig& c) -> double& { return c.cantilever.k; });
    real("cantilever.q", Dimension::None, [](RunConfig& c) -> double& { return c.cantilever.q; });
    real("cantilever.f0", Dimension::Frequency, [](RunConfig& c) -> double& { return c.cantilever.f0; });
    real("cantilever.drive_freq", Dimension::Frequency, [](RunConfig& c) -> double& { return c.cantilever.drive_freq; });
    real("cantilever.drive_amplitude", Dimension::Voltage,
         [](RunConfig& c) -> double& { return c.cantilever.drive_amplitude_volts; });
    real("cantilever.volts_to_meters", Dimension::LengthPerVolt,
         [](RunConfig& c) -> double& { return c.cantilever.volts_to_meters; });
    real("analyzer.rbw", Dimension::Frequency, [](RunConfig& c) -> double& { return c.analyzer.rbw; });
    real("analyzer.vbw", Dimension::Frequency, [](RunConfig& c) -> double& { return c.analyzer.vbw; });
    real("analyzer.sweep_time", Dimension::Time, [](RunConfig& c) -> double& { return c.analyzer.sweep_time; });
    f.push_back({"analyzer.averages", Kind::Integer, Dimension::Count, {}});
    real("analyzer.center", Dimension::Frequency, [](RunConfig& c) -> double& { return c.analyzer.center; });
    real("analyzer.span", Dimension::Frequency, [](RunConfig& c) -> double& { return c.analyzer.span; });
    real("synthesis.sample_rate", Dimension::Frequency,
         [](RunConfig& c) -> double& { return c.synthesis.sample_rate; });
    real("synthesis.record_duration", Dimension::Time,
         [](RunConfig& c) -> double& { return c.synthesis.record_duration; });
    return f;
  }();
  return fields;
}

const Field* find_field(std::string_view key) {
  for (const auto& f : schema()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

std::string valid_keys() {
  std::string out;
  for (const auto& f : schema()) {
    if (!out.empty()) out += ", ";
    out += f.key;
  }
  return out;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(std::string(key), "expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return v;
}

void assign(RunConfig& config, const Field& field, std::string_view value, bool unit_required) {
  const std::string key(field.key);
  switch (field.kind) {
    case Kind::Integer: {
      const auto v = parse_unsigned(key, value);
      if (field.key == "schema_version") {
        config.schema_version = static_cast<int>(v);
      } else {
        config.analyzer.averages = static_cast<std::size_t>(v);
      }
      return;
    }
    case Kind::Seed:
      config.seed = parse_unsigned(key, value);
      return;
    case Kind::Topology:
      try {
        config.optics.topology = model::parse_topology(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(key, e.what());
      }
      return;
    case Kind::GainFromR: {
      double r = 0.0;
      try {
        r = parse_quantity(value, Dimension::None, unit_required);
      } catch (const ConfigError& e) {
        throw ConfigError(key, e.what());
      }
      if (!(r >= 0.0)) throw ConfigError(key, "must be >= 0");
      config.optics.gain = model::r_to_gain(r);
      return;
    }
    case Kind::Real:
      try {
        field.ref(config) = parse_quantity(value, field.dim, unit_required);
      } catch (const ConfigError& e) {
        throw ConfigError(key, e.what());
      }
      return;
  }
}

}  // namespace

void RunConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    throw ConfigError("schema_version", "unsupported version " + std::to_string(schema_version) +
                                            " (expected " + std::to_string(kSchemaVersion) + ")");
  }
  try {
    optics.validate();
    cantilever.validate();
    analyzer.validate();
    synthesis.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    throw ConfigError(colon == std::string::npos ? "" : msg.substr(0, colon),
                      colon == std::string::npos ? msg : std::string(trim(msg.substr(colon + 1))));
  }
}

double parse_quantity(std::string_view text, Dimension dim, bool unit_required) {
  text = trim(text);
  double number = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, number);
  if (res.ec != std::errc() || !std::isfinite(number)) {
    throw ConfigError("", "expected a number, got '" + std::string(text) + "'");
  }
  const std::string_view unit = trim(std::string_view(res.ptr, static_cast<std::size_t>(end - res.ptr)));
  if (dim == Dimension::None || dim == Dimension::Count) {
    if (!unit.empty()) throw ConfigError("", "dimensionless value takes no unit, got '" + std::string(unit) + "'");
    return number;
  }
  if (unit.empty()) {
    if (!unit_required) return number;
    throw ConfigError("", "missing unit (expected one of " + unit_list(dim) + ")");
  }
  for (const auto& u : units_for(dim)) {
    if (u.suffix == unit) return number * u.scale;
  }
  throw ConfigError("", "unknown unit '" + std::string(unit) + "' (expected one of " + unit_list(dim) + ")");
}

std::string_view si_unit(Dimension dim) {
  const auto units = units_for(dim);
  return units.empty() ? std::string_view{} : units.front().suffix;
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::map<std::string, std::size_t> seen;
  std::string section;
  std::size_t line_no = 0;
  bool saw_version = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where, "expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    const Field* field = find_field(key);
    if (field == nullptr) throw ConfigError(key, "unknown key (" + where + "); valid keys: " + valid_keys());
    if (auto [it, inserted] = seen.emplace(key, line_no); !inserted) {
      throw ConfigError(key, "duplicate key (lines " + std::to_string(it->second) + " and " +
                                 std::to_string(line_no) + ")");
    }
    if (value.empty()) throw ConfigError(key, "missing value");
    assign(config, *field, value, true);
    if (key == "schema_version") saw_version = true;
  }
  if (seen.count("interferometer.gain") != 0 && seen.count("interferometer.r") != 0) {
    throw ConfigError("interferometer.r", "set either interferometer.gain or interferometer.r, not both");
  }
  if (!saw_version) throw ConfigError("schema_version", "mandatory key is missing");
  config.validate();
  return config;
}

RunConfig load_config(const std::string& source) {
  if (source == "paper_default") return parse_config(bundled_paper_default());
  std::ifstream in(source, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + source + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json manifest;
    try {
      manifest = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("", std::string("malformed manifest JSON: ") + e.what());
    }
    if (!manifest.contains("config_snapshot") || !manifest["config_snapshot"].is_string()) {
      throw ConfigError("config_snapshot", "manifest has no config snapshot");
    }
    return parse_config(manifest["config_snapshot"].get<std::string>());
  }
  return parse_config(text);
}

std::string to_text(const RunConfig& config) {
  RunConfig copy = config;
  std::ostringstream out;
  for (const auto& f : schema()) {
    switch (f.kind) {
      case Kind::GainFromR:
        continue;
      case Kind::Integer:
        out << f.key << " = "
            << (f.key == "schema_version" ? static_cast<std::uint64_t>(config.schema_version)
                                          : static_cast<std::uint64_t>(config.analyzer.averages))
            << '\n';
        break;
      case Kind::Seed:
        out << f.key << " = " << config.seed << '\n';
        break;
      case Kind::Topology:
        out << f.key << " = " << model::to_string(config.optics.topology) << '\n';
        break;
      case Kind::Real: {
        out << f.key << " = " << format_double(f.ref(copy));
        if (const auto unit = si_unit(f.dim); !unit.empty()) out << ' ' << unit;
        out << '\n';
        break;
      }
    }
  }
  return out.str();
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError(std::string(assignment), "override must look like key=value");
  }
  const std::string key(trim(assignment.substr(0, eq)));
  const std::string_view value = trim(assignment.substr(eq + 1));
  const Field* field = find_field(key);
  if (field == nullptr) throw ConfigError(key, "unknown key; valid keys: " + valid_keys());
  if (value.empty()) throw ConfigError(key, "missing value");
  assign(config, *field, value, true);
  config.validate();
}

std::vector<std::string> field_names() {
  std::vector<std::string> out;
  for (const auto& f : schema()) out.emplace_back(f.key);
  return out;
}

std::vector<std::string> numeric_field_names() {
  std::vector<std::string> out;
  for (const auto& f : schema()) {
    if (f.kind == Kind::Real || f.kind == Kind::GainFromR || f.key == "analyzer.averages") {
      out.emplace_back(f.key);
    }
  }
  return out;
}

Dimension field_dimension(std::string_view key) {
  const Field* f = find_field(key);
  if (f == nullptr) throw ConfigError(std::string(key), "unknown key");
  return f->dim;
}

double get_numeric(const RunConfig& config, std::string_view key) {
  const Field* f = find_field(key);
  if (f == nullptr) throw ConfigError(std::string(key), "unknown key");
  RunConfig copy = config;
  switch (f->kind) {
    case Kind::Real: return f->ref(copy);
    case Kind::GainFromR: return config.optics.squeeze_r();
    case Kind::Integer:
      if (key == "analyzer.averages") return static_cast<double>(config.analyzer.averages);
      break;
    default: break;
  }
  throw ConfigError(std::string(key), "not a numeric field");
}

void set_numeric(RunConfig& config, std::string_view key, double value_si) {
  const Field* f = find_field(key);
  if (f == nullptr) throw ConfigError(std::string(key), "unknown key; valid keys: " + valid_keys());
  switch (f->kind) {
    case Kind::Real:
      f->ref(config) = value_si;
      break;
    case Kind::GainFromR:
      if (!(value_si >= 0.0)) throw ConfigError(std::string(key), "must be >= 0");
      config.optics.gain = model::r_to_gain(value_si);
      break;
    case Kind::Integer:
      if (key == "analyzer.averages" && value_si >= 1.0) {
        config.analyzer.averages = static_cast<std::size_t>(std::llround(value_si));
        break;
      }
      [[fallthrough]];
    default:
      throw ConfigError(std::string(key), "not a sweepable numeric field");
  }
  config.validate();
}

}  // namespace tnli::config
