#pragma once

#include <ostream>

#include <json.hpp>

#include "tnli/spectrum.hpp"

namespace tnli::spectrum {

/// '#'-prefixed header block (settings, seed) followed by freq_hz,power_db_rel_snl rows.
void write_trace_csv(const SpectrumTrace& trace, std::ostream& out);
nlohmann::json trace_to_json(const SpectrumTrace& trace);
nlohmann::json settings_to_json(const AnalyzerSettings& settings);

}  // namespace tnli::spectrum
