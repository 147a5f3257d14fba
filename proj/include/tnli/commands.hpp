#pragma once

// CLI subcommands as library functions: each returns the process exit code
// (0 ok, 2 I/O, 3 validation, 4 numerical) and writes to the given streams.

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tnli/config.hpp"
#include "tnli/noise_budget.hpp"
#include "tnli/spectrum.hpp"

namespace tnli::cli {

enum ExitCode : int { kOk = 0, kIoError = 2, kValidationError = 3, kNumericalError = 4 };

struct CommonOptions {
  std::string config = "paper_default";
  std::vector<std::string> overrides;  // key=value
};

struct BudgetOptions : CommonOptions {
  std::optional<model::Topology> topology;  // both when unset
  std::string json_path;
  bool json_stdout = false;
};

struct VarianceOptions : CommonOptions {
  bool json_stdout = false;
};

struct SweepOptions : CommonOptions {
  std::string param;
  std::string from;
  std::string to;
  std::size_t steps = 0;
  bool log = false;
  std::size_t jobs = 1;
  std::string out_path;  // stdout when empty
};

struct SpectrumOptions : CommonOptions {
  std::optional<std::uint64_t> seed;
  std::string out_prefix = "spectrum";
  std::size_t jobs = 1;
};

enum class Figure { Fig2, Fig3 };

struct ReproduceOptions : CommonOptions {
  Figure figure = Figure::Fig3;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::size_t jobs = 1;
  std::string timestamp;  // ISO-8601; empty -> SOURCE_DATE_EPOCH or wall clock
};

int cmd_budget(const BudgetOptions& opts, std::ostream& out, std::ostream& err);
int cmd_variance(const VarianceOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err);
int cmd_spectrum(const SpectrumOptions& opts, std::ostream& out, std::ostream& err);
int cmd_reproduce(const ReproduceOptions& opts, std::ostream& out, std::ostream& err);

// Building blocks shared with the tests.

config::RunConfig resolve_config(const CommonOptions& opts);
/// Explicit seed, else TNLI_SEED, else the config's seed.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& explicit_seed,
                           const config::RunConfig& config);
nlohmann::json budget_to_json(const budget::NoiseBudget& b);

struct DriveResult {
  double drive_volts;
  spectrum::SnrEstimate squeezed;
  spectrum::SnrEstimate coherent;
  double floor_squeezed_db;
  double floor_coherent_db;
  double analytic_snr_squeezed_db;  // in the analyzer noise bandwidth
  double analytic_snr_coherent_db;
};

struct FigureResult {
  Figure figure;
  config::RunConfig config;  // squeezed configuration used
  std::uint64_t seed;
  std::vector<DriveResult> drives;
  spectrum::SpectrumTrace floor_squeezed;
  spectrum::SpectrumTrace floor_coherent;
  std::vector<spectrum::SpectrumTrace> squeezed_traces;
  std::vector<spectrum::SpectrumTrace> coherent_traces;
  double analytic_floor_db;  // 10 log10 of the engine variance
};

inline constexpr std::array<double, 5> kFigureDriveVolts{0.040, 0.075, 0.110, 0.145, 0.180};

/// Runs the figure recipe in memory (no files).
FigureResult reproduce_figure(Figure figure, const config::RunConfig& base, std::uint64_t seed,
                              std::size_t jobs = 1);

std::string_view to_string(Figure f);
Figure parse_figure(std::string_view text);

}  // namespace tnli::cli
