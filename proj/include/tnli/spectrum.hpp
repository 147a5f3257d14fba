#pragma once

// Monte Carlo photocurrent synthesis and swept-analyzer emulation.
//
// Units: a photocurrent sample is expressed in shot-noise units, so white
// vacuum noise has per-sample variance 1. Trace power is normalised the same
// way (|X_k|^2 / sum w^2), so a white record of variance V shows a flat trace
// at V, i.e. 10 log10(V) dB relative to the SNL.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tnli/tnli_model.hpp"

namespace tnli::spectrum {

struct AnalyzerSettings {
  double rbw = 10e3;        // Hz
  double vbw = 30.0;        // Hz
  double sweep_time = 0.5;  // s
  std::size_t averages = 20;
  double center = 737e3;    // Hz
  double span = 200e3;      // Hz; <= 0 keeps the full band

  void validate() const;
  bool operator==(const AnalyzerSettings&) const = default;
};

struct SynthesisSettings {
  double sample_rate = 2.56e6;      // Hz
  double record_duration = 0.05;    // s per averaged draw

  void validate() const;
  bool operator==(const SynthesisSettings&) const = default;
};

struct PhotocurrentRecord {
  std::vector<double> samples;
  double sample_rate;
  std::uint64_t seed;
};

struct SpectrumTrace {
  std::vector<double> freq_hz;
  std::vector<double> power_lin;  // relative to SNL, linear
  std::vector<double> power_db;   // relative to SNL, dB
  AnalyzerSettings settings;
  double sample_rate = 0.0;
  double bin_width = 0.0;         // Hz
  double enbw_bins = 1.0;         // window noise bandwidth in bins
  std::size_t segment_length = 0;
  std::size_t segments = 0;       // per draw
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

struct SampleOptions {
  /// Optional additive technical noise, one-sided density in trace units as a
  /// function of frequency (Hz). Realised by spectral shaping of an
  /// independent white stream.
  std::function<double(double)> technical_psd;
};

/// Minimum record length accepted by sample_photocurrent.
inline constexpr std::size_t kMinRecordSamples = std::size_t{1} << 14;

/// White Gaussian quadrature noise drawn from the scene covariance (Cholesky
/// of the full 2n x 2n matrix, projected on the homodyne combination) plus the
/// cantilever drive tone. Deterministic in `seed`.
PhotocurrentRecord sample_photocurrent(const model::Scene& scene,
                                       const model::CantileverParams& cantilever,
                                       double sample_rate, double duration, std::uint64_t seed,
                                       const SampleOptions& options = {});

/// Per-quadrature samples q = mu + L z of every mode, row-major [2n][count].
std::vector<double> sample_quadratures(const gaussian::GaussianState& state, std::size_t count,
                                       std::uint64_t seed);

/// Tone amplitude in per-sample shot-noise units for a mean response dm (per sqrt(Hz)).
double tone_amplitude(double mean_response, double sample_rate);

/// Welch estimate: periodic Hann window, 50 % overlap, segment = sample_rate / rbw.
SpectrumTrace psd_estimate(const PhotocurrentRecord& record, double rbw);

/// Averages the draws, crops to center +/- span/2 and applies the video filter.
SpectrumTrace emulate_analyzer(std::span<const SpectrumTrace> draws, const AnalyzerSettings& settings);

/// Full acquisition: settings.averages independent draws, each with seed
/// derive_seed(seed, draw), estimated and combined by emulate_analyzer.
SpectrumTrace acquire_trace(const model::Scene& scene, const model::CantileverParams& cantilever,
                            const AnalyzerSettings& analyzer, const SynthesisSettings& synthesis,
                            std::uint64_t seed, std::size_t jobs = 1,
                            const SampleOptions& options = {});

/// One-sided integral of a full-band trace, in per-sample variance units.
double integrated_power(const SpectrumTrace& trace);

struct SnrEstimate {
  double f_peak;
  std::size_t peak_bin;
  double peak_db;
  double floor_db;
  double snr_db;            // peak minus median floor
  double corrected_snr_db;  // main-lobe power above floor over floor noise bandwidth
};

/// Floor = median of bins farther than 3 RBW from the peak.
SnrEstimate extract_snr(const SpectrumTrace& trace, double f_drive);

/// Median floor in dB over the whole trace, excluding +/- 3 RBW around `f_exclude`
/// (pass a negative frequency to exclude nothing).
double floor_db(const SpectrumTrace& trace, double f_exclude);

}  // namespace tnli::spectrum
