#pragma once

// Truncated nonlinear interferometer: the two-mode squeezed probe/conjugate
// pair read out by dual homodyne detection, with the AFM cantilever placed
// either in the weak probe path or in the probe's local oscillator path.

#include <string_view>

#include "tnli/gaussian_state.hpp"

namespace tnli::model {

inline constexpr std::size_t kProbe = 0;
inline constexpr std::size_t kConjugate = 1;

enum class Topology { ProbeOnCantilever, LoOnCantilever };

std::string_view to_string(Topology t);
/// Accepts "probe" / "lo" (and the enum spellings); throws std::invalid_argument otherwise.
Topology parse_topology(std::string_view text);

struct TnliConfig {
  double gain = 1.0;                  // G = cosh^2 r
  double eta = 1.0;                   // composite detection efficiency
  double theta_p = 1.5707963267948966;  // probe homodyne phase, rad
  double theta_c = 1.5707963267948966;  // conjugate homodyne phase, rad
  double phi = 0.0;                   // static probe-arm phase, rad
  double wavelength = 795e-9;         // m
  double p_probe = 1.5e-6;            // W
  double p_conj = 1.4e-6;             // W
  double p_lo_probe = 110e-6;         // W
  double p_lo_conj = 70e-6;           // W
  double delta_f = 1.0;               // Hz
  Topology topology = Topology::LoOnCantilever;
  double cantilever_reflectivity = 0.95;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  double squeeze_r() const;
  double total_detected_power() const { return p_probe + p_conj + p_lo_probe + p_lo_conj; }
  /// Power of whichever beam is reflected from the cantilever.
  double power_on_cantilever() const {
    return topology == Topology::LoOnCantilever ? p_lo_probe : p_probe;
  }

  bool operator==(const TnliConfig&) const = default;
};

struct CantileverParams {
  double k = 0.2;               // N/m
  double q = 1.0;               // quality factor at the drive frequency
  double f0 = 13e3;             // Hz
  double drive_freq = 737e3;    // Hz
  double drive_amplitude_volts = 0.18;
  double volts_to_meters = 1.24e-10;  // piezo calibration, m/V

  void validate() const;
  double displacement_amplitude() const { return drive_amplitude_volts * volts_to_meters; }

  bool operator==(const CantileverParams&) const = default;
};

/// r = arccosh(sqrt(G)).
double gain_to_r(double gain);
double r_to_gain(double r);

/// Analytic variance of the gain-weighted phase-sum observable, SNL-normalised.
double phase_sum_variance(double r, double eta, double theta_p, double theta_c, double phi);

/// 1 / (2G - 1).
double ideal_noise_ratio(double gain);

/// Squeezing in dB below the SNL: -10 log10(ratio). Throws for ratio <= 0.
double squeezing_db(double variance_ratio);
double ratio_from_squeezing_db(double db);

/// Normal-incidence reflection: phi = 4 pi d / lambda.
double displacement_to_phase(double displacement, double wavelength);

/// Photon flux |alpha|^2 per second carried by a beam of the given power.
double photon_flux(double power, double wavelength);

struct Scene {
  gaussian::GaussianState state;
  gaussian::MeasurementCombination comb;
  TnliConfig config;
};

/// Builds the detected two-mode state and the dual-homodyne combination.
/// `extra_phase` is added to config.phi (used for signal response).
Scene build_scene(const TnliConfig& config, double extra_phase = 0.0);

/// Exact mean of the observable for the scene's config with probe-arm phase
/// phi + extra_phase, minus its value at extra_phase = 0 (per sqrt(Hz)).
double signal_response(const TnliConfig& config, double extra_phase);

/// Variance of the observable for the scene (SNL units, 1 Hz).
double noise_variance(const TnliConfig& config);

/// SNR for a sinusoidal cantilever displacement of the given amplitude:
/// 10 log10( (dm^2 / 2) / (Var * delta_f) ). d = 0 yields -infinity.
/// Absolute values depend on the photon-flux convention; differences do not.
double snr_db(const TnliConfig& config, double displacement_amplitude);

}  // namespace tnli::model
