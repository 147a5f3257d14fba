#include "tnli/tnli_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "tnli/constants.hpp"
#include "tnli/errors.hpp"

namespace tnli::model {
namespace {

void require(bool ok, const std::string& field, const std::string& rule) {
  if (!ok) throw std::invalid_argument(field + ": " + rule);
}

}  // namespace

std::string_view to_string(Topology t) {
  return t == Topology::LoOnCantilever ? "lo" : "probe";
}

Topology parse_topology(std::string_view text) {
  if (text == "lo" || text == "LoOnCantilever") return Topology::LoOnCantilever;
  if (text == "probe" || text == "ProbeOnCantilever") return Topology::ProbeOnCantilever;
  throw std::invalid_argument("topology must be 'probe' or 'lo', got '" + std::string(text) + "'");
}

void TnliConfig::validate() const {
  require(std::isfinite(gain) && gain >= 1.0, "interferometer.gain", "must be >= 1");
  require(eta >= 0.0 && eta <= 1.0, "interferometer.eta", "must lie in [0, 1]");
  require(std::isfinite(theta_p), "interferometer.theta_p", "must be finite");
  require(std::isfinite(theta_c), "interferometer.theta_c", "must be finite");
  require(std::isfinite(phi), "interferometer.phi", "must be finite");
  require(cantilever_reflectivity >= 0.0 && cantilever_reflectivity <= 1.0,
          "interferometer.cantilever_reflectivity", "must lie in [0, 1]");
  require(std::isfinite(wavelength) && wavelength > 0.0, "optics.lambda", "must be > 0");
  require(std::isfinite(delta_f) && delta_f > 0.0, "optics.delta_f", "must be > 0");
  require(std::isfinite(p_probe) && p_probe >= 0.0, "optics.p_probe", "must be >= 0");
  require(std::isfinite(p_conj) && p_conj >= 0.0, "optics.p_conj", "must be >= 0");
  require(std::isfinite(p_lo_probe) && p_lo_probe >= 0.0, "optics.p_lo_probe", "must be >= 0");
  require(std::isfinite(p_lo_conj) && p_lo_conj >= 0.0, "optics.p_lo_conj", "must be >= 0");
}

double TnliConfig::squeeze_r() const { return gain_to_r(gain); }

void CantileverParams::validate() const {
  require(std::isfinite(k) && k > 0.0, "cantilever.k", "must be > 0");
  require(std::isfinite(q) && q >= 1.0, "cantilever.q", "must be >= 1");
  require(std::isfinite(f0) && f0 > 0.0, "cantilever.f0", "must be > 0");
  require(std::isfinite(drive_freq) && drive_freq > 0.0, "cantilever.drive_freq", "must be > 0");
  require(std::isfinite(drive_amplitude_volts) && drive_amplitude_volts >= 0.0,
          "cantilever.drive_amplitude", "must be >= 0");
  require(std::isfinite(volts_to_meters) && volts_to_meters >= 0.0,
          "cantilever.volts_to_meters", "must be >= 0");
}

double gain_to_r(double gain) {
  if (!(gain >= 1.0)) throw std::invalid_argument("gain_to_r: G must be >= 1");
  return std::acosh(std::sqrt(gain));
}

double r_to_gain(double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("r_to_gain: r must be >= 0");
  const double c = std::cosh(r);
  return c * c;
}

double phase_sum_variance(double r, double eta, double theta_p, double theta_c, double phi) {
  if (!(r >= 0.0)) throw std::invalid_argument("phase_sum_variance: r must be >= 0");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("phase_sum_variance: eta must lie in [0, 1]");
  const double s = std::sinh(2.0 * r);
  const double c = std::cosh(2.0 * r);
  const double t = std::tanh(2.0 * r);
  // eta (2 s t cos S + c - t^2 + s t - 1) + t^2 + 1, regrouped with c - s t = 1/c
  // and 1 + cos S = 2 cos^2(S/2) so no large terms cancel at high gain.
  const double half = std::cos(0.5 * (theta_p + theta_c - phi));
  return 4.0 * eta * s * t * half * half + eta / c + (1.0 - eta) * (1.0 + t * t);
}

double ideal_noise_ratio(double gain) {
  if (!(gain >= 1.0)) throw std::invalid_argument("ideal_noise_ratio: G must be >= 1");
  return 1.0 / (2.0 * gain - 1.0);
}

double squeezing_db(double variance_ratio) {
  if (!(variance_ratio > 0.0)) throw std::invalid_argument("squeezing_db: ratio must be > 0");
  return -10.0 * std::log10(variance_ratio);
}

double ratio_from_squeezing_db(double db) { return std::pow(10.0, -db / 10.0); }

double displacement_to_phase(double displacement, double wavelength) {
  if (!(wavelength > 0.0)) throw std::invalid_argument("displacement_to_phase: lambda must be > 0");
  return 2.0 * constants::two_pi * displacement / wavelength;
}

double photon_flux(double power, double wavelength) {
  return power * wavelength / (constants::planck * constants::speed_of_light);
}

Scene build_scene(const TnliConfig& config, double extra_phase) {
  config.validate();
  using namespace gaussian;
  const double r = config.squeeze_r();
  const double phi = config.phi + extra_phase;

  // Seed amplitude is set so the probe leaving the amplifier carries p_probe.
  const double alpha = std::sqrt(photon_flux(config.p_probe, config.wavelength) / config.gain);

  GaussianState state = vacuum_state(2);
  state = displace(state, kProbe, {alpha, 0.0});
  state = two_mode_squeeze(state, kProbe, kConjugate, r, 0.0);

  double theta_p = config.theta_p;
  if (config.topology == Topology::ProbeOnCantilever) {
    state = loss_channel(state, kProbe, config.cantilever_reflectivity);
    state = phase_rotate(state, kProbe, phi);
  } else {
    // The reflected LO shifts the probe's homodyne reference instead.
    theta_p -= phi;
  }
  state = loss_channel(state, kProbe, config.eta);
  state = loss_channel(state, kConjugate, config.eta);

  MeasurementCombination comb({theta_p, config.theta_c}, {1.0, std::tanh(2.0 * r)});
  return {std::move(state), std::move(comb), config};
}

double signal_response(const TnliConfig& config, double extra_phase) {
  const Scene base = build_scene(config);
  const Scene shifted = build_scene(config, extra_phase);
  return gaussian::measure_stats(shifted.state, shifted.comb).mean -
         gaussian::measure_stats(base.state, base.comb).mean;
}

double noise_variance(const TnliConfig& config) {
  const Scene scene = build_scene(config);
  return gaussian::measure_stats(scene.state, scene.comb).variance;
}

double snr_db(const TnliConfig& config, double displacement_amplitude) {
  if (!(displacement_amplitude >= 0.0)) {
    throw std::invalid_argument("snr_db: displacement amplitude must be >= 0");
  }
  const double var = noise_variance(config);
  if (!(var > 0.0) || !std::isfinite(var)) {
    throw NumericalError("snr_db: scene noise variance is not positive");
  }
  if (displacement_amplitude == 0.0) return -std::numeric_limits<double>::infinity();
  const double dm =
      signal_response(config, displacement_to_phase(displacement_amplitude, config.wavelength));
  const double signal_power = 0.5 * dm * dm;
  if (signal_power == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal_power / (var * config.delta_f));
}

}  // namespace tnli::model
