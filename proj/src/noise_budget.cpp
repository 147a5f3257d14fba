#include "tnli/noise_budget.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tnli/constants.hpp"

namespace tnli::budget {
namespace {

using constants::planck;
using constants::speed_of_light;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be > 0");
  }
}

}  // namespace

Displacement Displacement::from_variance(double v) { return {std::sqrt(v), v}; }
Displacement Displacement::from_amplitude(double a) { return {a, a * a}; }

Displacement snl_displacement(double wavelength, double p_tot, double delta_f) {
  require_positive(wavelength, "snl_displacement: lambda");
  require_positive(p_tot, "snl_displacement: P_tot");
  require_positive(delta_f, "snl_displacement: delta_f");
  const double v = planck * speed_of_light * wavelength * delta_f / (2.0 * p_tot) /
                   (4.0 * constants::pi * constants::pi);
  return Displacement::from_variance(v);
}

Displacement backaction_displacement(double q, double k, double power, double wavelength,
                                     double delta_f) {
  if (!(q >= 1.0)) throw std::invalid_argument("backaction_displacement: Q must be >= 1");
  require_positive(k, "backaction_displacement: k");
  require_positive(wavelength, "backaction_displacement: lambda");
  require_positive(delta_f, "backaction_displacement: delta_f");
  if (!(power >= 0.0)) throw std::invalid_argument("backaction_displacement: P must be >= 0");
  const double v = (4.0 * q * q / (k * k)) * (2.0 * power * planck * delta_f) /
                   (speed_of_light * wavelength);
  return Displacement::from_variance(v);
}

Displacement sql_displacement(const Displacement& snl, const Displacement& backaction) {
  return Displacement::from_variance(snl.variance + backaction.variance);
}

Displacement sql_displacement(const model::TnliConfig& config,
                              const model::CantileverParams& cantilever) {
  return sql_displacement(
      snl_displacement(config.wavelength, config.total_detected_power(), config.delta_f),
      backaction_displacement(cantilever.q, cantilever.k, config.power_on_cantilever(),
                              config.wavelength, config.delta_f));
}

Displacement squeezed_min_displacement(double wavelength, double p_tot, double delta_f, double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("squeezed_min_displacement: r must be >= 0");
  const Displacement snl = snl_displacement(wavelength, p_tot, delta_f);
  return Displacement::from_amplitude(snl.amplitude * std::exp(-r));
}

NoiseBudget budget_report(const model::TnliConfig& config,
                          const model::CantileverParams& cantilever) {
  config.validate();
  cantilever.validate();
  NoiseBudget b{config, cantilever, config.total_detected_power(), config.power_on_cantilever(),
                {}, {}, {}, {}, {}, 0.0};
  b.snl = snl_displacement(config.wavelength, b.total_power, config.delta_f);
  b.backaction = backaction_displacement(cantilever.q, cantilever.k, b.power_on_cantilever,
                                         config.wavelength, config.delta_f);
  b.sql = sql_displacement(b.snl, b.backaction);
  b.squeezed_floor = squeezed_min_displacement(config.wavelength, b.total_power, config.delta_f,
                                               config.squeeze_r());
  b.engine_variance = model::noise_variance(config);
  b.variance_ratio_floor =
      Displacement::from_amplitude(b.snl.amplitude * std::sqrt(b.engine_variance));
  return b;
}

}  // namespace tnli::budget
