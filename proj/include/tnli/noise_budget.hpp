#pragma once

// Radiometric displacement-noise calculators. Every quantity is carried both
// as a variance (m^2 in the measurement bandwidth) and as its square root,
// which is an amplitude spectral density in m/sqrt(Hz) when delta_f = 1 Hz.

#include "tnli/tnli_model.hpp"

namespace tnli::budget {

struct Displacement {
  double amplitude;  // m (m/sqrt(Hz) at delta_f = 1 Hz)
  double variance;   // m^2

  static Displacement from_variance(double v);
  static Displacement from_amplitude(double a);
};

/// Shot-noise-limited displacement: variance = (1 / 4 pi^2) h c lambda delta_f / (2 P_tot).
Displacement snl_displacement(double wavelength, double p_tot, double delta_f);

/// Radiation-pressure backaction: variance = (4 Q^2 / k^2) * 2 P h delta_f / (c lambda).
Displacement backaction_displacement(double q, double k, double power, double wavelength,
                                     double delta_f);

/// Quadrature sum of shot noise and backaction.
Displacement sql_displacement(const Displacement& snl, const Displacement& backaction);
Displacement sql_displacement(const model::TnliConfig& config, const model::CantileverParams& cantilever);

/// Squeezed minimum resolvable displacement, amplitude = SNL amplitude * e^{-r}.
Displacement squeezed_min_displacement(double wavelength, double p_tot, double delta_f, double r);

struct NoiseBudget {
  model::TnliConfig config;
  model::CantileverParams cantilever;
  double total_power;           // W on the detectors
  double power_on_cantilever;   // W
  Displacement snl;
  Displacement backaction;
  Displacement sql;
  Displacement squeezed_floor;        // SNL * e^{-r}
  Displacement variance_ratio_floor;  // SNL * sqrt(engine variance), alternative reading
  double engine_variance;             // SNL-normalised noise of the scene
};

NoiseBudget budget_report(const model::TnliConfig& config, const model::CantileverParams& cantilever);

}  // namespace tnli::budget
