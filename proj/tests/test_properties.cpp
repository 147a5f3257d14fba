// Randomised property suites. Each case derives its own generator from a
// fixed base seed so failures are reproducible from the captured case index.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tnli/config.hpp"
#include "tnli/noise_budget.hpp"
#include "tnli/rng.hpp"
#include "tnli/spectrum.hpp"

using namespace tnli;
using namespace tnli::gaussian;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kBaseSeed = 0x5eed'ca5e'0000'0001ULL;
constexpr int kCases = 500;

class Gen {
 public:
  explicit Gen(std::uint64_t index) : eng_(rng::derive_seed(kBaseSeed, index)) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  double angle() { return uniform(0.0, 2 * kPi); }
  std::uint64_t bits() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

// Two distinct modes of an n-mode register.
std::pair<std::size_t, std::size_t> mode_pair(Gen& g, std::size_t n) {
  const std::size_t a = g.index(n);
  std::size_t b = g.index(n - 1);
  if (b >= a) ++b;
  return {a, b};
}

SymplecticOp random_op(Gen& g, std::size_t n) {
  const std::size_t kind = n >= 2 ? g.index(3) : 1;
  if (kind == 0) {
    const auto [a, b] = mode_pair(g, n);
    return two_mode_squeeze_op(n, a, b, g.uniform(0.0, 2.0), g.angle());
  }
  if (kind == 1) return rotation_op(n, g.index(n), g.uniform(-10.0, 10.0));
  const auto [a, b] = mode_pair(g, n);
  return beamsplitter_op(n, a, b, g.uniform(0.0, 1.0));
}

// Pure-state transformation drawn from the generator.
GaussianState random_unitary_step(Gen& g, const GaussianState& s) {
  const std::size_t n = s.n_modes();
  switch (n >= 2 ? g.index(4) : 1 + 2 * g.index(2)) {
    case 0: {
      const auto [a, b] = mode_pair(g, n);
      return two_mode_squeeze(s, a, b, g.uniform(0.0, 1.0), g.angle());
    }
    case 1: return phase_rotate(s, g.index(n), g.angle());
    case 2: {
      const auto [a, b] = mode_pair(g, n);
      return beamsplitter(s, a, b, g.uniform(0.0, 1.0));
    }
    default: return displace(s, g.index(n), {g.uniform(-5, 5), g.uniform(-5, 5)});
  }
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("property: symplectic validity", "[property]") {
  for (int i = 0; i < kCases; ++i) {
    Gen g(1000 + i);
    const std::size_t n = 1 + g.index(4);
    CAPTURE(i, n);
    const SymplecticOp op = random_op(g, n);
    CHECK(symplectic_residual(op.matrix) < 1e-10);
    // Products of generators stay symplectic.
    Eigen::MatrixXd composed = Eigen::MatrixXd::Identity(2 * n, 2 * n);
    for (int k = 0; k < 3; ++k) composed = random_op(g, n).matrix * composed;
    CHECK(symplectic_residual(composed) < 1e-10 * std::max(1.0, composed.squaredNorm()));
  }
}

TEST_CASE("property: purity preservation", "[property]") {
  for (int i = 0; i < kCases; ++i) {
    Gen g(2000 + i);
    const std::size_t n = 1 + g.index(3);
    CAPTURE(i, n);
    GaussianState s = vacuum_state(n);
    const std::size_t steps = 1 + g.index(6);
    for (std::size_t k = 0; k < steps; ++k) s = random_unitary_step(g, s);
    CHECK(std::abs(s.cov().determinant() - 1.0) < 1e-9);
    CHECK(uncertainty_margin(s) > -1e-9);
  }
}

TEST_CASE("property: loss interpolates between the state and vacuum", "[property]") {
  for (int i = 0; i < kCases; ++i) {
    Gen g(3000 + i);
    CAPTURE(i);
    const double r = g.uniform(0.0, 2.0);
    const auto s = two_mode_squeeze(vacuum_state(2), 0, 1, r, g.angle());
    const MeasurementCombination m({g.angle()}, {1.0});
    const GaussianState single(s.mean().head<2>(), s.cov().topLeftCorner<2, 2>());
    const double v = measure_stats(single, m).variance;
    double prev = v;
    double eta = 1.0;
    for (int k = 0; k < 8; ++k) {
      eta -= g.uniform(0.0, 0.125);
      const double vk = measure_stats(loss_channel(single, 0, eta), m).variance;
      CHECK(vk <= prev + 1e-12);
      CHECK(vk >= 1.0 - 1e-12);
      prev = vk;
    }
  }
}

TEST_CASE("property: engine reproduces closed-form TMSV moments", "[property]") {
  for (int i = 0; i < 1000; ++i) {
    Gen g(4000 + i);
    CAPTURE(i);
    const double r = g.uniform(0.0, 2.0);
    const double psi = g.angle();
    const double phi_a = g.angle();
    const double phi_b = g.angle();
    const double eta_a = g.uniform(0.0, 1.0);
    const double eta_b = g.uniform(0.0, 1.0);
    GaussianState s = two_mode_squeeze(vacuum_state(2), 0, 1, r, psi);
    s = phase_rotate(s, 0, phi_a);
    s = phase_rotate(s, 1, phi_b);
    s = loss_channel(s, 0, eta_a);
    s = loss_channel(s, 1, eta_b);
    const Eigen::Matrix4d ref = oracle::tmsv_cov(r, psi, phi_a, phi_b, eta_a, eta_b);
    const double scale = ref.cwiseAbs().maxCoeff();
    CHECK((s.cov() - ref).cwiseAbs().maxCoeff() < 1e-10 * scale);

    const double ta = g.angle();
    const double tb = g.angle();
    const double w = g.uniform(-2.0, 2.0);
    const Eigen::Vector4d gvec(std::cos(ta), std::sin(ta), w * std::cos(tb), w * std::sin(tb));
    const double engine = measure_stats(s, MeasurementCombination({ta, tb}, {1.0, w})).variance;
    CHECK(rel_err(engine, gvec.dot(ref * gvec)) < 1e-10 * (1.0 + scale / std::max(engine, 1e-3)));
  }
}

TEST_CASE("property: composition order", "[property]") {
  for (int i = 0; i < kCases; ++i) {
    Gen g(5000 + i);
    CAPTURE(i);
    GaussianState s = vacuum_state(2);
    for (int k = 0; k < 3; ++k) s = random_unitary_step(g, s);
    const double phi = g.uniform(-7.0, 7.0);
    const double theta = g.angle();
    const double t2 = g.angle();
    const MeasurementCombination after({theta, t2}, {1.0, 0.7});
    const MeasurementCombination before({theta - phi, t2}, {1.0, 0.7});
    const auto a = measure_stats(phase_rotate(s, 0, phi), after);
    const auto b = measure_stats(s, before);
    const double scale = 1.0 + std::abs(b.mean) + b.variance;
    CHECK(std::abs(a.mean - b.mean) < 1e-12 * scale);
    CHECK(std::abs(a.variance - b.variance) < 1e-12 * scale);
  }
}

TEST_CASE("property: engine equals the closed-form phase-sum variance", "[property]") {
  for (int i = 0; i < 1000; ++i) {
    Gen g(6000 + i);
    CAPTURE(i);
    model::TnliConfig c;
    c.gain = model::r_to_gain(g.uniform(0.0, 2.0));
    c.eta = g.uniform(0.0, 1.0);
    c.theta_p = g.angle();
    c.theta_c = g.angle();
    c.phi = g.angle();
    c.topology = model::Topology::LoOnCantilever;
    c.cantilever_reflectivity = 1.0;
    const double engine = model::noise_variance(c);
    const double closed = model::phase_sum_variance(c.squeeze_r(), c.eta, c.theta_p, c.theta_c, c.phi);
    CHECK(rel_err(engine, closed) < 1e-10);
  }
}

TEST_CASE("property: phase-sum variance is linear and monotone in eta", "[property]") {
  for (int i = 0; i < kCases; ++i) {
    Gen g(7000 + i);
    CAPTURE(i);
    const double r = g.uniform(0.0, 2.0);
    const double tp = g.angle();
    const double tc = g.angle();
    const double phi = g.angle();
    const double ideal = model::phase_sum_variance(r, 1.0, tp, tc, phi);
    const double e1 = g.uniform(0.0, 1.0);
    const double e2 = g.uniform(e1, 1.0);
    const double v1 = model::phase_sum_variance(r, e1, tp, tc, phi);
    const double v2 = model::phase_sum_variance(r, e2, tp, tc, phi);
    const double v0 = model::phase_sum_variance(r, 0.0, tp, tc, phi);
    CHECK(std::abs(v1 - (v0 + e1 * (ideal - v0))) < 1e-9 * (1 + std::abs(ideal)));
    // Moving eta toward 1 moves the variance toward the ideal value.
    CHECK(std::abs(v2 - ideal) <= std::abs(v1 - ideal) + 1e-9);
  }
}

TEST_CASE("property: phase worst case anti-squeezes", "[property]") {
  for (int i = 0; i < kCases; ++i) {
    Gen g(8000 + i);
    CAPTURE(i);
    const double r = g.uniform(1e-3, 2.0);
    const double eta = g.uniform(1e-3, 1.0);
    const double tp = g.angle();
    const double tc = g.angle();
    const double worst_phi = tp + tc;  // cos(tp + tc - phi) = 1
    const double worst = model::phase_sum_variance(r, eta, tp, tc, worst_phi);
    CHECK(worst > 1.0);
    CHECK(worst >= model::phase_sum_variance(r, eta, tp, tc, g.angle()) - 1e-12);
  }
}

TEST_CASE("property: signal equivalence of the topologies", "[property]") {
  for (int i = 0; i < kCases; ++i) {
    Gen g(9000 + i);
    CAPTURE(i);
    model::TnliConfig c;
    c.gain = model::r_to_gain(g.uniform(0.0, 1.5));
    c.eta = g.uniform(0.1, 1.0);
    c.theta_p = g.angle();
    c.theta_c = g.angle();
    c.phi = g.angle();
    c.cantilever_reflectivity = 1.0;
    const double dphi = g.log_uniform(1e-10, 1e-4);
    c.topology = model::Topology::ProbeOnCantilever;
    const double s_probe = model::signal_response(c, dphi);
    c.topology = model::Topology::LoOnCantilever;
    const double s_lo = model::signal_response(c, dphi);
    const double bright = 2 * std::sqrt(model::photon_flux(c.p_probe, c.wavelength)) * dphi;
    CHECK(std::abs(s_probe - s_lo) < 1e-6 * bright + 1e-9);
  }
}

TEST_CASE("property: Parseval consistency", "[property]") {
  for (int i = 0; i < kCases; ++i) {
    Gen g(10000 + i);
    CAPTURE(i);
    model::TnliConfig c;
    c.gain = g.uniform(1.0, 3.0);
    c.eta = g.uniform(0.3, 1.0);
    c.theta_p = g.angle();
    c.theta_c = g.angle();
    c.phi = g.uniform(-0.1, 0.1);
    const auto scene = model::build_scene(c);
    model::CantileverParams drive;
    drive.drive_freq = g.uniform(50e3, 900e3);
    drive.drive_amplitude_volts = g.uniform(0.0, 0.2);
    const double fs = 2.0 * drive.drive_freq * g.uniform(1.05, 3.0);
    const std::size_t seg = std::size_t{32} << g.index(6);  // 32 .. 1024
    const double rbw = fs / static_cast<double>(seg);
    const double duration = g.uniform(16400.0, 40000.0) / fs;
    const auto rec = spectrum::sample_photocurrent(scene, drive, fs, duration, g.bits());
    const auto trace = spectrum::psd_estimate(rec, rbw);
    double mean = 0.0;
    for (double x : rec.samples) mean += x;
    mean /= static_cast<double>(rec.samples.size());
    double var = 0.0;
    for (double x : rec.samples) var += (x - mean) * (x - mean);
    var /= static_cast<double>(rec.samples.size());
    CHECK(std::abs(spectrum::integrated_power(trace) - var - mean * mean) < 0.01 * (var + mean * mean));
  }
}

TEST_CASE("property: dimensional round-trips", "[property]") {
  struct UnitCase {
    config::Dimension dim;
    const char* suffix;
    double scale;
  };
  // Independent scale table.
  const UnitCase units[] = {
      {config::Dimension::Length, "nm", 1e-9},          {config::Dimension::Length, "um", 1e-6},
      {config::Dimension::Length, "fm", 1e-15},         {config::Dimension::Length, "zm", 1e-21},
      {config::Dimension::Length, "m", 1.0},            {config::Dimension::Power, "uW", 1e-6},
      {config::Dimension::Power, "mW", 1e-3},           {config::Dimension::Power, "W", 1.0},
      {config::Dimension::Frequency, "kHz", 1e3},       {config::Dimension::Frequency, "MHz", 1e6},
      {config::Dimension::Frequency, "Hz", 1.0},        {config::Dimension::Time, "ms", 1e-3},
      {config::Dimension::Time, "s", 1.0},              {config::Dimension::Angle, "deg", kPi / 180},
      {config::Dimension::Angle, "rad", 1.0},           {config::Dimension::Voltage, "mV", 1e-3},
      {config::Dimension::Voltage, "V", 1.0},           {config::Dimension::Stiffness, "N/m", 1.0},
      {config::Dimension::LengthPerVolt, "pm/V", 1e-12}, {config::Dimension::LengthPerVolt, "nm/V", 1e-9},
  };
  for (int i = 0; i < kCases; ++i) {
    Gen g(11000 + i);
    CAPTURE(i);
    const auto& u = units[g.index(std::size(units))];
    const double v = g.log_uniform(1e-3, 1e4);
    char text[64];
    std::snprintf(text, sizeof text, "%.17g %s", v, u.suffix);
    CAPTURE(text);
    const double si = config::parse_quantity(text, u.dim);
    CHECK(rel_err(si, v * u.scale) < 1e-15);

    // Budget quantities: variance and amplitude representations agree.
    const double lambda = g.uniform(400e-9, 1600e-9);
    const double p = g.log_uniform(1e-6, 1e-2);
    const double df = g.log_uniform(1e-2, 1e4);
    const auto snl = budget::snl_displacement(lambda, p, df);
    CHECK(rel_err(snl.amplitude * snl.amplitude, snl.variance) < 1e-12);
    const auto ba = budget::backaction_displacement(g.uniform(1, 100), g.log_uniform(1e-2, 50), p,
                                                    lambda, df);
    CHECK(rel_err(ba.amplitude * ba.amplitude, ba.variance) < 1e-12);
    const auto sql = budget::sql_displacement(snl, ba);
    CHECK(rel_err(sql.amplitude * sql.amplitude, sql.variance) < 1e-12);
    CHECK(rel_err(sql.variance, snl.variance + ba.variance) < 1e-12);
    CHECK(sql.amplitude >= std::max(snl.amplitude, ba.amplitude));
  }
}

TEST_CASE("property: config snapshot round-trips", "[property]") {
  for (int i = 0; i < kCases; ++i) {
    Gen g(12000 + i);
    CAPTURE(i);
    config::RunConfig c;
    c.seed = g.bits();
    c.optics.gain = g.log_uniform(1.0, 100.0);
    c.optics.eta = g.uniform(0.0, 1.0);
    c.optics.theta_p = g.angle();
    c.optics.phi = g.uniform(-1, 1);
    c.optics.wavelength = g.uniform(400e-9, 1600e-9);
    c.optics.p_lo_probe = g.log_uniform(1e-6, 1e-2);
    c.optics.topology = g.index(2) ? model::Topology::LoOnCantilever : model::Topology::ProbeOnCantilever;
    c.cantilever.k = g.log_uniform(1e-2, 1e2);
    c.cantilever.volts_to_meters = g.log_uniform(1e-13, 1e-9);
    c.analyzer.averages = 1 + g.index(100);
    c.analyzer.rbw = g.log_uniform(1e2, 1e5);
    c.synthesis.sample_rate = g.log_uniform(1.5e6, 1e7);
    const config::RunConfig back = config::parse_config(config::to_text(c));
    CHECK(back == c);
  }
}

TEST_CASE("property: budget scaling laws over three decades", "[property]") {
  for (int i = 0; i < kCases; ++i) {
    Gen g(13000 + i);
    CAPTURE(i);
    const double lambda = g.uniform(400e-9, 1600e-9);
    const double p = g.log_uniform(1e-6, 1e-5);
    const double df = g.log_uniform(0.1, 10.0);
    const double k_factor = g.log_uniform(1.0, 1000.0);
    const auto snl = budget::snl_displacement(lambda, p, df);
    CHECK(rel_err(budget::snl_displacement(lambda, p * k_factor, df).amplitude,
                  snl.amplitude / std::sqrt(k_factor)) < 1e-12);
    CHECK(rel_err(budget::snl_displacement(lambda, p, df * k_factor).amplitude,
                  snl.amplitude * std::sqrt(k_factor)) < 1e-12);
    const double q = g.uniform(1.0, 1e3);
    const double k = g.log_uniform(0.01, 10.0);
    const auto ba = budget::backaction_displacement(q, k, p, lambda, df);
    CHECK(rel_err(budget::backaction_displacement(q, k, p * k_factor, lambda, df).amplitude,
                  ba.amplitude * std::sqrt(k_factor)) < 1e-12);
    CHECK(rel_err(budget::backaction_displacement(q, k, p, lambda, df * k_factor).amplitude,
                  ba.amplitude * std::sqrt(k_factor)) < 1e-12);
    CHECK(budget::backaction_displacement(1.0, k, p, lambda, df).amplitude <= ba.amplitude);
  }
}
