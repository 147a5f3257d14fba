// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "tnli/commands.hpp"
#include "tnli/config.hpp"
#include "tnli/noise_budget.hpp"
#include "tnli/rng.hpp"
#include "tnli/spectrum.hpp"
#include "tnli/spectrum_io.hpp"

using namespace tnli;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  const char* id;
  const char* title;
  double time_limit_s;  // <= 0: no limit
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::mt19937_64 stream(std::uint64_t index) { return std::mt19937_64(rng::derive_seed(0xacce97ULL, index)); }

double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

// Slope of y against x by least squares.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome ac1_snl() {
  const auto snl = budget::snl_displacement(795e-9, 183e-6, 1.0);
  cli::BudgetOptions opts;
  opts.json_stdout = true;
  opts.overrides = {"optics.p_lo_conj=70.1 uW"};  // P_tot = 183.0 uW
  std::ostringstream out, err;
  const int rc = cli::cmd_budget(opts, out, err);
  if (rc != 0) return {false, "budget exited " + std::to_string(rc) + ": " + err.str()};
  const auto j = nlohmann::json::parse(out.str());
  const double from_cli = j["budgets"][0]["snl"]["amplitude_m_per_rthz"].get<double>();
  const double p_tot = j["budgets"][0]["total_power_w"].get<double>();
  const double dev = std::max(std::abs(snl.amplitude / 3.3e-15 - 1), std::abs(from_cli / 3.3e-15 - 1));
  return {dev <= 0.03 && std::abs(p_tot - 183e-6) < 1e-12,
          fmt("SNL %.4f fm/rtHz at P_tot %.1f uW (budget command %.4f); deviation %.2f%% (limit 3%%)",
              snl.amplitude * 1e15, p_tot * 1e6, from_cli * 1e15, dev * 100)};
}

Outcome ac2_ideal_identity() {
  double worst = 0.0;
  for (double g : {1.0, 1.1, 1.5, 2.0, 5.0, 10.0, 100.0}) {
    const double v = model::phase_sum_variance(model::gain_to_r(g), 1.0, kPi / 2, kPi / 2, 0.0);
    worst = std::max(worst, std::abs(v * (2 * g - 1) - 1.0));
  }
  return {worst <= 1e-12, fmt("max |V (2G-1) - 1| = %.2e over 7 gains (limit 1e-12)", worst)};
}

Outcome ac3_oracle_equivalence() {
  auto g = stream(3);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    model::TnliConfig c;
    c.gain = model::r_to_gain(uniform(g, 0.0, 2.0));
    c.eta = uniform(g, 0.0, 1.0);
    c.theta_p = uniform(g, 0.0, 2 * kPi);
    c.theta_c = uniform(g, 0.0, 2 * kPi);
    c.phi = uniform(g, 0.0, 2 * kPi);
    c.topology = model::Topology::LoOnCantilever;
    c.cantilever_reflectivity = 1.0;
    const double engine = model::noise_variance(c);
    const double closed = model::phase_sum_variance(c.squeeze_r(), c.eta, c.theta_p, c.theta_c, c.phi);
    worst = std::max(worst, std::abs(engine - closed) / std::abs(closed));
  }
  return {worst <= 1e-10, fmt("1000 draws, max relative difference %.2e (limit 1e-10)", worst)};
}

Outcome ac4_loss_penalty() {
  using namespace gaussian;
  const double r = -0.5 * std::log(std::pow(10.0, -0.5));
  const auto pair = two_mode_squeeze(vacuum_state(2), 0, 1, r, 0.0);
  const double h = 1.0 / std::sqrt(2.0);
  const MeasurementCombination joint({kPi / 2, kPi / 2}, {h, h});
  const double before = -10 * std::log10(measure_stats(pair, joint).variance);
  const double after = -10 * std::log10(measure_stats(loss_channel(pair, 0, 0.95), joint).variance);
  const double oracle = -10 * std::log10(oracle::joint_variance_one_arm_loss(r, 0.95));
  return {std::abs(after - 4.77) <= 0.05 && std::abs(after - oracle) < 1e-9,
          fmt("%.3f dB -> %.3f dB after 5%% loss on one arm (target 4.77 +/- 0.05), penalty %.3f dB",
              before, after, before - after)};
}

Outcome ac5_backaction_ratio() {
  const auto cfg = config::load_config("paper_default");
  auto optics = cfg.optics;
  optics.topology = model::Topology::LoOnCantilever;
  const auto lo = budget::budget_report(optics, cfg.cantilever);
  optics.topology = model::Topology::ProbeOnCantilever;
  const auto probe = budget::budget_report(optics, cfg.cantilever);
  const double ratio = lo.backaction.amplitude / probe.backaction.amplitude;
  const double vs_quoted = std::abs(ratio / 8.38 - 1);
  return {std::abs(ratio - 8.56) < 0.005 && vs_quoted <= 0.05,
          fmt("ratio %.3f (%.1f / %.2f zm/rtHz at Q=1); %.2f%% from 8.38 (limit 5%%)", ratio,
              lo.backaction.amplitude * 1e21, probe.backaction.amplitude * 1e21, vs_quoted * 100)};
}

Outcome ac6_monte_carlo() {
  const auto cfg = config::load_config("paper_default");
  auto cantilever = cfg.cantilever;
  cantilever.drive_amplitude_volts = 0.0;
  std::string detail;
  bool ok = true;
  for (double gain : {1.0, cfg.optics.gain, 3.0}) {
    auto optics = cfg.optics;
    optics.gain = gain;
    const auto scene = model::build_scene(optics);
    const double analytic = model::noise_variance(optics);
    const auto rec = spectrum::sample_photocurrent(scene, cantilever, cfg.synthesis.sample_rate,
                                                   0.5, 4242);
    const double n = static_cast<double>(rec.samples.size());
    double mean = 0.0;
    for (double x : rec.samples) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : rec.samples) var += (x - mean) * (x - mean);
    var /= n - 1;
    const double sigma = analytic * std::sqrt(2.0 / (n - 1));
    const double rel = std::abs(var / analytic - 1);

    // Averaged analyzer floor over the span.
    const auto trace = spectrum::acquire_trace(scene, cantilever, cfg.analyzer, cfg.synthesis, 99);
    double floor = 0.0;
    for (double p : trace.power_lin) floor += p;
    floor /= static_cast<double>(trace.power_lin.size());
    const double floor_rel = std::abs(floor / analytic - 1);
    const bool this_ok = n >= 1e6 && rel <= 0.02 && std::abs(var - analytic) <= 3 * sigma && floor_rel <= 0.02;
    ok = ok && this_ok;
    detail += fmt("G=%.3f: N=%.0f var %.5f vs %.5f (%.2f sigma), trace floor %+.2f%%; ", gain, n, var,
                  analytic, std::abs(var - analytic) / sigma, (floor / analytic - 1) * 100);
  }

  auto optics = cfg.optics;
  const auto scene = model::build_scene(optics);
  std::string bytes[2];
  for (auto& b : bytes) {
    std::ostringstream csv;
    spectrum::write_trace_csv(spectrum::acquire_trace(scene, cfg.cantilever, cfg.analyzer,
                                                      cfg.synthesis, 737),
                              csv);
    b = csv.str();
  }
  const bool identical = bytes[0] == bytes[1];
  ok = ok && identical;
  detail += identical ? "same-seed traces byte-identical" : "same-seed traces DIFFER";
  return {ok, detail};
}

Outcome ac7_snr_gap() {
  const auto cfg = config::load_config("paper_default");
  bool ok = true;
  std::string detail;
  double worst = 0.0;
  std::uint64_t task = 0;
  for (double gain : {1.0, 1.25, 1.5, 2.0, 2.5, 3.0}) {
    auto squeezed = cfg.optics;
    squeezed.gain = gain;
    auto coherent = cfg.optics;
    coherent.gain = 1.0;
    const auto ts = spectrum::acquire_trace(model::build_scene(squeezed), cfg.cantilever, cfg.analyzer,
                                            cfg.synthesis, rng::derive_seed(70, task++));
    const auto tc = spectrum::acquire_trace(model::build_scene(coherent), cfg.cantilever, cfg.analyzer,
                                            cfg.synthesis, rng::derive_seed(70, task++));
    const double gap = spectrum::extract_snr(ts, cfg.cantilever.drive_freq).corrected_snr_db -
                       spectrum::extract_snr(tc, cfg.cantilever.drive_freq).corrected_snr_db;
    const double expected = -10 * std::log10(model::phase_sum_variance(squeezed.squeeze_r(), squeezed.eta,
                                                                  squeezed.theta_p, squeezed.theta_c,
                                                                  squeezed.phi));
    worst = std::max(worst, std::abs(gap - expected));
    ok = ok && std::abs(gap - expected) <= 0.3;
    detail += fmt("G=%.2f %.2f/%.2f; ", gain, gap, expected);
  }
  return {ok, fmt("gap/expected dB: %smax error %.3f dB (limit 0.3)", detail.c_str(), worst)};
}

struct FigureSummary {
  std::vector<double> volts;
  std::vector<double> snr;
  std::vector<double> floors;
  std::size_t trace_files = 0;
};

FigureSummary run_figure(const char* fig, const fs::path& dir) {
  cli::ReproduceOptions o;
  o.figure = cli::parse_figure(fig);
  o.out_dir = dir.string();
  o.timestamp = "1970-01-01T00:00:00Z";
  std::ostringstream out, err;
  if (cli::cmd_reproduce(o, out, err) != 0) throw std::runtime_error(err.str());
  FigureSummary s;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.find("_squeezed_") != std::string::npos && name.ends_with("mV.csv")) ++s.trace_files;
  }
  std::ifstream in(dir / (std::string(fig) + "_snr.csv"));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<double> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(std::stod(c));
    s.volts.push_back(cells[0] * 1e-3);
    s.snr.push_back(cells[1]);
    s.floors.push_back(cells[6]);
  }
  return s;
}

Outcome ac8_figures() {
  const fs::path root = fs::temp_directory_path() / "tnli_acceptance";
  fs::remove_all(root);
  const auto fig3 = run_figure("fig3", root / "fig3");
  const auto fig2 = run_figure("fig2", root / "fig2");
  fs::remove_all(root);

  bool ok = fig3.trace_files == 5 && fig3.snr.size() == 5 && fig2.floors.size() == 5;
  const auto [lo3, hi3] = std::minmax_element(fig3.floors.begin(), fig3.floors.end());
  ok = ok && *lo3 >= -3.0 && *hi3 <= -2.8;
  bool monotone = true;
  for (std::size_t i = 1; i < fig3.snr.size(); ++i) monotone = monotone && fig3.snr[i] > fig3.snr[i - 1];
  std::vector<double> vdb;
  for (double v : fig3.volts) vdb.push_back(10 * std::log10(v));
  const double k = slope(vdb, fig3.snr);
  ok = ok && monotone && std::abs(k - 2.0) <= 0.1;
  double min_shift = 1e9, max_shift = -1e9;
  for (std::size_t i = 0; i < fig2.floors.size(); ++i) {
    const double shift = fig2.floors[i] - fig3.floors[i];
    min_shift = std::min(min_shift, shift);
    max_shift = std::max(max_shift, shift);
  }
  ok = ok && min_shift >= 0.1 && max_shift <= 0.4;
  return {ok, fmt("fig3: %zu traces, floors %.3f..%.3f dB, SNR %s, slope %.3f dB/dB; fig2 shallower by "
                  "%.3f..%.3f dB",
                  fig3.trace_files, *lo3, *hi3, monotone ? "monotone" : "NOT monotone", k, min_shift,
                  max_shift)};
}

Outcome ac9_invariants() {
  using namespace gaussian;
  constexpr int kCases = 500;
  int sym_fail = 0, pure_fail = 0, parseval_fail = 0, dim_fail = 0;

  auto g = stream(9);
  auto angle = [&] { return uniform(g, 0.0, 2 * kPi); };
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(g); };
  auto pair = [&](std::size_t n) {
    const std::size_t a = pick(n);
    std::size_t b = pick(n - 1);
    return std::pair{a, b >= a ? b + 1 : b};
  };

  for (int i = 0; i < kCases; ++i) {
    const std::size_t n = 2 + pick(3);
    const auto [a, b] = pair(n);
    const double res = std::max({symplectic_residual(two_mode_squeeze_op(n, a, b, uniform(g, 0, 2), angle()).matrix),
                                 symplectic_residual(rotation_op(n, pick(n), uniform(g, -10, 10)).matrix),
                                 symplectic_residual(beamsplitter_op(n, a, b, uniform(g, 0, 1)).matrix)});
    if (!(res < 1e-10)) ++sym_fail;
  }

  for (int i = 0; i < kCases; ++i) {
    const std::size_t n = 2 + pick(2);
    GaussianState s = vacuum_state(n);
    for (int k = 0; k < 4; ++k) {
      const auto [a, b] = pair(n);
      s = two_mode_squeeze(s, a, b, uniform(g, 0, 1), angle());
      s = phase_rotate(s, pick(n), angle());
      s = beamsplitter(s, a, b, uniform(g, 0, 1));
    }
    if (!(std::abs(s.cov().determinant() - 1.0) < 1e-9)) ++pure_fail;
  }

  for (int i = 0; i < kCases; ++i) {
    model::TnliConfig c;
    c.gain = uniform(g, 1.0, 3.0);
    c.eta = uniform(g, 0.3, 1.0);
    c.theta_p = angle();
    c.theta_c = angle();
    model::CantileverParams drive;
    drive.drive_amplitude_volts = uniform(g, 0.0, 0.2);
    const double fs = 2.56e6;
    const double rbw = fs / static_cast<double>(std::size_t{32} << pick(5));
    const auto rec = spectrum::sample_photocurrent(model::build_scene(c), drive, fs,
                                                   uniform(g, 16400, 30000) / fs, g());
    const auto t = spectrum::psd_estimate(rec, rbw);
    double ms = 0.0;
    for (double x : rec.samples) ms += x * x;
    ms /= static_cast<double>(rec.samples.size());
    if (!(std::abs(spectrum::integrated_power(t) / ms - 1) < 0.01)) ++parseval_fail;
  }

  for (int i = 0; i < kCases; ++i) {
    struct U {
      config::Dimension d;
      const char* s;
      double k;
    };
    static const U units[] = {{config::Dimension::Length, "nm", 1e-9}, {config::Dimension::Power, "uW", 1e-6},
                              {config::Dimension::Frequency, "kHz", 1e3}, {config::Dimension::Time, "ms", 1e-3},
                              {config::Dimension::Angle, "deg", kPi / 180}, {config::Dimension::Voltage, "mV", 1e-3},
                              {config::Dimension::LengthPerVolt, "pm/V", 1e-12}};
    const U& u = units[pick(std::size(units))];
    const double v = std::exp(uniform(g, std::log(1e-3), std::log(1e4)));
    char text[64];
    std::snprintf(text, sizeof text, "%.17g %s", v, u.s);
    const double si = config::parse_quantity(text, u.d);
    const auto snl = budget::snl_displacement(uniform(g, 4e-7, 1.6e-6), std::exp(uniform(g, -14, -4)), 1.0);
    const bool ok = std::abs(si / (v * u.k) - 1) < 1e-15 &&
                    std::abs(snl.amplitude * snl.amplitude / snl.variance - 1) < 1e-12;
    if (!ok) ++dim_fail;
  }

  const bool ok = sym_fail + pure_fail + parseval_fail + dim_fail == 0;
  return {ok, fmt("failures out of %d cases each: symplectic %d, purity %d, Parseval %d, dimensional %d",
                  kCases, sym_fail, pure_fail, parseval_fail, dim_fail)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"AC1", "shot-noise-limited displacement", 1.0, ac1_snl},
      {"AC2", "ideal phase-sum variance x (2G-1) = 1", 1.0, ac2_ideal_identity},
      {"AC3", "engine vs closed-form variance", 10.0, ac3_oracle_equivalence},
      {"AC4", "single-arm loss penalty", 0.0, ac4_loss_penalty},
      {"AC5", "backaction power scaling", 0.0, ac5_backaction_ratio},
      {"AC6", "Monte Carlo convergence and determinism", 60.0, ac6_monte_carlo},
      {"AC7", "squeezed vs coherent SNR gap", 0.0, ac7_snr_gap},
      {"AC8", "figure reproduction", 120.0, ac8_figures},
      {"AC9", "invariant suites", 0.0, ac9_invariants},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.time_limit_s <= 0.0 || secs < c.time_limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::string limit = c.time_limit_s > 0.0 ? fmt(" / limit %.0f s", c.time_limit_s) : "";
    std::printf("%s %s  %s: %s [%.2f s%s]\n", c.id, pass ? "PASS" : "FAIL", c.title, o.detail.c_str(), secs,
                limit.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
