#include "tnli/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "tnli/errors.hpp"
#include "tnli/kernels.hpp"
#include "tnli/parallel.hpp"
#include "tnli/rng.hpp"
#include "tnli/spectrum_io.hpp"

#ifndef TNLI_VERSION
#define TNLI_VERSION "0.0.0"
#endif

namespace tnli::cli {
namespace {

namespace fs = std::filesystem;

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const config::IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const config::ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  }
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string csv_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

nlohmann::json displacement_json(const budget::Displacement& d) {
  return {{"amplitude_m_per_rthz", d.amplitude}, {"variance_m2_per_hz", d.variance}};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw config::IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw config::IoError("write failed for '" + path.string() + "'");
}

std::string iso_timestamp(const std::string& explicit_ts) {
  if (!explicit_ts.empty()) return explicit_ts;
  std::time_t t{};
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct SweepRow {
  double value;
  double closed;
  double engine;
  double snr;
  budget::NoiseBudget budget;
};

}  // namespace

std::string_view to_string(Figure f) { return f == Figure::Fig2 ? "fig2" : "fig3"; }

Figure parse_figure(std::string_view text) {
  if (text == "fig2") return Figure::Fig2;
  if (text == "fig3") return Figure::Fig3;
  throw std::invalid_argument("figure must be fig2 or fig3, got '" + std::string(text) + "'");
}

config::RunConfig resolve_config(const CommonOptions& opts) {
  config::RunConfig cfg = config::load_config(opts.config);
  for (const auto& o : opts.overrides) config::apply_override(cfg, o);
  return cfg;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& explicit_seed,
                           const config::RunConfig& config) {
  if (explicit_seed) return *explicit_seed;
  if (const char* env = std::getenv("TNLI_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw config::ConfigError("TNLI_SEED", "not an unsigned integer");
    return v;
  }
  return config.seed;
}

nlohmann::json budget_to_json(const budget::NoiseBudget& b) {
  return {{"topology", model::to_string(b.config.topology)},
          {"total_power_w", b.total_power},
          {"power_on_cantilever_w", b.power_on_cantilever},
          {"snl", displacement_json(b.snl)},
          {"backaction", displacement_json(b.backaction)},
          {"sql", displacement_json(b.sql)},
          {"squeezed_floor", displacement_json(b.squeezed_floor)},
          {"variance_ratio_floor", displacement_json(b.variance_ratio_floor)},
          {"engine_variance", b.engine_variance},
          {"squeezing_db", model::squeezing_db(b.engine_variance)},
          {"squeeze_r", b.config.squeeze_r()},
          {"cantilever_q", b.cantilever.q}};
}

int cmd_budget(const BudgetOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const config::RunConfig cfg = resolve_config(opts);
    std::vector<model::Topology> topologies;
    if (opts.topology) {
      topologies.push_back(*opts.topology);
    } else {
      topologies = {model::Topology::LoOnCantilever, model::Topology::ProbeOnCantilever};
    }
    nlohmann::json report = {{"tool", "tnli"}, {"version", TNLI_VERSION}, {"budgets", nlohmann::json::array()}};
    std::vector<budget::NoiseBudget> budgets;
    for (auto t : topologies) {
      model::TnliConfig optics = cfg.optics;
      optics.topology = t;
      budgets.push_back(budget::budget_report(optics, cfg.cantilever));
      report["budgets"].push_back(budget_to_json(budgets.back()));
    }
    if (!opts.json_path.empty()) write_file(opts.json_path, report.dump(2) + "\n");
    if (opts.json_stdout) {
      out << report.dump(2) << '\n';
      return kOk;
    }
    out << "P_tot on detectors: " << fmt("%.1f", budgets.front().total_power * 1e6) << " uW, "
        << "lambda " << fmt("%.1f", cfg.optics.wavelength * 1e9) << " nm, "
        << "delta_f " << fmt("%g", cfg.optics.delta_f) << " Hz, Q " << fmt("%g", cfg.cantilever.q)
        << "\n";
    out << "topology  P_cantilever[uW]  SNL[fm/rtHz]  backaction[zm/rtHz]  SQL[fm/rtHz]"
           "  floor_e^-r[fm/rtHz]  floor_sqrtV[fm/rtHz]  squeezing[dB]\n";
    for (const auto& b : budgets) {
      out << std::left << std::setw(10) << model::to_string(b.config.topology) << std::right
          << std::setw(16) << fmt("%.1f", b.power_on_cantilever * 1e6) << std::setw(14)
          << fmt("%.4f", b.snl.amplitude * 1e15) << std::setw(21)
          << fmt("%.2f", b.backaction.amplitude * 1e21) << std::setw(14)
          << fmt("%.4f", b.sql.amplitude * 1e15) << std::setw(21)
          << fmt("%.4f", b.squeezed_floor.amplitude * 1e15) << std::setw(22)
          << fmt("%.4f", b.variance_ratio_floor.amplitude * 1e15) << std::setw(15)
          << fmt("%.3f", model::squeezing_db(b.engine_variance)) << '\n';
    }
    return kOk;
  });
}

int cmd_variance(const VarianceOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const config::RunConfig cfg = resolve_config(opts);
    const auto& o = cfg.optics;
    const double closed = model::phase_sum_variance(o.squeeze_r(), o.eta, o.theta_p, o.theta_c, o.phi);
    const double engine = model::noise_variance(o);
    if (!(engine > 0.0)) throw NumericalError("engine variance is not positive");
    const double delta = std::abs(engine - closed);
    if (opts.json_stdout) {
      out << nlohmann::json{{"phase_sum_variance", closed},
                            {"engine_variance", engine},
                            {"abs_difference", delta},
                            {"squeezing_db", model::squeezing_db(engine)},
                            {"topology", model::to_string(o.topology)},
                            {"gain", o.gain},
                            {"squeeze_r", o.squeeze_r()}}
                 .dump(2)
          << '\n';
      return kOk;
    }
    out << "topology            " << model::to_string(o.topology) << '\n'
        << "gain                " << fmt("%.10g", o.gain) << "  (r = " << fmt("%.6f", o.squeeze_r()) << ")\n"
        << "phase_sum_variance  " << fmt("%.12f", closed) << '\n'
        << "engine_variance     " << fmt("%.12f", engine) << '\n'
        << "abs_difference      " << fmt("%.3e", delta) << '\n'
        << "squeezing           " << fmt("%.4f", model::squeezing_db(engine)) << " dB below SNL ("
        << fmt("%.4f", 10.0 * std::log10(engine)) << " dB rel. SNL)\n";
    return kOk;
  });
}

int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const config::RunConfig base = resolve_config(opts);
    const auto names = config::numeric_field_names();
    if (std::find(names.begin(), names.end(), opts.param) == names.end()) {
      std::string list;
      for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
      throw config::ConfigError(opts.param, "not a sweepable parameter; valid names: " + list);
    }
    if (opts.steps < 2) throw config::ConfigError("--steps", "must be >= 2");
    const auto dim = config::field_dimension(opts.param);
    double from = 0.0;
    double to = 0.0;
    try {
      from = config::parse_quantity(opts.from, dim, false);
      to = config::parse_quantity(opts.to, dim, false);
    } catch (const config::ConfigError& e) {
      throw config::ConfigError("--from/--to", e.what());
    }
    if (opts.log && !(from > 0.0 && to > 0.0)) {
      throw config::ConfigError("--log", "logarithmic sweeps need positive endpoints");
    }

    std::vector<SweepRow> rows(opts.steps);
    parallel_for(opts.steps, opts.jobs, [&](std::size_t i) {
      const double u = static_cast<double>(i) / static_cast<double>(opts.steps - 1);
      const double value = opts.log ? from * std::pow(to / from, u) : from + (to - from) * u;
      config::RunConfig cfg = base;
      config::set_numeric(cfg, opts.param, value);
      const auto& o = cfg.optics;
      rows[i] = {value,
                 model::phase_sum_variance(o.squeeze_r(), o.eta, o.theta_p, o.theta_c, o.phi),
                 model::noise_variance(o),
                 model::snr_db(o, cfg.cantilever.displacement_amplitude()),
                 budget::budget_report(o, cfg.cantilever)};
    });

    std::ostringstream csv;
    csv << "step,param,value_si,phase_sum_variance,engine_variance,abs_delta,squeezing_db,snr_db,"
           "snl_asd_m,backaction_asd_m,sql_asd_m,squeezed_floor_asd_m,variance_ratio_floor_asd_m\r\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      csv << i << ',' << opts.param << ',' << csv_number(r.value) << ',' << csv_number(r.closed) << ','
          << csv_number(r.engine) << ',' << csv_number(std::abs(r.engine - r.closed)) << ','
          << csv_number(model::squeezing_db(r.engine)) << ',' << csv_number(r.snr) << ','
          << csv_number(r.budget.snl.amplitude) << ',' << csv_number(r.budget.backaction.amplitude)
          << ',' << csv_number(r.budget.sql.amplitude) << ','
          << csv_number(r.budget.squeezed_floor.amplitude) << ','
          << csv_number(r.budget.variance_ratio_floor.amplitude) << "\r\n";
    }
    if (opts.out_path.empty()) {
      out << csv.str();
    } else {
      write_file(opts.out_path, csv.str());
      out << "wrote " << rows.size() << " rows to " << opts.out_path << '\n';
    }
    return kOk;
  });
}

int cmd_spectrum(const SpectrumOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const config::RunConfig cfg = resolve_config(opts);
    const std::uint64_t seed = resolve_seed(opts.seed, cfg);
    const model::Scene scene = model::build_scene(cfg.optics);
    spectrum::SpectrumTrace trace = spectrum::acquire_trace(scene, cfg.cantilever, cfg.analyzer,
                                                            cfg.synthesis, seed, opts.jobs);
    std::ostringstream csv;
    spectrum::write_trace_csv(trace, csv);
    write_file(opts.out_prefix + ".csv", csv.str());
    write_file(opts.out_prefix + ".json", spectrum::trace_to_json(trace).dump(2) + "\n");
    for (const auto& w : trace.warnings) err << "warning: " << w << '\n';

    const double analytic_db = 10.0 * std::log10(model::noise_variance(cfg.optics));
    out << "seed " << seed << ", kernels " << kernels::active().name << '\n';
    const bool drive_in_span = cfg.cantilever.drive_amplitude_volts > 0.0 &&
                               cfg.cantilever.drive_freq >= trace.freq_hz.front() &&
                               cfg.cantilever.drive_freq <= trace.freq_hz.back();
    if (drive_in_span) {
      const auto snr = spectrum::extract_snr(trace, cfg.cantilever.drive_freq);
      out << "floor " << fmt("%.3f", snr.floor_db) << " dB rel. SNL (analytic "
          << fmt("%.3f", analytic_db) << " dB)\n"
          << "peak " << fmt("%.3f", snr.peak_db) << " dB at " << fmt("%.0f", snr.f_peak) << " Hz\n"
          << "snr " << fmt("%.3f", snr.snr_db) << " dB (noise-corrected "
          << fmt("%.3f", snr.corrected_snr_db) << " dB)\n";
    } else {
      out << "floor " << fmt("%.3f", spectrum::floor_db(trace, -1.0)) << " dB rel. SNL (analytic "
          << fmt("%.3f", analytic_db) << " dB)\n";
    }
    out << "wrote " << opts.out_prefix << ".csv, " << opts.out_prefix << ".json\n";
    return kOk;
  });
}

FigureResult reproduce_figure(Figure figure, const config::RunConfig& base, std::uint64_t seed,
                              std::size_t jobs) {
  config::RunConfig squeezed = base;
  squeezed.optics.topology =
      figure == Figure::Fig2 ? model::Topology::ProbeOnCantilever : model::Topology::LoOnCantilever;
  squeezed.seed = seed;
  squeezed.validate();
  config::RunConfig coherent = squeezed;
  coherent.optics.gain = 1.0;

  FigureResult result;
  result.figure = figure;
  result.config = squeezed;
  result.seed = seed;
  result.analytic_floor_db = 10.0 * std::log10(model::noise_variance(squeezed.optics));

  const std::size_t n_drive = kFigureDriveVolts.size();
  // Tasks: 2 per drive level (squeezed, coherent) followed by the two floors.
  std::vector<spectrum::SpectrumTrace> traces(2 * n_drive + 2);
  parallel_for(traces.size(), jobs, [&](std::size_t task) {
    const bool is_floor = task >= 2 * n_drive;
    const bool is_squeezed = task % 2 == 0;
    config::RunConfig cfg = is_squeezed ? squeezed : coherent;
    cfg.cantilever.drive_amplitude_volts = is_floor ? 0.0 : kFigureDriveVolts[task / 2];
    const model::Scene scene = model::build_scene(cfg.optics);
    traces[task] = spectrum::acquire_trace(scene, cfg.cantilever, cfg.analyzer, cfg.synthesis,
                                           rng::derive_seed(seed, task));
  });

  const double f_drive = squeezed.cantilever.drive_freq;
  for (std::size_t i = 0; i < n_drive; ++i) {
    DriveResult d{};
    d.drive_volts = kFigureDriveVolts[i];
    d.squeezed = spectrum::extract_snr(traces[2 * i], f_drive);
    d.coherent = spectrum::extract_snr(traces[2 * i + 1], f_drive);
    d.floor_squeezed_db = d.squeezed.floor_db;
    d.floor_coherent_db = d.coherent.floor_db;
    const double nbw = traces[2 * i].enbw_bins * traces[2 * i].bin_width;
    for (auto [cfg, slot] : {std::pair{&squeezed, &d.analytic_snr_squeezed_db},
                             std::pair{&coherent, &d.analytic_snr_coherent_db}}) {
      model::TnliConfig optics = cfg->optics;
      optics.delta_f = nbw;
      *slot = model::snr_db(optics, d.drive_volts * cfg->cantilever.volts_to_meters);
    }
    result.drives.push_back(d);
    result.squeezed_traces.push_back(std::move(traces[2 * i]));
    result.coherent_traces.push_back(std::move(traces[2 * i + 1]));
  }
  result.floor_squeezed = std::move(traces[2 * n_drive]);
  result.floor_coherent = std::move(traces[2 * n_drive + 1]);
  return result;
}

int cmd_reproduce(const ReproduceOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const config::RunConfig cfg = resolve_config(opts);
    const std::uint64_t seed = resolve_seed(opts.seed, cfg);
    const fs::path dir(opts.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
      throw config::IoError("cannot create output directory '" + dir.string() + "'");
    }

    const FigureResult res = reproduce_figure(opts.figure, cfg, seed, opts.jobs);
    const std::string tag(to_string(opts.figure));
    std::vector<std::string> outputs;
    auto emit_trace = [&](const spectrum::SpectrumTrace& trace, const std::string& stem) {
      std::ostringstream csv;
      spectrum::write_trace_csv(trace, csv);
      write_file(dir / (stem + ".csv"), csv.str());
      write_file(dir / (stem + ".json"), spectrum::trace_to_json(trace).dump(2) + "\n");
      outputs.push_back(stem + ".csv");
      outputs.push_back(stem + ".json");
    };
    for (std::size_t i = 0; i < res.drives.size(); ++i) {
      char mv[16];
      std::snprintf(mv, sizeof mv, "%03.0fmV", res.drives[i].drive_volts * 1e3);
      emit_trace(res.squeezed_traces[i], tag + "_squeezed_" + mv);
      emit_trace(res.coherent_traces[i], tag + "_coherent_" + mv);
    }
    emit_trace(res.floor_squeezed, tag + "_floor_squeezed");
    emit_trace(res.floor_coherent, tag + "_floor_coherent");

    std::ostringstream snr;
    snr << "drive_mv,snr_squeezed_db,snr_coherent_db,snr_gap_db,raw_snr_squeezed_db,"
           "raw_snr_coherent_db,floor_squeezed_db,floor_coherent_db,analytic_snr_squeezed_db,"
           "analytic_snr_coherent_db\r\n";
    for (const auto& d : res.drives) {
      snr << csv_number(d.drive_volts * 1e3) << ',' << csv_number(d.squeezed.corrected_snr_db) << ','
          << csv_number(d.coherent.corrected_snr_db) << ','
          << csv_number(d.squeezed.corrected_snr_db - d.coherent.corrected_snr_db) << ','
          << csv_number(d.squeezed.snr_db) << ',' << csv_number(d.coherent.snr_db) << ','
          << csv_number(d.floor_squeezed_db) << ',' << csv_number(d.floor_coherent_db) << ','
          << csv_number(d.analytic_snr_squeezed_db) << ',' << csv_number(d.analytic_snr_coherent_db)
          << "\r\n";
    }
    write_file(dir / (tag + "_snr.csv"), snr.str());
    outputs.push_back(tag + "_snr.csv");

    nlohmann::json manifest = {{"tool", "tnli"},
                               {"version", TNLI_VERSION},
                               {"command", "reproduce"},
                               {"figure", tag},
                               {"seed", seed},
                               {"timestamp", iso_timestamp(opts.timestamp)},
                               {"kernels", kernels::active().name},
                               {"config_snapshot", config::to_text(res.config)},
                               {"outputs", outputs}};
    manifest["outputs"].push_back("manifest.json");
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    out << tag << " (" << model::to_string(res.config.optics.topology) << " on cantilever), seed "
        << seed << ", analytic floor " << fmt("%.3f", res.analytic_floor_db) << " dB rel. SNL\n";
    out << "drive[mV]  floor_sq[dB]  floor_coh[dB]  snr_sq[dB]  snr_coh[dB]  gap[dB]\n";
    for (const auto& d : res.drives) {
      out << std::setw(9) << fmt("%.0f", d.drive_volts * 1e3) << std::setw(14)
          << fmt("%.3f", d.floor_squeezed_db) << std::setw(15) << fmt("%.3f", d.floor_coherent_db)
          << std::setw(12) << fmt("%.2f", d.squeezed.corrected_snr_db) << std::setw(13)
          << fmt("%.2f", d.coherent.corrected_snr_db) << std::setw(9)
          << fmt("%.2f", d.squeezed.corrected_snr_db - d.coherent.corrected_snr_db) << '\n';
    }
    out << "wrote " << outputs.size() << " files to " << dir.string() << '\n';
    return kOk;
  });
}

}  // namespace tnli::cli
