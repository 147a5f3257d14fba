#include "tnli/spectrum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>

#include "tnli/constants.hpp"
#include "tnli/errors.hpp"
#include "tnli/kernels.hpp"
#include "tnli/parallel.hpp"
#include "tnli/rng.hpp"
#include "tnli/spectrum_io.hpp"

namespace tnli::spectrum {
namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {
    if (plan_ == nullptr) throw NumericalError("FFTW failed to create a plan");
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    std::lock_guard lock(plan_mutex());
    fftw_destroy_plan(plan_);
  }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

Plan make_r2c(std::size_t n, double* in, fftw_complex* out) {
  std::lock_guard lock(plan_mutex());
  return Plan(fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE));
}

Plan make_c2r(std::size_t n, fftw_complex* in, double* out) {
  std::lock_guard lock(plan_mutex());
  return Plan(fftw_plan_dft_c2r_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE));
}

std::vector<double> hann_periodic(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(constants::two_pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

double to_db(double lin) {
  return lin > 0.0 ? 10.0 * std::log10(lin) : -std::numeric_limits<double>::infinity();
}

void refresh_db(SpectrumTrace& trace) {
  trace.power_db.resize(trace.power_lin.size());
  std::transform(trace.power_lin.begin(), trace.power_lin.end(), trace.power_db.begin(), to_db);
}

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

// Adds colored noise with one-sided density psd(f) (trace units) to `samples`.
void add_technical_noise(std::vector<double>& samples, double sample_rate,
                         const std::function<double(double)>& psd, std::uint64_t seed) {
  const std::size_t n = samples.size();
  const std::size_t bins = n / 2 + 1;
  auto real = fftw_buffer<double>(n);
  auto spec = fftw_buffer<fftw_complex>(bins);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < n; ++i) real[i] = normal(gen);
  {
    Plan forward = make_r2c(n, real.get(), spec.get());
    forward.execute();
  }
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * sample_rate / static_cast<double>(n);
    const double density = psd(f);
    if (!(density >= 0.0) || !std::isfinite(density)) {
      throw std::invalid_argument("technical_psd must return finite non-negative densities");
    }
    const double g = std::sqrt(density) / static_cast<double>(n);
    spec[k][0] *= g;
    spec[k][1] *= g;
  }
  Plan inverse = make_c2r(n, spec.get(), real.get());
  inverse.execute();
  for (std::size_t i = 0; i < n; ++i) samples[i] += real[i];
}

}  // namespace

void AnalyzerSettings::validate() const {
  if (!(rbw > 0.0)) throw std::invalid_argument("analyzer.rbw: must be > 0");
  if (!(vbw > 0.0)) throw std::invalid_argument("analyzer.vbw: must be > 0");
  if (!(sweep_time > 0.0)) throw std::invalid_argument("analyzer.sweep_time: must be > 0");
  if (averages < 1) throw std::invalid_argument("analyzer.averages: must be >= 1");
  if (!std::isfinite(center) || center < 0.0) throw std::invalid_argument("analyzer.center: must be >= 0");
  if (!std::isfinite(span)) throw std::invalid_argument("analyzer.span: must be finite");
}

void SynthesisSettings::validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw std::invalid_argument("synthesis.sample_rate: must be > 0");
  }
  if (!(record_duration > 0.0) || !std::isfinite(record_duration)) {
    throw std::invalid_argument("synthesis.record_duration: must be > 0");
  }
}

double tone_amplitude(double mean_response, double sample_rate) {
  // One-sided density of per-sample white noise V is 2V/fs; the physical
  // observable has density Var per Hz, so powers scale by 2/fs.
  return mean_response * std::sqrt(2.0 / sample_rate);
}

PhotocurrentRecord sample_photocurrent(const model::Scene& scene,
                                       const model::CantileverParams& cantilever,
                                       double sample_rate, double duration, std::uint64_t seed,
                                       const SampleOptions& options) {
  cantilever.validate();
  if (!(sample_rate > 0.0) || !(duration > 0.0)) {
    throw std::invalid_argument("sample_photocurrent: sample_rate and duration must be > 0");
  }
  if (!(sample_rate > 2.0 * cantilever.drive_freq)) {
    throw std::invalid_argument("sample_photocurrent: sample rate " + std::to_string(sample_rate) +
                                " Hz undersamples the drive at " +
                                std::to_string(cantilever.drive_freq) + " Hz");
  }
  const auto count = static_cast<std::size_t>(std::llround(sample_rate * duration));
  if (count < kMinRecordSamples) {
    throw std::invalid_argument("sample_photocurrent: record of " + std::to_string(count) +
                                " samples is shorter than the minimum " +
                                std::to_string(kMinRecordSamples));
  }

  const Eigen::LLT<Eigen::MatrixXd> llt(scene.state.cov());
  if (llt.info() != Eigen::Success) {
    throw NumericalError("sample_photocurrent: scene covariance is not positive definite");
  }
  const Eigen::VectorXd g = scene.comb.observable_vector();
  const Eigen::VectorXd coeffs = llt.matrixL().transpose() * g;
  const double offset = g.dot(scene.state.mean());
  const std::size_t dim = static_cast<std::size_t>(coeffs.size());

  const double phase = model::displacement_to_phase(cantilever.displacement_amplitude(),
                                                    scene.config.wavelength);
  const double amplitude =
      tone_amplitude(model::signal_response(scene.config, phase), sample_rate);
  const double cycles_per_sample = cantilever.drive_freq / sample_rate;

  const auto& k = kernels::active();
  PhotocurrentRecord rec{std::vector<double>(count), sample_rate, seed};
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;

  constexpr std::size_t block = 4096;
  std::vector<double> streams(dim * block);
  std::vector<double> tone(block);
  for (std::size_t start = 0; start < count; start += block) {
    const std::size_t n = std::min(block, count - start);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < dim; ++j) streams[j * block + i] = normal(gen);
    }
    k.mix_streams(coeffs.data(), dim, streams.data(), block, offset, rec.samples.data() + start, n);
    if (amplitude != 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        double cyc = cycles_per_sample * static_cast<double>(start + i);
        cyc -= std::floor(cyc);
        tone[i] = std::sin(constants::two_pi * cyc);
      }
      k.axpy(amplitude, tone.data(), rec.samples.data() + start, n);
    }
  }
  if (options.technical_psd) {
    add_technical_noise(rec.samples, sample_rate, options.technical_psd,
                        rng::derive_seed(seed, 0x7ec4ULL));
  }
  return rec;
}

std::vector<double> sample_quadratures(const gaussian::GaussianState& state, std::size_t count,
                                       std::uint64_t seed) {
  const Eigen::LLT<Eigen::MatrixXd> llt(state.cov());
  if (llt.info() != Eigen::Success) {
    throw NumericalError("sample_quadratures: covariance is not positive definite");
  }
  const Eigen::MatrixXd lower = llt.matrixL();
  const std::size_t dim = static_cast<std::size_t>(lower.rows());
  std::vector<double> z(dim * count);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < dim; ++j) z[j * count + i] = normal(gen);
  }
  const auto& k = kernels::active();
  std::vector<double> out(dim * count);
  std::vector<double> row(dim);
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t j = 0; j < dim; ++j) row[j] = lower(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
    k.mix_streams(row.data(), dim, z.data(), count, state.mean()[static_cast<Eigen::Index>(r)],
                  out.data() + r * count, count);
  }
  return out;
}

SpectrumTrace psd_estimate(const PhotocurrentRecord& record, double rbw) {
  if (!(rbw > 0.0) || !(record.sample_rate > 0.0)) {
    throw std::invalid_argument("psd_estimate: rbw and sample rate must be > 0");
  }
  const auto seg = static_cast<std::size_t>(std::llround(record.sample_rate / rbw));
  if (seg < 8) throw std::invalid_argument("psd_estimate: RBW too wide for the sample rate");
  const std::size_t hop = seg / 2;
  const std::size_t n = record.samples.size();
  const std::size_t segments = n >= seg ? (n - seg) / hop + 1 : 0;
  if (segments < 8) {
    throw std::invalid_argument("psd_estimate: record supports only " + std::to_string(segments) +
                                " segments at RBW " + std::to_string(rbw) + " Hz (need >= 8)");
  }

  const std::vector<double> window = hann_periodic(seg);
  double sum_w = 0.0;
  double sum_w2 = 0.0;
  for (double w : window) {
    sum_w += w;
    sum_w2 += w * w;
  }

  const std::size_t bins = seg / 2 + 1;
  auto in = fftw_buffer<double>(seg);
  auto out = fftw_buffer<fftw_complex>(bins);
  Plan plan = make_r2c(seg, in.get(), out.get());

  const auto& k = kernels::active();
  std::vector<double> acc(bins, 0.0);
  for (std::size_t s = 0; s < segments; ++s) {
    k.multiply(window.data(), record.samples.data() + s * hop, in.get(), seg);
    plan.execute();
    k.accumulate_power(&out[0][0], 1.0 / sum_w2, acc.data(), bins);
  }

  SpectrumTrace trace;
  trace.sample_rate = record.sample_rate;
  trace.bin_width = record.sample_rate / static_cast<double>(seg);
  trace.enbw_bins = static_cast<double>(seg) * sum_w2 / (sum_w * sum_w);
  trace.segment_length = seg;
  trace.segments = segments;
  trace.seed = record.seed;
  trace.settings.rbw = rbw;
  trace.settings.averages = 1;
  trace.settings.span = 0.0;
  trace.freq_hz.resize(bins);
  trace.power_lin.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    trace.freq_hz[b] = static_cast<double>(b) * trace.bin_width;
    trace.power_lin[b] = acc[b] / static_cast<double>(segments);
  }
  refresh_db(trace);
  return trace;
}

SpectrumTrace emulate_analyzer(std::span<const SpectrumTrace> draws, const AnalyzerSettings& settings) {
  settings.validate();
  if (draws.empty()) throw std::invalid_argument("emulate_analyzer: no draws");
  if (draws.size() != settings.averages) {
    throw std::invalid_argument("emulate_analyzer: got " + std::to_string(draws.size()) +
                                " draws for averages = " + std::to_string(settings.averages));
  }
  const SpectrumTrace& first = draws.front();
  for (const auto& d : draws) {
    if (d.freq_hz != first.freq_hz) {
      throw std::invalid_argument("emulate_analyzer: draws have different frequency grids");
    }
  }

  SpectrumTrace out;
  out.settings = settings;
  out.sample_rate = first.sample_rate;
  out.bin_width = first.bin_width;
  out.enbw_bins = first.enbw_bins;
  out.segment_length = first.segment_length;
  out.segments = first.segments;
  out.seed = first.seed;

  const double half = settings.span > 0.0 ? 0.5 * settings.span : std::numeric_limits<double>::infinity();
  const double tol = 1e-9 * first.bin_width;
  for (std::size_t b = 0; b < first.freq_hz.size(); ++b) {
    if (std::abs(first.freq_hz[b] - settings.center) > half + tol) continue;
    double sum = 0.0;
    for (const auto& d : draws) sum += d.power_lin[b];
    out.freq_hz.push_back(first.freq_hz[b]);
    out.power_lin.push_back(sum / static_cast<double>(draws.size()));
  }
  if (out.freq_hz.empty()) {
    throw std::invalid_argument("emulate_analyzer: span selects no frequency bins");
  }

  if (settings.vbw > settings.rbw) {
    out.warnings.push_back("vbw exceeds rbw; video filter bypassed");
  } else if (out.power_lin.size() > 1) {
    // A swept analyzer moves span/sweep_time Hz per second through a video
    // filter of time constant 1/(2 pi vbw): a single pole across bins.
    const double swept = settings.span > 0.0
                             ? settings.span
                             : out.freq_hz.back() - out.freq_hz.front() + out.bin_width;
    const double smoothing_hz = (swept / settings.sweep_time) / (constants::two_pi * settings.vbw);
    const double a = std::exp(-out.bin_width / smoothing_hz);
    for (std::size_t b = 1; b < out.power_lin.size(); ++b) {
      out.power_lin[b] = a * out.power_lin[b - 1] + (1.0 - a) * out.power_lin[b];
    }
  }
  refresh_db(out);
  return out;
}

SpectrumTrace acquire_trace(const model::Scene& scene, const model::CantileverParams& cantilever,
                            const AnalyzerSettings& analyzer, const SynthesisSettings& synthesis,
                            std::uint64_t seed, std::size_t jobs, const SampleOptions& options) {
  analyzer.validate();
  synthesis.validate();
  std::vector<SpectrumTrace> draws(analyzer.averages);
  parallel_for(draws.size(), jobs, [&](std::size_t d) {
    const PhotocurrentRecord rec =
        sample_photocurrent(scene, cantilever, synthesis.sample_rate, synthesis.record_duration,
                            rng::derive_seed(seed, d), options);
    draws[d] = psd_estimate(rec, analyzer.rbw);
  });
  SpectrumTrace trace = emulate_analyzer(draws, analyzer);
  trace.seed = seed;
  return trace;
}

double integrated_power(const SpectrumTrace& trace) {
  const std::size_t bins = trace.power_lin.size();
  if (bins < 2 || trace.segment_length != 2 * (bins - 1)) {
    throw std::invalid_argument("integrated_power: needs a full-band trace from psd_estimate");
  }
  double sum = trace.power_lin.front() + trace.power_lin.back();
  for (std::size_t b = 1; b + 1 < bins; ++b) sum += 2.0 * trace.power_lin[b];
  return sum / static_cast<double>(trace.segment_length);
}

double floor_db(const SpectrumTrace& trace, double f_exclude) {
  const double guard = 3.0 * std::max(trace.settings.rbw, trace.bin_width) + 1e-9 * trace.bin_width;
  std::vector<double> floor_bins;
  for (std::size_t b = 0; b < trace.freq_hz.size(); ++b) {
    if (f_exclude >= 0.0 && std::abs(trace.freq_hz[b] - f_exclude) <= guard) continue;
    floor_bins.push_back(trace.power_lin[b]);
  }
  if (floor_bins.size() < 3) {
    throw NumericalError("floor estimate needs >= 3 bins outside the guard band, have " +
                         std::to_string(floor_bins.size()));
  }
  return to_db(median(std::move(floor_bins)));
}

SnrEstimate extract_snr(const SpectrumTrace& trace, double f_drive) {
  const std::size_t bins = trace.freq_hz.size();
  if (bins == 0) throw std::invalid_argument("extract_snr: empty trace");
  const double lo = trace.freq_hz.front() - 0.5 * trace.bin_width;
  const double hi = trace.freq_hz.back() + 0.5 * trace.bin_width;
  if (!(f_drive >= lo && f_drive <= hi)) {
    throw std::invalid_argument("extract_snr: drive frequency " + std::to_string(f_drive) +
                                " Hz lies outside the trace span");
  }
  std::size_t nearest = 0;
  for (std::size_t b = 1; b < bins; ++b) {
    if (std::abs(trace.freq_hz[b] - f_drive) < std::abs(trace.freq_hz[nearest] - f_drive)) nearest = b;
  }
  std::size_t peak = nearest;
  for (std::size_t b = nearest > 0 ? nearest - 1 : 0; b <= std::min(bins - 1, nearest + 1); ++b) {
    if (trace.power_lin[b] > trace.power_lin[peak]) peak = b;
  }
  const double peak_lin = trace.power_lin[peak];
  if (!(peak_lin > 0.0) || !std::isfinite(peak_lin)) {
    throw NumericalError("extract_snr: peak bin at " + std::to_string(trace.freq_hz[peak]) +
                         " Hz holds a non-finite or non-positive power");
  }

  SnrEstimate est{};
  est.f_peak = trace.freq_hz[peak];
  est.peak_bin = peak;
  est.peak_db = to_db(peak_lin);
  est.floor_db = floor_db(trace, est.f_peak);
  est.snr_db = est.peak_db - est.floor_db;

  const double floor_lin = std::pow(10.0, est.floor_db / 10.0);
  double lobe = 0.0;
  const std::size_t first = peak >= 2 ? peak - 2 : 0;
  for (std::size_t b = first; b <= std::min(bins - 1, peak + 2); ++b) lobe += trace.power_lin[b] - floor_lin;
  est.corrected_snr_db = to_db(lobe / (trace.enbw_bins * floor_lin));
  return est;
}

void write_trace_csv(const SpectrumTrace& trace, std::ostream& out) {
  const auto& s = trace.settings;
  out << std::setprecision(17);
  out << "# tnli spectrum trace\n";
  out << "# seed=" << trace.seed << "\n";
  out << "# rbw_hz=" << s.rbw << "\n";
  out << "# vbw_hz=" << s.vbw << "\n";
  out << "# sweep_time_s=" << s.sweep_time << "\n";
  out << "# averages=" << s.averages << "\n";
  out << "# center_hz=" << s.center << "\n";
  out << "# span_hz=" << s.span << "\n";
  out << "# sample_rate_hz=" << trace.sample_rate << "\n";
  out << "# bin_width_hz=" << trace.bin_width << "\n";
  out << "# enbw_bins=" << trace.enbw_bins << "\n";
  out << "# segment_length=" << trace.segment_length << "\n";
  out << "# segments_per_draw=" << trace.segments << "\n";
  out << "freq_hz,power_db_rel_snl\n";
  for (std::size_t b = 0; b < trace.freq_hz.size(); ++b) {
    out << trace.freq_hz[b] << ',' << trace.power_db[b] << '\n';
  }
}

nlohmann::json settings_to_json(const AnalyzerSettings& s) {
  return {{"rbw_hz", s.rbw},           {"vbw_hz", s.vbw},       {"sweep_time_s", s.sweep_time},
          {"averages", s.averages},    {"center_hz", s.center}, {"span_hz", s.span}};
}

nlohmann::json trace_to_json(const SpectrumTrace& trace) {
  return {{"settings", settings_to_json(trace.settings)},
          {"seed", trace.seed},
          {"sample_rate_hz", trace.sample_rate},
          {"bin_width_hz", trace.bin_width},
          {"enbw_bins", trace.enbw_bins},
          {"segment_length", trace.segment_length},
          {"segments_per_draw", trace.segments},
          {"warnings", trace.warnings},
          {"freq_hz", trace.freq_hz},
          {"power_db_rel_snl", trace.power_db}};
}

}  // namespace tnli::spectrum
