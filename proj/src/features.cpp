#include "emomix/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <fmt/format.h>
#include <unsupported/Eigen/FFT>

#include "emomix/error.hpp"
#include "emomix/kernels.hpp"

namespace emomix {

std::size_t FrameSpec::frame_samples(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(frame_length * sample_rate));
}

std::size_t FrameSpec::hop_samples(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(hop_length * sample_rate));
}

void FrameSpec::validate() const {
  if (!(hop_length > 0.0) || !(hop_length <= frame_length) || !std::isfinite(frame_length)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("frame spec needs 0 < hop ({}) <= frame ({})", hop_length,
                            frame_length));
  }
}

std::size_t frame_count(std::size_t n, std::size_t frame, std::size_t hop) {
  if (frame == 0 || hop == 0) {
    throw Error(ErrorCode::kInvalidArgument, "frame and hop must be at least one sample");
  }
  if (n < frame) {
    throw Error(ErrorCode::kAudioTooShort,
                fmt::format("{} samples is shorter than one {}-sample frame", n, frame));
  }
  return (n - frame) / hop + 1;
}

std::vector<double> make_window(Window window, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (length < 2 || window == Window::kRectangular) return w;
  const double denom = static_cast<double>(length - 1);
  const double a0 = window == Window::kHann ? 0.5 : 0.54;
  for (std::size_t i = 0; i < length; ++i) {
    w[i] = a0 - (1.0 - a0) * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom);
  }
  return w;
}

FrameMatrix frame_signal(const AudioBuffer& audio, const FrameSpec& spec) {
  spec.validate();
  const std::size_t len = spec.frame_samples(audio.sample_rate);
  const std::size_t hop = spec.hop_samples(audio.sample_rate);
  const std::size_t count = frame_count(audio.samples.size(), len, hop);
  const std::vector<double> window = make_window(spec.window, len);
  FrameMatrix frames(count, len);
  for (std::size_t t = 0; t < count; ++t) {
    auto out = frames.frame(t);
    const double* src = audio.samples.data() + t * hop;
    for (std::size_t i = 0; i < len; ++i) out[i] = src[i] * window[i];
  }
  return frames;
}

double zero_crossing_rate(std::span<const double> frame) {
  if (frame.size() < 2) return 0.0;
  std::size_t crossings = 0;
  for (std::size_t i = 1; i < frame.size(); ++i) {
    if ((frame[i - 1] >= 0.0) != (frame[i] >= 0.0)) ++crossings;
  }
  return static_cast<double>(crossings) / static_cast<double>(frame.size() - 1);
}

double rms_energy(std::span<const double> frame) {
  if (frame.empty()) return 0.0;
  double sum = 0.0;
  for (double s : frame) sum += s * s;
  return std::sqrt(sum / static_cast<double>(frame.size()));
}

// ---------------------------------------------------------------------------
// Pitch

namespace {

// Lags whose normalized autocorrelation reaches this fraction of the global
// peak are candidates; the shortest one wins to avoid sub-octave picks.
constexpr double kOctaveCandidateRatio = 0.9;
constexpr double kSilenceMeanSquare = 1e-12;

void check_pitch_range(const PitchOptions& o, int sample_rate) {
  if (!(o.f_min > 0.0) || !(o.f_min < o.f_max) || !(o.f_max < sample_rate / 2.0)) {
    throw Error(ErrorCode::kInvalidRange,
                fmt::format("pitch range needs 0 < f_min ({}) < f_max ({}) < {}", o.f_min,
                            o.f_max, sample_rate / 2.0));
  }
}

}  // namespace

PitchFrame estimate_frame_f0(std::span<const double> frame, int sample_rate,
                             const PitchOptions& options) {
  const std::size_t n = frame.size();
  const auto min_lag = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::floor(sample_rate / options.f_max)));
  const auto max_lag = static_cast<std::size_t>(std::ceil(sample_rate / options.f_min));
  if (max_lag + 2 >= n) {
    throw Error(ErrorCode::kInvalidRange,
                fmt::format("frame of {} samples cannot resolve f_min = {} Hz", n, options.f_min));
  }

  double mean = 0.0;
  for (double s : frame) mean += s;
  mean /= static_cast<double>(n);
  std::vector<double> y(n);
  double energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = frame[i] - mean;
    energy += y[i] * y[i];
  }
  if (energy / static_cast<double>(n) < kSilenceMeanSquare) return {};

  // prefix[k] = sum of y[0..k)^2
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + y[i] * y[i];

  const std::size_t lo = min_lag - 1;
  const std::size_t hi = max_lag + 1;
  std::vector<double> r(hi + 1, 0.0);
  for (std::size_t lag = lo; lag <= hi; ++lag) {
    const std::size_t m = n - lag;
    double num = 0.0;
    for (std::size_t i = 0; i < m; ++i) num += y[i] * y[i + lag];
    const double e1 = prefix[m];
    const double e2 = prefix[n] - prefix[lag];
    const double den = std::sqrt(e1 * e2);
    r[lag] = den > 0.0 ? num / den : 0.0;
  }

  double peak = -1.0;
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) peak = std::max(peak, r[lag]);
  PitchFrame out;
  out.voicing = std::clamp(peak, 0.0, 1.0);
  if (peak < options.voicing_threshold) return out;

  std::size_t best = 0;
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
    if (r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] >= kOctaveCandidateRatio * peak) {
      best = lag;
      break;
    }
  }
  if (best == 0) {
    // Peak sits on the search boundary with no interior maximum.
    for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
      if (r[lag] == peak) {
        best = lag;
        break;
      }
    }
  }

  const double a = r[best - 1], b = r[best], c = r[best + 1];
  const double curvature = a - 2.0 * b + c;
  double shift = curvature < 0.0 ? 0.5 * (a - c) / curvature : 0.0;
  shift = std::clamp(shift, -0.5, 0.5);
  const double f0 = sample_rate / (static_cast<double>(best) + shift);
  out.f0 = std::clamp(f0, options.f_min, options.f_max);
  return out;
}

F0Contour estimate_f0(const AudioBuffer& audio, const FrameSpec& spec,
                      const PitchOptions& options) {
  check_pitch_range(options, audio.sample_rate);
  spec.validate();
  const std::size_t len = spec.frame_samples(audio.sample_rate);
  const std::size_t hop = spec.hop_samples(audio.sample_rate);
  const std::size_t count = frame_count(audio.samples.size(), len, hop);
  F0Contour contour;
  contour.frame_spec = spec;
  contour.values.resize(count);
  for (std::size_t t = 0; t < count; ++t) {
    std::span<const double> frame(audio.samples.data() + t * hop, len);
    contour.values[t] = estimate_frame_f0(frame, audio.sample_rate, options).f0;
  }
  return contour;
}

F0Contour estimate_f0(const AudioBuffer& audio, const FrameSpec& spec, double f_min,
                      double f_max) {
  PitchOptions options;
  options.f_min = f_min;
  options.f_max = f_max;
  return estimate_f0(audio, spec, options);
}

// ---------------------------------------------------------------------------
// Spectral front end

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(int n_mels, int n_fft, int sample_rate, double f_low,
                             double f_high)
    : n_mels_(n_mels), n_fft_(n_fft), n_bins_(n_fft / 2 + 1) {
  if (n_mels < 1 || n_fft < 2 || !(f_low >= 0.0) || !(f_high > f_low) ||
      f_high > sample_rate / 2.0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid mel filterbank configuration");
  }
  weights_.assign(static_cast<std::size_t>(n_mels_) * n_bins_, 0.0);
  first_bin_.assign(n_mels_, n_bins_);
  last_bin_.assign(n_mels_, -1);

  const double mel_lo = hz_to_mel(f_low);
  const double mel_hi = hz_to_mel(f_high);
  std::vector<double> edges(n_mels_ + 2);
  for (int i = 0; i < n_mels_ + 2; ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_mels_ + 1));
  }
  const double bin_hz = static_cast<double>(sample_rate) / n_fft_;
  for (int m = 0; m < n_mels_; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (int k = 0; k < n_bins_; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      if (w > 0.0) {
        weights_[static_cast<std::size_t>(m) * n_bins_ + k] = w;
        first_bin_[m] = std::min(first_bin_[m], k);
        last_bin_[m] = std::max(last_bin_[m], k);
      }
    }
  }
}

void MelFilterbank::apply(std::span<const double> power, std::span<double> out) const {
  for (int m = 0; m < n_mels_; ++m) {
    double sum = 0.0;
    const double* w = weights_.data() + static_cast<std::size_t>(m) * n_bins_;
    for (int k = first_bin_[m]; k <= last_bin_[m]; ++k) sum += w[k] * power[k];
    out[m] = sum;
  }
}

std::vector<double> dct_basis(int n_inputs, int first, int count) {
  std::vector<double> basis(static_cast<std::size_t>(count) * n_inputs);
  const double scale = std::sqrt(2.0 / n_inputs);
  for (int c = 0; c < count; ++c) {
    const int k = first + c;
    const double norm = k == 0 ? std::sqrt(0.5) * scale : scale;
    for (int j = 0; j < n_inputs; ++j) {
      basis[static_cast<std::size_t>(c) * n_inputs + j] =
          norm * std::cos(std::numbers::pi * k * (j + 0.5) / n_inputs);
    }
  }
  return basis;
}

struct SpectralAnalyzer::Fft {
  Eigen::FFT<double> engine;
  std::vector<std::complex<double>> spectrum;
};

namespace {

int next_pow2(std::size_t n) {
  int p = 1;
  while (static_cast<std::size_t>(p) < n) p <<= 1;
  return p;
}

}  // namespace

SpectralAnalyzer::SpectralAnalyzer(std::size_t frame_length, int sample_rate, int n_mels)
    : frame_length_(frame_length),
      filterbank_(n_mels, next_pow2(frame_length), sample_rate, 0.0, sample_rate / 2.0),
      fft_(std::make_unique<Fft>()),
      padded_(filterbank_.n_fft(), 0.0),
      power_(filterbank_.n_fft() / 2 + 1, 0.0) {}

SpectralAnalyzer::~SpectralAnalyzer() = default;
SpectralAnalyzer::SpectralAnalyzer(SpectralAnalyzer&&) noexcept = default;
SpectralAnalyzer& SpectralAnalyzer::operator=(SpectralAnalyzer&&) noexcept = default;

void SpectralAnalyzer::log_mel(std::span<const double> windowed, std::span<double> out) {
  if (windowed.size() != frame_length_) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("frame has {} samples, analyzer expects {}", windowed.size(),
                            frame_length_));
  }
  std::copy(windowed.begin(), windowed.end(), padded_.begin());
  std::fill(padded_.begin() + static_cast<std::ptrdiff_t>(frame_length_), padded_.end(), 0.0);
  fft_->engine.fwd(fft_->spectrum, padded_);
  for (std::size_t k = 0; k < power_.size(); ++k) power_[k] = std::norm(fft_->spectrum[k]);
  filterbank_.apply(power_, out);
  for (int m = 0; m < filterbank_.n_mels(); ++m) out[m] = std::log(std::max(out[m], kLogFloor));
}

void SpectralAnalyzer::cepstrum(std::span<const double> log_mel, int n_coeffs,
                                std::span<double> out) {
  const int n = filterbank_.n_mels();
  if (n_coeffs < 1 || n_coeffs >= n) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("cepstral order {} must be in [1, {})", n_coeffs, n));
  }
  if (dct_count_ != n_coeffs) {
    dct_ = dct_basis(n, 1, n_coeffs);
    dct_count_ = n_coeffs;
  }
  // Rows k >= 1 sum to zero, so shifting by log_mel[0] changes nothing
  // analytically and makes a flat spectrum give exact zeros.
  const double ref = log_mel[0];
  for (int c = 0; c < n_coeffs; ++c) {
    const double* row = dct_.data() + static_cast<std::size_t>(c) * n;
    double sum = 0.0;
    for (int j = 0; j < n; ++j) sum += row[j] * (log_mel[j] - ref);
    out[c] = sum;
  }
}

std::vector<double> mfcc(std::span<const double> windowed_frame, int sample_rate, int n_coeffs,
                         int n_mels) {
  SpectralAnalyzer analyzer(windowed_frame.size(), sample_rate, n_mels);
  std::vector<double> log_mel(n_mels);
  analyzer.log_mel(windowed_frame, log_mel);
  std::vector<double> out(n_coeffs);
  analyzer.cepstrum(log_mel, n_coeffs, out);
  return out;
}

// ---------------------------------------------------------------------------
// Tracks and functionals

LldTrack delta(const LldTrack& track) {
  LldTrack out{track.name + "_de", std::vector<double>(track.values.size(), 0.0)};
  const std::size_t n = track.values.size();
  if (n < 2) return out;
  for (std::size_t t = 0; t < n; ++t) {
    const double next = track.values[std::min(t + 1, n - 1)];
    const double prev = track.values[t == 0 ? 0 : t - 1];
    out.values[t] = (next - prev) / 2.0;
  }
  return out;
}

FunctionalValues functionals(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) {
    throw Error(ErrorCode::kTrackTooShort,
                fmt::format("functionals need at least 2 frames, got {}", n));
  }
  FunctionalValues f{};
  const auto [min_it, max_it] = std::minmax_element(x.begin(), x.end());
  // minmax_element returns the last maximum; positions use the first one.
  const auto first_max = std::max_element(x.begin(), x.end());
  const double lo = *min_it, hi = *max_it;
  const double last = static_cast<double>(n - 1);
  f[kMin] = lo;
  f[kMax] = hi;
  f[kRange] = hi - lo;
  f[kMinPos] = static_cast<double>(min_it - x.begin()) / last;
  f[kMaxPos] = static_cast<double>(first_max - x.begin()) / last;

  if (lo == hi) {
    f[kMean] = lo;
    f[kOffset] = lo;
    return f;
  }

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  f[kMean] = mean;
  f[kStdDev] = std::sqrt(m2);
  if (m2 > 0.0) {
    f[kSkewness] = m3 / (m2 * std::sqrt(m2));
    f[kKurtosis] = m4 / (m2 * m2);
  }

  const double t_mean = last / 2.0;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double dt = static_cast<double>(t) - t_mean;
    sxx += dt * dt;
    sxy += dt * (x[t] - mean);
  }
  const double slope = sxy / sxx;
  const double offset = mean - slope * t_mean;
  double sse = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double e = x[t] - (offset + slope * static_cast<double>(t));
    sse += e * e;
  }
  f[kSlope] = slope;
  f[kOffset] = offset;
  f[kRegressionMse] = sse / static_cast<double>(n);
  return f;
}

namespace {

const std::array<std::string, kNumLlds>& lld_names() {
  static const std::array<std::string, kNumLlds> names = [] {
    std::array<std::string, kNumLlds> out;
    out[0] = "zcr";
    out[1] = "rms";
    out[2] = "f0";
    out[3] = "voicing";
    for (int i = 0; i < kMfccCoeffs; ++i) out[4 + i] = fmt::format("mfcc{}", i + 1);
    return out;
  }();
  return names;
}

constexpr std::array<const char*, kNumFunctionals> kFunctionalNames = {
    "mean", "stddev", "kurtosis", "skewness", "min",    "max",
    "range", "minpos", "maxpos",  "slope",    "offset", "linregmse"};

}  // namespace

std::vector<LldTrack> extract_llds(const AudioBuffer& audio, const ExtractOptions& options) {
  validate_audio(audio);
  check_pitch_range(options.pitch, audio.sample_rate);
  options.frame.validate();
  const kernels::LldMatrix m = options.parallel
                                   ? kernels::compute_llds(audio, options.frame, options.pitch)
                                   : kernels::compute_llds_serial(audio, options.frame,
                                                                  options.pitch);
  std::vector<LldTrack> tracks(kNumLlds);
  for (std::size_t l = 0; l < kNumLlds; ++l) {
    tracks[l].name = lld_names()[l];
    tracks[l].values.resize(m.frames);
    for (std::size_t t = 0; t < m.frames; ++t) tracks[l].values[t] = m.at(t, l);
  }
  return tracks;
}

FeatureVector extract_feature_vector(const AudioBuffer& audio, const ExtractOptions& options) {
  validate_audio(audio);
  const std::size_t len = options.frame.frame_samples(audio.sample_rate);
  const std::size_t hop = options.frame.hop_samples(audio.sample_rate);
  if (audio.samples.size() < len + hop) {
    throw Error(ErrorCode::kAudioTooShort,
                fmt::format("{} samples gives fewer than the 2 frames needed for functionals",
                            audio.samples.size()));
  }
  const std::vector<LldTrack> tracks = extract_llds(audio, options);
  FeatureVector fv;
  fv.values.reserve(kFeatureDim);
  for (const LldTrack& track : tracks) {
    const FunctionalValues raw = functionals(track);
    const FunctionalValues de = functionals(delta(track));
    fv.values.insert(fv.values.end(), raw.begin(), raw.end());
    fv.values.insert(fv.values.end(), de.begin(), de.end());
  }
  return fv;
}

std::vector<std::string> feature_names() {
  std::vector<std::string> names;
  names.reserve(kFeatureDim);
  for (const std::string& lld : lld_names()) {
    for (const char* suffix : {"", "_de"}) {
      for (const char* fn : kFunctionalNames) names.push_back(fmt::format("{}{}_{}", lld, suffix, fn));
    }
  }
  return names;
}

MelSpectrogram mel_spectrogram(const AudioBuffer& audio, const FrameSpec& spec, bool parallel) {
  validate_audio(audio);
  spec.validate();
  MelSpectrogram out;
  out.frame_spec = spec;
  out.n_bands = kMelBands;
  out.values = parallel ? kernels::compute_log_mel(audio, spec, kMelBands)
                        : kernels::compute_log_mel_serial(audio, spec, kMelBands);
  out.n_frames = out.values.size() / kMelBands;
  return out;
}

}  // namespace emomix
