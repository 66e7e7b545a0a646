#include "emomix/kernels.hpp"

#include <cmath>

#include "emomix/error.hpp"

namespace emomix::kernels {

namespace {

struct LldScratch {
  explicit LldScratch(std::size_t len, int sample_rate)
      : analyzer(len, sample_rate, kMfccMels), emphasized(len), log_mel(kMfccMels) {}
  SpectralAnalyzer analyzer;
  std::vector<double> emphasized;
  std::vector<double> log_mel;
};

// One row of the LLD matrix from one raw (unwindowed) frame.
void lld_row(std::span<const double> raw, int sample_rate, const PitchOptions& pitch,
             std::span<const double> hann, LldScratch& s, double* row) {
  row[0] = zero_crossing_rate(raw);
  row[1] = rms_energy(raw);
  const PitchFrame p = estimate_frame_f0(raw, sample_rate, pitch);
  row[2] = p.f0;
  row[3] = p.voicing;

  const std::size_t n = raw.size();
  s.emphasized[0] = raw[0] * (1.0 - kPreEmphasis) * hann[0];
  for (std::size_t i = 1; i < n; ++i) {
    s.emphasized[i] = (raw[i] - kPreEmphasis * raw[i - 1]) * hann[i];
  }
  s.analyzer.log_mel(s.emphasized, s.log_mel);
  s.analyzer.cepstrum(s.log_mel, kMfccCoeffs, std::span<double>(row + 4, kMfccCoeffs));
}

struct Geometry {
  std::size_t len;
  std::size_t hop;
  std::size_t frames;
};

Geometry geometry(const AudioBuffer& audio, const FrameSpec& spec) {
  spec.validate();
  const std::size_t len = spec.frame_samples(audio.sample_rate);
  const std::size_t hop = spec.hop_samples(audio.sample_rate);
  return {len, hop, frame_count(audio.samples.size(), len, hop)};
}

// Exceptions must not escape an OpenMP region, so everything that can throw
// per frame is checked up front.
void check_lld_inputs(const AudioBuffer& audio, const Geometry& g, const PitchOptions& pitch) {
  if (!(pitch.f_min > 0.0) || !(pitch.f_min < pitch.f_max) ||
      !(pitch.f_max < audio.sample_rate / 2.0)) {
    throw Error(ErrorCode::kInvalidRange, "pitch range needs 0 < f_min < f_max < Nyquist");
  }
  const auto max_lag = static_cast<std::size_t>(std::ceil(audio.sample_rate / pitch.f_min));
  if (max_lag + 2 >= g.len) {
    throw Error(ErrorCode::kInvalidRange, "frame too short for the requested f_min");
  }
}

}  // namespace

LldMatrix compute_llds(const AudioBuffer& audio, const FrameSpec& spec,
                       const PitchOptions& pitch) {
  const Geometry g = geometry(audio, spec);
  check_lld_inputs(audio, g, pitch);
  const std::vector<double> hann = make_window(Window::kHann, g.len);
  LldMatrix m{g.frames, std::vector<double>(g.frames * kNumLlds)};
  const auto frames = static_cast<std::ptrdiff_t>(g.frames);

#pragma omp parallel
  {
    LldScratch scratch(g.len, audio.sample_rate);
#pragma omp for schedule(static)
    for (std::ptrdiff_t t = 0; t < frames; ++t) {
      const auto idx = static_cast<std::size_t>(t);
      std::span<const double> raw(audio.samples.data() + idx * g.hop, g.len);
      lld_row(raw, audio.sample_rate, pitch, hann, scratch, m.values.data() + idx * kNumLlds);
    }
  }
  return m;
}

LldMatrix compute_llds_serial(const AudioBuffer& audio, const FrameSpec& spec,
                              const PitchOptions& pitch) {
  FrameSpec rect = spec;
  rect.window = Window::kRectangular;
  const FrameMatrix frames = frame_signal(audio, rect);
  const std::vector<double> hann = make_window(Window::kHann, frames.length());
  LldScratch scratch(frames.length(), audio.sample_rate);
  LldMatrix m{frames.count(), std::vector<double>(frames.count() * kNumLlds)};
  for (std::size_t t = 0; t < frames.count(); ++t) {
    lld_row(frames.frame(t), audio.sample_rate, pitch, hann, scratch,
            m.values.data() + t * kNumLlds);
  }
  return m;
}

std::vector<double> compute_log_mel(const AudioBuffer& audio, const FrameSpec& spec,
                                    int n_bands) {
  const Geometry g = geometry(audio, spec);
  SpectralAnalyzer probe(g.len, audio.sample_rate, n_bands);  // validates the filterbank
  const std::vector<double> window = make_window(spec.window, g.len);
  std::vector<double> out(g.frames * static_cast<std::size_t>(n_bands));
  const auto frames = static_cast<std::ptrdiff_t>(g.frames);

#pragma omp parallel
  {
    SpectralAnalyzer analyzer(g.len, audio.sample_rate, n_bands);
    std::vector<double> windowed(g.len);
#pragma omp for schedule(static)
    for (std::ptrdiff_t t = 0; t < frames; ++t) {
      const auto idx = static_cast<std::size_t>(t);
      const double* src = audio.samples.data() + idx * g.hop;
      for (std::size_t i = 0; i < g.len; ++i) windowed[i] = src[i] * window[i];
      analyzer.log_mel(windowed, std::span<double>(out.data() + idx * n_bands,
                                                   static_cast<std::size_t>(n_bands)));
    }
  }
  return out;
}

std::vector<double> compute_log_mel_serial(const AudioBuffer& audio, const FrameSpec& spec,
                                           int n_bands) {
  const FrameMatrix frames = frame_signal(audio, spec);
  SpectralAnalyzer analyzer(frames.length(), audio.sample_rate, n_bands);
  std::vector<double> out(frames.count() * static_cast<std::size_t>(n_bands));
  for (std::size_t t = 0; t < frames.count(); ++t) {
    analyzer.log_mel(frames.frame(t), std::span<double>(out.data() + t * n_bands,
                                                        static_cast<std::size_t>(n_bands)));
  }
  return out;
}

namespace {

double row_distance(const double* x, const double* y, std::size_t dim) {
  double sum = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double d = x[k] - y[k];
    sum += d * d;
  }
  return std::sqrt(sum);
}

void check_shapes(std::span<const double> a, std::size_t rows_a, std::span<const double> b,
                  std::size_t rows_b, std::size_t dim) {
  if (a.size() != rows_a * dim || b.size() != rows_b * dim) {
    throw Error(ErrorCode::kDimensionMismatch, "distance inputs do not match their shapes");
  }
}

}  // namespace

std::vector<double> pairwise_distances(std::span<const double> a, std::size_t rows_a,
                                       std::span<const double> b, std::size_t rows_b,
                                       std::size_t dim) {
  check_shapes(a, rows_a, b, rows_b, dim);
  std::vector<double> out(rows_a * rows_b);
  const auto n = static_cast<std::ptrdiff_t>(rows_a);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j < rows_b; ++j) {
      out[r * rows_b + j] = row_distance(a.data() + r * dim, b.data() + j * dim, dim);
    }
  }
  return out;
}

std::vector<double> pairwise_distances_serial(std::span<const double> a, std::size_t rows_a,
                                              std::span<const double> b, std::size_t rows_b,
                                              std::size_t dim) {
  check_shapes(a, rows_a, b, rows_b, dim);
  std::vector<double> out(rows_a * rows_b);
  for (std::size_t i = 0; i < rows_a; ++i) {
    for (std::size_t j = 0; j < rows_b; ++j) {
      out[i * rows_b + j] = row_distance(a.data() + i * dim, b.data() + j * dim, dim);
    }
  }
  return out;
}

}  // namespace emomix::kernels
