#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "emomix/audio.hpp"

namespace emomix {

inline constexpr double kLogFloor = 1e-10;
inline constexpr double kPreEmphasis = 0.97;

inline constexpr std::size_t kNumLlds = 16;
inline constexpr std::size_t kNumFunctionals = 12;
inline constexpr std::size_t kFeatureDim = kNumLlds * 2 * kNumFunctionals;  // 384
inline constexpr const char* kFeatureLayoutVersion = "emomix-lld16x2x12-v1";

inline constexpr int kMfccCoeffs = 12;
inline constexpr int kMfccMels = 26;
inline constexpr int kMelBands = 80;

enum class Window { kRectangular, kHann, kHamming };

struct FrameSpec {
  double frame_length = 0.050;  // seconds
  double hop_length = 0.0125;   // seconds
  Window window = Window::kHann;

  std::size_t frame_samples(int sample_rate) const;
  std::size_t hop_samples(int sample_rate) const;
  // Throws InvalidArgument unless 0 < hop <= frame.
  void validate() const;
};

// floor((n - frame) / hop) + 1, or AudioTooShort when n < frame.
std::size_t frame_count(std::size_t n, std::size_t frame, std::size_t hop);

// Symmetric window of the given length.
std::vector<double> make_window(Window window, std::size_t length);

// Row-major stack of equally sized frames.
class FrameMatrix {
 public:
  FrameMatrix() = default;
  FrameMatrix(std::size_t count, std::size_t length)
      : count_(count), length_(length), data_(count * length) {}

  std::size_t count() const { return count_; }
  std::size_t length() const { return length_; }
  std::span<const double> frame(std::size_t i) const {
    return {data_.data() + i * length_, length_};
  }
  std::span<double> frame(std::size_t i) { return {data_.data() + i * length_, length_}; }

 private:
  std::size_t count_ = 0;
  std::size_t length_ = 0;
  std::vector<double> data_;
};

FrameMatrix frame_signal(const AudioBuffer& audio, const FrameSpec& spec);

// Sign changes / (length - 1). Zero counts as non-negative.
double zero_crossing_rate(std::span<const double> frame);
double rms_energy(std::span<const double> frame);

struct PitchOptions {
  double f_min = 60.0;
  double f_max = 400.0;
  double voicing_threshold = 0.30;
};

struct F0Contour {
  std::vector<double> values;  // Hz, 0.0 marks an unvoiced frame
  FrameSpec frame_spec;
};

struct PitchFrame {
  double f0 = 0.0;
  double voicing = 0.0;  // peak normalized autocorrelation, clamped to [0, 1]
};

// Normalized autocorrelation pitch estimate of one raw frame, refined by
// parabolic interpolation around the chosen lag.
PitchFrame estimate_frame_f0(std::span<const double> frame, int sample_rate,
                             const PitchOptions& options);

// Throws InvalidRange unless 0 < f_min < f_max < sample_rate / 2.
F0Contour estimate_f0(const AudioBuffer& audio, const FrameSpec& spec,
                      const PitchOptions& options = {});
F0Contour estimate_f0(const AudioBuffer& audio, const FrameSpec& spec, double f_min,
                      double f_max);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular HTK-style filters over the non-negative FFT bins.
class MelFilterbank {
 public:
  MelFilterbank(int n_mels, int n_fft, int sample_rate, double f_low, double f_high);

  int n_mels() const { return n_mels_; }
  int n_fft() const { return n_fft_; }
  // Applies the filters to a power spectrum of n_fft / 2 + 1 bins.
  void apply(std::span<const double> power, std::span<double> out) const;
  double weight(int filter, int bin) const { return weights_[filter * n_bins_ + bin]; }

 private:
  int n_mels_;
  int n_fft_;
  int n_bins_;
  std::vector<double> weights_;
  std::vector<int> first_bin_;
  std::vector<int> last_bin_;
};

// Orthonormal DCT-II basis rows for coefficients [first, first + count).
std::vector<double> dct_basis(int n_inputs, int first, int count);

// Power spectrum, mel filterbank, log floor and cepstral DCT for one frame.
// Holds an FFT instance, so one analyzer per thread.
class SpectralAnalyzer {
 public:
  SpectralAnalyzer(std::size_t frame_length, int sample_rate, int n_mels);
  ~SpectralAnalyzer();
  SpectralAnalyzer(SpectralAnalyzer&&) noexcept;
  SpectralAnalyzer& operator=(SpectralAnalyzer&&) noexcept;

  int n_mels() const { return filterbank_.n_mels(); }
  int n_fft() const { return filterbank_.n_fft(); }

  // Log mel energies of an already windowed frame.
  void log_mel(std::span<const double> windowed, std::span<double> out);
  // Cepstral coefficients 1..n_coeffs of the log mel energies.
  void cepstrum(std::span<const double> log_mel, int n_coeffs, std::span<double> out);

 private:
  struct Fft;
  std::size_t frame_length_;
  MelFilterbank filterbank_;
  std::unique_ptr<Fft> fft_;
  std::vector<double> padded_;
  std::vector<double> power_;
  std::vector<double> dct_;
  int dct_count_ = 0;
};

// MFCC 1..n_coeffs of a windowed frame (coefficient 0 excluded).
std::vector<double> mfcc(std::span<const double> windowed_frame, int sample_rate,
                         int n_coeffs = kMfccCoeffs, int n_mels = kMfccMels);

struct LldTrack {
  std::string name;
  std::vector<double> values;
};

// d_t = (c_{t+1} - c_{t-1}) / 2 with the first and last frames replicated.
LldTrack delta(const LldTrack& track);

enum Functional : std::size_t {
  kMean,
  kStdDev,
  kKurtosis,
  kSkewness,
  kMin,
  kMax,
  kRange,
  kMinPos,
  kMaxPos,
  kSlope,
  kOffset,
  kRegressionMse,
};

using FunctionalValues = std::array<double, kNumFunctionals>;

// Throws TrackTooShort for fewer than two values.
FunctionalValues functionals(std::span<const double> track);
inline FunctionalValues functionals(const LldTrack& track) { return functionals(track.values); }

struct FeatureVector {
  std::vector<double> values;
  std::string layout_version = kFeatureLayoutVersion;
};

struct ExtractOptions {
  FrameSpec frame;
  PitchOptions pitch;
  bool parallel = true;  // OpenMP across frames
};

// The 16 low-level descriptor tracks in layout order:
// zcr, rms, f0, voicing, mfcc1 .. mfcc12.
std::vector<LldTrack> extract_llds(const AudioBuffer& audio, const ExtractOptions& options = {});

// Layout: for each LLD in extract_llds() order, the 12 functionals of the raw
// track followed by the 12 functionals of its delta. Index of (lld, is_delta,
// functional) is (lld * 2 + is_delta) * 12 + functional.
FeatureVector extract_feature_vector(const AudioBuffer& audio,
                                     const ExtractOptions& options = {});

std::vector<std::string> feature_names();

struct MelSpectrogram {
  std::size_t n_frames = 0;
  int n_bands = kMelBands;
  std::vector<double> values;  // row-major n_frames x n_bands
  FrameSpec frame_spec;

  double at(std::size_t frame, int band) const { return values[frame * n_bands + band]; }
  std::span<const double> frame(std::size_t t) const {
    return {values.data() + t * n_bands, static_cast<std::size_t>(n_bands)};
  }
};

MelSpectrogram mel_spectrogram(const AudioBuffer& audio, const FrameSpec& spec = {},
                               bool parallel = true);

}  // namespace emomix
