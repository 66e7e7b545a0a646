#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "emomix/audio.hpp"
#include "emomix/features.hpp"

namespace emomix {

inline constexpr int kDefaultMcepOrder = 24;

struct McepSequence {
  std::size_t n_frames = 0;
  int order = 0;
  std::vector<double> values;  // row-major n_frames x order

  McepSequence() = default;
  McepSequence(std::size_t frames, int m, std::vector<double> v)
      : n_frames(frames), order(m), values(std::move(v)) {}

  std::span<const double> frame(std::size_t t) const {
    return {values.data() + t * static_cast<std::size_t>(order), static_cast<std::size_t>(order)};
  }
  // Throws InvalidArgument on shape mismatch or non-finite entries.
  void validate() const;
};

// DCT of the 80-band log-mel spectrum, coefficients 1..order.
McepSequence extract_mcep(const AudioBuffer& audio, int order = kDefaultMcepOrder,
                          const FrameSpec& spec = {});

struct AlignmentPath {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double cost = 0.0;  // summed Euclidean frame distance along the path
};

// Steps (1,1), (1,0), (0,1). Backtracking prefers the diagonal, then (1,0),
// when predecessors tie. Throws OrderMismatch or InvalidArgument (empty).
AlignmentPath dtw_align(const McepSequence& a, const McepSequence& b);

enum class McdVariant {
  kAsWritten,   // (10 sqrt(2) / ln 10) * (1 / M) * sqrt(sum d^2)
  kLiterature,  // (10 / ln 10) * sqrt(2 * sum d^2)
};

// Mean per-pair MCD in dB over the pairs of `path`.
double mcd_along(const McepSequence& reference, const McepSequence& test,
                 const AlignmentPath& path, McdVariant variant = McdVariant::kAsWritten);
// Aligns with dtw_align first. Throws OrderMismatch.
double mcd(const McepSequence& reference, const McepSequence& test,
           McdVariant variant = McdVariant::kAsWritten);

// Pearson correlation over aligned frames where both contours are voiced.
// Throws InsufficientVoicedOverlap (< 2 usable pairs) or ZeroVariance.
double f0_pcc(const F0Contour& reference, const F0Contour& test, const AlignmentPath& path);
// Equal lengths use the diagonal; otherwise the contours are aligned by DTW.
double f0_pcc(const F0Contour& reference, const F0Contour& test);

}  // namespace emomix
