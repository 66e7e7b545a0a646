#pragma once

// Frame-parallel kernels. Each parallel kernel writes disjoint output rows, so
// its result is bitwise identical to the serial reference next to it for any
// thread count; tests/test_kernels.cpp checks exactly that.

#include <cstddef>
#include <span>
#include <vector>

#include "emomix/audio.hpp"
#include "emomix/features.hpp"

namespace emomix::kernels {

// frames x kNumLlds, row-major, columns in extract_llds() order.
struct LldMatrix {
  std::size_t frames = 0;
  std::vector<double> values;

  double at(std::size_t t, std::size_t lld) const { return values[t * kNumLlds + lld]; }
};

LldMatrix compute_llds(const AudioBuffer& audio, const FrameSpec& spec,
                       const PitchOptions& pitch);
LldMatrix compute_llds_serial(const AudioBuffer& audio, const FrameSpec& spec,
                              const PitchOptions& pitch);

// frames x n_bands log-mel energies of Hann-windowed frames.
std::vector<double> compute_log_mel(const AudioBuffer& audio, const FrameSpec& spec,
                                    int n_bands);
std::vector<double> compute_log_mel_serial(const AudioBuffer& audio, const FrameSpec& spec,
                                           int n_bands);

// Euclidean distance between every row of a (rows_a x dim) and every row of
// b (rows_b x dim); result is rows_a x rows_b.
std::vector<double> pairwise_distances(std::span<const double> a, std::size_t rows_a,
                                       std::span<const double> b, std::size_t rows_b,
                                       std::size_t dim);
std::vector<double> pairwise_distances_serial(std::span<const double> a, std::size_t rows_a,
                                              std::span<const double> b, std::size_t rows_b,
                                              std::size_t dim);

}  // namespace emomix::kernels
