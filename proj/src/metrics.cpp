#include "emomix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "emomix/error.hpp"
#include "emomix/kernels.hpp"

namespace emomix {

void McepSequence::validate() const {
  if (order < 1) throw Error(ErrorCode::kInvalidArgument, "MCEP order must be at least 1");
  if (values.size() != n_frames * static_cast<std::size_t>(order)) {
    throw Error(ErrorCode::kInvalidArgument, "MCEP values do not match frames x order");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite MCEP value");
  }
}

McepSequence extract_mcep(const AudioBuffer& audio, int order, const FrameSpec& spec) {
  if (order < 1 || order >= kMelBands) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("MCEP order {} must be in [1, {})", order, kMelBands));
  }
  const MelSpectrogram mel = mel_spectrogram(audio, spec);
  const std::vector<double> basis = dct_basis(kMelBands, 1, order);
  std::vector<double> values(mel.n_frames * static_cast<std::size_t>(order));
  for (std::size_t t = 0; t < mel.n_frames; ++t) {
    const auto frame = mel.frame(t);
    for (int c = 0; c < order; ++c) {
      const double* row = basis.data() + static_cast<std::size_t>(c) * kMelBands;
      double sum = 0.0;
      for (int j = 0; j < kMelBands; ++j) sum += row[j] * (frame[j] - frame[0]);
      values[t * static_cast<std::size_t>(order) + c] = sum;
    }
  }
  return {mel.n_frames, order, std::move(values)};
}

AlignmentPath dtw_align(const McepSequence& a, const McepSequence& b) {
  if (a.order != b.order) {
    throw Error(ErrorCode::kOrderMismatch,
                fmt::format("MCEP orders differ ({} vs {})", a.order, b.order));
  }
  if (a.n_frames == 0 || b.n_frames == 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot align an empty sequence");
  }
  a.validate();
  b.validate();
  const std::size_t na = a.n_frames, nb = b.n_frames;
  const auto dim = static_cast<std::size_t>(a.order);
  const std::vector<double> dist =
      kernels::pairwise_distances(a.values, na, b.values, nb, dim);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> acc(na * nb, kInf);
  const auto at = [nb](std::size_t i, std::size_t j) { return i * nb + j; };
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = kInf;
        if (i > 0 && j > 0) best = std::min(best, acc[at(i - 1, j - 1)]);
        if (i > 0) best = std::min(best, acc[at(i - 1, j)]);
        if (j > 0) best = std::min(best, acc[at(i, j - 1)]);
      }
      acc[at(i, j)] = best + dist[at(i, j)];
    }
  }

  AlignmentPath path;
  path.cost = acc[at(na - 1, nb - 1)];
  std::size_t i = na - 1, j = nb - 1;
  path.pairs.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const double diag = acc[at(i - 1, j - 1)];
      const double up = acc[at(i - 1, j)];
      const double left = acc[at(i, j - 1)];
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    } else if (i > 0) {
      --i;
    } else {
      --j;
    }
    path.pairs.emplace_back(i, j);
  }
  std::reverse(path.pairs.begin(), path.pairs.end());
  return path;
}

double mcd_along(const McepSequence& reference, const McepSequence& test,
                 const AlignmentPath& path, McdVariant variant) {
  if (reference.order != test.order) {
    throw Error(ErrorCode::kOrderMismatch,
                fmt::format("MCEP orders differ ({} vs {})", reference.order, test.order));
  }
  if (path.pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "empty alignment path");
  const double m = reference.order;
  const double as_written = 10.0 * std::numbers::sqrt2 / std::numbers::ln10 / m;
  const double literature = 10.0 / std::numbers::ln10;
  double total = 0.0;
  for (const auto& [i, j] : path.pairs) {
    if (i >= reference.n_frames || j >= test.n_frames) {
      throw Error(ErrorCode::kInvalidArgument, "alignment path leaves the sequences");
    }
    const auto y = reference.frame(i);
    const auto y_hat = test.frame(j);
    double sum = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double d = y[k] - y_hat[k];
      sum += d * d;
    }
    total += variant == McdVariant::kAsWritten ? as_written * std::sqrt(sum)
                                               : literature * std::sqrt(2.0 * sum);
  }
  return total / static_cast<double>(path.pairs.size());
}

double mcd(const McepSequence& reference, const McepSequence& test, McdVariant variant) {
  return mcd_along(reference, test, dtw_align(reference, test), variant);
}

double f0_pcc(const F0Contour& reference, const F0Contour& test, const AlignmentPath& path) {
  std::vector<double> xs, ys;
  xs.reserve(path.pairs.size());
  ys.reserve(path.pairs.size());
  for (const auto& [i, j] : path.pairs) {
    if (i >= reference.values.size() || j >= test.values.size()) {
      throw Error(ErrorCode::kInvalidArgument, "alignment path leaves the F0 contours");
    }
    const double x = reference.values[i];
    const double y = test.values[j];
    if (!std::isfinite(x) || !std::isfinite(y) || x < 0.0 || y < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "F0 values must be finite and non-negative");
    }
    if (x > 0.0 && y > 0.0) {
      xs.push_back(x);
      ys.push_back(y);
    }
  }
  if (xs.size() < 2) {
    throw Error(ErrorCode::kInsufficientVoicedOverlap,
                fmt::format("{} mutually voiced frames; need at least 2", xs.size()));
  }
  const auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(xs) || constant(ys)) {
    throw Error(ErrorCode::kZeroVariance, "an F0 contour is constant over the voiced overlap");
  }
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double dx = xs[k] - mx, dy = ys[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw Error(ErrorCode::kZeroVariance, "an F0 contour is constant over the voiced overlap");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double f0_pcc(const F0Contour& reference, const F0Contour& test) {
  if (reference.values.size() == test.values.size()) {
    AlignmentPath diagonal;
    for (std::size_t t = 0; t < reference.values.size(); ++t) diagonal.pairs.emplace_back(t, t);
    return f0_pcc(reference, test, diagonal);
  }
  if (reference.values.empty() || test.values.empty()) {
    throw Error(ErrorCode::kInsufficientVoicedOverlap, "empty F0 contour");
  }
  const McepSequence a(reference.values.size(), 1, reference.values);
  const McepSequence b(test.values.size(), 1, test.values);
  return f0_pcc(reference, test, dtw_align(a, b));
}

}  // namespace emomix
