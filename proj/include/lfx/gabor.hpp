// Copyright 2026 lfx authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <vector>

#include "lfx/core.hpp"

namespace lfx {

/// Mono waveform, samples in natural units (WAV decoding scales to [-1, 1]).
struct Waveform {
  std::vector<double> samples;
  double sample_rate = 0.0;
};

/// Throws std::invalid_argument on empty or non-finite input.
void validate_waveform(const Waveform &wave);

/// Complex analysis filterbank: num_bins rows of W+1 taps, tap n stored at
/// column n + W/2.
struct GaborKernel {
  int num_bins = 0;
  int half_width = 0;  ///< W/2
  std::vector<std::complex<double>> taps;

  int length() const { return 2 * half_width + 1; }
  std::size_t index(int bin, int col) const {
    return static_cast<std::size_t>(bin) * length() + col;
  }
  std::complex<double> at(int bin, int col) const { return taps[index(bin, col)]; }
};

/// Builds l1-normalized Gabor taps exp(-n^2 / (2 sigma^2)) exp(i 2 pi eta n),
/// n = -W/2 .. W/2, divided by the sum of tap magnitudes.
GaborKernel build_gabor_kernel(const FrontendParams &params,
                               const FrontendConfig &config);

/// Convolves the waveform with every filter, valid frames only:
/// out[m][j] = sum_n taps[m][n] * x[c_j - n] with c_j = W/2 + j, giving
/// L = len - W frames. Throws if the signal is shorter than W + 1 samples.
/// All outputs are marked defined.
ComplexGrid analyze(const Waveform &wave, const GaborKernel &kernel);

/// Sample index at the middle of each analysis window: c_j = W/2 + j.
std::vector<std::int64_t> frame_centers(std::size_t num_samples,
                                        int tap_half_width);

}  // namespace lfx
