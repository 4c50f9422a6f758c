// Copyright 2026 lfx authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "lfx/gabor.hpp"

#include <cmath>
#include <stdexcept>

namespace lfx {

void validate_waveform(const Waveform &wave) {
  if (wave.samples.empty()) {
    throw std::invalid_argument("waveform is empty");
  }
  for (double x : wave.samples) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("waveform contains non-finite samples");
    }
  }
}

GaborKernel build_gabor_kernel(const FrontendParams &params,
                               const FrontendConfig &config) {
  validate_config(config);
  validate_params(params, config);
  GaborKernel kernel;
  kernel.num_bins = config.num_bins;
  kernel.half_width = config.tap_half_width / 2;
  const int len = kernel.length();
  kernel.taps.resize(static_cast<std::size_t>(kernel.num_bins) * len);
  for (int m = 0; m < kernel.num_bins; ++m) {
    const double sigma = params.sigma_gabor[m];
    const double omega = 2.0 * M_PI * params.eta[m];
    double norm = 0.0;
    for (int col = 0; col < len; ++col) {
      const double n = col - kernel.half_width;
      const double env = std::exp(-n * n / (2.0 * sigma * sigma));
      const std::complex<double> tap(env * std::cos(omega * n),
                                     env * std::sin(omega * n));
      kernel.taps[kernel.index(m, col)] = tap;
      norm += std::abs(tap);
    }
    for (int col = 0; col < len; ++col) {
      kernel.taps[kernel.index(m, col)] /= norm;
    }
  }
  return kernel;
}

ComplexGrid analyze(const Waveform &wave, const GaborKernel &kernel) {
  validate_waveform(wave);
  const int h = kernel.half_width;
  const int len = kernel.length();
  const std::int64_t num_frames =
      static_cast<std::int64_t>(wave.samples.size()) - 2 * h;
  if (num_frames < 1) {
    throw std::invalid_argument("signal shorter than one analysis window");
  }
  ComplexGrid out = ComplexGrid::zeros(kernel.num_bins, static_cast<int>(num_frames));
  const double *x = wave.samples.data();
  parallel_for_blocks(kernel.num_bins, [&](int begin, int end) {
    for (int m = begin; m < end; ++m) {
      const std::complex<double> *taps = &kernel.taps[kernel.index(m, 0)];
      for (std::int64_t j = 0; j < num_frames; ++j) {
        // Window starts at x[j]; tap n multiplies x[c_j - n], i.e. the
        // window is traversed against tap order.
        std::complex<double> acc(0.0, 0.0);
        const double *seg = x + j;
        for (int col = 0; col < len; ++col) {
          acc += taps[col] * seg[len - 1 - col];
        }
        out.at(m, static_cast<int>(j)) = acc;
      }
    }
  });
  return out;
}

std::vector<std::int64_t> frame_centers(std::size_t num_samples,
                                        int tap_half_width) {
  const int h = tap_half_width / 2;
  const std::int64_t num_frames =
      static_cast<std::int64_t>(num_samples) - 2 * h;
  std::vector<std::int64_t> centers;
  if (num_frames < 1) return centers;
  centers.resize(num_frames);
  for (std::int64_t j = 0; j < num_frames; ++j) centers[j] = h + j;
  return centers;
}

}  // namespace lfx
