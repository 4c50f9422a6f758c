// Copyright 2026 lfx authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <vector>

#include "lfx/core.hpp"

namespace lfx {

/// Real Gaussian lowpass bank: num_bins rows of W+1 taps (tap n at column
/// n + W/2), each row summing to 1, applied with the stored stride.
struct LowpassKernel {
  int num_bins = 0;
  int half_width = 0;  ///< W/2
  int stride = 1;
  std::vector<double> taps;

  int length() const { return 2 * half_width + 1; }
  std::size_t index(int bin, int col) const {
    return static_cast<std::size_t>(bin) * length() + col;
  }
  double at(int bin, int col) const { return taps[index(bin, col)]; }
};

/// Builds taps exp(-n^2 / (2 (0.5 sigma (W-1))^2)) divided by their finite
/// sum, using the config's window size and stride.
LowpassKernel build_lowpass(const std::vector<double> &sigma,
                            const FrontendConfig &config);

/// Squared modulus; mask copied through.
MaskedGrid power(const ComplexGrid &grid);

/// Per-column gap-filling recipe for one row: every column is a convex
/// combination of at most two defined source columns. Edge runs hold the
/// nearest defined value; an all-undefined row is flagged instead.
struct RowInterp {
  std::vector<int> src0;     ///< always valid unless all_undefined
  std::vector<int> src1;     ///< -1 when a single source suffices
  std::vector<double> w0;
  std::vector<double> w1;
  bool all_undefined = false;
};

RowInterp plan_row_interp(const std::uint8_t *mask, int len);
void apply_row_interp(const RowInterp &plan, const double *in, double *out);

/// Per channel: fill undefined entries along time by linear interpolation
/// (edge hold; an all-undefined channel becomes zeros and stays fully
/// undefined), then valid-framing strided correlation with the kernel row.
/// An output frame is undefined iff the input under the center tap was.
/// Output width is (L - W - 1) / stride + 1; throws when L < W + 1.
MaskedGrid lowpass_downsample(const MaskedGrid &grid,
                              const LowpassKernel &kernel);

/// Per-channel energy normalization with a smoothed reference:
///   M[t] = (1 - s) M[t-1] + s F[t],  M[0] = F[0]
///   out[t] = (F[t] / (epsilon + M[t])^alpha + delta)^(1/r) - delta^(1/r)
/// Requires F >= 0; mask copied through.
MaskedGrid spcen(const MaskedGrid &grid, const FrontendParams &params,
                 const FrontendConfig &config);

}  // namespace lfx
