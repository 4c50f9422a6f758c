// Copyright 2026 lfx authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "lfx/amplitude.hpp"

#include <cmath>
#include <stdexcept>

namespace lfx {

LowpassKernel build_lowpass(const std::vector<double> &sigma,
                            const FrontendConfig &config) {
  validate_config(config);
  if (static_cast<int>(sigma.size()) != config.num_bins) {
    throw std::invalid_argument("lowpass sigma: wrong length");
  }
  LowpassKernel kernel;
  kernel.num_bins = config.num_bins;
  kernel.half_width = config.tap_half_width / 2;
  kernel.stride = config.lowpass_stride;
  const int len = kernel.length();
  kernel.taps.resize(static_cast<std::size_t>(kernel.num_bins) * len);
  const double w = config.tap_half_width;
  for (int m = 0; m < kernel.num_bins; ++m) {
    if (!(sigma[m] > 0.0)) {
      throw std::invalid_argument("lowpass sigma: entries must be positive");
    }
    const double width = 0.5 * sigma[m] * (w - 1.0);
    double norm = 0.0;
    for (int col = 0; col < len; ++col) {
      const double n = col - kernel.half_width;
      const double tap = std::exp(-n * n / (2.0 * width * width));
      kernel.taps[kernel.index(m, col)] = tap;
      norm += tap;
    }
    for (int col = 0; col < len; ++col) {
      kernel.taps[kernel.index(m, col)] /= norm;
    }
  }
  return kernel;
}

MaskedGrid power(const ComplexGrid &grid) {
  MaskedGrid out = MaskedGrid::zeros(grid.rows, grid.cols);
  for (std::size_t i = 0; i < grid.data.size(); ++i) {
    out.data[i] = std::norm(grid.data[i]);
  }
  out.mask = grid.mask;
  return out;
}

RowInterp plan_row_interp(const std::uint8_t *mask, int len) {
  RowInterp plan;
  plan.src0.assign(len, 0);
  plan.src1.assign(len, -1);
  plan.w0.assign(len, 1.0);
  plan.w1.assign(len, 0.0);
  int first_defined = -1;
  for (int k = 0; k < len; ++k) {
    if (mask[k]) {
      first_defined = k;
      break;
    }
  }
  if (first_defined < 0) {
    plan.all_undefined = true;
    return plan;
  }
  int prev = -1;
  for (int k = 0; k < len; ++k) {
    if (mask[k]) {
      plan.src0[k] = k;
      prev = k;
      continue;
    }
    if (prev < 0) {
      plan.src0[k] = first_defined;  // leading run: hold
      continue;
    }
    int next = -1;
    for (int j = k + 1; j < len; ++j) {
      if (mask[j]) {
        next = j;
        break;
      }
    }
    if (next < 0) {
      plan.src0[k] = prev;  // trailing run: hold
      continue;
    }
    const double t = static_cast<double>(k - prev) / (next - prev);
    plan.src0[k] = prev;
    plan.src1[k] = next;
    plan.w0[k] = 1.0 - t;
    plan.w1[k] = t;
  }
  return plan;
}

void apply_row_interp(const RowInterp &plan, const double *in, double *out) {
  const int len = static_cast<int>(plan.src0.size());
  for (int k = 0; k < len; ++k) {
    double v = plan.w0[k] * in[plan.src0[k]];
    if (plan.src1[k] >= 0) v += plan.w1[k] * in[plan.src1[k]];
    out[k] = v;
  }
}

MaskedGrid lowpass_downsample(const MaskedGrid &grid,
                              const LowpassKernel &kernel) {
  if (grid.rows != kernel.num_bins) {
    throw std::invalid_argument("lowpass_downsample: channel count mismatch");
  }
  const int len = kernel.length();
  const int in_width = grid.cols;
  if (in_width < len) {
    throw std::invalid_argument("grid narrower than one kernel window");
  }
  const int out_width = (in_width - len) / kernel.stride + 1;
  MaskedGrid out = MaskedGrid::zeros(grid.rows, out_width);
  parallel_for_blocks(grid.rows, [&](int begin, int end) {
    std::vector<double> filled(in_width);
    for (int m = begin; m < end; ++m) {
      const std::uint8_t *mask_row = &grid.mask[grid.index(m, 0)];
      const RowInterp plan = plan_row_interp(mask_row, in_width);
      if (plan.all_undefined) {
        for (int j = 0; j < out_width; ++j) out.mask[out.index(m, j)] = 0;
        continue;
      }
      apply_row_interp(plan, &grid.data[grid.index(m, 0)], filled.data());
      const double *taps = &kernel.taps[kernel.index(m, 0)];
      for (int j = 0; j < out_width; ++j) {
        const int start = j * kernel.stride;
        double acc = 0.0;
        for (int col = 0; col < len; ++col) acc += taps[col] * filled[start + col];
        out.at(m, j) = acc;
        out.mask[out.index(m, j)] = mask_row[start + kernel.half_width];
      }
    }
  });
  return out;
}

MaskedGrid spcen(const MaskedGrid &grid, const FrontendParams &params,
                 const FrontendConfig &config) {
  validate_params(params, config);
  if (grid.rows != config.num_bins) {
    throw std::invalid_argument("spcen: channel count mismatch");
  }
  for (double v : grid.data) {
    if (v < 0.0) throw std::invalid_argument("spcen: negative input power");
  }
  MaskedGrid out = MaskedGrid::zeros(grid.rows, grid.cols);
  out.mask = grid.mask;
  const double eps = config.epsilon;
  parallel_for_blocks(grid.rows, [&](int begin, int end) {
    for (int m = begin; m < end; ++m) {
      const double alpha = params.spcen_alpha[m];
      const double delta = params.spcen_delta[m];
      const double inv_r = 1.0 / params.spcen_r[m];
      const double s = params.spcen_s[m];
      const double delta_term = std::pow(delta, inv_r);
      double smoothed = grid.at(m, 0);
      for (int t = 0; t < grid.cols; ++t) {
        const double f = grid.at(m, t);
        if (t > 0) smoothed = (1.0 - s) * smoothed + s * f;
        const double base = f * std::pow(eps + smoothed, -alpha) + delta;
        out.at(m, t) = std::pow(base, inv_r) - delta_term;
      }
    }
  });
  return out;
}

}  // namespace lfx
