// Copyright 2026 lfx authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "lfx/phase.hpp"

#include <cmath>
#include <stdexcept>

namespace lfx {

namespace {

struct LineView {
  int count;   // number of independent lines
  int length;  // elements per line
  std::size_t line_stride;
  std::size_t elem_stride;
};

LineView lines_along(const MaskedGrid &grid, Axis axis) {
  if (axis == Axis::kTime) {
    return {grid.rows, grid.cols, static_cast<std::size_t>(grid.cols), 1};
  }
  return {grid.cols, grid.rows, 1, static_cast<std::size_t>(grid.cols)};
}

}  // namespace

double principal_value(double theta) {
  double r = std::remainder(theta, 2.0 * M_PI);
  if (r <= -M_PI) r += 2.0 * M_PI;
  return r;
}

MaskedGrid argument(const ComplexGrid &grid, const FrontendConfig &config) {
  MaskedGrid out = MaskedGrid::zeros(grid.rows, grid.cols);
  for (std::size_t i = 0; i < grid.data.size(); ++i) {
    const std::complex<double> z = grid.data[i];
    const bool defined =
        grid.mask[i] != 0 && std::norm(z) > config.zero_amp_threshold;
    out.mask[i] = defined ? 1 : 0;
    if (defined) {
      double theta = std::atan2(z.imag(), z.real());
      if (theta <= -M_PI) theta += 2.0 * M_PI;
      out.data[i] = theta;
    }
  }
  return out;
}

MaskedGrid rotate_to_conv2(const MaskedGrid &theta1,
                           const FrontendParams &params,
                           const std::vector<std::int64_t> &frame_offsets) {
  if (static_cast<int>(params.eta.size()) != theta1.rows) {
    throw std::invalid_argument("rotate_to_conv2: eta length mismatch");
  }
  if (static_cast<int>(frame_offsets.size()) != theta1.cols) {
    throw std::invalid_argument("rotate_to_conv2: frame offset count mismatch");
  }
  MaskedGrid out = theta1;
  for (int m = 0; m < theta1.rows; ++m) {
    const double omega = 2.0 * M_PI * params.eta[m];
    for (int t = 0; t < theta1.cols; ++t) {
      if (!theta1.defined(m, t)) continue;
      out.at(m, t) =
          principal_value(theta1.at(m, t) - omega * frame_offsets[t]);
    }
  }
  return out;
}

MaskedGrid unwrap(const MaskedGrid &grid, Axis axis) {
  MaskedGrid out = grid;
  const LineView view = lines_along(grid, axis);
  for (int line = 0; line < view.count; ++line) {
    const std::size_t base = line * view.line_stride;
    bool have_prev = false;
    double prev_raw = 0.0;
    double prev_out = 0.0;
    for (int k = 0; k < view.length; ++k) {
      const std::size_t idx = base + k * view.elem_stride;
      if (!grid.mask[idx]) {
        have_prev = false;
        continue;
      }
      const double raw = grid.data[idx];
      if (have_prev) {
        out.data[idx] = prev_out + principal_value(raw - prev_raw);
      }
      prev_raw = raw;
      prev_out = out.data[idx];
      have_prev = true;
    }
  }
  return out;
}

MaskedGrid differentiate(const MaskedGrid &grid, Axis axis) {
  MaskedGrid out = MaskedGrid::zeros(grid.rows, grid.cols);
  const LineView view = lines_along(grid, axis);
  for (int line = 0; line < view.count; ++line) {
    const std::size_t base = line * view.line_stride;
    for (int k = 0; k < view.length; ++k) {
      const std::size_t idx = base + k * view.elem_stride;
      // out[0] repeats the first difference, so its operands are the same
      // pair (in[0], in[1]) as out[1]'s.
      const int hi = k == 0 ? 1 : k;
      if (hi >= view.length) {
        out.mask[idx] = 0;
        continue;
      }
      const std::size_t hi_idx = base + hi * view.elem_stride;
      const std::size_t lo_idx = base + (hi - 1) * view.elem_stride;
      if (grid.mask[hi_idx] && grid.mask[lo_idx]) {
        out.data[idx] = grid.data[hi_idx] - grid.data[lo_idx];
      } else {
        out.mask[idx] = 0;
      }
    }
  }
  return out;
}

MaskedGrid negate(const MaskedGrid &grid) {
  MaskedGrid out = grid;
  for (double &v : out.data) v = -v;
  return out;
}

PhasorGrid phasor(const MaskedGrid &grid) {
  PhasorGrid out;
  out.re = MaskedGrid::zeros(grid.rows, grid.cols);
  out.im = MaskedGrid::zeros(grid.rows, grid.cols);
  out.re.mask = grid.mask;
  out.im.mask = grid.mask;
  for (std::size_t i = 0; i < grid.data.size(); ++i) {
    if (!grid.mask[i]) continue;
    out.re.data[i] = std::cos(grid.data[i]);
    out.im.data[i] = std::sin(grid.data[i]);
  }
  return out;
}

MaskedGrid pow_gate(const MaskedGrid &feature, const MaskedGrid &pow) {
  if (feature.rows != pow.rows || feature.cols != pow.cols) {
    throw std::invalid_argument("pow_gate: shape mismatch");
  }
  MaskedGrid out = feature;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] *= pow.data[i];
    out.mask[i] = feature.mask[i] && pow.mask[i];
  }
  return out;
}

PhasorGrid pow_gate(const PhasorGrid &feature, const MaskedGrid &pow) {
  PhasorGrid out;
  out.re = pow_gate(feature.re, pow);
  out.im = pow_gate(feature.im, pow);
  return out;
}

void apply_mask_sentinel(MaskedGrid &grid) {
  for (std::size_t i = 0; i < grid.data.size(); ++i) {
    if (!grid.mask[i]) grid.data[i] = 0.0;
  }
}

FeatureBundle extract_features(const Waveform &wave,
                               const FrontendParams &params,
                               const FrontendConfig &config) {
  validate_config(config);
  validate_params(params, config);
  const FeatureSet selected = config.selected_features;

  FeatureSet gated;
  for (Feature f : config.pow_gate.to_list()) {
    if (selected.contains(f)) gated.add(f);
  }
  const bool need_pow = selected.contains(Feature::kPow) || !gated.empty();
  const bool need_conv2 = selected.contains(Feature::kPhs2) ||
                          selected.contains(Feature::kIf2) ||
                          selected.contains(Feature::kGd2);
  const bool need_conv1 = selected.contains(Feature::kPhs1) ||
                          selected.contains(Feature::kIf1) ||
                          selected.contains(Feature::kGd1);
  const bool need_phase = need_conv1 || need_conv2;

  const GaborKernel kernel = build_gabor_kernel(params, config);
  const ComplexGrid grid = analyze(wave, kernel);
  const std::vector<std::int64_t> centers =
      frame_centers(wave.samples.size(), config.tap_half_width);

  MaskedGrid pow_map;
  if (need_pow) {
    const LowpassKernel lp = build_lowpass(params.sigma_lowpass_pow, config);
    pow_map = spcen(lowpass_downsample(power(grid), lp), params, config);
  }

  MaskedGrid theta[2];
  if (need_phase) {
    theta[0] = argument(grid, config);
    if (need_conv2) theta[1] = rotate_to_conv2(theta[0], params, centers);
  }

  // Time-unwrapped phase is shared by the PHS and IF paths per convention.
  MaskedGrid unwrapped_time[2];
  for (int c = 0; c < 2; ++c) {
    const bool phs = selected.contains(c == 0 ? Feature::kPhs1 : Feature::kPhs2);
    const bool ifx = selected.contains(c == 0 ? Feature::kIf1 : Feature::kIf2);
    if (phs || ifx) unwrapped_time[c] = unwrap(theta[c], Axis::kTime);
  }

  LowpassKernel lp_phs, lp_if, lp_gd;
  bool have_phs = false, have_if = false, have_gd = false;

  FeatureBundle bundle;
  bundle.config = config;
  bundle.params = params;

  for (Feature f : selected.to_list()) {
    FeatureChannel channel;
    channel.feature = f;
    channel.name = feature_channel_name(f);
    const int c = (f == Feature::kPhs2 || f == Feature::kIf2 ||
                   f == Feature::kGd2)
                      ? 1
                      : 0;
    switch (f) {
      case Feature::kPow:
        channel.planes = {pow_map};
        break;
      case Feature::kPhs1:
      case Feature::kPhs2: {
        if (!have_phs) {
          lp_phs = build_lowpass(params.sigma_lowpass_phs, config);
          have_phs = true;
        }
        PhasorGrid ph = phasor(lowpass_downsample(unwrapped_time[c], lp_phs));
        if (gated.contains(f)) ph = pow_gate(ph, pow_map);
        channel.planes = {ph.re, ph.im};
        break;
      }
      case Feature::kIf1:
      case Feature::kIf2: {
        if (!have_if) {
          lp_if = build_lowpass(params.sigma_lowpass_if, config);
          have_if = true;
        }
        MaskedGrid m = lowpass_downsample(
            differentiate(unwrapped_time[c], Axis::kTime), lp_if);
        if (gated.contains(f)) m = pow_gate(m, pow_map);
        channel.planes = {m};
        break;
      }
      case Feature::kGd1:
      case Feature::kGd2: {
        if (!have_gd) {
          lp_gd = build_lowpass(params.sigma_lowpass_gd, config);
          have_gd = true;
        }
        MaskedGrid m = lowpass_downsample(
            negate(differentiate(unwrap(theta[c], Axis::kFrequency),
                                 Axis::kFrequency)),
            lp_gd);
        if (gated.contains(f)) m = pow_gate(m, pow_map);
        channel.planes = {m};
        break;
      }
    }
    for (MaskedGrid &plane : channel.planes) apply_mask_sentinel(plane);
    bundle.channels.push_back(std::move(channel));
  }
  return bundle;
}

}  // namespace lfx
