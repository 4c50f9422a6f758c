// Copyright 2026 lfx authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <vector>

#include "lfx/amplitude.hpp"
#include "lfx/core.hpp"
#include "lfx/gabor.hpp"

namespace lfx {

/// Phase anchoring of the analysis: kConv1 ties the complex carrier to the
/// sliding window, kConv2 ties it to the time origin.
enum class PhaseConvention { kConv1, kConv2 };

enum class Axis { kTime, kFrequency };

/// Maps any real angle into (-pi, pi].
double principal_value(double theta);

/// Principal argument in (-pi, pi]; undefined (mask false) wherever the
/// squared magnitude is at or below config.zero_amp_threshold or the input
/// element was already undefined.
MaskedGrid argument(const ComplexGrid &grid, const FrontendConfig &config);

/// Re-anchors window-locked phases to the time origin:
/// theta2[m][t] = principal(theta1[m][t] - 2 pi eta[m] frame_offsets[t]).
/// frame_offsets holds each frame's absolute window-center sample index.
MaskedGrid rotate_to_conv2(const MaskedGrid &theta1,
                           const FrontendParams &params,
                           const std::vector<std::int64_t> &frame_offsets);

/// 1-D unwrap along the axis: each defined element after another defined
/// element is shifted by the multiple of 2 pi that brings the step into
/// (-pi, pi]. Runs restart after undefined gaps (first defined element
/// after a gap is kept as-is). Mask and undefined data are untouched.
MaskedGrid unwrap(const MaskedGrid &grid, Axis axis);

/// Forward difference along the axis, shape-preserving: out[k] =
/// in[k] - in[k-1] for k >= 1 and out[0] repeats out[1]. An element is
/// undefined when either operand is undefined (edge included).
MaskedGrid differentiate(const MaskedGrid &grid, Axis axis);

/// Flips the sign of every defined element; mask unchanged.
MaskedGrid negate(const MaskedGrid &grid);

/// (cos theta, sin theta) where defined, (0, 0) where undefined.
PhasorGrid phasor(const MaskedGrid &grid);

/// Elementwise product with the power map; masks are conjoined.
MaskedGrid pow_gate(const MaskedGrid &feature, const MaskedGrid &pow);
PhasorGrid pow_gate(const PhasorGrid &feature, const MaskedGrid &pow);

/// Zeroes the data under false mask entries (the documented sentinel).
void apply_mask_sentinel(MaskedGrid &grid);

/// Full front-end: analysis filterbank, then per selected feature
///   POW:  power -> lowpass -> spcen
///   PHS:  argument -> [rotate] -> unwrap(time) -> lowpass -> phasor
///   IF:   argument -> [rotate] -> unwrap(time) -> diff(time) -> lowpass
///   GD:   argument -> [rotate] -> unwrap(freq) -> diff(freq), negated
///         -> lowpass
/// with optional POW gating of phase features, sentinel-zeroed masks, and
/// one FeatureChannel per selected feature in canonical order.
FeatureBundle extract_features(const Waveform &wave,
                               const FrontendParams &params,
                               const FrontendConfig &config);

}  // namespace lfx
