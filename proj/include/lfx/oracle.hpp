// Copyright 2026 lfx authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <vector>

#include "lfx/core.hpp"
#include "lfx/gabor.hpp"
#include "lfx/phase.hpp"

namespace lfx::oracle {

/// Phase comparisons ignore elements whose magnitude falls below this
/// fraction of the global maximum; phase is numerically meaningless there.
inline constexpr double kMagnitudeFloorRatio = 1e-3;

/// Direct-sum STFT description: Gaussian window of W+1 taps (l1-normalized),
/// analysis frequencies in cycles/sample, frame hop, and the carrier
/// anchoring convention.
struct StftSpec {
  int half_width = 0;  ///< W/2
  double sigma = 0.0;
  std::vector<double> freqs;
  int hop = 1;
  PhaseConvention convention = PhaseConvention::kConv1;
  std::vector<double> window;

  int length() const { return 2 * half_width + 1; }
};

/// Validates and builds the window. tap_half_width is the even W
/// (window length W+1). Throws std::invalid_argument on bad arguments.
StftSpec make_stft_spec(int tap_half_width, double sigma,
                        std::vector<double> freqs, int hop,
                        PhaseConvention convention);

/// Literal windowed sums, one per (bin, frame), evaluated term by term:
///   kConv1: X[k][j] = sum_u x[c_j + u] w[u] e^(-i 2 pi f_k u)
///   kConv2: X[k][j] = sum_u x[c_j + u] w[u] e^(-i 2 pi f_k (c_j + u))
/// with u = -W/2 .. W/2 and frame centers c_j = W/2 + j*hop (valid
/// framing). No factored or transform-based shortcuts are taken, so this
/// is an independent reference for the filterbank path.
ComplexGrid stft_direct(const Waveform &wave, const StftSpec &spec);

/// Deviations of the discrete phase identities, all reduced modulo 2 pi
/// (discrete phase differences carry an inherent 2 pi k ambiguity):
///   anchor shift:  angle(X1) - angle(X2) = 2 pi f_k c_j
///   per-frame step (IF): IF1 - IF2 = 2 pi f_k
///   per-bin step (GD):   GD1 - GD2 = -2 pi c_j df
/// IF/GD use the exact unwrap/difference stencils of the feature pipeline,
/// with GD negated to follow the group-delay sign. Elements below the
/// magnitude floor are skipped.
struct RelationReport {
  double max_anchor_dev = 0.0;
  double max_if_dev = 0.0;
  double max_gd_dev = 0.0;
  double magnitude_floor = 0.0;
  std::int64_t checked_anchor = 0;
  std::int64_t checked_if = 0;
  std::int64_t checked_gd = 0;
};

/// Evaluates both conventions of the given spec. Requires hop == 1 (the
/// IF stencil is a per-sample step) and, for the GD check, uniformly
/// spaced freqs; throws std::invalid_argument otherwise.
RelationReport verify_relations(const Waveform &wave, const StftSpec &spec);

/// Frontend-vs-oracle agreement under STFT-compatible parameters.
struct CompareReport {
  /// max |analyze - X1| / max(|X1|, floor); floor keeps near-zero oracle
  /// magnitudes from inflating the quotient.
  double max_complex_rel_err = 0.0;
  /// max wrapped |frontend theta2 - angle(X2)| above the magnitude floor.
  double max_theta2_dev = 0.0;
  double magnitude_floor = 0.0;
};

/// Runs gabor.analyze against stft_direct on the same signal. Requires
/// uniformly spaced eta and constant sigma_gabor (the configurations under
/// which the filterbank is exactly an STFT); refuses otherwise.
CompareReport compare_to_frontend(const Waveform &wave,
                                  const FrontendParams &params,
                                  const FrontendConfig &config);

}  // namespace lfx::oracle
