// Copyright 2026 lfx authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "lfx/amplitude.hpp"
#include "lfx/core.hpp"
#include "lfx/gabor.hpp"
#include "lfx/phase.hpp"

namespace lfx::grad {

/// Accumulated parameter gradients, shape-matched to FrontendParams.
struct ParamGrads {
  std::vector<double> eta, sigma_gabor;
  std::vector<double> sigma_lowpass_pow, sigma_lowpass_phs;
  std::vector<double> sigma_lowpass_if, sigma_lowpass_gd;
  std::vector<double> spcen_alpha, spcen_delta, spcen_r, spcen_s;

  static ParamGrads zeros(int num_bins);
};

/// Forward pass with retained intermediates. Values are produced by the
/// same operations in the same order as extract_features, so the bundle
/// here is bit-identical to the public entry point's.
struct PipelineTape {
  FrontendConfig config;
  FrontendParams params;
  Waveform wave;
  GaborKernel kernel;
  ComplexGrid analyzed;
  std::vector<std::int64_t> centers;

  bool need_pow = false;
  std::array<bool, 2> need_conv = {false, false};

  LowpassKernel lp_pow, lp_phs, lp_if, lp_gd;
  bool have_lp_phs = false, have_lp_if = false, have_lp_gd = false;

  MaskedGrid pow_raw, pow_ds, pow_out;
  std::array<MaskedGrid, 2> theta;
  std::array<MaskedGrid, 2> unwrapped_time;
  std::array<MaskedGrid, 2> phs_ds;
  std::array<PhasorGrid, 2> phs_phasor;
  std::array<MaskedGrid, 2> if_diff, if_ds;
  std::array<MaskedGrid, 2> gd_unwrap, gd_diff, gd_neg, gd_ds;

  FeatureBundle bundle;
};

PipelineTape run_forward(const Waveform &wave, const FrontendParams &params,
                         const FrontendConfig &config);

/// Sum over every output plane (masked elements contribute their sentinel
/// zeros); the scalar readout used by gradient checking.
double sum_readout(const FeatureBundle &bundle);

/// Reverse pass. plane_cotangents holds one entry per bundle plane, in
/// bundle order, shaped like the plane; entries at masked-out elements are
/// ignored (undefined outputs are constants). Returns parameter gradients.
ParamGrads backward(const PipelineTape &tape,
                    const std::vector<std::vector<double>> &plane_cotangents);

/// backward() with an all-ones cotangent on every plane.
ParamGrads backward_sum_readout(const PipelineTape &tape);

// Per-stage vector-Jacobian products. Cotangents accumulate (+=) into the
// provided buffers; complex cotangents pack (d/d re, d/d im) as (re, im).

/// Gabor tap synthesis w.r.t. eta and sigma_gabor.
void vjp_gabor_kernel(const FrontendParams &params,
                      const FrontendConfig &config, const GaborKernel &kernel,
                      const std::vector<std::complex<double>> &taps_cot,
                      std::vector<double> *g_eta, std::vector<double> *g_sigma);

/// Analysis convolution w.r.t. the waveform and the taps (either output
/// buffer may be null).
void vjp_analyze(const Waveform &wave, const GaborKernel &kernel,
                 const std::vector<std::complex<double>> &out_cot,
                 std::vector<double> *wave_cot,
                 std::vector<std::complex<double>> *taps_cot);

/// Squared modulus.
void vjp_power(const ComplexGrid &input, const std::vector<double> &out_cot,
               std::vector<std::complex<double>> *z_cot);

/// Principal argument; exactly zero at undefined (zero-amplitude) elements.
void vjp_argument(const ComplexGrid &input, const MaskedGrid &theta,
                  const std::vector<double> &theta_cot,
                  std::vector<std::complex<double>> *z_cot);

/// Convention rotation: identity on theta1, -2 pi c_t on eta.
void vjp_rotate(const MaskedGrid &theta2, const FrontendParams &params,
                const std::vector<std::int64_t> &frame_offsets,
                const std::vector<double> &out_cot,
                std::vector<double> *theta1_cot, std::vector<double> *g_eta);

/// Unwrap offsets are locally constant: identity on defined elements.
void vjp_unwrap(const MaskedGrid &input, Axis axis,
                const std::vector<double> &out_cot,
                std::vector<double> *in_cot);

/// Difference stencil (with first-element replication).
void vjp_differentiate(const MaskedGrid &input, Axis axis,
                       const MaskedGrid &output,
                       const std::vector<double> &out_cot,
                       std::vector<double> *in_cot);

/// Gap interpolation plus strided correlation, w.r.t. the (pre-fill) input
/// and the kernel taps (either buffer may be null). The interpolation
/// weights are fixed by the input mask; gradients flow through them onto
/// the defined source elements.
void vjp_lowpass(const MaskedGrid &input, const LowpassKernel &kernel,
                 const MaskedGrid &output, const std::vector<double> &out_cot,
                 std::vector<double> *in_cot, std::vector<double> *taps_cot);

/// Lowpass tap synthesis w.r.t. its sigma array.
void vjp_lowpass_kernel(const std::vector<double> &sigma,
                        const FrontendConfig &config,
                        const LowpassKernel &kernel,
                        const std::vector<double> &taps_cot,
                        std::vector<double> *g_sigma);

/// Energy normalization w.r.t. the input and (alpha, delta, r, s),
/// running the smoother recursion in reverse time order.
void vjp_spcen(const MaskedGrid &input, const FrontendParams &params,
               const FrontendConfig &config,
               const std::vector<double> &out_cot,
               std::vector<double> *in_cot, ParamGrads *grads);

/// Phasor conversion: d re = -sin, d im = cos; zero where undefined.
void vjp_phasor(const PhasorGrid &output, const std::vector<double> &re_cot,
                const std::vector<double> &im_cot,
                std::vector<double> *theta_cot);

/// Elementwise product rule; zero where the joint mask is false.
void vjp_pow_gate(const MaskedGrid &feature, const MaskedGrid &pow,
                  const std::vector<double> &out_cot,
                  std::vector<double> *feature_cot,
                  std::vector<double> *pow_cot);

/// Smoothness diagnostics of a forward pass: distance of every unwrap step
/// from the +-pi wrap boundary, smallest analysis magnitude, smallest
/// sPCEN base. Gradient checks are meaningful only away from these edges.
struct SmoothnessDiag {
  double min_step_margin = 0.0;
  double min_magnitude = 0.0;
  double min_spcen_base = 0.0;
};

SmoothnessDiag measure_smoothness(const PipelineTape &tape);

/// One finite-difference comparison: analytic and numeric directional
/// derivatives of the sum readout along a random direction in one
/// parameter field (or all fields for the "all" entry).
struct GradCheckEntry {
  std::string param;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
};

struct GradCheckReport {
  bool preconditions_ok = false;
  SmoothnessDiag diag;
  std::vector<GradCheckEntry> entries;
  double max_rel_err = 0.0;
};

/// Preconditions (checked, never silently accepted): every unwrap step at
/// least 1e-3 away from +-pi, magnitudes >= 1e-6, sPCEN bases > 1e-6.
/// When they fail, entries are left empty and preconditions_ok is false.
GradCheckReport grad_check(const Waveform &wave, const FrontendParams &params,
                           const FrontendConfig &config, std::uint64_t seed,
                           double h);

/// Isolated finite-difference check of one stage VJP on small seeded data.
struct StageCheck {
  std::string name;
  double rel_err = 0.0;
  double tol = 0.0;
  bool pass = false;
};

/// Exercises every stage VJP against central differences: linear stages
/// (convolutions, differences, rotation, unwrap, gating) at 1e-8, smooth
/// nonlinear stages at 1e-3.
std::vector<StageCheck> stage_checks(std::uint64_t seed);

/// Test hook: deliberately corrupts the squared-modulus VJP so that
/// gradient checks must fail. Never enable outside harness tests.
void set_vjp_fault_injection(bool enabled);

}  // namespace lfx::grad
