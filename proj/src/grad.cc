// Copyright 2026 lfx authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "lfx/grad.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

namespace lfx::grad {

namespace {

bool g_fault_injection = false;

std::vector<double> zeros_like_grid(const MaskedGrid &g) {
  return std::vector<double>(g.data.size(), 0.0);
}

void check_size(std::size_t got, std::size_t want, const char *what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": cotangent size " +
                                std::to_string(got) + ", expected " +
                                std::to_string(want));
  }
}

int conv_index(Feature f) {
  return (f == Feature::kPhs2 || f == Feature::kIf2 || f == Feature::kGd2) ? 1
                                                                           : 0;
}

}  // namespace

void set_vjp_fault_injection(bool enabled) { g_fault_injection = enabled; }

ParamGrads ParamGrads::zeros(int num_bins) {
  ParamGrads g;
  const std::size_t m = static_cast<std::size_t>(num_bins);
  g.eta.assign(m, 0.0);
  g.sigma_gabor.assign(m, 0.0);
  g.sigma_lowpass_pow.assign(m, 0.0);
  g.sigma_lowpass_phs.assign(m, 0.0);
  g.sigma_lowpass_if.assign(m, 0.0);
  g.sigma_lowpass_gd.assign(m, 0.0);
  g.spcen_alpha.assign(m, 0.0);
  g.spcen_delta.assign(m, 0.0);
  g.spcen_r.assign(m, 0.0);
  g.spcen_s.assign(m, 0.0);
  return g;
}

PipelineTape run_forward(const Waveform &wave, const FrontendParams &params,
                         const FrontendConfig &config) {
  validate_config(config);
  validate_params(params, config);
  PipelineTape tape;
  tape.config = config;
  tape.params = params;
  tape.wave = wave;
  const FeatureSet selected = config.selected_features;

  FeatureSet gated;
  for (Feature f : config.pow_gate.to_list()) {
    if (selected.contains(f)) gated.add(f);
  }
  tape.need_pow = selected.contains(Feature::kPow) || !gated.empty();
  tape.need_conv[1] = selected.contains(Feature::kPhs2) ||
                      selected.contains(Feature::kIf2) ||
                      selected.contains(Feature::kGd2);
  tape.need_conv[0] = selected.contains(Feature::kPhs1) ||
                      selected.contains(Feature::kIf1) ||
                      selected.contains(Feature::kGd1);
  const bool need_phase = tape.need_conv[0] || tape.need_conv[1];

  tape.kernel = build_gabor_kernel(params, config);
  tape.analyzed = analyze(wave, tape.kernel);
  tape.centers = frame_centers(wave.samples.size(), config.tap_half_width);

  if (tape.need_pow) {
    tape.lp_pow = build_lowpass(params.sigma_lowpass_pow, config);
    tape.pow_raw = power(tape.analyzed);
    tape.pow_ds = lowpass_downsample(tape.pow_raw, tape.lp_pow);
    tape.pow_out = spcen(tape.pow_ds, params, config);
  }

  if (need_phase) {
    tape.theta[0] = argument(tape.analyzed, config);
    if (tape.need_conv[1]) {
      tape.theta[1] = rotate_to_conv2(tape.theta[0], params, tape.centers);
    }
  }

  for (int c = 0; c < 2; ++c) {
    const bool phs =
        selected.contains(c == 0 ? Feature::kPhs1 : Feature::kPhs2);
    const bool ifx = selected.contains(c == 0 ? Feature::kIf1 : Feature::kIf2);
    if (phs || ifx) tape.unwrapped_time[c] = unwrap(tape.theta[c], Axis::kTime);
  }

  tape.bundle.config = config;
  tape.bundle.params = params;

  for (Feature f : selected.to_list()) {
    FeatureChannel channel;
    channel.feature = f;
    channel.name = feature_channel_name(f);
    const int c = conv_index(f);
    switch (f) {
      case Feature::kPow:
        channel.planes = {tape.pow_out};
        break;
      case Feature::kPhs1:
      case Feature::kPhs2: {
        if (!tape.have_lp_phs) {
          tape.lp_phs = build_lowpass(params.sigma_lowpass_phs, config);
          tape.have_lp_phs = true;
        }
        tape.phs_ds[c] = lowpass_downsample(tape.unwrapped_time[c], tape.lp_phs);
        tape.phs_phasor[c] = phasor(tape.phs_ds[c]);
        PhasorGrid ph = tape.phs_phasor[c];
        if (gated.contains(f)) ph = pow_gate(ph, tape.pow_out);
        channel.planes = {ph.re, ph.im};
        break;
      }
      case Feature::kIf1:
      case Feature::kIf2: {
        if (!tape.have_lp_if) {
          tape.lp_if = build_lowpass(params.sigma_lowpass_if, config);
          tape.have_lp_if = true;
        }
        tape.if_diff[c] = differentiate(tape.unwrapped_time[c], Axis::kTime);
        tape.if_ds[c] = lowpass_downsample(tape.if_diff[c], tape.lp_if);
        MaskedGrid m = tape.if_ds[c];
        if (gated.contains(f)) m = pow_gate(m, tape.pow_out);
        channel.planes = {m};
        break;
      }
      case Feature::kGd1:
      case Feature::kGd2: {
        if (!tape.have_lp_gd) {
          tape.lp_gd = build_lowpass(params.sigma_lowpass_gd, config);
          tape.have_lp_gd = true;
        }
        tape.gd_unwrap[c] = unwrap(tape.theta[c], Axis::kFrequency);
        tape.gd_diff[c] = differentiate(tape.gd_unwrap[c], Axis::kFrequency);
        tape.gd_neg[c] = negate(tape.gd_diff[c]);
        tape.gd_ds[c] = lowpass_downsample(tape.gd_neg[c], tape.lp_gd);
        MaskedGrid m = tape.gd_ds[c];
        if (gated.contains(f)) m = pow_gate(m, tape.pow_out);
        channel.planes = {m};
        break;
      }
    }
    for (MaskedGrid &plane : channel.planes) apply_mask_sentinel(plane);
    tape.bundle.channels.push_back(std::move(channel));
  }
  return tape;
}

double sum_readout(const FeatureBundle &bundle) {
  double s = 0.0;
  for (const FeatureChannel &ch : bundle.channels) {
    for (const MaskedGrid &plane : ch.planes) {
      for (double v : plane.data) s += v;
    }
  }
  return s;
}

void vjp_gabor_kernel(const FrontendParams &params,
                      const FrontendConfig & /*config*/,
                      const GaborKernel &kernel,
                      const std::vector<std::complex<double>> &taps_cot,
                      std::vector<double> *g_eta,
                      std::vector<double> *g_sigma) {
  check_size(taps_cot.size(), kernel.taps.size(), "vjp_gabor_kernel");
  const int len = kernel.length();
  const double two_pi = 2.0 * M_PI;
  for (int m = 0; m < kernel.num_bins; ++m) {
    const double sigma = params.sigma_gabor[m];
    // Normalizer derivative: with A(n) the Gaussian envelope and N their
    // sum, d(A/N)/dsigma = (A/N) (n^2/sigma^3 - D/N), D = sum A n^2/sigma^3.
    double n_sum = 0.0, d_sum = 0.0;
    for (int col = 0; col < len; ++col) {
      const double n = col - kernel.half_width;
      const double env = std::exp(-n * n / (2.0 * sigma * sigma));
      n_sum += env;
      d_sum += env * n * n / (sigma * sigma * sigma);
    }
    double ge = 0.0, gs = 0.0;
    for (int col = 0; col < len; ++col) {
      const double n = col - kernel.half_width;
      const std::complex<double> tap = kernel.at(m, col);
      const std::complex<double> u = taps_cot[kernel.index(m, col)];
      ge += two_pi * n * (u.imag() * tap.real() - u.real() * tap.imag());
      const double q = n * n / (sigma * sigma * sigma) - d_sum / n_sum;
      gs += q * (u.real() * tap.real() + u.imag() * tap.imag());
    }
    if (g_eta) (*g_eta)[m] += ge;
    if (g_sigma) (*g_sigma)[m] += gs;
  }
}

void vjp_analyze(const Waveform &wave, const GaborKernel &kernel,
                 const std::vector<std::complex<double>> &out_cot,
                 std::vector<double> *wave_cot,
                 std::vector<std::complex<double>> *taps_cot) {
  const int h = kernel.half_width;
  const int len = kernel.length();
  const std::int64_t num_frames =
      static_cast<std::int64_t>(wave.samples.size()) - 2 * h;
  check_size(out_cot.size(),
             static_cast<std::size_t>(kernel.num_bins) * num_frames,
             "vjp_analyze");
  const double *x = wave.samples.data();
  for (int m = 0; m < kernel.num_bins; ++m) {
    const std::complex<double> *taps = &kernel.taps[kernel.index(m, 0)];
    for (std::int64_t j = 0; j < num_frames; ++j) {
      const std::complex<double> u =
          out_cot[static_cast<std::size_t>(m) * num_frames + j];
      if (u.real() == 0.0 && u.imag() == 0.0) continue;
      for (int col = 0; col < len; ++col) {
        const std::int64_t s = j + len - 1 - col;
        if (taps_cot) {
          (*taps_cot)[kernel.index(m, col)] += u * x[s];
        }
        if (wave_cot) {
          (*wave_cot)[s] +=
              u.real() * taps[col].real() + u.imag() * taps[col].imag();
        }
      }
    }
  }
}

void vjp_power(const ComplexGrid &input, const std::vector<double> &out_cot,
               std::vector<std::complex<double>> *z_cot) {
  check_size(out_cot.size(), input.data.size(), "vjp_power");
  const double scale = g_fault_injection ? 2.1 : 2.0;
  for (std::size_t i = 0; i < input.data.size(); ++i) {
    const double u = out_cot[i];
    if (u == 0.0) continue;
    (*z_cot)[i] += std::complex<double>(scale * input.data[i].real() * u,
                                        scale * input.data[i].imag() * u);
  }
}

void vjp_argument(const ComplexGrid &input, const MaskedGrid &theta,
                  const std::vector<double> &theta_cot,
                  std::vector<std::complex<double>> *z_cot) {
  check_size(theta_cot.size(), input.data.size(), "vjp_argument");
  for (std::size_t i = 0; i < input.data.size(); ++i) {
    // The zero-amplitude rule: undefined elements contribute exactly 0.
    if (!theta.mask[i]) continue;
    const double u = theta_cot[i];
    if (u == 0.0) continue;
    const std::complex<double> z = input.data[i];
    const double r2 = std::norm(z);
    (*z_cot)[i] +=
        std::complex<double>(-z.imag() / r2 * u, z.real() / r2 * u);
  }
}

void vjp_rotate(const MaskedGrid &theta2, const FrontendParams & /*params*/,
                const std::vector<std::int64_t> &frame_offsets,
                const std::vector<double> &out_cot,
                std::vector<double> *theta1_cot, std::vector<double> *g_eta) {
  check_size(out_cot.size(), theta2.data.size(), "vjp_rotate");
  const double two_pi = 2.0 * M_PI;
  for (int m = 0; m < theta2.rows; ++m) {
    double ge = 0.0;
    for (int t = 0; t < theta2.cols; ++t) {
      const std::size_t i = theta2.index(m, t);
      if (!theta2.mask[i]) continue;
      const double u = out_cot[i];
      if (theta1_cot) (*theta1_cot)[i] += u;
      ge -= u * two_pi * frame_offsets[t];
    }
    if (g_eta) (*g_eta)[m] += ge;
  }
}

void vjp_unwrap(const MaskedGrid &input, Axis /*axis*/,
                const std::vector<double> &out_cot,
                std::vector<double> *in_cot) {
  check_size(out_cot.size(), input.data.size(), "vjp_unwrap");
  // The 2 pi k offsets are locally constant, so the map is the identity on
  // defined elements no matter the axis.
  for (std::size_t i = 0; i < input.data.size(); ++i) {
    if (input.mask[i]) (*in_cot)[i] += out_cot[i];
  }
}

void vjp_differentiate(const MaskedGrid &input, Axis axis,
                       const MaskedGrid &output,
                       const std::vector<double> &out_cot,
                       std::vector<double> *in_cot) {
  check_size(out_cot.size(), input.data.size(), "vjp_differentiate");
  const bool time = axis == Axis::kTime;
  const int lines = time ? input.rows : input.cols;
  const int length = time ? input.cols : input.rows;
  const std::size_t line_stride = time ? input.cols : 1;
  const std::size_t elem_stride = time ? 1 : input.cols;
  for (int line = 0; line < lines; ++line) {
    const std::size_t base = line * line_stride;
    for (int k = 0; k < length; ++k) {
      const std::size_t idx = base + k * elem_stride;
      if (!output.mask[idx]) continue;
      const double u = out_cot[idx];
      if (u == 0.0) continue;
      const int hi = k == 0 ? 1 : k;
      (*in_cot)[base + hi * elem_stride] += u;
      (*in_cot)[base + (hi - 1) * elem_stride] -= u;
    }
  }
}

void vjp_lowpass(const MaskedGrid &input, const LowpassKernel &kernel,
                 const MaskedGrid &output, const std::vector<double> &out_cot,
                 std::vector<double> *in_cot, std::vector<double> *taps_cot) {
  check_size(out_cot.size(), output.data.size(), "vjp_lowpass");
  const int len = kernel.length();
  const int in_width = input.cols;
  const int out_width = output.cols;
  std::vector<double> filled(in_width);
  std::vector<double> filled_cot(in_width);
  for (int m = 0; m < input.rows; ++m) {
    const std::uint8_t *mask_row = &input.mask[input.index(m, 0)];
    const RowInterp plan = plan_row_interp(mask_row, in_width);
    if (plan.all_undefined) continue;  // constant-zero outputs
    apply_row_interp(plan, &input.data[input.index(m, 0)], filled.data());
    std::fill(filled_cot.begin(), filled_cot.end(), 0.0);
    const double *taps = &kernel.taps[kernel.index(m, 0)];
    for (int j = 0; j < out_width; ++j) {
      if (!output.mask[output.index(m, j)]) continue;
      const double u = out_cot[output.index(m, j)];
      if (u == 0.0) continue;
      const int start = j * kernel.stride;
      for (int col = 0; col < len; ++col) {
        filled_cot[start + col] += u * taps[col];
        if (taps_cot) (*taps_cot)[kernel.index(m, col)] += u * filled[start + col];
      }
    }
    if (!in_cot) continue;
    double *in_row_cot = in_cot->data() + input.index(m, 0);
    for (int k = 0; k < in_width; ++k) {
      const double fc = filled_cot[k];
      if (fc == 0.0) continue;
      in_row_cot[plan.src0[k]] += plan.w0[k] * fc;
      if (plan.src1[k] >= 0) in_row_cot[plan.src1[k]] += plan.w1[k] * fc;
    }
  }
}

void vjp_lowpass_kernel(const std::vector<double> &sigma,
                        const FrontendConfig &config,
                        const LowpassKernel &kernel,
                        const std::vector<double> &taps_cot,
                        std::vector<double> *g_sigma) {
  check_size(taps_cot.size(), kernel.taps.size(), "vjp_lowpass_kernel");
  const int len = kernel.length();
  const double beta = 0.5 * (config.tap_half_width - 1.0);
  for (int m = 0; m < kernel.num_bins; ++m) {
    const double s = sigma[m];
    const double denom = beta * beta * s * s * s;
    double n_sum = 0.0, d_sum = 0.0;
    for (int col = 0; col < len; ++col) {
      const double n = col - kernel.half_width;
      const double width = 0.5 * s * (config.tap_half_width - 1.0);
      const double env = std::exp(-n * n / (2.0 * width * width));
      n_sum += env;
      d_sum += env * n * n / denom;
    }
    double gs = 0.0;
    for (int col = 0; col < len; ++col) {
      const double n = col - kernel.half_width;
      const double q = n * n / denom - d_sum / n_sum;
      gs += taps_cot[kernel.index(m, col)] * kernel.at(m, col) * q;
    }
    (*g_sigma)[m] += gs;
  }
}

void vjp_spcen(const MaskedGrid &input, const FrontendParams &params,
               const FrontendConfig &config,
               const std::vector<double> &out_cot,
               std::vector<double> *in_cot, ParamGrads *grads) {
  check_size(out_cot.size(), input.data.size(), "vjp_spcen");
  const double eps = config.epsilon;
  const int cols = input.cols;
  std::vector<double> smoothed(cols);
  std::vector<double> m_cot(cols);
  for (int m = 0; m < input.rows; ++m) {
    const double alpha = params.spcen_alpha[m];
    const double delta = params.spcen_delta[m];
    const double r = params.spcen_r[m];
    const double inv_r = 1.0 / r;
    const double s = params.spcen_s[m];
    const double *f = &input.data[input.index(m, 0)];
    smoothed[0] = f[0];
    for (int t = 1; t < cols; ++t) {
      smoothed[t] = (1.0 - s) * smoothed[t - 1] + s * f[t];
    }
    const double delta_pow = std::pow(delta, inv_r);
    double g_alpha = 0.0, g_delta = 0.0, g_r = 0.0, g_s = 0.0;
    std::fill(m_cot.begin(), m_cot.end(), 0.0);
    for (int t = 0; t < cols; ++t) {
      const double u = out_cot[input.index(m, t)];
      if (u == 0.0) continue;
      const double ref = eps + smoothed[t];
      const double p = std::pow(ref, -alpha);
      const double base = f[t] * p + delta;
      const double b_cot = u * inv_r * std::pow(base, inv_r - 1.0);
      if (in_cot) (*in_cot)[input.index(m, t)] += b_cot * p;
      m_cot[t] += b_cot * f[t] * -alpha * std::pow(ref, -alpha - 1.0);
      g_alpha += b_cot * -f[t] * p * std::log(ref);
      g_delta += b_cot - u * inv_r * delta_pow / delta;
      g_r += u * -inv_r * inv_r *
             (std::pow(base, inv_r) * std::log(base) -
              delta_pow * std::log(delta));
    }
    // Smoother recursion in reverse time order.
    double acc = 0.0;
    for (int t = cols - 1; t >= 0; --t) {
      acc += m_cot[t];
      if (t >= 1) {
        g_s += acc * (f[t] - smoothed[t - 1]);
        if (in_cot) (*in_cot)[input.index(m, t)] += acc * s;
        acc *= 1.0 - s;
      } else if (in_cot) {
        (*in_cot)[input.index(m, 0)] += acc;
      }
    }
    if (grads) {
      grads->spcen_alpha[m] += g_alpha;
      grads->spcen_delta[m] += g_delta;
      grads->spcen_r[m] += g_r;
      grads->spcen_s[m] += g_s;
    }
  }
}

void vjp_phasor(const PhasorGrid &output, const std::vector<double> &re_cot,
                const std::vector<double> &im_cot,
                std::vector<double> *theta_cot) {
  check_size(re_cot.size(), output.re.data.size(), "vjp_phasor");
  check_size(im_cot.size(), output.im.data.size(), "vjp_phasor");
  for (std::size_t i = 0; i < output.re.data.size(); ++i) {
    if (!output.re.mask[i]) continue;
    (*theta_cot)[i] +=
        -output.im.data[i] * re_cot[i] + output.re.data[i] * im_cot[i];
  }
}

void vjp_pow_gate(const MaskedGrid &feature, const MaskedGrid &pow,
                  const std::vector<double> &out_cot,
                  std::vector<double> *feature_cot,
                  std::vector<double> *pow_cot) {
  check_size(out_cot.size(), feature.data.size(), "vjp_pow_gate");
  for (std::size_t i = 0; i < feature.data.size(); ++i) {
    if (!feature.mask[i] || !pow.mask[i]) continue;
    const double u = out_cot[i];
    if (u == 0.0) continue;
    if (feature_cot) (*feature_cot)[i] += u * pow.data[i];
    if (pow_cot) (*pow_cot)[i] += u * feature.data[i];
  }
}

ParamGrads backward(const PipelineTape &tape,
                    const std::vector<std::vector<double>> &plane_cotangents) {
  const FrontendConfig &config = tape.config;
  const FrontendParams &params = tape.params;
  const int num_bins = config.num_bins;
  ParamGrads grads = ParamGrads::zeros(num_bins);
  if (plane_cotangents.size() !=
      static_cast<std::size_t>(tape.bundle.plane_count())) {
    throw std::invalid_argument("backward: one cotangent per plane required");
  }

  FeatureSet gated;
  for (Feature f : config.pow_gate.to_list()) {
    if (config.selected_features.contains(f)) gated.add(f);
  }

  std::vector<std::complex<double>> z_cot(tape.analyzed.data.size());
  std::array<std::vector<double>, 2> theta_cot;
  std::array<std::vector<double>, 2> unwrap_time_cot;
  for (int c = 0; c < 2; ++c) {
    if (tape.theta[c].rows > 0) theta_cot[c] = zeros_like_grid(tape.theta[c]);
    if (tape.unwrapped_time[c].rows > 0) {
      unwrap_time_cot[c] = zeros_like_grid(tape.unwrapped_time[c]);
    }
  }
  std::vector<double> pow_out_cot;
  if (tape.need_pow) pow_out_cot = zeros_like_grid(tape.pow_out);
  std::vector<double> lp_phs_taps_cot, lp_if_taps_cot, lp_gd_taps_cot;
  if (tape.have_lp_phs) lp_phs_taps_cot.assign(tape.lp_phs.taps.size(), 0.0);
  if (tape.have_lp_if) lp_if_taps_cot.assign(tape.lp_if.taps.size(), 0.0);
  if (tape.have_lp_gd) lp_gd_taps_cot.assign(tape.lp_gd.taps.size(), 0.0);

  // Masked outputs are sentinel constants; their cotangents are dropped.
  auto masked_cot = [](const std::vector<double> &cot, const MaskedGrid &plane) {
    std::vector<double> out(cot);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!plane.mask[i]) out[i] = 0.0;
    }
    return out;
  };

  std::size_t plane_idx = 0;
  for (const FeatureChannel &ch : tape.bundle.channels) {
    const Feature f = ch.feature;
    const int c = conv_index(f);
    switch (f) {
      case Feature::kPow: {
        const std::vector<double> u =
            masked_cot(plane_cotangents[plane_idx], ch.planes[0]);
        for (std::size_t i = 0; i < u.size(); ++i) pow_out_cot[i] += u[i];
        plane_idx += 1;
        break;
      }
      case Feature::kPhs1:
      case Feature::kPhs2: {
        std::vector<double> u_re =
            masked_cot(plane_cotangents[plane_idx], ch.planes[0]);
        std::vector<double> u_im =
            masked_cot(plane_cotangents[plane_idx + 1], ch.planes[1]);
        plane_idx += 2;
        std::vector<double> f_re(u_re.size(), 0.0), f_im(u_im.size(), 0.0);
        if (gated.contains(f)) {
          vjp_pow_gate(tape.phs_phasor[c].re, tape.pow_out, u_re, &f_re,
                       &pow_out_cot);
          vjp_pow_gate(tape.phs_phasor[c].im, tape.pow_out, u_im, &f_im,
                       &pow_out_cot);
        } else {
          f_re = u_re;
          f_im = u_im;
        }
        std::vector<double> ds_cot = zeros_like_grid(tape.phs_ds[c]);
        vjp_phasor(tape.phs_phasor[c], f_re, f_im, &ds_cot);
        vjp_lowpass(tape.unwrapped_time[c], tape.lp_phs, tape.phs_ds[c],
                    ds_cot, &unwrap_time_cot[c], &lp_phs_taps_cot);
        break;
      }
      case Feature::kIf1:
      case Feature::kIf2: {
        std::vector<double> u =
            masked_cot(plane_cotangents[plane_idx], ch.planes[0]);
        plane_idx += 1;
        std::vector<double> pre(u.size(), 0.0);
        if (gated.contains(f)) {
          vjp_pow_gate(tape.if_ds[c], tape.pow_out, u, &pre, &pow_out_cot);
        } else {
          pre = u;
        }
        std::vector<double> diff_cot = zeros_like_grid(tape.if_diff[c]);
        vjp_lowpass(tape.if_diff[c], tape.lp_if, tape.if_ds[c], pre, &diff_cot,
                    &lp_if_taps_cot);
        vjp_differentiate(tape.unwrapped_time[c], Axis::kTime, tape.if_diff[c],
                          diff_cot, &unwrap_time_cot[c]);
        break;
      }
      case Feature::kGd1:
      case Feature::kGd2: {
        std::vector<double> u =
            masked_cot(plane_cotangents[plane_idx], ch.planes[0]);
        plane_idx += 1;
        std::vector<double> pre(u.size(), 0.0);
        if (gated.contains(f)) {
          vjp_pow_gate(tape.gd_ds[c], tape.pow_out, u, &pre, &pow_out_cot);
        } else {
          pre = u;
        }
        std::vector<double> neg_cot = zeros_like_grid(tape.gd_neg[c]);
        vjp_lowpass(tape.gd_neg[c], tape.lp_gd, tape.gd_ds[c], pre, &neg_cot,
                    &lp_gd_taps_cot);
        for (double &v : neg_cot) v = -v;
        std::vector<double> gdu_cot = zeros_like_grid(tape.gd_unwrap[c]);
        vjp_differentiate(tape.gd_unwrap[c], Axis::kFrequency, tape.gd_diff[c],
                          neg_cot, &gdu_cot);
        vjp_unwrap(tape.theta[c], Axis::kFrequency, gdu_cot, &theta_cot[c]);
        break;
      }
    }
  }

  if (tape.need_pow) {
    std::vector<double> pow_ds_cot = zeros_like_grid(tape.pow_ds);
    vjp_spcen(tape.pow_ds, params, config, pow_out_cot, &pow_ds_cot, &grads);
    std::vector<double> pow_raw_cot = zeros_like_grid(tape.pow_raw);
    std::vector<double> lp_pow_taps_cot(tape.lp_pow.taps.size(), 0.0);
    vjp_lowpass(tape.pow_raw, tape.lp_pow, tape.pow_ds, pow_ds_cot,
                &pow_raw_cot, &lp_pow_taps_cot);
    vjp_lowpass_kernel(params.sigma_lowpass_pow, config, tape.lp_pow,
                       lp_pow_taps_cot, &grads.sigma_lowpass_pow);
    vjp_power(tape.analyzed, pow_raw_cot, &z_cot);
  }

  for (int c = 0; c < 2; ++c) {
    if (!unwrap_time_cot[c].empty()) {
      vjp_unwrap(tape.theta[c], Axis::kTime, unwrap_time_cot[c], &theta_cot[c]);
    }
  }
  if (!theta_cot[1].empty()) {
    vjp_rotate(tape.theta[1], params, tape.centers, theta_cot[1],
               &theta_cot[0], &grads.eta);
  }
  if (!theta_cot[0].empty()) {
    vjp_argument(tape.analyzed, tape.theta[0], theta_cot[0], &z_cot);
  }
  if (tape.have_lp_phs) {
    vjp_lowpass_kernel(params.sigma_lowpass_phs, config, tape.lp_phs,
                       lp_phs_taps_cot, &grads.sigma_lowpass_phs);
  }
  if (tape.have_lp_if) {
    vjp_lowpass_kernel(params.sigma_lowpass_if, config, tape.lp_if,
                       lp_if_taps_cot, &grads.sigma_lowpass_if);
  }
  if (tape.have_lp_gd) {
    vjp_lowpass_kernel(params.sigma_lowpass_gd, config, tape.lp_gd,
                       lp_gd_taps_cot, &grads.sigma_lowpass_gd);
  }

  std::vector<std::complex<double>> taps_cot(tape.kernel.taps.size());
  vjp_analyze(tape.wave, tape.kernel, z_cot, nullptr, &taps_cot);
  vjp_gabor_kernel(params, config, tape.kernel, taps_cot, &grads.eta,
                   &grads.sigma_gabor);
  return grads;
}

ParamGrads backward_sum_readout(const PipelineTape &tape) {
  std::vector<std::vector<double>> cots;
  for (const FeatureChannel &ch : tape.bundle.channels) {
    for (const MaskedGrid &plane : ch.planes) {
      cots.emplace_back(plane.data.size(), 1.0);
    }
  }
  return backward(tape, cots);
}

SmoothnessDiag measure_smoothness(const PipelineTape &tape) {
  const double inf = std::numeric_limits<double>::infinity();
  SmoothnessDiag diag{inf, inf, inf};
  for (const auto &z : tape.analyzed.data) {
    diag.min_magnitude = std::min(diag.min_magnitude, std::abs(z));
  }
  auto scan_steps = [&diag](const MaskedGrid &grid, Axis axis) {
    const bool time = axis == Axis::kTime;
    const int lines = time ? grid.rows : grid.cols;
    const int length = time ? grid.cols : grid.rows;
    const std::size_t line_stride = time ? grid.cols : 1;
    const std::size_t elem_stride = time ? 1 : grid.cols;
    for (int line = 0; line < lines; ++line) {
      const std::size_t base = line * line_stride;
      bool have_prev = false;
      double prev = 0.0;
      for (int k = 0; k < length; ++k) {
        const std::size_t idx = base + k * elem_stride;
        if (!grid.mask[idx]) {
          have_prev = false;
          continue;
        }
        if (have_prev) {
          const double step = principal_value(grid.data[idx] - prev);
          diag.min_step_margin =
              std::min(diag.min_step_margin, M_PI - std::abs(step));
        }
        prev = grid.data[idx];
        have_prev = true;
      }
    }
  };
  for (int c = 0; c < 2; ++c) {
    if (tape.unwrapped_time[c].rows > 0) scan_steps(tape.theta[c], Axis::kTime);
    if (tape.gd_unwrap[c].rows > 0) scan_steps(tape.theta[c], Axis::kFrequency);
  }
  if (tape.need_pow) {
    for (int m = 0; m < tape.pow_ds.rows; ++m) {
      const double alpha = tape.params.spcen_alpha[m];
      const double delta = tape.params.spcen_delta[m];
      const double s = tape.params.spcen_s[m];
      double smoothed = tape.pow_ds.at(m, 0);
      for (int t = 0; t < tape.pow_ds.cols; ++t) {
        const double f = tape.pow_ds.at(m, t);
        if (t > 0) smoothed = (1.0 - s) * smoothed + s * f;
        const double base =
            f * std::pow(tape.config.epsilon + smoothed, -alpha) + delta;
        diag.min_spcen_base = std::min(diag.min_spcen_base, base);
      }
    }
  }
  return diag;
}

namespace {

std::vector<double> random_direction(std::mt19937_64 &rng, std::size_t n) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  double norm2 = 0.0;
  for (double &x : v) {
    x = dist(rng);
    norm2 += x * x;
  }
  const double norm = std::sqrt(norm2);
  if (norm > 0.0) {
    for (double &x : v) x /= norm;
  }
  return v;
}

double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

struct ParamField {
  const char *name;
  std::vector<double> FrontendParams::*member;
  std::vector<double> ParamGrads::*grad;
};

const ParamField kParamFields[] = {
    {"eta", &FrontendParams::eta, &ParamGrads::eta},
    {"sigma_gabor", &FrontendParams::sigma_gabor, &ParamGrads::sigma_gabor},
    {"sigma_lowpass_pow", &FrontendParams::sigma_lowpass_pow,
     &ParamGrads::sigma_lowpass_pow},
    {"sigma_lowpass_phs", &FrontendParams::sigma_lowpass_phs,
     &ParamGrads::sigma_lowpass_phs},
    {"sigma_lowpass_if", &FrontendParams::sigma_lowpass_if,
     &ParamGrads::sigma_lowpass_if},
    {"sigma_lowpass_gd", &FrontendParams::sigma_lowpass_gd,
     &ParamGrads::sigma_lowpass_gd},
    {"spcen_alpha", &FrontendParams::spcen_alpha, &ParamGrads::spcen_alpha},
    {"spcen_delta", &FrontendParams::spcen_delta, &ParamGrads::spcen_delta},
    {"spcen_r", &FrontendParams::spcen_r, &ParamGrads::spcen_r},
    {"spcen_s", &FrontendParams::spcen_s, &ParamGrads::spcen_s},
};

double dot(const std::vector<double> &a, const std::vector<double> &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

GradCheckReport grad_check(const Waveform &wave, const FrontendParams &params,
                           const FrontendConfig &config, std::uint64_t seed,
                           double h) {
  GradCheckReport report;
  const PipelineTape tape = run_forward(wave, params, config);
  report.diag = measure_smoothness(tape);
  report.preconditions_ok = report.diag.min_step_margin > 1e-3 &&
                            report.diag.min_magnitude >= 1e-6 &&
                            report.diag.min_spcen_base > 1e-6;
  if (!report.preconditions_ok) return report;

  const ParamGrads grads = backward_sum_readout(tape);
  auto readout = [&](const FrontendParams &p) {
    return sum_readout(extract_features(wave, p, config));
  };

  std::mt19937_64 rng(seed);
  auto probe_one = [&](const ParamField &field) {
    const std::vector<double> v =
        random_direction(rng, (params.*(field.member)).size());
    GradCheckEntry entry;
    entry.param = field.name;
    entry.analytic = dot(grads.*(field.grad), v);
    FrontendParams plus = params, minus = params;
    for (std::size_t i = 0; i < v.size(); ++i) {
      (plus.*(field.member))[i] += h * v[i];
      (minus.*(field.member))[i] -= h * v[i];
    }
    entry.numeric = (readout(plus) - readout(minus)) / (2.0 * h);
    entry.rel_err = rel_error(entry.analytic, entry.numeric);
    return entry;
  };
  for (const ParamField &field : kParamFields) {
    report.entries.push_back(probe_one(field));
  }

  // Joint probe across every field at once.
  GradCheckEntry joint;
  joint.param = "all";
  FrontendParams plus = params, minus = params;
  for (const ParamField &field : kParamFields) {
    const std::vector<double> v =
        random_direction(rng, (params.*(field.member)).size());
    joint.analytic += dot(grads.*(field.grad), v);
    for (std::size_t i = 0; i < v.size(); ++i) {
      (plus.*(field.member))[i] += h * v[i];
      (minus.*(field.member))[i] -= h * v[i];
    }
  }
  joint.numeric = (readout(plus) - readout(minus)) / (2.0 * h);
  joint.rel_err = rel_error(joint.analytic, joint.numeric);
  report.entries.push_back(joint);

  for (const GradCheckEntry &e : report.entries) {
    report.max_rel_err = std::max(report.max_rel_err, e.rel_err);
  }
  return report;
}

namespace {

using Vec = std::vector<double>;

Vec flatten(const std::vector<std::complex<double>> &z) {
  Vec out(2 * z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[2 * i] = z[i].real();
    out[2 * i + 1] = z[i].imag();
  }
  return out;
}

std::vector<std::complex<double>> unflatten(const Vec &v) {
  std::vector<std::complex<double>> out(v.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = {v[2 * i], v[2 * i + 1]};
  }
  return out;
}

}  // namespace

std::vector<StageCheck> stage_checks(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<StageCheck> checks;

  // One directional finite-difference comparison of a stage VJP. umask (if
  // given) zeroes the upstream cotangent at positions whose outputs are not
  // genuine functions of the input (masked passthrough or scratch values).
  auto fd_check = [&](const std::string &name, double tol, double h,
                      const Vec &x0, const std::function<Vec(const Vec &)> &fwd,
                      const std::function<Vec(const Vec &, const Vec &)> &vjp,
                      const std::vector<std::uint8_t> *umask = nullptr) {
    const Vec y0 = fwd(x0);
    Vec u(y0.size());
    for (double &w : u) w = unit(rng);
    if (umask) {
      for (std::size_t i = 0; i < u.size(); ++i) {
        if (!(*umask)[i]) u[i] = 0.0;
      }
    }
    const Vec x_cot = vjp(x0, u);
    const Vec v = random_direction(rng, x0.size());
    double analytic = dot(x_cot, v);
    Vec xp = x0, xm = x0;
    for (std::size_t i = 0; i < x0.size(); ++i) {
      xp[i] += h * v[i];
      xm[i] -= h * v[i];
    }
    const double numeric = (dot(u, fwd(xp)) - dot(u, fwd(xm))) / (2.0 * h);
    const double rel = rel_error(analytic, numeric);
    checks.push_back({name, rel, tol, rel <= tol});
  };

  constexpr double kLinTol = 1e-8;
  constexpr double kNonlinTol = 1e-3;
  // Linear maps have no truncation term, so a larger step only reduces
  // cancellation noise; it must merely stay inside the piecewise-linear
  // cells (wrap boundaries, masks), which the synthetic data guarantees.
  constexpr double kLinH = 1e-4;

  FrontendConfig cfg = default_config();
  cfg.num_bins = 3;
  cfg.tap_half_width = 16;
  cfg.lowpass_stride = 2;
  FrontendParams base = init_params_mel(cfg, 400.0, 6000.0);
  base.eta = {0.11, 0.23, 0.37};
  base.sigma_gabor = {3.0, 5.0, 7.0};

  // Gabor tap synthesis.
  auto kernel_fwd_eta = [&](const Vec &x) {
    FrontendParams p = base;
    p.eta = x;
    return flatten(build_gabor_kernel(p, cfg).taps);
  };
  fd_check("gabor_kernel/eta", kNonlinTol, 1e-6, base.eta, kernel_fwd_eta,
           [&](const Vec &x, const Vec &u) {
             FrontendParams p = base;
             p.eta = x;
             const GaborKernel k = build_gabor_kernel(p, cfg);
             Vec g(x.size(), 0.0);
             vjp_gabor_kernel(p, cfg, k, unflatten(u), &g, nullptr);
             return g;
           });
  auto kernel_fwd_sigma = [&](const Vec &x) {
    FrontendParams p = base;
    p.sigma_gabor = x;
    return flatten(build_gabor_kernel(p, cfg).taps);
  };
  fd_check("gabor_kernel/sigma", kNonlinTol, 1e-6, base.sigma_gabor,
           kernel_fwd_sigma, [&](const Vec &x, const Vec &u) {
             FrontendParams p = base;
             p.sigma_gabor = x;
             const GaborKernel k = build_gabor_kernel(p, cfg);
             Vec g(x.size(), 0.0);
             vjp_gabor_kernel(p, cfg, k, unflatten(u), nullptr, &g);
             return g;
           });

  // Analysis convolution.
  const GaborKernel kern = build_gabor_kernel(base, cfg);
  Vec wave0(48);
  for (double &x : wave0) x = unit(rng);
  auto wave_of = [](const Vec &x) {
    Waveform w;
    w.samples = x;
    w.sample_rate = 16000.0;
    return w;
  };
  fd_check("analyze/input", kLinTol, kLinH, wave0,
           [&](const Vec &x) {
             return flatten(analyze(wave_of(x), kern).data);
           },
           [&](const Vec &x, const Vec &u) {
             Vec g(x.size(), 0.0);
             vjp_analyze(wave_of(x), kern, unflatten(u), &g, nullptr);
             return g;
           });
  fd_check("analyze/taps", kLinTol, kLinH, flatten(kern.taps),
           [&](const Vec &x) {
             GaborKernel k = kern;
             k.taps = unflatten(x);
             return flatten(analyze(wave_of(wave0), k).data);
           },
           [&](const Vec &, const Vec &u) {
             std::vector<std::complex<double>> tc(kern.taps.size());
             vjp_analyze(wave_of(wave0), kern, unflatten(u), nullptr, &tc);
             return flatten(tc);
           });

  // Squared modulus and argument on a small grid with safe magnitudes.
  ComplexGrid zg = ComplexGrid::zeros(2, 10);
  for (auto &z : zg.data) {
    z = std::polar(0.6 + 0.9 * std::abs(unit(rng)), M_PI * 0.9 * unit(rng));
  }
  auto grid_of = [&](const Vec &x) {
    ComplexGrid g = zg;
    g.data = unflatten(x);
    return g;
  };
  fd_check("power", kNonlinTol, 1e-6, flatten(zg.data),
           [&](const Vec &x) {
             return power(grid_of(x)).data;
           },
           [&](const Vec &x, const Vec &u) {
             std::vector<std::complex<double>> zc(zg.data.size());
             vjp_power(grid_of(x), u, &zc);
             return flatten(zc);
           });
  fd_check("argument", kNonlinTol, 1e-6, flatten(zg.data),
           [&](const Vec &x) {
             return argument(grid_of(x), cfg).data;
           },
           [&](const Vec &x, const Vec &u) {
             const ComplexGrid g = grid_of(x);
             const MaskedGrid th = argument(g, cfg);
             std::vector<std::complex<double>> zc(g.data.size());
             vjp_argument(g, th, u, &zc);
             return flatten(zc);
           });

  // Convention rotation: linear in both theta and eta away from the wrap
  // boundary; the synthetic phases keep a wide margin.
  MaskedGrid th1 = MaskedGrid::zeros(3, 12);
  std::vector<std::int64_t> offs(12);
  for (int t = 0; t < 12; ++t) offs[t] = 8 + t;
  for (int m = 0; m < 3; ++m) {
    for (int t = 0; t < 12; ++t) {
      th1.at(m, t) = principal_value(2.5 * unit(rng) +
                                     2.0 * M_PI * base.eta[m] * offs[t]);
    }
  }
  fd_check("rotate/theta", kLinTol, kLinH, th1.data,
           [&](const Vec &x) {
             MaskedGrid g = th1;
             g.data = x;
             return rotate_to_conv2(g, base, offs).data;
           },
           [&](const Vec &x, const Vec &u) {
             MaskedGrid g = th1;
             g.data = x;
             const MaskedGrid out = rotate_to_conv2(g, base, offs);
             Vec gc(x.size(), 0.0);
             vjp_rotate(out, base, offs, u, &gc, nullptr);
             return gc;
           });
  fd_check("rotate/eta", kLinTol, kLinH, base.eta,
           [&](const Vec &x) {
             FrontendParams p = base;
             p.eta = x;
             return rotate_to_conv2(th1, p, offs).data;
           },
           [&](const Vec &x, const Vec &u) {
             FrontendParams p = base;
             p.eta = x;
             const MaskedGrid out = rotate_to_conv2(th1, p, offs);
             Vec g(x.size(), 0.0);
             vjp_rotate(out, p, offs, u, nullptr, &g);
             return g;
           });

  // Unwrap and differentiate, with gaps to exercise mask handling.
  MaskedGrid ph = MaskedGrid::zeros(2, 14);
  for (int m = 0; m < 2; ++m) {
    double acc = unit(rng);
    for (int t = 0; t < 14; ++t) {
      acc += 2.5 * unit(rng);
      ph.at(m, t) = principal_value(acc);
    }
  }
  ph.mask[ph.index(0, 4)] = 0;
  ph.mask[ph.index(1, 0)] = 0;
  ph.mask[ph.index(1, 13)] = 0;
  fd_check("unwrap/time", kLinTol, kLinH, ph.data,
           [&](const Vec &x) {
             MaskedGrid g = ph;
             g.data = x;
             return unwrap(g, Axis::kTime).data;
           },
           [&](const Vec &x, const Vec &u) {
             MaskedGrid g = ph;
             g.data = x;
             Vec gc(x.size(), 0.0);
             vjp_unwrap(g, Axis::kTime, u, &gc);
             return gc;
           },
           &ph.mask);
  for (Axis axis : {Axis::kTime, Axis::kFrequency}) {
    const std::string name =
        axis == Axis::kTime ? "differentiate/time" : "differentiate/frequency";
    fd_check(name, kLinTol, kLinH, ph.data,
             [&](const Vec &x) {
               MaskedGrid g = ph;
               g.data = x;
               return differentiate(g, axis).data;
             },
             [&](const Vec &x, const Vec &u) {
               MaskedGrid g = ph;
               g.data = x;
               const MaskedGrid out = differentiate(g, axis);
               Vec gc(x.size(), 0.0);
               vjp_differentiate(g, axis, out, u, &gc);
               return gc;
             });
  }

  // Lowpass: gaps make the interpolation weights part of the map.
  FrontendConfig lp_cfg = cfg;
  lp_cfg.num_bins = 2;
  lp_cfg.tap_half_width = 8;
  lp_cfg.lowpass_stride = 2;
  const std::vector<double> lp_sigma = {0.5, 0.9};
  const LowpassKernel lp = build_lowpass(lp_sigma, lp_cfg);
  MaskedGrid lpin = MaskedGrid::zeros(2, 20);
  for (double &v : lpin.data) v = unit(rng);
  lpin.mask[lpin.index(0, 3)] = 0;
  lpin.mask[lpin.index(0, 9)] = 0;
  lpin.mask[lpin.index(0, 10)] = 0;
  lpin.mask[lpin.index(1, 0)] = 0;
  lpin.mask[lpin.index(1, 19)] = 0;
  const MaskedGrid lpout0 = lowpass_downsample(lpin, lp);
  fd_check("lowpass/input", kLinTol, kLinH, lpin.data,
           [&](const Vec &x) {
             MaskedGrid g = lpin;
             g.data = x;
             return lowpass_downsample(g, lp).data;
           },
           [&](const Vec &x, const Vec &u) {
             MaskedGrid g = lpin;
             g.data = x;
             const MaskedGrid out = lowpass_downsample(g, lp);
             Vec gc(x.size(), 0.0);
             vjp_lowpass(g, lp, out, u, &gc, nullptr);
             return gc;
           },
           &lpout0.mask);
  fd_check("lowpass_kernel/sigma", kNonlinTol, 1e-6, lp_sigma,
           [&](const Vec &x) {
             return build_lowpass(x, lp_cfg).taps;
           },
           [&](const Vec &x, const Vec &u) {
             const LowpassKernel k = build_lowpass(x, lp_cfg);
             Vec g(x.size(), 0.0);
             vjp_lowpass_kernel(x, lp_cfg, k, u, &g);
             return g;
           });

  // sPCEN w.r.t. input and each parameter.
  FrontendConfig sp_cfg = default_config();
  sp_cfg.num_bins = 2;
  FrontendParams sp = init_params_mel(sp_cfg, 400.0, 6000.0);
  sp.spcen_alpha = {0.9, 0.5};
  sp.spcen_delta = {1.5, 2.5};
  sp.spcen_r = {2.0, 1.3};
  sp.spcen_s = {0.3, 0.7};
  MaskedGrid spin = MaskedGrid::zeros(2, 12);
  for (double &v : spin.data) v = 1.2 + 0.7 * unit(rng);
  fd_check("spcen/input", kNonlinTol, 1e-6, spin.data,
           [&](const Vec &x) {
             MaskedGrid g = spin;
             g.data = x;
             return spcen(g, sp, sp_cfg).data;
           },
           [&](const Vec &x, const Vec &u) {
             MaskedGrid g = spin;
             g.data = x;
             Vec gc(x.size(), 0.0);
             ParamGrads pg = ParamGrads::zeros(2);
             vjp_spcen(g, sp, sp_cfg, u, &gc, &pg);
             return gc;
           });
  struct SpcenField {
    const char *name;
    std::vector<double> FrontendParams::*member;
    std::vector<double> ParamGrads::*grad;
  };
  const SpcenField spcen_fields[] = {
      {"spcen/alpha", &FrontendParams::spcen_alpha, &ParamGrads::spcen_alpha},
      {"spcen/delta", &FrontendParams::spcen_delta, &ParamGrads::spcen_delta},
      {"spcen/r", &FrontendParams::spcen_r, &ParamGrads::spcen_r},
      {"spcen/s", &FrontendParams::spcen_s, &ParamGrads::spcen_s},
  };
  for (const SpcenField &field : spcen_fields) {
    fd_check(field.name, kNonlinTol, 1e-6, sp.*(field.member),
             [&](const Vec &x) {
               FrontendParams p = sp;
               p.*(field.member) = x;
               return spcen(spin, p, sp_cfg).data;
             },
             [&](const Vec &x, const Vec &u) {
               FrontendParams p = sp;
               p.*(field.member) = x;
               Vec gc(spin.data.size(), 0.0);
               ParamGrads pg = ParamGrads::zeros(2);
               vjp_spcen(spin, p, sp_cfg, u, &gc, &pg);
               return pg.*(field.grad);
             });
  }

  // Phasor conversion.
  MaskedGrid thp = MaskedGrid::zeros(2, 10);
  for (double &v : thp.data) v = 3.0 * unit(rng);
  thp.mask[thp.index(1, 4)] = 0;
  fd_check("phasor", kNonlinTol, 1e-6, thp.data,
           [&](const Vec &x) {
             MaskedGrid g = thp;
             g.data = x;
             const PhasorGrid out = phasor(g);
             Vec y = out.re.data;
             y.insert(y.end(), out.im.data.begin(), out.im.data.end());
             return y;
           },
           [&](const Vec &x, const Vec &u) {
             MaskedGrid g = thp;
             g.data = x;
             const PhasorGrid out = phasor(g);
             const Vec u_re(u.begin(), u.begin() + x.size());
             const Vec u_im(u.begin() + x.size(), u.end());
             Vec gc(x.size(), 0.0);
             vjp_phasor(out, u_re, u_im, &gc);
             return gc;
           });

  // Power gating: bilinear, exact under central differences.
  MaskedGrid gate_f = MaskedGrid::zeros(2, 9);
  MaskedGrid gate_p = MaskedGrid::zeros(2, 9);
  for (double &v : gate_f.data) v = unit(rng);
  for (double &v : gate_p.data) v = 0.5 + 0.4 * unit(rng);
  gate_f.mask[gate_f.index(0, 2)] = 0;
  gate_p.mask[gate_p.index(1, 5)] = 0;
  std::vector<std::uint8_t> joint(gate_f.mask.size());
  for (std::size_t i = 0; i < joint.size(); ++i) {
    joint[i] = gate_f.mask[i] && gate_p.mask[i];
  }
  const std::size_t nf = gate_f.data.size();
  Vec gate_x0 = gate_f.data;
  gate_x0.insert(gate_x0.end(), gate_p.data.begin(), gate_p.data.end());
  fd_check("pow_gate", kLinTol, kLinH, gate_x0,
           [&](const Vec &x) {
             MaskedGrid f = gate_f, p = gate_p;
             f.data.assign(x.begin(), x.begin() + nf);
             p.data.assign(x.begin() + nf, x.end());
             return pow_gate(f, p).data;
           },
           [&](const Vec &x, const Vec &u) {
             MaskedGrid f = gate_f, p = gate_p;
             f.data.assign(x.begin(), x.begin() + nf);
             p.data.assign(x.begin() + nf, x.end());
             Vec fc(nf, 0.0), pc(nf, 0.0);
             vjp_pow_gate(f, p, u, &fc, &pc);
             Vec g = fc;
             g.insert(g.end(), pc.begin(), pc.end());
             return g;
           },
           &joint);

  return checks;
}

}  // namespace lfx::grad
