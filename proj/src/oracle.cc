// Copyright 2026 lfx authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "lfx/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lfx::oracle {

namespace {

double global_max_abs(const ComplexGrid &grid) {
  double best = 0.0;
  for (const auto &z : grid.data) best = std::max(best, std::abs(z));
  return best;
}

MaskedGrid floored_argument(const ComplexGrid &grid, double floor) {
  FrontendConfig cfg = default_config();
  cfg.zero_amp_threshold = floor * floor;
  return argument(grid, cfg);
}

double require_uniform_spacing(const std::vector<double> &freqs,
                               const char *what) {
  if (freqs.size() < 2) {
    throw std::invalid_argument(std::string(what) +
                                ": need at least two frequencies");
  }
  const double df = freqs[1] - freqs[0];
  for (std::size_t k = 1; k + 1 < freqs.size(); ++k) {
    if (std::abs(freqs[k + 1] - freqs[k] - df) > 1e-12) {
      throw std::invalid_argument(std::string(what) +
                                  ": frequencies must be uniformly spaced");
    }
  }
  return df;
}

}  // namespace

StftSpec make_stft_spec(int tap_half_width, double sigma,
                        std::vector<double> freqs, int hop,
                        PhaseConvention convention) {
  if (tap_half_width < 2 || tap_half_width % 2 != 0) {
    throw std::invalid_argument("stft window width must be even and >= 2");
  }
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("stft sigma must be positive");
  }
  if (hop < 1) {
    throw std::invalid_argument("stft hop must be >= 1");
  }
  if (freqs.empty()) {
    throw std::invalid_argument("stft needs at least one frequency");
  }
  for (double f : freqs) {
    if (!(f >= 0.0) || f > 0.5) {
      throw std::invalid_argument("stft frequencies must lie in [0, 0.5]");
    }
  }
  StftSpec spec;
  spec.half_width = tap_half_width / 2;
  spec.sigma = sigma;
  spec.freqs = std::move(freqs);
  spec.hop = hop;
  spec.convention = convention;
  spec.window.resize(spec.length());
  double norm = 0.0;
  for (int col = 0; col < spec.length(); ++col) {
    const double u = col - spec.half_width;
    spec.window[col] = std::exp(-u * u / (2.0 * sigma * sigma));
    norm += spec.window[col];
  }
  for (double &w : spec.window) w /= norm;
  return spec;
}

ComplexGrid stft_direct(const Waveform &wave, const StftSpec &spec) {
  validate_waveform(wave);
  const int h = spec.half_width;
  const int len = spec.length();
  const std::int64_t span =
      static_cast<std::int64_t>(wave.samples.size()) - 2 * h;
  if (span < 1) {
    throw std::invalid_argument("signal shorter than the stft window");
  }
  const std::int64_t num_frames = (span - 1) / spec.hop + 1;
  const int num_bins = static_cast<int>(spec.freqs.size());
  ComplexGrid out = ComplexGrid::zeros(num_bins, static_cast<int>(num_frames));
  const double *x = wave.samples.data();
  parallel_for_blocks(num_bins, [&](int begin, int end) {
    for (int k = begin; k < end; ++k) {
      const double omega = 2.0 * M_PI * spec.freqs[k];
      for (std::int64_t j = 0; j < num_frames; ++j) {
        const std::int64_t center = h + j * spec.hop;
        std::complex<double> acc(0.0, 0.0);
        for (int col = 0; col < len; ++col) {
          const std::int64_t u = col - h;
          const double anchor =
              spec.convention == PhaseConvention::kConv1
                  ? static_cast<double>(u)
                  : static_cast<double>(center + u);
          acc += x[center + u] * spec.window[col] *
                 std::polar(1.0, -omega * anchor);
        }
        out.at(k, static_cast<int>(j)) = acc;
      }
    }
  });
  return out;
}

RelationReport verify_relations(const Waveform &wave, const StftSpec &spec) {
  if (spec.hop != 1) {
    throw std::invalid_argument(
        "verify_relations: per-sample phase steps require hop == 1");
  }
  const double df = require_uniform_spacing(spec.freqs, "verify_relations");

  StftSpec s1 = spec;
  s1.convention = PhaseConvention::kConv1;
  StftSpec s2 = spec;
  s2.convention = PhaseConvention::kConv2;
  const ComplexGrid x1 = stft_direct(wave, s1);
  const ComplexGrid x2 = stft_direct(wave, s2);

  RelationReport report;
  report.magnitude_floor =
      kMagnitudeFloorRatio * std::max(global_max_abs(x1), global_max_abs(x2));
  const double floor = report.magnitude_floor;
  const std::vector<std::int64_t> centers =
      frame_centers(wave.samples.size(), 2 * spec.half_width);

  for (int k = 0; k < x1.rows; ++k) {
    const double omega = 2.0 * M_PI * spec.freqs[k];
    for (int j = 0; j < x1.cols; ++j) {
      if (std::abs(x1.at(k, j)) <= floor || std::abs(x2.at(k, j)) <= floor) {
        continue;
      }
      const double diff = std::arg(x1.at(k, j) * std::conj(x2.at(k, j)));
      const double dev =
          std::abs(principal_value(diff - omega * centers[j]));
      report.max_anchor_dev = std::max(report.max_anchor_dev, dev);
      ++report.checked_anchor;
    }
  }

  const MaskedGrid th1 = floored_argument(x1, floor);
  const MaskedGrid th2 = floored_argument(x2, floor);

  const MaskedGrid if1 = differentiate(unwrap(th1, Axis::kTime), Axis::kTime);
  const MaskedGrid if2 = differentiate(unwrap(th2, Axis::kTime), Axis::kTime);
  for (int k = 0; k < if1.rows; ++k) {
    const double target = 2.0 * M_PI * spec.freqs[k];
    for (int j = 0; j < if1.cols; ++j) {
      if (!if1.defined(k, j) || !if2.defined(k, j)) continue;
      const double dev = std::abs(
          principal_value(if1.at(k, j) - if2.at(k, j) - target));
      report.max_if_dev = std::max(report.max_if_dev, dev);
      ++report.checked_if;
    }
  }

  const MaskedGrid gd1 = negate(
      differentiate(unwrap(th1, Axis::kFrequency), Axis::kFrequency));
  const MaskedGrid gd2 = negate(
      differentiate(unwrap(th2, Axis::kFrequency), Axis::kFrequency));
  for (int k = 0; k < gd1.rows; ++k) {
    for (int j = 0; j < gd1.cols; ++j) {
      if (!gd1.defined(k, j) || !gd2.defined(k, j)) continue;
      const double target = -2.0 * M_PI * centers[j] * df;
      const double dev = std::abs(
          principal_value(gd1.at(k, j) - gd2.at(k, j) - target));
      report.max_gd_dev = std::max(report.max_gd_dev, dev);
      ++report.checked_gd;
    }
  }
  return report;
}

CompareReport compare_to_frontend(const Waveform &wave,
                                  const FrontendParams &params,
                                  const FrontendConfig &config) {
  validate_config(config);
  validate_params(params, config);
  if (config.num_bins >= 2) {
    require_uniform_spacing(params.eta, "compare_to_frontend");
  }
  for (double s : params.sigma_gabor) {
    if (std::abs(s - params.sigma_gabor[0]) > 1e-12) {
      throw std::invalid_argument(
          "compare_to_frontend: sigma_gabor must be constant");
    }
  }

  const GaborKernel kernel = build_gabor_kernel(params, config);
  const ComplexGrid analyzed = analyze(wave, kernel);
  const StftSpec s1 =
      make_stft_spec(config.tap_half_width, params.sigma_gabor[0], params.eta,
                     1, PhaseConvention::kConv1);
  const ComplexGrid x1 = stft_direct(wave, s1);

  CompareReport report;
  report.magnitude_floor = kMagnitudeFloorRatio * global_max_abs(x1);
  for (std::size_t i = 0; i < x1.data.size(); ++i) {
    const double denom =
        std::max(std::abs(x1.data[i]), report.magnitude_floor);
    const double err = std::abs(analyzed.data[i] - x1.data[i]) / denom;
    report.max_complex_rel_err = std::max(report.max_complex_rel_err, err);
  }

  StftSpec s2 = s1;
  s2.convention = PhaseConvention::kConv2;
  const ComplexGrid x2 = stft_direct(wave, s2);
  const std::vector<std::int64_t> centers =
      frame_centers(wave.samples.size(), config.tap_half_width);
  const MaskedGrid theta2 =
      rotate_to_conv2(argument(analyzed, config), params, centers);
  for (int m = 0; m < x2.rows; ++m) {
    for (int j = 0; j < x2.cols; ++j) {
      if (std::abs(x1.at(m, j)) <= report.magnitude_floor) continue;
      const double dev = std::abs(
          principal_value(theta2.at(m, j) - std::arg(x2.at(m, j))));
      report.max_theta2_dev = std::max(report.max_theta2_dev, dev);
    }
  }
  return report;
}

}  // namespace lfx::oracle
