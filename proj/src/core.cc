// Copyright 2026 lfx authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "lfx/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace lfx {

namespace {

const char *kFeatureTokens[kFeatureCount] = {"pow", "phs1", "phs2", "if1",
                                             "if2", "gd1",  "gd2"};
const char *kChannelNames[kFeatureCount] = {"POW", "PHS1", "PHS2", "IF1",
                                            "IF2", "GD1",  "GD2"};

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

void check_array(const std::vector<double> &v, int m, const char *name) {
  if (static_cast<int>(v.size()) != m) {
    throw std::invalid_argument(std::string(name) + ": expected " +
                                std::to_string(m) + " entries, got " +
                                std::to_string(v.size()));
  }
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string(name) + ": non-finite entry");
    }
  }
}

void check_positive(const std::vector<double> &v, const char *name) {
  for (double x : v) {
    if (x <= 0.0) {
      throw std::invalid_argument(std::string(name) +
                                  ": entries must be positive");
    }
  }
}

int g_max_threads = 1;

}  // namespace

const char *feature_token(Feature f) {
  return kFeatureTokens[static_cast<int>(f)];
}

const char *feature_channel_name(Feature f) {
  return kChannelNames[static_cast<int>(f)];
}

Feature feature_from_token(const std::string &token) {
  for (int i = 0; i < kFeatureCount; ++i) {
    if (token == kFeatureTokens[i]) return static_cast<Feature>(i);
  }
  throw std::invalid_argument("unknown feature name: " + token);
}

FeatureSet FeatureSet::all() {
  FeatureSet s;
  for (int i = 0; i < kFeatureCount; ++i) s.add(static_cast<Feature>(i));
  return s;
}

FeatureSet FeatureSet::none() { return FeatureSet(); }

int FeatureSet::size() const {
  int n = 0;
  for (int i = 0; i < kFeatureCount; ++i) {
    if (contains(static_cast<Feature>(i))) ++n;
  }
  return n;
}

std::vector<Feature> FeatureSet::to_list() const {
  std::vector<Feature> out;
  for (int i = 0; i < kFeatureCount; ++i) {
    if (contains(static_cast<Feature>(i))) out.push_back(static_cast<Feature>(i));
  }
  return out;
}

ComplexGrid ComplexGrid::zeros(int rows, int cols) {
  ComplexGrid g;
  g.rows = rows;
  g.cols = cols;
  g.data.assign(static_cast<std::size_t>(rows) * cols, {0.0, 0.0});
  g.mask.assign(static_cast<std::size_t>(rows) * cols, 1);
  return g;
}

MaskedGrid MaskedGrid::zeros(int rows, int cols) {
  MaskedGrid g;
  g.rows = rows;
  g.cols = cols;
  g.data.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  g.mask.assign(static_cast<std::size_t>(rows) * cols, 1);
  return g;
}

int FeatureBundle::plane_count() const {
  int n = 0;
  for (const auto &ch : channels) n += static_cast<int>(ch.planes.size());
  return n;
}

void validate_config(const FrontendConfig &config) {
  if (config.num_bins < 1) {
    throw std::invalid_argument("num_bins must be >= 1");
  }
  if (config.tap_half_width < 2 || config.tap_half_width % 2 != 0) {
    throw std::invalid_argument("tap_half_width must be even and >= 2");
  }
  if (config.lowpass_stride < 1) {
    throw std::invalid_argument("lowpass_stride must be >= 1");
  }
  if (!(config.sample_rate_hint > 0.0) ||
      !std::isfinite(config.sample_rate_hint)) {
    throw std::invalid_argument("sample_rate_hint must be positive");
  }
  if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  if (config.zero_amp_threshold < 0.0 ||
      !std::isfinite(config.zero_amp_threshold)) {
    throw std::invalid_argument("zero_amp_threshold must be nonnegative");
  }
  if (config.selected_features.empty()) {
    throw std::invalid_argument("selected_features must not be empty");
  }
  if (config.pow_gate.contains(Feature::kPow)) {
    throw std::invalid_argument("pow_gate applies to phase features only");
  }
}

void validate_params(const FrontendParams &params,
                     const FrontendConfig &config) {
  const int m = config.num_bins;
  check_array(params.eta, m, "eta");
  check_array(params.sigma_gabor, m, "sigma_gabor");
  check_array(params.sigma_lowpass_pow, m, "sigma_lowpass_pow");
  check_array(params.sigma_lowpass_phs, m, "sigma_lowpass_phs");
  check_array(params.sigma_lowpass_if, m, "sigma_lowpass_if");
  check_array(params.sigma_lowpass_gd, m, "sigma_lowpass_gd");
  check_array(params.spcen_alpha, m, "spcen_alpha");
  check_array(params.spcen_delta, m, "spcen_delta");
  check_array(params.spcen_r, m, "spcen_r");
  check_array(params.spcen_s, m, "spcen_s");
  for (double e : params.eta) {
    if (e < 0.0 || e > 0.5) {
      throw std::invalid_argument("eta must lie in [0, 0.5]");
    }
  }
  check_positive(params.sigma_gabor, "sigma_gabor");
  check_positive(params.sigma_lowpass_pow, "sigma_lowpass_pow");
  check_positive(params.sigma_lowpass_phs, "sigma_lowpass_phs");
  check_positive(params.sigma_lowpass_if, "sigma_lowpass_if");
  check_positive(params.sigma_lowpass_gd, "sigma_lowpass_gd");
  check_positive(params.spcen_delta, "spcen_delta");
  check_positive(params.spcen_r, "spcen_r");
  for (double s : params.spcen_s) {
    if (!(s > 0.0) || s > 1.0) {
      throw std::invalid_argument("spcen_s must lie in (0, 1]");
    }
  }
}

FrontendConfig default_config() {
  FrontendConfig config;
  config.selected_features = FeatureSet::all();
  config.pow_gate = FeatureSet::none();
  return config;
}

FrontendParams init_params_mel(const FrontendConfig &config, double fmin_hz,
                               double fmax_hz) {
  validate_config(config);
  const double fs = config.sample_rate_hint;
  if (!(fmin_hz >= 0.0) || !(fmin_hz < fmax_hz) || !(fmax_hz <= fs / 2.0)) {
    throw std::invalid_argument("band edges must satisfy 0 <= fmin < fmax <= fs/2");
  }
  const int m = config.num_bins;
  const double mel_lo = hz_to_mel(fmin_hz);
  const double mel_hi = hz_to_mel(fmax_hz);
  // M+2 equally spaced mel points; interior points are the triangle peaks
  // and midpoints between neighbors mark the half-height crossings.
  std::vector<double> mel_pts(m + 2);
  for (int i = 0; i < m + 2; ++i) {
    mel_pts[i] = mel_lo + (mel_hi - mel_lo) * i / (m + 1);
  }
  FrontendParams params;
  params.eta.resize(m);
  params.sigma_gabor.resize(m);
  const double fwhm_factor = std::sqrt(2.0 * std::log(2.0)) / M_PI;
  for (int k = 0; k < m; ++k) {
    const double peak_hz = mel_to_hz(mel_pts[k + 1]);
    const double left_hz = mel_to_hz(0.5 * (mel_pts[k] + mel_pts[k + 1]));
    const double right_hz = mel_to_hz(0.5 * (mel_pts[k + 1] + mel_pts[k + 2]));
    params.eta[k] = peak_hz / fs;
    const double fwhm = (right_hz - left_hz) / fs;  // cycles/sample
    params.sigma_gabor[k] = fwhm_factor / fwhm;
  }
  params.sigma_lowpass_pow.assign(m, 0.4);
  params.sigma_lowpass_phs.assign(m, 0.4);
  params.sigma_lowpass_if.assign(m, 0.4);
  params.sigma_lowpass_gd.assign(m, 0.4);
  params.spcen_alpha.assign(m, 0.96);
  params.spcen_delta.assign(m, 2.0);
  params.spcen_r.assign(m, 2.0);
  params.spcen_s.assign(m, 0.04);
  return params;
}

FrontendParams reorder_centers(const FrontendParams &params) {
  FrontendParams out = params;
  std::sort(out.eta.begin(), out.eta.end());
  return out;
}

FrontendParams clamp_params(const FrontendParams &params) {
  static constexpr double kFloor = 1e-6;
  FrontendParams out = params;
  for (double &e : out.eta) e = std::clamp(e, 0.0, 0.5);
  auto floor_all = [](std::vector<double> &v) {
    for (double &x : v) x = std::max(x, kFloor);
  };
  floor_all(out.sigma_gabor);
  floor_all(out.sigma_lowpass_pow);
  floor_all(out.sigma_lowpass_phs);
  floor_all(out.sigma_lowpass_if);
  floor_all(out.sigma_lowpass_gd);
  floor_all(out.spcen_delta);
  floor_all(out.spcen_r);
  for (double &s : out.spcen_s) s = std::clamp(s, kFloor, 1.0);
  return out;
}

void set_max_threads(int n) { g_max_threads = n < 1 ? 1 : n; }

int max_threads() { return g_max_threads; }

void parallel_for_blocks(int count, const std::function<void(int, int)> &fn) {
  if (count <= 0) return;
  const int workers = std::min(g_max_threads, count);
  if (workers <= 1) {
    fn(0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int begin = static_cast<int>(static_cast<long long>(count) * w / workers);
    const int end =
        static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto &t : pool) t.join();
}

}  // namespace lfx
