// Copyright 2026 lfx authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace lfx {

/// Feature maps the front-end can emit. Phasor features carry two planes
/// (real and imaginary); all others carry one.
enum class Feature : int {
  kPow = 0,
  kPhs1 = 1,
  kPhs2 = 2,
  kIf1 = 3,
  kIf2 = 4,
  kGd1 = 5,
  kGd2 = 6,
};

inline constexpr int kFeatureCount = 7;

/// Lowercase token used in config files and CLI flags ("pow", "phs1", ...).
const char *feature_token(Feature f);

/// Uppercase channel name used in feature containers ("POW", "PHS1", ...).
const char *feature_channel_name(Feature f);

/// Parses a lowercase token; throws std::invalid_argument on unknown names.
Feature feature_from_token(const std::string &token);

inline bool feature_is_phasor(Feature f) {
  return f == Feature::kPhs1 || f == Feature::kPhs2;
}

/// Small ordered set of Feature values (canonical enum order).
class FeatureSet {
 public:
  static FeatureSet all();
  static FeatureSet none();

  void add(Feature f) { bits_ |= 1u << static_cast<int>(f); }
  void remove(Feature f) { bits_ &= ~(1u << static_cast<int>(f)); }
  bool contains(Feature f) const { return (bits_ >> static_cast<int>(f)) & 1u; }
  bool empty() const { return bits_ == 0; }
  int size() const;
  bool operator==(const FeatureSet &o) const { return bits_ == o.bits_; }

  /// Members in canonical enum order.
  std::vector<Feature> to_list() const;

 private:
  std::uint32_t bits_ = 0;
};

/// Static shape and numeric knobs of the front-end. All fields are
/// validated by validate_config before use.
struct FrontendConfig {
  int num_bins = 40;         ///< filterbank size M
  int tap_half_width = 400;  ///< even W; filters span W+1 taps, n = -W/2..W/2
  int lowpass_stride = 100;  ///< temporal decimation of the lowpass stage
  double sample_rate_hint = 16000.0;  ///< Hz, used only by init_params_mel
  double epsilon = 5e-8;       ///< sPCEN denominator offset
  double zero_amp_threshold = 0.0;  ///< squared-magnitude floor for phase
  FeatureSet selected_features;     ///< which maps extract_features emits
  FeatureSet pow_gate;              ///< phase maps multiplied by sPCEN power
};

/// Learnable parameters, one entry per bin unless noted.
struct FrontendParams {
  std::vector<double> eta;          ///< center frequencies, cycles/sample
  std::vector<double> sigma_gabor;  ///< Gaussian widths of the analysis taps
  std::vector<double> sigma_lowpass_pow;
  std::vector<double> sigma_lowpass_phs;
  std::vector<double> sigma_lowpass_if;
  std::vector<double> sigma_lowpass_gd;
  std::vector<double> spcen_alpha;
  std::vector<double> spcen_delta;
  std::vector<double> spcen_r;
  std::vector<double> spcen_s;
};

/// Dense [rows x cols] complex matrix with a per-element defined mask.
struct ComplexGrid {
  int rows = 0;
  int cols = 0;
  std::vector<std::complex<double>> data;
  std::vector<std::uint8_t> mask;

  static ComplexGrid zeros(int rows, int cols);
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * cols + c;
  }
  std::complex<double> &at(int r, int c) { return data[index(r, c)]; }
  const std::complex<double> &at(int r, int c) const { return data[index(r, c)]; }
  bool defined(int r, int c) const { return mask[index(r, c)] != 0; }
};

/// Dense [rows x cols] real matrix with a per-element defined mask.
struct MaskedGrid {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;
  std::vector<std::uint8_t> mask;

  static MaskedGrid zeros(int rows, int cols);
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * cols + c;
  }
  double &at(int r, int c) { return data[index(r, c)]; }
  double at(int r, int c) const { return data[index(r, c)]; }
  bool defined(int r, int c) const { return mask[index(r, c)] != 0; }
};

/// Unit-phasor pair (cos, sin) sharing one mask.
struct PhasorGrid {
  MaskedGrid re;
  MaskedGrid im;
};

/// One output channel: a single plane, or a (re, im) pair for phasors.
struct FeatureChannel {
  Feature feature;
  std::string name;                ///< "POW", "PHS1", ...
  std::vector<MaskedGrid> planes;  ///< size 1, or 2 for phasor channels
};

/// Result of extract_features: channels in canonical order plus the exact
/// config and params that produced them.
struct FeatureBundle {
  std::vector<FeatureChannel> channels;
  FrontendConfig config;
  FrontendParams params;

  int plane_count() const;
};

/// Throws std::invalid_argument when a config field is out of contract
/// (num_bins < 1, odd or non-positive window, stride < 1, epsilon <= 0,
/// negative threshold, gated features outside the selected set is allowed;
/// unknown feature names are rejected at parse time).
void validate_config(const FrontendConfig &config);

/// Throws std::invalid_argument when a parameter vector has the wrong
/// length or an entry is out of range (eta outside [0, 0.5], any sigma,
/// delta or r non-positive, s outside (0, 1], non-finite values).
void validate_params(const FrontendParams &params, const FrontendConfig &config);

/// Baseline config: 40 bins, 401-tap window, stride 100, epsilon 5e-8,
/// zero threshold, all features selected, no power gating.
FrontendConfig default_config();

/// Mel-spaced initialization over [fmin_hz, fmax_hz]: M+2 equally spaced
/// mel points; eta[m] is the m-th interior point in cycles/sample and
/// sigma_gabor[m] is set so the Gaussian frequency response reaches half
/// height at the neighboring midpoints (FWHM matching). Lowpass sigmas
/// start at 0.4 and sPCEN at (alpha, delta, r, s) = (0.96, 2.0, 2.0, 0.04).
FrontendParams init_params_mel(const FrontendConfig &config, double fmin_hz,
                               double fmax_hz);

/// Returns a copy with eta sorted ascending. Other vectors are left in
/// place; filters are parameterized independently, so re-sorting the
/// centers alone keeps the spectrogram rows frequency-ordered.
FrontendParams reorder_centers(const FrontendParams &params);

/// Projects parameters back into their valid ranges: eta into [0, 0.5],
/// widths and sPCEN delta/r onto a 1e-6 floor, s into [1e-6, 1].
FrontendParams clamp_params(const FrontendParams &params);

/// Caps worker threads used by channel-parallel loops. Values < 1 reset
/// to single-threaded. Results are bitwise identical for any setting.
void set_max_threads(int n);
int max_threads();

/// Runs fn(begin, end) over a partition of [0, count) on up to
/// max_threads() threads. fn must not throw.
void parallel_for_blocks(int count, const std::function<void(int, int)> &fn);

}  // namespace lfx
