// Copyright 2026 lfx authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfx/core.hpp"
#include "lfx/gabor.hpp"

namespace lfx {

/// File access failures (open, read, write).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed file contents or violated data contracts.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad command-line invocations.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lfx

namespace lfx::io {

/// Reads a RIFF/WAVE file; PCM 16-bit (scaled by 1/32768) or IEEE float
/// 32-bit, any channel count (mean downmix). Throws IoError when the file
/// cannot be opened and FormatError for unsupported or corrupt content.
Waveform read_wav(const std::string &path);

/// Test and fixture writers, mono output.
void write_wav_float32(const std::string &path, const Waveform &wave);
void write_wav_pcm16(const std::string &path, const Waveform &wave);

/// On-disk feature matrix (extension .lfx). Little-endian layout:
///   "LFX1" magic, u16 version (= 1),
///   u32 channel_count C, u32 bins M, u32 frames L,
///   C channel names, each u16 byte length + UTF-8 bytes,
///   payload: C * M * L float32, [channel][bin][frame],
///   masks: per channel ceil(M*L/8) bytes, element bin*L+frame at bit
///   index (bin*L+frame) % 8 (LSB first) of byte (bin*L+frame) / 8.
struct FeatureContainer {
  std::uint16_t version = 1;
  std::uint32_t bins = 0;
  std::uint32_t frames = 0;
  std::vector<std::string> names;
  std::vector<std::vector<float>> planes;          ///< one per channel
  std::vector<std::vector<std::uint8_t>> masks;    ///< unpacked, 0/1

  std::uint32_t channel_count() const {
    return static_cast<std::uint32_t>(names.size());
  }
};

/// Flattens a FeatureBundle; phasor channels become "<name>_re"/"<name>_im".
FeatureContainer container_from_bundle(const FeatureBundle &bundle);

void write_container(const std::string &path, const FeatureContainer &fc);
FeatureContainer read_container(const std::string &path);

/// 8-bit binary PGM of one plane: min-max scaled over defined elements
/// (pixel = floor((v - min) / (max - min) * 255)), constant planes map to
/// 128, masked elements to 0, bin 0 on the bottom row.
void write_pgm(const std::string &path, const std::vector<float> &plane,
               const std::vector<std::uint8_t> &mask, int bins, int frames);

/// Line-oriented `key = value` text. Arrays are comma-separated; floats
/// are printed with enough digits to round-trip bit-exactly; unknown or
/// duplicate keys and missing required keys raise FormatError.
std::string format_config(const FrontendConfig &config);
FrontendConfig parse_config(const std::string &text);
std::string format_params(const FrontendParams &params);
FrontendParams parse_params(const std::string &text);

FrontendConfig load_config(const std::string &path);
FrontendParams load_params(const std::string &path);
void save_config(const std::string &path, const FrontendConfig &config);
void save_params(const std::string &path, const FrontendParams &params);

/// Comma-separated lowercase feature names ("pow,phs1,..."); "" is empty.
FeatureSet parse_feature_list(const std::string &text);
std::string format_feature_list(const FeatureSet &set);

}  // namespace lfx::io
