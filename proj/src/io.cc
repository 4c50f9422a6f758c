// Copyright 2026 lfx authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "lfx/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace lfx::io {

namespace {

std::vector<std::uint8_t> read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path);
  return bytes;
}

void write_file(const std::string &path, const std::string &bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

std::uint16_t get_u16(const std::uint8_t *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t *p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::string &out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string &out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

float get_f32(const std::uint8_t *p) {
  const std::uint32_t bits = get_u32(p);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string &s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string &text, const std::string &key) {
  const std::string t = trim(text);
  char *end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw FormatError(key + ": cannot parse number '" + text + "'");
  }
  return v;
}

int parse_int(const std::string &text, const std::string &key) {
  const double v = parse_double(text, key);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw FormatError(key + ": expected an integer, got '" + text + "'");
  }
  return static_cast<int>(v);
}

std::vector<double> parse_double_list(const std::string &text,
                                      const std::string &key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_double(item, key));
  }
  if (out.empty()) throw FormatError(key + ": empty list");
  return out;
}

std::string format_double_list(const std::vector<double> &v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

/// Parses `key = value` lines into a map; enforces known and unique keys.
std::map<std::string, std::string> parse_kv(
    const std::string &text, const std::vector<std::string> &known) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw FormatError("line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw FormatError("unknown key '" + key + "'");
    }
    if (kv.count(key)) throw FormatError("duplicate key '" + key + "'");
    kv[key] = value;
  }
  for (const std::string &key : known) {
    if (!kv.count(key)) throw FormatError("missing key '" + key + "'");
  }
  return kv;
}

}  // namespace

Waveform read_wav(const std::string &path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(path + ": not a RIFF/WAVE file");
  }
  std::uint16_t audio_format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  bool have_fmt = false;
  const std::uint8_t *data = nullptr;
  std::uint32_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t *chunk = bytes.data() + pos;
    const std::uint32_t size = get_u32(chunk + 4);
    if (pos + 8 + size > bytes.size()) {
      throw FormatError(path + ": truncated chunk");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError(path + ": fmt chunk too small");
      audio_format = get_u16(chunk + 8);
      channels = get_u16(chunk + 10);
      sample_rate = get_u32(chunk + 12);
      bits = get_u16(chunk + 22);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = size;
    }
    pos += 8 + size + (size & 1);
  }
  if (!have_fmt || data == nullptr) {
    throw FormatError(path + ": missing fmt or data chunk");
  }
  if (channels == 0) throw FormatError(path + ": zero channels");

  const bool pcm16 = audio_format == 1 && bits == 16;
  const bool float32 = audio_format == 3 && bits == 32;
  if (!pcm16 && !float32) {
    throw FormatError(path + ": unsupported codec (format " +
                      std::to_string(audio_format) + ", " +
                      std::to_string(bits) + " bits)");
  }
  const std::uint32_t bytes_per_sample = bits / 8;
  const std::uint32_t block = bytes_per_sample * channels;
  if (data_size % block != 0) {
    throw FormatError(path + ": data size is not a whole number of frames");
  }
  const std::uint32_t num_frames = data_size / block;
  if (num_frames == 0) throw FormatError(path + ": zero-length audio");

  Waveform wave;
  wave.sample_rate = sample_rate;
  wave.samples.resize(num_frames);
  for (std::uint32_t j = 0; j < num_frames; ++j) {
    double acc = 0.0;
    for (std::uint32_t c = 0; c < channels; ++c) {
      const std::uint8_t *p = data + (j * channels + c) * bytes_per_sample;
      if (pcm16) {
        const std::int16_t raw =
            static_cast<std::int16_t>(p[0] | (p[1] << 8));
        acc += raw / 32768.0;
      } else {
        acc += get_f32(p);
      }
    }
    wave.samples[j] = acc / channels;
  }
  return wave;
}

namespace {

std::string wav_bytes(const Waveform &wave, bool as_float) {
  const std::uint32_t n = static_cast<std::uint32_t>(wave.samples.size());
  const std::uint32_t bytes_per = as_float ? 4 : 2;
  const std::uint32_t data_size = n * bytes_per;
  std::string out;
  out += "RIFF";
  put_u32(out, 36 + data_size);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, as_float ? 3 : 1);
  put_u16(out, 1);
  const std::uint32_t rate =
      static_cast<std::uint32_t>(std::lround(wave.sample_rate));
  put_u32(out, rate);
  put_u32(out, rate * bytes_per);
  put_u16(out, static_cast<std::uint16_t>(bytes_per));
  put_u16(out, as_float ? 32 : 16);
  out += "data";
  put_u32(out, data_size);
  for (double x : wave.samples) {
    if (as_float) {
      put_f32(out, static_cast<float>(x));
    } else {
      const long v = std::lround(x * 32768.0);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(
                       std::clamp(v, -32768L, 32767L))));
    }
  }
  return out;
}

}  // namespace

void write_wav_float32(const std::string &path, const Waveform &wave) {
  write_file(path, wav_bytes(wave, true));
}

void write_wav_pcm16(const std::string &path, const Waveform &wave) {
  write_file(path, wav_bytes(wave, false));
}

FeatureContainer container_from_bundle(const FeatureBundle &bundle) {
  FeatureContainer fc;
  for (const FeatureChannel &ch : bundle.channels) {
    for (std::size_t p = 0; p < ch.planes.size(); ++p) {
      const MaskedGrid &grid = ch.planes[p];
      if (fc.names.empty()) {
        fc.bins = static_cast<std::uint32_t>(grid.rows);
        fc.frames = static_cast<std::uint32_t>(grid.cols);
      }
      std::string name = ch.name;
      if (ch.planes.size() == 2) name += p == 0 ? "_re" : "_im";
      fc.names.push_back(name);
      std::vector<float> plane(grid.data.size());
      for (std::size_t i = 0; i < grid.data.size(); ++i) {
        plane[i] = static_cast<float>(grid.data[i]);
      }
      fc.planes.push_back(std::move(plane));
      fc.masks.push_back(grid.mask);
    }
  }
  return fc;
}

void write_container(const std::string &path, const FeatureContainer &fc) {
  const std::size_t elems =
      static_cast<std::size_t>(fc.bins) * fc.frames;
  if (fc.planes.size() != fc.names.size() ||
      fc.masks.size() != fc.names.size()) {
    throw FormatError("container: channel table sizes disagree");
  }
  std::string out;
  out += "LFX1";
  put_u16(out, fc.version);
  put_u32(out, fc.channel_count());
  put_u32(out, fc.bins);
  put_u32(out, fc.frames);
  for (const std::string &name : fc.names) {
    if (name.size() > 0xffff) throw FormatError("container: name too long");
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out += name;
  }
  for (const auto &plane : fc.planes) {
    if (plane.size() != elems) throw FormatError("container: bad plane size");
    for (float v : plane) put_f32(out, v);
  }
  const std::size_t mask_bytes = (elems + 7) / 8;
  for (const auto &mask : fc.masks) {
    if (mask.size() != elems) throw FormatError("container: bad mask size");
    std::string packed(mask_bytes, '\0');
    for (std::size_t i = 0; i < elems; ++i) {
      if (mask[i]) packed[i / 8] |= static_cast<char>(1u << (i % 8));
    }
    out += packed;
  }
  write_file(path, out);
}

FeatureContainer read_container(const std::string &path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (pos + n > bytes.size()) {
      throw FormatError(path + ": container truncated");
    }
  };
  need(4);
  if (std::memcmp(bytes.data(), "LFX1", 4) != 0) {
    throw FormatError(path + ": bad container magic");
  }
  pos = 4;
  FeatureContainer fc;
  need(2);
  fc.version = get_u16(bytes.data() + pos);
  pos += 2;
  if (fc.version != 1) {
    throw FormatError(path + ": unsupported container version " +
                      std::to_string(fc.version));
  }
  need(12);
  const std::uint32_t channels = get_u32(bytes.data() + pos);
  fc.bins = get_u32(bytes.data() + pos + 4);
  fc.frames = get_u32(bytes.data() + pos + 8);
  pos += 12;
  for (std::uint32_t c = 0; c < channels; ++c) {
    need(2);
    const std::uint16_t len = get_u16(bytes.data() + pos);
    pos += 2;
    need(len);
    fc.names.emplace_back(bytes.begin() + pos, bytes.begin() + pos + len);
    pos += len;
  }
  const std::size_t elems = static_cast<std::size_t>(fc.bins) * fc.frames;
  for (std::uint32_t c = 0; c < channels; ++c) {
    need(4 * elems);
    std::vector<float> plane(elems);
    for (std::size_t i = 0; i < elems; ++i) {
      plane[i] = get_f32(bytes.data() + pos + 4 * i);
    }
    fc.planes.push_back(std::move(plane));
    pos += 4 * elems;
  }
  const std::size_t mask_bytes = (elems + 7) / 8;
  for (std::uint32_t c = 0; c < channels; ++c) {
    need(mask_bytes);
    std::vector<std::uint8_t> mask(elems);
    for (std::size_t i = 0; i < elems; ++i) {
      mask[i] = (bytes[pos + i / 8] >> (i % 8)) & 1;
    }
    fc.masks.push_back(std::move(mask));
    pos += mask_bytes;
  }
  if (pos != bytes.size()) {
    throw FormatError(path + ": trailing bytes after container payload");
  }
  return fc;
}

void write_pgm(const std::string &path, const std::vector<float> &plane,
               const std::vector<std::uint8_t> &mask, int bins, int frames) {
  const std::size_t elems = static_cast<std::size_t>(bins) * frames;
  if (plane.size() != elems || mask.size() != elems) {
    throw FormatError("pgm: plane/mask size mismatch");
  }
  float lo = 0.0f, hi = 0.0f;
  bool any = false;
  for (std::size_t i = 0; i < elems; ++i) {
    if (!mask[i]) continue;
    if (!any || plane[i] < lo) lo = plane[i];
    if (!any || plane[i] > hi) hi = plane[i];
    any = true;
  }
  std::string out = "P5\n" + std::to_string(frames) + " " +
                    std::to_string(bins) + "\n255\n";
  for (int row = 0; row < bins; ++row) {
    const int bin = bins - 1 - row;  // bin 0 at the bottom
    for (int j = 0; j < frames; ++j) {
      const std::size_t i = static_cast<std::size_t>(bin) * frames + j;
      unsigned char pixel = 0;
      if (mask[i]) {
        if (!any || hi <= lo) {
          pixel = 128;
        } else {
          const double scaled = (plane[i] - lo) / (hi - lo) * 255.0;
          pixel = static_cast<unsigned char>(
              std::clamp(std::floor(scaled), 0.0, 255.0));
        }
      }
      out.push_back(static_cast<char>(pixel));
    }
  }
  write_file(path, out);
}

std::string format_config(const FrontendConfig &config) {
  std::string out;
  out += "num_bins = " + std::to_string(config.num_bins) + "\n";
  out += "tap_half_width = " + std::to_string(config.tap_half_width) + "\n";
  out += "lowpass_stride = " + std::to_string(config.lowpass_stride) + "\n";
  out += "sample_rate_hint = " + format_double(config.sample_rate_hint) + "\n";
  out += "epsilon = " + format_double(config.epsilon) + "\n";
  out += "zero_amp_threshold = " + format_double(config.zero_amp_threshold) +
         "\n";
  out += "selected_features = " + format_feature_list(config.selected_features) +
         "\n";
  out += "pow_gate = " + format_feature_list(config.pow_gate) + "\n";
  return out;
}

FrontendConfig parse_config(const std::string &text) {
  const std::vector<std::string> known = {
      "num_bins",          "tap_half_width", "lowpass_stride",
      "sample_rate_hint",  "epsilon",        "zero_amp_threshold",
      "selected_features", "pow_gate"};
  const auto kv = parse_kv(text, known);
  FrontendConfig config;
  config.num_bins = parse_int(kv.at("num_bins"), "num_bins");
  config.tap_half_width = parse_int(kv.at("tap_half_width"), "tap_half_width");
  config.lowpass_stride = parse_int(kv.at("lowpass_stride"), "lowpass_stride");
  config.sample_rate_hint =
      parse_double(kv.at("sample_rate_hint"), "sample_rate_hint");
  config.epsilon = parse_double(kv.at("epsilon"), "epsilon");
  config.zero_amp_threshold =
      parse_double(kv.at("zero_amp_threshold"), "zero_amp_threshold");
  config.selected_features = parse_feature_list(kv.at("selected_features"));
  config.pow_gate = parse_feature_list(kv.at("pow_gate"));
  try {
    validate_config(config);
  } catch (const std::invalid_argument &e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return config;
}

std::string format_params(const FrontendParams &params) {
  std::string out;
  out += "eta = " + format_double_list(params.eta) + "\n";
  out += "sigma_gabor = " + format_double_list(params.sigma_gabor) + "\n";
  out += "sigma_lowpass_pow = " + format_double_list(params.sigma_lowpass_pow) + "\n";
  out += "sigma_lowpass_phs = " + format_double_list(params.sigma_lowpass_phs) + "\n";
  out += "sigma_lowpass_if = " + format_double_list(params.sigma_lowpass_if) + "\n";
  out += "sigma_lowpass_gd = " + format_double_list(params.sigma_lowpass_gd) + "\n";
  out += "spcen_alpha = " + format_double_list(params.spcen_alpha) + "\n";
  out += "spcen_delta = " + format_double_list(params.spcen_delta) + "\n";
  out += "spcen_r = " + format_double_list(params.spcen_r) + "\n";
  out += "spcen_s = " + format_double_list(params.spcen_s) + "\n";
  return out;
}

FrontendParams parse_params(const std::string &text) {
  const std::vector<std::string> known = {
      "eta",          "sigma_gabor",     "sigma_lowpass_pow",
      "sigma_lowpass_phs", "sigma_lowpass_if", "sigma_lowpass_gd",
      "spcen_alpha",  "spcen_delta",     "spcen_r",
      "spcen_s"};
  const auto kv = parse_kv(text, known);
  FrontendParams params;
  params.eta = parse_double_list(kv.at("eta"), "eta");
  params.sigma_gabor = parse_double_list(kv.at("sigma_gabor"), "sigma_gabor");
  params.sigma_lowpass_pow =
      parse_double_list(kv.at("sigma_lowpass_pow"), "sigma_lowpass_pow");
  params.sigma_lowpass_phs =
      parse_double_list(kv.at("sigma_lowpass_phs"), "sigma_lowpass_phs");
  params.sigma_lowpass_if =
      parse_double_list(kv.at("sigma_lowpass_if"), "sigma_lowpass_if");
  params.sigma_lowpass_gd =
      parse_double_list(kv.at("sigma_lowpass_gd"), "sigma_lowpass_gd");
  params.spcen_alpha = parse_double_list(kv.at("spcen_alpha"), "spcen_alpha");
  params.spcen_delta = parse_double_list(kv.at("spcen_delta"), "spcen_delta");
  params.spcen_r = parse_double_list(kv.at("spcen_r"), "spcen_r");
  params.spcen_s = parse_double_list(kv.at("spcen_s"), "spcen_s");
  const std::size_t m = params.eta.size();
  for (const auto *v :
       {&params.sigma_gabor, &params.sigma_lowpass_pow,
        &params.sigma_lowpass_phs, &params.sigma_lowpass_if,
        &params.sigma_lowpass_gd, &params.spcen_alpha, &params.spcen_delta,
        &params.spcen_r, &params.spcen_s}) {
    if (v->size() != m) {
      throw FormatError("params: arrays must share one length");
    }
  }
  return params;
}

FrontendConfig load_config(const std::string &path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  return parse_config(std::string(bytes.begin(), bytes.end()));
}

FrontendParams load_params(const std::string &path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  return parse_params(std::string(bytes.begin(), bytes.end()));
}

void save_config(const std::string &path, const FrontendConfig &config) {
  write_file(path, format_config(config));
}

void save_params(const std::string &path, const FrontendParams &params) {
  write_file(path, format_params(params));
}

FeatureSet parse_feature_list(const std::string &text) {
  FeatureSet set;
  const std::string t = trim(text);
  if (t.empty()) return set;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      set.add(feature_from_token(trim(item)));
    } catch (const std::invalid_argument &e) {
      throw FormatError(e.what());
    }
  }
  return set;
}

std::string format_feature_list(const FeatureSet &set) {
  std::string out;
  for (Feature f : set.to_list()) {
    if (!out.empty()) out += ",";
    out += feature_token(f);
  }
  return out;
}

}  // namespace lfx::io
