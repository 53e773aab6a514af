// src/wav_io.cpp

// Copyright 2026  The ssip authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "ssip/wav_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "ssip/errors.hpp"

namespace ssip {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatIeeeFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

float bits_to_float(std::uint32_t bits) {
  float f;
  std::memcpy(&f, &bits, sizeof f);
  return f;
}

std::uint32_t float_to_bits(float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof bits);
  return bits;
}

}  // namespace

Waveform load_waveform(const std::string& path) {
  return load_waveform(path, nullptr);
}

Waveform load_waveform(const std::string& path, WavEncoding* encoding_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open audio file: " + path);
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file: " + path);
  }

  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits_per_sample = 0;
  std::size_t data_offset = 0;
  std::size_t data_size = 0;
  bool found_fmt = false;
  bool found_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    char chunk_id[5] = {0};
    std::memcpy(chunk_id, bytes.data() + pos, 4);
    const std::uint32_t chunk_size = read_u32(bytes.data() + pos + 4);
    pos += 8;
    if (pos + chunk_size > bytes.size()) {
      throw FormatError("truncated WAV chunk '" + std::string(chunk_id) +
                        "' in " + path);
    }
    if (std::strcmp(chunk_id, "fmt ") == 0) {
      if (chunk_size < 16) {
        throw FormatError("fmt chunk too small in " + path);
      }
      const unsigned char* f = bytes.data() + pos;
      format = read_u16(f);
      channels = read_u16(f + 2);
      sample_rate = read_u32(f + 4);
      bits_per_sample = read_u16(f + 14);
      if (format == kFormatExtensible && chunk_size >= 40) {
        // Sub-format GUID starts with the effective format code.
        format = read_u16(f + 24);
      }
      found_fmt = true;
    } else if (std::strcmp(chunk_id, "data") == 0) {
      data_offset = pos;
      data_size = chunk_size;
      found_data = true;
    }
    pos += chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!found_fmt || !found_data) {
    throw FormatError("missing fmt or data chunk in " + path);
  }
  if (channels == 0 || sample_rate == 0) {
    throw FormatError("invalid channel count or sample rate in " + path);
  }

  WavEncoding encoding;
  if (format == kFormatPcm && bits_per_sample == 16) {
    encoding = WavEncoding::pcm16;
  } else if (format == kFormatIeeeFloat && bits_per_sample == 32) {
    encoding = WavEncoding::float32;
  } else {
    throw FormatError("unsupported WAV encoding (format " +
                      std::to_string(format) + ", " +
                      std::to_string(bits_per_sample) + " bit) in " + path);
  }

  const std::size_t bytes_per_sample = bits_per_sample / 8;
  const std::size_t frame_size = bytes_per_sample * channels;
  const std::size_t n_frames = data_size / frame_size;

  Waveform w;
  w.sample_rate = static_cast<int>(sample_rate);
  w.samples.resize(n_frames);
  const unsigned char* d = bytes.data() + data_offset;
  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      const unsigned char* s = d + i * frame_size + c * bytes_per_sample;
      if (encoding == WavEncoding::pcm16) {
        const auto v = static_cast<std::int16_t>(read_u16(s));
        acc += static_cast<double>(v) / 32768.0;
      } else {
        acc += static_cast<double>(bits_to_float(read_u32(s)));
      }
    }
    w.samples[i] = acc / channels;
  }
  if (encoding_out != nullptr) {
    *encoding_out = encoding;
  }
  return w;
}

void save_waveform(const std::string& path, const Waveform& w,
                   WavEncoding encoding) {
  if (w.sample_rate <= 0) {
    throw FormatError("waveform has no sample rate, refusing to write " + path);
  }
  const std::uint16_t bits = encoding == WavEncoding::pcm16 ? 16 : 32;
  const std::uint16_t fmt =
      encoding == WavEncoding::pcm16 ? kFormatPcm : kFormatIeeeFloat;
  const std::uint32_t bytes_per_sample = bits / 8;
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(w.samples.size() * bytes_per_sample);

  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, fmt);
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * bytes_per_sample);
  put_u16(out, static_cast<std::uint16_t>(bytes_per_sample));
  put_u16(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_size);

  for (double s : w.samples) {
    if (encoding == WavEncoding::pcm16) {
      const double clamped = std::clamp(s, -1.0, 32767.0 / 32768.0);
      const auto q = static_cast<std::int16_t>(std::lrint(clamped * 32768.0));
      put_u16(out, static_cast<std::uint16_t>(q));
    } else {
      put_u32(out, float_to_bits(static_cast<float>(s)));
    }
  }

  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw IoError("cannot open for writing: " + path);
  }
  os.write(reinterpret_cast<const char*>(out.data()),
           static_cast<std::streamsize>(out.size()));
  if (!os) {
    throw IoError("short write to " + path);
  }
}

}  // namespace ssip
