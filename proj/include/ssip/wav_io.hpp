// include/ssip/wav_io.hpp

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

#ifndef SSIP_WAV_IO_HPP_
#define SSIP_WAV_IO_HPP_

#include <string>

#include "ssip/signal.hpp"

namespace ssip {

enum class WavEncoding { pcm16, float32 };

/// Reads a RIFF/WAVE file holding 16-bit PCM or 32-bit IEEE float samples.
/// Multichannel input is averaged down to mono. 16-bit samples are scaled
/// by 1/32768 so full negative scale maps to -1.0.
/// Throws IoError if the file cannot be opened, FormatError for anything
/// that is not a supported WAV.
Waveform load_waveform(const std::string& path);

/// Same, and reports the source encoding (so a cache file can mirror it).
Waveform load_waveform(const std::string& path, WavEncoding* encoding_out);

/// Writes a mono WAV file. pcm16 output is clamped to [-1, 1] and rounded;
/// float32 output is written as-is.
void save_waveform(const std::string& path, const Waveform& w,
                   WavEncoding encoding = WavEncoding::float32);

}  // namespace ssip

#endif  // SSIP_WAV_IO_HPP_
