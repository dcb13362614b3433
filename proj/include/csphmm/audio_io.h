// include/csphmm/audio_io.h

// Copyright 2026  csphmm authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef CSPHMM_AUDIO_IO_H_
#define CSPHMM_AUDIO_IO_H_

#include <string>

#include "csphmm/features.h"

namespace csphmm {

/// Reads a RIFF/WAVE file holding 16-bit little-endian mono PCM.
/// Any other encoding or channel count raises InvalidInput.
AudioBuffer ReadWav(const std::string &path);

/// Writes 16-bit mono PCM; samples are clipped to [-1, 1].
void WriteWav(const std::string &path, const AudioBuffer &audio);

/// Feature file: "SHF1", u32 frame count, u32 dimension, f32 row-major data,
/// all little-endian.
void WriteFeatureFile(const std::string &path, const FeatureSequence &seq);
FeatureSequence ReadFeatureFile(const std::string &path);

/// Plain-text "key = value" record of the front-end settings.
void WriteFeatureSidecar(const std::string &path, const FrameSpec &frames,
                         const MfccSpec &spec, int sample_rate);

/// Prosody tracks use the same container with two columns (f0 Hz, log energy).
/// Row 0 holds (hop seconds, 0); the track follows from row 1.
void WriteProsodyFile(const std::string &path, const ProsodyTrack &track);
ProsodyTrack ReadProsodyFile(const std::string &path);

}  // namespace csphmm

#endif  // CSPHMM_AUDIO_IO_H_
