// src/hmm/model_container.h

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

#ifndef CSPHMM_HMM_MODEL_CONTAINER_H_
#define CSPHMM_HMM_MODEL_CONTAINER_H_

#include <cstdint>
#include <iosfwd>
#include <string>

namespace csphmm {

inline constexpr std::uint32_t kModelFormatVersion = 1;

// "SHM3" | u32 version | u32 flags (bit 0: suprasegmental section follows).
void WriteContainerHeader(std::ostream &os, bool has_supra);
bool ReadContainerHeader(std::istream &is, const std::string &src);

}  // namespace csphmm

#endif  // CSPHMM_HMM_MODEL_CONTAINER_H_
