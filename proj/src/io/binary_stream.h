// src/io/binary_stream.h

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

#ifndef CSPHMM_IO_BINARY_STREAM_H_
#define CSPHMM_IO_BINARY_STREAM_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "csphmm/error.h"

namespace csphmm::io {

// Little-endian encoding independent of host byte order.
template <typename UInt>
void PutLe(std::ostream &os, UInt v) {
  char bytes[sizeof(UInt)];
  for (std::size_t i = 0; i < sizeof(UInt); ++i)
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(bytes, sizeof(UInt));
}

template <typename UInt>
UInt GetLe(std::istream &is, const std::string &what) {
  unsigned char bytes[sizeof(UInt)];
  if (!is.read(reinterpret_cast<char *>(bytes), sizeof(UInt)))
    throw InvalidInput("truncated input while reading " + what);
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i)
    v |= static_cast<UInt>(bytes[i]) << (8 * i);
  return v;
}

inline void PutU32(std::ostream &os, std::uint32_t v) { PutLe(os, v); }
inline std::uint32_t GetU32(std::istream &is, const std::string &what) {
  return GetLe<std::uint32_t>(is, what);
}
inline void PutF64(std::ostream &os, double v) {
  PutLe(os, std::bit_cast<std::uint64_t>(v));
}
inline double GetF64(std::istream &is, const std::string &what) {
  return std::bit_cast<double>(GetLe<std::uint64_t>(is, what));
}
inline void PutF32(std::ostream &os, float v) {
  PutLe(os, std::bit_cast<std::uint32_t>(v));
}
inline float GetF32(std::istream &is, const std::string &what) {
  return std::bit_cast<float>(GetLe<std::uint32_t>(is, what));
}

inline void ExpectMagic(std::istream &is, const char (&magic)[5],
                        const std::string &path) {
  char buf[4];
  if (!is.read(buf, 4) || std::memcmp(buf, magic, 4) != 0)
    throw InvalidInput(path + ": bad magic, expected \"" + std::string(magic) + "\"");
}

}  // namespace csphmm::io

#endif  // CSPHMM_IO_BINARY_STREAM_H_
