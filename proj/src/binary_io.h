// Copyright 2026 The ClipEdit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLIPEDIT_SRC_BINARY_IO_H_
#define CLIPEDIT_SRC_BINARY_IO_H_

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>

#include "clipedit/error.h"

// Explicit little-endian encoding, independent of host byte order.
namespace clipedit::binary {

inline void PutU32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b = {
      static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
      static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), b.size());
}

inline void PutU64(std::ostream& out, std::uint64_t v) {
  PutU32(out, static_cast<std::uint32_t>(v & 0xffffffffu));
  PutU32(out, static_cast<std::uint32_t>(v >> 32));
}

inline void PutF32(std::ostream& out, float v) {
  PutU32(out, std::bit_cast<std::uint32_t>(v));
}

inline void PutF64(std::ostream& out, double v) {
  PutU64(out, std::bit_cast<std::uint64_t>(v));
}

inline void PutF32s(std::ostream& out, std::span<const float> values) {
  for (float v : values) PutF32(out, v);
}

inline std::uint32_t GetU32(std::istream& in, const std::string& path) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) {
    throw IoError(path + ": unexpected end of file");
  }
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t GetU64(std::istream& in, const std::string& path) {
  const std::uint64_t lo = GetU32(in, path);
  const std::uint64_t hi = GetU32(in, path);
  return lo | (hi << 32);
}

inline float GetF32(std::istream& in, const std::string& path) {
  return std::bit_cast<float>(GetU32(in, path));
}

inline double GetF64(std::istream& in, const std::string& path) {
  return std::bit_cast<double>(GetU64(in, path));
}

inline void GetF32s(std::istream& in, const std::string& path,
                    std::span<float> values) {
  for (float& v : values) v = GetF32(in, path);
}

inline void ExpectMagic(std::istream& in, const std::string& path,
                        const std::string& magic) {
  std::string got(magic.size(), '\0');
  if (!in.read(got.data(), static_cast<std::streamsize>(got.size())) ||
      got != magic) {
    throw IoError(path + ": bad magic bytes (expected \"" + magic + "\")");
  }
}

inline void ExpectEof(std::istream& in, const std::string& path) {
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError(path + ": trailing bytes after payload");
  }
}

}  // namespace clipedit::binary

#endif  // CLIPEDIT_SRC_BINARY_IO_H_
