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

#include "clipedit/checkpoint.h"

#include <cmath>
#include <fstream>

#include "binary_io.h"
#include "clipedit/error.h"

namespace clipedit {
namespace {
constexpr char kMagic[] = "CFP1";
}  // namespace

void WriteCheckpoint(const std::string& path, const EncoderParams& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kMagic, 4);
  binary::PutU32(out, static_cast<std::uint32_t>(params.in_dim()));
  binary::PutU32(out, static_cast<std::uint32_t>(params.out_dim()));
  binary::PutF64(out, params.temperature);
  binary::PutF32s(out, params.w_video.flat());
  binary::PutF32s(out, params.b_video);
  binary::PutF32s(out, params.w_caption.flat());
  binary::PutF32s(out, params.b_caption);
  if (!out) throw IoError("write failed: " + path);
}

EncoderParams ReadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  binary::ExpectMagic(in, path, kMagic);
  const std::uint32_t in_dim = binary::GetU32(in, path);
  const std::uint32_t out_dim = binary::GetU32(in, path);
  if (in_dim == 0 || out_dim == 0) {
    throw IoError(path + ": zero encoder dimension");
  }
  EncoderParams p;
  p.temperature = binary::GetF64(in, path);
  if (!(p.temperature > 0.0) || !std::isfinite(p.temperature)) {
    throw IoError(path + ": temperature must be finite and > 0");
  }
  p.w_video = Matrix<float>(out_dim, in_dim);
  p.b_video.resize(out_dim);
  p.w_caption = Matrix<float>(out_dim, in_dim);
  p.b_caption.resize(out_dim);
  binary::GetF32s(in, path, p.w_video.flat());
  binary::GetF32s(in, path, p.b_video);
  binary::GetF32s(in, path, p.w_caption.flat());
  binary::GetF32s(in, path, p.b_caption);
  binary::ExpectEof(in, path);
  return p;
}

}  // namespace clipedit
