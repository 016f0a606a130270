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

#ifndef CLIPEDIT_CHECKPOINT_H_
#define CLIPEDIT_CHECKPOINT_H_

#include <string>

#include "clipedit/encoder.h"

namespace clipedit {

// "CFP1", u32 LE in_dim, u32 LE out_dim, f64 LE temperature, then w_video,
// b_video, w_caption, b_caption as little-endian float32.
void WriteCheckpoint(const std::string& path, const EncoderParams& params);
EncoderParams ReadCheckpoint(const std::string& path);

}  // namespace clipedit

#endif  // CLIPEDIT_CHECKPOINT_H_
