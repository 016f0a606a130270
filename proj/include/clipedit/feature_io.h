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

#ifndef CLIPEDIT_FEATURE_IO_H_
#define CLIPEDIT_FEATURE_IO_H_

#include <string>

#include "clipedit/corpus.h"
#include "clipedit/matrix.h"

namespace clipedit {

// Binary feature matrix: "CFV1", u32 LE dim, u32 LE rows, then rows * dim
// little-endian float32 values in row-major order.
void WriteFeatureFile(const std::string& path, const Matrix<float>& features);
Matrix<float> ReadFeatureFile(const std::string& path);

// Directory layout: one <video_id>.feat per video, captions.feat holding one
// row per caption and captions.idx (JSON Lines) mapping caption_id to row.
void WriteFeatures(const std::string& dir, const FeatureStore& store);
FeatureStore LoadFeatures(const std::string& dir);

}  // namespace clipedit

#endif  // CLIPEDIT_FEATURE_IO_H_
