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

#include "clipedit/feature_io.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "binary_io.h"
#include "clipedit/error.h"
#include "json.hpp"

namespace clipedit {
namespace fs = std::filesystem;
namespace {

constexpr char kMagic[] = "CFV1";
constexpr char kCaptionFeatures[] = "captions.feat";
constexpr char kCaptionIndex[] = "captions.idx";

std::uint32_t CheckedU32(std::size_t v, const std::string& what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw IoError(what + " does not fit in 32 bits");
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

void WriteFeatureFile(const std::string& path, const Matrix<float>& features) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(kMagic, 4);
  binary::PutU32(out, CheckedU32(features.cols(), "feature dimension"));
  binary::PutU32(out, CheckedU32(features.rows(), "row count"));
  binary::PutF32s(out, features.flat());
  if (!out) throw IoError("write failed: " + path);
}

Matrix<float> ReadFeatureFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  binary::ExpectMagic(in, path, kMagic);
  const std::uint32_t dim = binary::GetU32(in, path);
  const std::uint32_t rows = binary::GetU32(in, path);
  if (dim == 0) throw IoError(path + ": feature dimension is 0");
  Matrix<float> features(rows, dim);
  binary::GetF32s(in, path, features.flat());
  binary::ExpectEof(in, path);
  return features;
}

void WriteFeatures(const std::string& dir, const FeatureStore& store) {
  fs::create_directories(dir);
  for (const auto& [video_id, video] : store.videos()) {
    WriteFeatureFile((fs::path(dir) / (video_id + ".feat")).string(),
                     video.features);
  }
  Matrix<float> captions(store.captions().size(), store.dim());
  std::ofstream idx(fs::path(dir) / kCaptionIndex, std::ios::trunc);
  if (!idx) throw IoError("cannot write caption index in " + dir);
  std::size_t row = 0;
  for (const auto& [caption_id, feature] : store.captions()) {
    std::copy(feature.begin(), feature.end(), captions.row(row).begin());
    nlohmann::ordered_json line;
    line["caption_id"] = caption_id;
    line["row"] = row;
    idx << line.dump() << '\n';
    ++row;
  }
  WriteFeatureFile((fs::path(dir) / kCaptionFeatures).string(), captions);
}

FeatureStore LoadFeatures(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);

  std::vector<fs::path> video_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const fs::path& p = entry.path();
    if (entry.is_regular_file() && p.extension() == ".feat" &&
        p.filename() != kCaptionFeatures) {
      video_files.push_back(p);
    }
  }
  if (video_files.empty()) throw IoError("no feature files found in " + dir);
  std::sort(video_files.begin(), video_files.end());

  FeatureStore store;
  std::string first_file;
  std::size_t dim = 0;
  auto check_dim = [&](std::size_t d, const std::string& file) {
    if (first_file.empty()) {
      first_file = file;
      dim = d;
    } else if (d != dim) {
      throw IoError("feature dimension mismatch: " + first_file + " has d=" +
                    std::to_string(dim) + " but " + file + " has d=" +
                    std::to_string(d));
    }
  };

  for (const fs::path& p : video_files) {
    Matrix<float> features = ReadFeatureFile(p.string());
    check_dim(features.cols(), p.string());
    if (features.rows() == 0) throw IoError(p.string() + ": video has no rows");
    VideoRecord video;
    video.video_id = p.stem().string();
    video.duration_s = static_cast<double>(features.rows());
    video.features = std::move(features);
    store.AddVideo(std::move(video));
  }

  const fs::path caption_path = fs::path(dir) / kCaptionFeatures;
  const fs::path index_path = fs::path(dir) / kCaptionIndex;
  if (!fs::exists(caption_path) || !fs::exists(index_path)) {
    throw IoError("missing " + std::string(kCaptionFeatures) + " or " +
                  kCaptionIndex + " in " + dir);
  }
  const Matrix<float> captions = ReadFeatureFile(caption_path.string());
  check_dim(captions.cols(), caption_path.string());

  std::ifstream idx(index_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(idx, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::string caption_id;
    std::size_t row = 0;
    try {
      const auto j = nlohmann::json::parse(line);
      caption_id = j.at("caption_id").get<std::string>();
      row = j.at("row").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
      throw IoError(index_path.string() + ":" + std::to_string(line_no) +
                    ": " + e.what());
    }
    if (row >= captions.rows()) {
      throw IoError(index_path.string() + ":" + std::to_string(line_no) +
                    ": row " + std::to_string(row) + " out of range");
    }
    const auto r = captions.row(row);
    store.AddCaption(caption_id, std::vector<float>(r.begin(), r.end()));
  }
  return store;
}

}  // namespace clipedit
