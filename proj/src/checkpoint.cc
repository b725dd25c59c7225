// Copyright 2026 The NumNet Authors.
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

#include "numnet/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace numnet::diff {

namespace {

constexpr char kMagic[] = "NUMNET01";
constexpr size_t kMagicSize = 8;

void PutLe(std::string *out, uint64_t bits, int bytes) {
  for (int i = 0; i < bytes; ++i) {
    out->push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
}

uint64_t GetLe(const std::string &in, size_t pos, int bytes) {
  uint64_t bits = 0;
  for (int i = 0; i < bytes; ++i) {
    bits |= static_cast<uint64_t>(static_cast<unsigned char>(in[pos + i]))
            << (8 * i);
  }
  return bits;
}

int ElementSize(StorageType dtype) {
  return dtype == StorageType::kFloat32 ? 4 : 8;
}

void AppendTensor(std::string *data, const Matrix &m, StorageType dtype) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (dtype == StorageType::kFloat32) {
        PutLe(data, std::bit_cast<uint32_t>(static_cast<float>(m(r, c))), 4);
      } else {
        PutLe(data, std::bit_cast<uint64_t>(m(r, c)), 8);
      }
    }
  }
}

}  // namespace

void SaveCheckpoint(const std::string &path, const ParamStore &params,
                    const nlohmann::json &metadata,
                    const SaveOptions &options) {
  nlohmann::ordered_json manifest;
  manifest["dtype"] = options.dtype == StorageType::kFloat32 ? "f32" : "f64";
  manifest["tensors"] = nlohmann::ordered_json::array();
  std::string data;
  auto add = [&](const std::string &name, const Matrix &m) {
    manifest["tensors"].push_back(
        {{"name", name}, {"shape", {m.rows(), m.cols()}}, {"offset", data.size()}});
    AppendTensor(&data, m, options.dtype);
  };
  for (const auto &entry : params.entries()) {
    add(entry.name, entry.value);
    if (options.include_ema && entry.shadow.size() == entry.value.size() &&
        entry.value.size() > 0) {
      add(entry.name + "#ema", entry.shadow);
    }
    if (options.include_optimizer_state) {
      add(entry.name + "#adam_m", entry.adam_m);
      add(entry.name + "#adam_v", entry.adam_v);
    }
  }
  nlohmann::json meta = metadata;
  meta["adam_steps"] = params.adam_steps;
  meta["ema_updates"] = params.ema_updates;
  manifest["metadata"] = meta;

  std::string header = manifest.dump();
  std::string bytes(kMagic, kMagicSize);
  PutLe(&bytes, header.size(), 8);
  bytes += header;
  bytes += data;

  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
  }
}

Checkpoint ReadCheckpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw VersionError("cannot open checkpoint " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (bytes.size() < kMagicSize + 8 ||
      bytes.compare(0, kMagicSize, kMagic) != 0) {
    throw VersionError(path + " is not a NUMNET01 checkpoint");
  }
  uint64_t header_size = GetLe(bytes, kMagicSize, 8);
  size_t data_start = kMagicSize + 8 + header_size;
  if (data_start > bytes.size()) {
    throw VersionError(path + ": truncated manifest");
  }
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.substr(kMagicSize + 8, header_size));
  } catch (const nlohmann::json::exception &e) {
    throw VersionError(path + ": unreadable manifest: " + e.what());
  }

  Checkpoint ckpt;
  std::string dtype = manifest.value("dtype", "");
  if (dtype == "f32") {
    ckpt.dtype = StorageType::kFloat32;
  } else if (dtype == "f64") {
    ckpt.dtype = StorageType::kFloat64;
  } else {
    throw VersionError(path + ": unknown dtype '" + dtype + "'");
  }
  int width = ElementSize(ckpt.dtype);
  for (const auto &t : manifest.at("tensors")) {
    std::string name = t.at("name");
    Eigen::Index rows = t.at("shape").at(0);
    Eigen::Index cols = t.at("shape").at(1);
    size_t offset = t.at("offset");
    size_t need = static_cast<size_t>(rows * cols) * width;
    if (data_start + offset + need > bytes.size()) {
      throw VersionError(path + ": tensor '" + name + "' out of bounds");
    }
    Matrix m(rows, cols);
    size_t pos = data_start + offset;
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (width == 4) {
          m(r, c) = std::bit_cast<float>(
              static_cast<uint32_t>(GetLe(bytes, pos, 4)));
        } else {
          m(r, c) = std::bit_cast<double>(GetLe(bytes, pos, 8));
        }
        pos += width;
      }
    }
    ckpt.tensors.emplace(std::move(name), std::move(m));
  }
  ckpt.metadata = manifest.value("metadata", nlohmann::json::object());
  return ckpt;
}

void RestoreParams(const Checkpoint &checkpoint, ParamStore &params) {
  auto fetch = [&](const std::string &name, const Matrix &like,
                   bool required) -> const Matrix * {
    auto it = checkpoint.tensors.find(name);
    if (it == checkpoint.tensors.end()) {
      if (required) {
        throw VersionError("checkpoint has no tensor '" + name + "'");
      }
      return nullptr;
    }
    if (it->second.rows() != like.rows() || it->second.cols() != like.cols()) {
      throw VersionError(
          "shape mismatch for '" + name + "': checkpoint [" +
          std::to_string(it->second.rows()) + "x" +
          std::to_string(it->second.cols()) + "] vs model [" +
          std::to_string(like.rows()) + "x" + std::to_string(like.cols()) +
          "]");
    }
    return &it->second;
  };
  for (auto &entry : params.mutable_entries()) {
    entry.value = *fetch(entry.name, entry.value, true);
    if (const Matrix *m = fetch(entry.name + "#ema", entry.value, false)) {
      entry.shadow = *m;
    }
    if (const Matrix *m = fetch(entry.name + "#adam_m", entry.value, false)) {
      entry.adam_m = *m;
    }
    if (const Matrix *m = fetch(entry.name + "#adam_v", entry.value, false)) {
      entry.adam_v = *m;
    }
  }
  params.adam_steps = checkpoint.metadata.value("adam_steps", int64_t{0});
  params.ema_updates = checkpoint.metadata.value("ema_updates", int64_t{0});
}

}  // namespace numnet::diff
