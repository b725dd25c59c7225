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

// Checkpoint file layout:
//
//   "NUMNET01"                      8 bytes magic
//   manifest length                 uint64, little endian
//   manifest                        UTF-8 JSON
//   tensor data                     row-major little-endian IEEE-754
//
// The manifest is
//
//   {"dtype": "f32" | "f64",
//    "tensors": [{"name": ..., "shape": [rows, cols], "offset": bytes}, ...],
//    "metadata": {...}}
//
// with offsets relative to the start of the tensor data. EMA shadows are
// stored as "<name>#ema" and Adam moments as "<name>#adam_m" /
// "<name>#adam_v".

#ifndef NUMNET_CHECKPOINT_H_
#define NUMNET_CHECKPOINT_H_

#include <map>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "numnet/tensor.h"

namespace numnet::diff {

enum class StorageType { kFloat32, kFloat64 };

// Unreadable file, bad magic, or a manifest that does not match the model.
class VersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  StorageType dtype = StorageType::kFloat32;
  std::map<std::string, Matrix> tensors;
  nlohmann::json metadata = nlohmann::json::object();
};

struct SaveOptions {
  StorageType dtype = StorageType::kFloat32;
  bool include_ema = true;
  bool include_optimizer_state = true;
};

void SaveCheckpoint(const std::string &path, const ParamStore &params,
                    const nlohmann::json &metadata,
                    const SaveOptions &options = {});

Checkpoint ReadCheckpoint(const std::string &path);

// Copies values (and EMA / Adam state when present) into `params`. Every
// parameter must be present with the same shape.
void RestoreParams(const Checkpoint &checkpoint, ParamStore &params);

}  // namespace numnet::diff

#endif  // NUMNET_CHECKPOINT_H_
