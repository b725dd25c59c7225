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

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "numnet/optim.h"

namespace numnet::diff {
namespace {

std::string TempPath(const std::string &name) {
  return (std::filesystem::temp_directory_path() /
          ("numnet_ckpt_test_" + name))
      .string();
}

ParamStore Trained() {
  Rng rng(17);
  ParamStore p;
  for (auto [name, rows, cols] :
       std::vector<std::tuple<std::string, int, int>>{
           {"enc.w", 3, 4}, {"enc.b", 3, 1}, {"head", 1, 5}}) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows * cols; ++i) {
      m(i % rows, i / rows) = rng.Uniform(-1, 1) / 3.0;
    }
    p.Add(name, m);
  }
  Gradients g;
  for (const auto &e : p.entries()) g[e.name] = e.value * 0.5;
  AdamStep(p, g, {});
  EmaUpdate(p, 0.9);
  AdamStep(p, g, {});
  EmaUpdate(p, 0.9);
  return p;
}

ParamStore ZerosLike(const ParamStore &p) {
  ParamStore out;
  for (const auto &e : p.entries()) {
    out.Add(e.name, Matrix::Zero(e.value.rows(), e.value.cols()));
  }
  return out;
}

}  // namespace

TEST_CASE("checkpoint: f64 round trip is exact") {
  ParamStore p = Trained();
  std::string path = TempPath("f64");
  nlohmann::json meta = {{"epoch", 3}, {"note", "x"}};
  SaveCheckpoint(path, p, meta, {StorageType::kFloat64});
  Checkpoint c = ReadCheckpoint(path);
  CHECK(c.dtype == StorageType::kFloat64);
  CHECK(c.metadata.at("epoch") == 3);
  CHECK(c.tensors.count("enc.w#ema"));
  CHECK(c.tensors.count("enc.w#adam_m"));
  CHECK(c.tensors.count("enc.w#adam_v"));

  ParamStore q = ZerosLike(p);
  RestoreParams(c, q);
  for (const auto &e : p.entries()) {
    const auto &r = q.entry(e.name);
    CHECK(r.value == e.value);
    CHECK(r.shadow == e.shadow);
    CHECK(r.adam_m == e.adam_m);
    CHECK(r.adam_v == e.adam_v);
  }
  CHECK(q.adam_steps == 2);
  CHECK(q.ema_updates == 2);
  std::remove(path.c_str());
}

TEST_CASE("checkpoint: f32 round trip within single precision") {
  ParamStore p = Trained();
  std::string path = TempPath("f32");
  SaveCheckpoint(path, p, nlohmann::json::object());
  Checkpoint c = ReadCheckpoint(path);
  CHECK(c.dtype == StorageType::kFloat32);
  ParamStore q = ZerosLike(p);
  RestoreParams(c, q);
  for (const auto &e : p.entries()) {
    CHECK((q.Get(e.name) - e.value).cwiseAbs().maxCoeff() <= 1e-7);
  }
  std::remove(path.c_str());
}

TEST_CASE("checkpoint: optional sections") {
  ParamStore p = Trained();
  std::string path = TempPath("plain");
  SaveOptions options;
  options.include_ema = false;
  options.include_optimizer_state = false;
  SaveCheckpoint(path, p, nlohmann::json::object(), options);
  Checkpoint c = ReadCheckpoint(path);
  CHECK(c.tensors.size() == 3);
  std::remove(path.c_str());
}

TEST_CASE("checkpoint: layout starts with magic and manifest") {
  ParamStore p = Trained();
  std::string path = TempPath("layout");
  SaveCheckpoint(path, p, nlohmann::json::object(), {StorageType::kFloat64});
  std::ifstream in(path, std::ios::binary);
  char magic[8];
  in.read(magic, 8);
  CHECK(std::string(magic, 8) == "NUMNET01");
  unsigned char len_bytes[8];
  in.read(reinterpret_cast<char *>(len_bytes), 8);
  uint64_t len = 0;
  for (int i = 7; i >= 0; --i) len = (len << 8) | len_bytes[i];
  std::string manifest(len, '\0');
  in.read(manifest.data(), static_cast<std::streamsize>(len));
  auto json = nlohmann::json::parse(manifest);
  CHECK(json.at("dtype") == "f64");
  CHECK(json.at("tensors")[0].at("name") == "enc.w");
  CHECK(json.at("tensors")[0].at("shape") == nlohmann::json({3, 4}));
  CHECK(json.at("tensors")[0].at("offset") == 0);
  std::remove(path.c_str());
}

TEST_CASE("checkpoint: errors") {
  CHECK_THROWS_AS(ReadCheckpoint(TempPath("missing")), VersionError);

  std::string bad = TempPath("bad");
  {
    std::ofstream out(bad, std::ios::binary);
    out << "NOTACKPTxxxxxxxxxxxxxxx";
  }
  CHECK_THROWS_AS(ReadCheckpoint(bad), VersionError);
  {
    std::ofstream out(bad, std::ios::binary);
    out << "NUMNET01";
    uint64_t len = 1000;
    out.write(reinterpret_cast<const char *>(&len), 8);
    out << "{}";
  }
  CHECK_THROWS_AS(ReadCheckpoint(bad), VersionError);
  std::remove(bad.c_str());

  ParamStore p = Trained();
  std::string path = TempPath("shape");
  SaveCheckpoint(path, p, nlohmann::json::object());
  Checkpoint c = ReadCheckpoint(path);
  ParamStore wrong;
  wrong.Add("enc.w", Matrix::Zero(4, 3));
  CHECK_THROWS_AS(RestoreParams(c, wrong), VersionError);
  ParamStore extra = ZerosLike(p);
  extra.Add("new", Matrix::Zero(1, 1));
  CHECK_THROWS_AS(RestoreParams(c, extra), VersionError);
  std::remove(path.c_str());
}

}  // namespace numnet::diff
