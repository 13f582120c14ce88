// Copyright 2026 The advlens Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "advlens/cli/config.hpp"
#include "advlens/io/dataset_io.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace advlens {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("advlens-io-" + std::to_string(::getpid()) + "-" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

using Files = TempDir;

TEST_F(Files, TensorRoundTripIsExact) {
  std::mt19937_64 rng(4);
  const Image x = oracle::random_image(rng, 5, 7);
  io::save_tensor(dir_ / "t.bin", x.pixels);
  EXPECT_EQ(io::load_tensor(dir_ / "t.bin"), x.pixels);
  io::write_file_atomic(dir_ / "junk.bin", "not a tensor at all");
  EXPECT_THROW(io::load_tensor(dir_ / "junk.bin"), IoError);
  EXPECT_THROW(io::load_tensor(dir_ / "missing.bin"), IoError);
}

TEST_F(Files, PngRoundTripWithinOneQuantum) {
  std::mt19937_64 rng(5);
  const Image x = oracle::random_image(rng, 9, 11);
  io::write_png(dir_ / "x.png", x);
  const Image y = io::read_png(dir_ / "x.png");
  ASSERT_EQ(y.resolution(), x.resolution());
  for (std::size_t i = 0; i < x.pixels.v.size(); ++i) ASSERT_NEAR(y.pixels.v[i], x.pixels.v[i], 0.5 / 255 + 1e-12);
  io::write_png(dir_ / "y.png", y);
  EXPECT_EQ(io::read_png(dir_ / "y.png").pixels, y.pixels);
}

TEST_F(Files, CheckpointRestoresModel) {
  for (auto f : {Family::OnePhase, Family::TwoPhase}) {
    const auto m = testing::fresh(f, 12);
    io::save_checkpoint(dir_ / "m.ckpt", *m, {{"note", "x"}});
    const auto ck = io::load_checkpoint(dir_ / "m.ckpt");
    EXPECT_EQ(ck.model->spec(), m->spec());
    EXPECT_TRUE(std::equal(m->parameters().begin(), m->parameters().end(), ck.model->parameters().begin()));
    EXPECT_EQ(ck.header.at("extra").at("note"), "x");
    const Image x(64, 64, 0.3);
    EXPECT_EQ(ck.model->candidates(x).size(), m->candidates(x).size());
  }
}

TEST_F(Files, DatasetRoundTrip) {
  const auto ds = generate_shapes_dataset(9, 5, {64, 64}, 3);
  io::write_dataset(dir_ / "ds", ds);
  const auto back = io::read_dataset(dir_ / "ds");
  ASSERT_EQ(back.size(), ds.size());
  EXPECT_EQ(back.class_names, ds.class_names);
  EXPECT_EQ(back.seed, ds.seed);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ASSERT_EQ(back.annotations[i].size(), ds.annotations[i].size());
    for (std::size_t k = 0; k < ds.annotations[i].size(); ++k) {
      EXPECT_EQ(back.annotations[i][k].box, ds.annotations[i][k].box);
      EXPECT_EQ(back.annotations[i][k].class_id, ds.annotations[i][k].class_id);
    }
  }
  EXPECT_THROW(io::read_dataset(dir_ / "nowhere"), IoError);
}

nlohmann::json small_config() {
  return nlohmann::json::parse(R"({
    "seed": 3,
    "dataset": {"train_count": 4, "test_count": 2},
    "models": [{"id": "op", "family": "one-phase", "backbone": "b3"}],
    "attacks": [{"name": "tog-vanishing"}]
  })");
}

TEST(Config, ParsesAndRoundTrips) {
  const auto c = cli::parse_config(small_config());
  cli::validate(c);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.dataset.train_count, 4);
  ASSERT_EQ(c.models.size(), 1u);
  EXPECT_EQ(c.models[0].spec.family, Family::OnePhase);
  const auto again = cli::parse_config(cli::to_json(c));
  EXPECT_EQ(cli::to_json(again), cli::to_json(c));
}

TEST(Config, RejectsBadValues) {
  auto j = small_config();
  j["dataset"]["train_count"] = 0;
  EXPECT_THROW(cli::validate(cli::parse_config(j)), ValidationError);
  j = small_config();
  j["colour"] = "blue";
  EXPECT_THROW(cli::parse_config(j), ValidationError);
  j = small_config();
  j["attacks"][0]["name"] = "fgsm";
  EXPECT_THROW(cli::validate(cli::parse_config(j)), ValidationError);
  j = small_config();
  j["models"][0]["family"] = "three-phase";
  EXPECT_THROW(cli::validate(cli::parse_config(j)), ValidationError);
  j = small_config();
  j["attacks"][0]["models"] = {"nope"};
  EXPECT_THROW(cli::validate(cli::parse_config(j)), ValidationError);
}

}  // namespace
}  // namespace advlens
