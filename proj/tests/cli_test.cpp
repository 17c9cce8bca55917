// Copyright 2026 The leftnet-cpp Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "leftnet/io.hpp"

namespace leftnet {
namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "leftnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("leftnet_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  std::filesystem::path dir_;
};

constexpr const char* kSmallConfig =
    R"({"model":{"num_layers":1,"hidden_dim":8,"vector_channels":2,"cutoff":3.0,"num_rbf":6},)"
    R"("train":{"epochs":2,"batch_size":4,"lr":0.005},"seed":1})";

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"gen-data", "--kind", "lj_dimer"}).code, 2);
  EXPECT_EQ(run({"isomorphism-suite", "--pairs", "many"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, InputErrorsExitTwo) {
  const std::string data = write("bad.xyz", "2\n\nH 0 0 0\n");
  const CliRun parse = run({"fit", "--data", data, "--out", path("m.ckpt")});
  EXPECT_EQ(parse.code, 2);
  EXPECT_NE(parse.err.find("line 4"), std::string::npos);
  const std::string config = write("bad.json", R"({"model":{"layers":2}})");
  const CliRun cfg = run({"check-equivariance", "--config", config});
  EXPECT_EQ(cfg.code, 2);
  EXPECT_NE(cfg.err.find("model.layers"), std::string::npos);
  const std::string ckpt = write("v2.ckpt", "LEFTNET2........");
  const CliRun version = run({"predict", "--ckpt", ckpt, "--data", data});
  EXPECT_EQ(version.code, 2);
  EXPECT_NE(version.err.find("version"), std::string::npos);
  EXPECT_EQ(run({"gen-data", "--kind", "plasma", "--n", "3"}).code, 2);
}

TEST_F(CliTest, GenDataIsDeterministic) {
  const CliRun a = run({"gen-data", "--kind", "morse_cluster", "--n", "3", "--seed", "4"});
  const CliRun b = run({"gen-data", "--kind", "morse_cluster", "--n", "3", "--seed", "4"});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto frames = parse_xyz(a.out);
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_TRUE(frames[0].energy);
  EXPECT_TRUE(frames[0].forces);
}

TEST_F(CliTest, FitPredictRoundTrip) {
  const std::string data = path("lj.xyz");
  ASSERT_EQ(run({"gen-data", "--kind", "lj_dimer", "--n", "12", "--seed", "1", "--out", data}).code, 0);
  const std::string config = write("run.json", kSmallConfig);
  const std::string ckpt = path("m.ckpt");
  const CliRun fit = run({"fit", "--data", data, "--config", config, "--out", ckpt});
  ASSERT_EQ(fit.code, 0) << fit.err;

  std::ifstream csv(ckpt + ".csv");
  std::string echo, header;
  std::getline(csv, echo);
  std::getline(csv, header);
  EXPECT_EQ(echo.rfind("# config={", 0), 0u);
  EXPECT_NE(echo.find("\"hidden_dim\":8"), std::string::npos);
  EXPECT_NE(echo.find("\"wofe\":100"), std::string::npos);  // defaults are echoed too
  EXPECT_EQ(header, "epoch,lr,train_energy_mae,train_force_mae,val_energy_mae,val_force_mae");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  EXPECT_EQ(rows, 3);

  const CliRun pred = run({"predict", "--ckpt", ckpt, "--data", data});
  ASSERT_EQ(pred.code, 0) << pred.err;
  const auto frames = parse_xyz(pred.out);
  ASSERT_EQ(frames.size(), 12u);
  ASSERT_TRUE(frames[0].forces);
  EXPECT_NE(frames[0].comment.find("config={"), std::string::npos);

  // Rotated input: same energy, rotated forces.
  auto input = read_xyz_file(data);
  const RigidMotion g = random_rotation(17);
  for (auto& f : input) f.positions = apply_motion(g, f.positions);
  const std::string rotated = path("rot.xyz");
  write_xyz_file(rotated, input);
  const auto turned = parse_xyz(run({"predict", "--ckpt", ckpt, "--data", rotated}).out);
  for (std::size_t s = 0; s < frames.size(); ++s) {
    EXPECT_NEAR(*turned[s].energy, *frames[s].energy, 1e-9);
    for (std::size_t a = 0; a < 2; ++a) {
      EXPECT_LT(max_abs_diff((*turned[s].forces)[a], g.rotation * (*frames[s].forces)[a]), 1e-8);
    }
  }
}

TEST_F(CliTest, CheckEquivarianceBothModes) {
  const CliRun se3 = run({"check-equivariance", "--seeds", "3", "--motions", "2"});
  EXPECT_EQ(se3.code, 0) << se3.out;
  EXPECT_NE(se3.out.find("PASS chirality sensitivity"), std::string::npos);
  const std::string e3 = write("e3.json", R"({"model":{"num_layers":1,"hidden_dim":8,"mode":"E3","num_rbf":6}})");
  const CliRun refl = run({"check-equivariance", "--config", e3, "--seeds", "3", "--motions", "2"});
  EXPECT_EQ(refl.code, 0) << refl.out;
  EXPECT_NE(refl.out.find("PASS reflection invariance"), std::string::npos);
}

TEST_F(CliTest, IsomorphismSuiteAndGradcheck) {
  const CliRun iso = run({"isomorphism-suite", "--pairs", "5", "--random-pairs", "60", "--seed", "2"});
  EXPECT_EQ(iso.code, 0) << iso.out;
  EXPECT_NE(iso.out.find("hierarchy implication"), std::string::npos);
  const CliRun grad = run({"gradcheck", "--molecules", "2"});
  EXPECT_EQ(grad.code, 0) << grad.out;
  EXPECT_NE(grad.out.find("max relative error"), std::string::npos);
}

TEST_F(CliTest, UndertrainedProbeExitsOne) {
  const CliRun probe = run({"two-hop-probe", "--seed", "1", "--steps", "3"});
  EXPECT_EQ(probe.code, 1);
  EXPECT_NE(probe.out.find("FAIL equivariant"), std::string::npos);
  EXPECT_NE(probe.out.find("target variance"), std::string::npos);
}

}  // namespace
}  // namespace leftnet
