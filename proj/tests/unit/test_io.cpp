#include <gtest/gtest.h>

#include <filesystem>
#include <cstring>
#include <random>

#include "oracles.hpp"
#include "ttdeblur/backends.hpp"
#include "ttdeblur/error.hpp"
#include "ttdeblur/field_io.hpp"
#include "ttdeblur/hash.hpp"
#include "ttdeblur/image_io.hpp"
#include "ttdeblur/synth.hpp"

namespace fs = std::filesystem;
using namespace ttdeblur;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ttdeblur_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Flo, RoundTripAndLayout) {
  std::mt19937_64 rng(1);
  const auto f = oracle::random_flow(rng, 5, 9);
  const auto bytes = io::encode_flo(f);
  ASSERT_EQ(bytes.size(), 12u + 5 * 9 * 8);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "PIEH");
  EXPECT_EQ(bytes[4], 9);
  EXPECT_EQ(bytes[8], 5);
  float u0 = 0, v0 = 0;
  std::memcpy(&u0, bytes.data() + 12, 4);
  std::memcpy(&v0, bytes.data() + 16, 4);
  EXPECT_EQ(u0, f.u(0, 0));
  EXPECT_EQ(v0, f.v(0, 0));
  EXPECT_TRUE(io::decode_flo(bytes) == f);

  const auto dir = scratch("flo");
  io::write_flo(dir / "a" / "f.flo", f);
  EXPECT_TRUE(io::read_flo(dir / "a" / "f.flo") == f);
}

TEST(Flo, Errors) {
  EXPECT_THROW(io::decode_flo({'P', 'I', 'E', 'X', 1, 0, 0, 0, 1, 0, 0, 0}), LoadError);
  auto bytes = io::encode_flo(FlowField(Shape{2, 2}, 1, 1));
  bytes.pop_back();
  EXPECT_THROW(io::decode_flo(bytes), LoadError);
  try {
    io::read_flo("/nonexistent/dir/x.flo");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/x.flo"), std::string::npos);
  }
}

TEST(Bcf, RoundTripAndErrors) {
  std::mt19937_64 rng(2);
  const BlurConditionField c{oracle::random_plane(rng, 7, 3, -1, 1), oracle::random_plane(rng, 7, 3, -1, 1),
                             oracle::random_plane(rng, 7, 3, 0, 1)};
  const auto bytes = io::encode_bcf(c);
  EXPECT_EQ(bytes.size(), 16u + 3 * 7 * 3 * 4);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "BCF1");
  EXPECT_TRUE(io::decode_bcf(bytes) == c);
  auto bad = bytes;
  bad[12] = 2;
  EXPECT_THROW(io::decode_bcf(bad), LoadError);
}

TEST(Pln, RoundTrip) {
  std::mt19937_64 rng(3);
  const Plane p = oracle::random_plane(rng, 11, 4, 0, 1);
  EXPECT_TRUE(io::decode_plane(io::encode_plane(p)) == p);
  const auto dir = scratch("pln");
  io::write_plane(dir / "m.pln", p);
  EXPECT_TRUE(io::read_plane(dir / "m.pln") == p);
  EXPECT_THROW(io::decode_plane({'P', 'L', 'N', '1'}), LoadError);
}

TEST(Png, SixteenBitRoundTripWithinQuantization) {
  std::mt19937_64 rng(4);
  Frame f(3, 6, 7);
  std::uniform_real_distribution<float> d(0, 1);
  for (float& v : f.values()) v = d(rng);
  const auto dir = scratch("png");
  io::write_png(dir / "a.png", f, 16);
  const Frame back = io::read_png(dir / "a.png");
  ASSERT_EQ(back.channels(), 3);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(back.values()[i], f.values()[i], 0.5 / 65535 + 1e-7);

  io::write_png(dir / "b.png", back, 16);
  EXPECT_TRUE(io::read_png(dir / "b.png") == back);

  io::write_png(dir / "c.png", f, 8);
  const Frame b8 = io::read_png(dir / "c.png");
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(b8.values()[i], f.values()[i], 0.5 / 255 + 1e-6);
  EXPECT_THROW(io::read_png(dir / "missing.png"), LoadError);
}

TEST(Png, GrayAndVideoListing) {
  const auto dir = scratch("video");
  Frame g(1, 4, 4, 0.25f);
  for (int i : {10, 2, 0}) io::write_png(dir / "v" / io::frame_filename(i), g, 16);
  EXPECT_EQ(io::frame_filename(42), "frame_000042.png");
  const auto frames = io::list_frames(dir / "v");
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_EQ(frames[0].filename(), "frame_000000.png");
  EXPECT_EQ(frames[2].filename(), "frame_000010.png");
  EXPECT_EQ(io::list_videos(dir), (std::vector<std::string>{"v"}));
  EXPECT_EQ(io::read_video(dir / "v").size(), 3u);
}

TEST(InjectedFlow, ExactTableAndFileLookup) {
  std::mt19937_64 rng(5);
  const auto f = oracle::random_flow(rng, 10, 12);
  InjectedFlowEstimator table;
  table.insert("v", 3, 4, f);
  const Frame a(3, 10, 12), b(3, 10, 12);
  EXPECT_TRUE(table.estimate(a, b, {"v", 3, 4, std::nullopt}) == f);
  const Window w{2, 3, 4, 5};
  const auto c = table.estimate(Frame(3, 4, 5), Frame(3, 4, 5), {"v", 3, 4, w});
  EXPECT_TRUE(c.u == crop(f.u, w));
  EXPECT_THROW(table.estimate(a, b, {"v", 4, 5, std::nullopt}), InvalidInput);

  const auto dir = scratch("flows");
  io::write_flo(InjectedFlowEstimator::flow_path(dir, "v", 3, 4), f);
  EXPECT_EQ(InjectedFlowEstimator::flow_path(dir, "v", 3, 4).filename(), "000003_000004.flo");
  InjectedFlowEstimator disk(dir);
  EXPECT_TRUE(disk.contains("v", 3, 4));
  EXPECT_TRUE(disk.estimate(a, b, {"v", 3, 4, std::nullopt}) == f);
  EXPECT_THROW(disk.estimate(a, b, {"v", 0, 1, std::nullopt}), LoadError);
}

TEST(OracleBackend, DelegatesToRenderer) {
  std::mt19937_64 rng(6);
  Frame f(3, 9, 9);
  std::uniform_real_distribution<float> d(0, 1);
  for (float& v : f.values()) v = d(rng);
  const BlurConditionField zero{Plane(9, 9, 1.0f), Plane(9, 9), Plane(9, 9)};
  const auto backend = oracle_backend(Tau(8), 15);
  EXPECT_TRUE(backend->blur(f, zero) == f);
  EXPECT_FALSE(backend->stochastic());
  EXPECT_TRUE(backend->concurrent_safe());
  const BlurConditionField c{Plane(9, 9, 0.6f), Plane(9, 9, 0.8f), oracle::random_plane(rng, 9, 9, 0, 1)};
  EXPECT_TRUE(backend->blur(f, c) == synth::render_conditioned_blur(f, c, Tau(8), 15));
  EXPECT_THROW(OracleBlurringModel(Tau(1), 0), InvalidInput);
}

TEST(Hash, FnvKnownValues) {
  EXPECT_EQ(fnv1a(std::string_view("")), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a(std::string_view("a")), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(hex64(0xabcull), "0000000000000abc");
}
