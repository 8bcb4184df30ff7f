#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <map>
#include <set>

#include "oracles.hpp"
#include "ttdeblur/error.hpp"
#include "ttdeblur/rsdm.hpp"

using namespace ttdeblur;
using namespace ttdeblur::rsdm;

TEST(SharpnessScore, ConstantMapTiesToOrigin) {
  const auto s = frame_sharpness_score({Plane(300, 320, 0.3f)});
  ASSERT_TRUE(s);
  EXPECT_NEAR(s->score, 0.3, 1e-6);
  EXPECT_EQ(s->window, (Window{0, 0, 256, 256}));
}

TEST(SharpnessScore, FindsZeroRegion) {
  Plane m(512, 512, 1.0f);
  for (int y = 64; y < 320; ++y) {
    for (int x = 64; x < 320; ++x) m(y, x) = 0.0f;
  }
  const auto s = frame_sharpness_score({m}, 256, 64);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->score, 0.0);
  EXPECT_EQ(s->window, (Window{64, 64, 256, 256}));
}

TEST(SharpnessScore, SmallFrameIsIneligible) {
  EXPECT_FALSE(frame_sharpness_score({Plane(255, 400)}));
  EXPECT_FALSE(frame_sharpness_score({Plane(400, 100)}));
}

TEST(SharpnessScore, MatchesBruteForce) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> size(20, 70);
  for (int trial = 0; trial < 30; ++trial) {
    const int h = size(rng), w = size(rng);
    const int patch = 16 + trial % 5;
    const int stride = 3 + trial % 7;
    const BlurMagnitudeMap m{oracle::random_plane(rng, h, w, 0, 1)};
    const auto got = frame_sharpness_score(m, patch, stride);
    const auto ref = oracle::window_min(m.m, patch, stride);
    ASSERT_TRUE(got);
    EXPECT_NEAR(got->score, ref.score, 1e-6);
    EXPECT_EQ(got->window.top, ref.top);
    EXPECT_EQ(got->window.left, ref.left);
  }
}

TEST(SharpnessScore, FlushWindowsAreScanned) {
  Plane m(300, 300, 1.0f);
  for (int y = 44; y < 300; ++y) {
    for (int x = 44; x < 300; ++x) m(y, x) = 0.0f;
  }
  const auto s = frame_sharpness_score({m}, 256, 32);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->score, 0.0);
  EXPECT_EQ(s->window, (Window{44, 44, 256, 256}));
}

TEST(SummedArea, ExactWindowSums) {
  std::mt19937_64 rng(2);
  const Plane p = oracle::random_plane(rng, 33, 29, 0, 1);
  const SummedAreaTable sat(p);
  double brute = 0.0;
  for (int y = 5; y < 20; ++y) {
    for (int x = 3; x < 28; ++x) brute += p(y, x);
  }
  EXPECT_NEAR(sat.mean(5, 3, 15, 25), brute / (15 * 25), 1e-9);
}

TEST(SelectionCount, Ceil) {
  EXPECT_EQ(selection_count(20, 10), 2);
  EXPECT_EQ(selection_count(20, 11), 3);
  EXPECT_EQ(selection_count(100, 7), 7);
  EXPECT_EQ(selection_count(10, 1), 1);
}

namespace {

std::vector<BlurMagnitudeMap> video_with_scores(const std::vector<float>& scores, int size = 16) {
  std::vector<BlurMagnitudeMap> out;
  for (float s : scores) out.push_back({Plane(size, size, s)});
  return out;
}

SelectionOptions small(double r) {
  SelectionOptions o;
  o.ratio = r;
  o.patch = 16;
  o.stride = 4;
  return o;
}

std::set<int> frames_of(const SelectionReport& r) {
  std::set<int> out;
  for (const auto& s : r.selections) out.insert(s.frame);
  return out;
}

}  // namespace

TEST(SelectPseudoSharp, TenFramesTwentyPercent) {
  const auto rep = select_pseudo_sharp("v", video_with_scores({.9f, .8f, .7f, .2f, .6f, .5f, .4f, .1f, .3f, .9f}),
                                       small(20));
  EXPECT_EQ(rep.selections.size(), 2u);
  EXPECT_EQ(frames_of(rep), (std::set<int>{3, 7}));
  EXPECT_EQ(rep.ineligible_frames, (std::vector<int>{0, 1, 8, 9}));
  EXPECT_NEAR(rep.eta_implied, 0.2, 1e-6);
}

TEST(SelectPseudoSharp, IdenticalFramesTakeSmallestIndices) {
  const auto rep = select_pseudo_sharp("v", video_with_scores(std::vector<float>(10, 0.4f)), small(30));
  ASSERT_EQ(rep.selections.size(), 3u);
  EXPECT_EQ(rep.selections[0].frame, 2);
  EXPECT_EQ(rep.selections[1].frame, 3);
  EXPECT_EQ(rep.selections[2].frame, 4);
}

TEST(SelectPseudoSharp, NoEligibleFramesWarns) {
  const auto rep = select_pseudo_sharp("v", video_with_scores({.1f, .1f, .1f, .1f}), small(50));
  EXPECT_TRUE(rep.selections.empty());
  EXPECT_FALSE(rep.warnings.empty());
  EXPECT_THROW(select_pseudo_sharp("v", {}, small(20)), InvalidInput);
}

TEST(SelectPseudoSharp, RandomVideosCountOrderingAndMonotoneSubsets) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> len(5, 60);
  for (int video = 0; video < 50; ++video) {
    const int t = len(rng);
    std::vector<BlurMagnitudeMap> mags;
    for (int i = 0; i < t; ++i) mags.push_back({oracle::random_plane(rng, 20, 20, 0, 1)});
    const int eligible = t - 4;
    std::map<double, std::set<int>> by_r;
    for (double r : {10.0, 20.0, 30.0}) {
      const auto rep = select_pseudo_sharp("v", mags, small(r));
      EXPECT_EQ(static_cast<int>(rep.selections.size()), std::min(selection_count(r, t), eligible));
      const auto chosen = frames_of(rep);
      double worst_selected = 0.0;
      for (const auto& s : rep.selections) worst_selected = std::max(worst_selected, s.score);
      for (int f = 2; f < t - 2; ++f) {
        if (chosen.count(f)) continue;
        EXPECT_LE(worst_selected, oracle::window_min(mags[static_cast<std::size_t>(f)].m, 16, 4).score + 1e-9);
      }
      by_r[r] = chosen;
    }
    EXPECT_TRUE(std::includes(by_r[20].begin(), by_r[20].end(), by_r[10].begin(), by_r[10].end()));
    EXPECT_TRUE(std::includes(by_r[30].begin(), by_r[30].end(), by_r[20].begin(), by_r[20].end()));
  }
}

TEST(SelectPseudoSharp, RatioRangeBand) {
  auto opt = small(20);
  opt.ratio_range = std::make_pair(20.0, 40.0);
  const auto rep = select_pseudo_sharp(
      "v", video_with_scores({.9f, .9f, .1f, .2f, .3f, .4f, .5f, .6f, .7f, .8f, .9f, .9f}), opt);
  EXPECT_EQ(frames_of(rep), (std::set<int>{5, 6}));
  opt.ratio_range = std::make_pair(40.0, 20.0);
  EXPECT_THROW(select_pseudo_sharp("v", video_with_scores(std::vector<float>(8, .1f)), opt), InvalidInput);
}

TEST(ComponentWindow, CentersOnLargestComponent) {
  Plane m(64, 64, 1.0f);
  for (int y = 40; y < 50; ++y) {
    for (int x = 30; x < 40; ++x) m(y, x) = 0.0f;
  }
  m(2, 2) = 0.0f;
  const auto w = component_window({m}, 0.5, 16);
  ASSERT_TRUE(w);
  EXPECT_EQ(w->height, 16);
  EXPECT_LE(w->top, 40);
  EXPECT_GE(w->top + 16, 50);
  EXPECT_LE(w->left, 30);
  EXPECT_GE(w->left + 16, 40);
  EXPECT_FALSE(component_window({Plane(64, 64, 1.0f)}, 0.5, 16));
}

TEST(CropPatch, ExactCopyAndRoundTrip) {
  std::mt19937_64 rng(8);
  Frame f(3, 40, 50);
  std::uniform_real_distribution<float> d(0, 1);
  for (float& v : f.values()) v = d(rng);
  EXPECT_TRUE(crop_patch(f, {0, 0, 40, 50}) == f);
  const Frame p = crop_patch(f, {10, 20, 16, 16});
  for (int c = 0; c < 3; ++c) EXPECT_EQ(p.at(c, 0, 0), f.at(c, 10, 20));
  Frame g(3, 40, 50);
  embed(g, p, {10, 20, 16, 16});
  EXPECT_TRUE(crop_patch(g, {10, 20, 16, 16}) == p);
  EXPECT_THROW(crop_patch(f, {30, 0, 16, 16}), InvalidInput);
  EXPECT_THROW(crop_patch(f, {-1, 0, 16, 16}), InvalidInput);
}
