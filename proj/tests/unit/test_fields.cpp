#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "oracles.hpp"
#include "ttdeblur/error.hpp"
#include "ttdeblur/field_io.hpp"
#include "ttdeblur/fields.hpp"

using namespace ttdeblur;

namespace {

std::vector<FlowField> constant_flows(int n, Shape s, float u, float v) {
  return std::vector<FlowField>(static_cast<std::size_t>(n), FlowField(s, u, v));
}

TrajectoryMap constant_traj(Shape s, float u, float v) { return TrajectoryMap(Plane(s, u), Plane(s, v)); }

}  // namespace

TEST(TrainingTrajectory, ConstantCentralDifferences) {
  const Shape s{3, 4};
  const auto t = accumulate_training_trajectory(constant_flows(3, s, 2, 0), constant_flows(3, s, -2, 0));
  for (float u : t.u.values()) EXPECT_EQ(u, 6.0f);
  for (float v : t.v.values()) EXPECT_EQ(v, 0.0f);
}

TEST(TrainingTrajectory, ZeroFlows) {
  const Shape s{5, 5};
  const auto t = accumulate_training_trajectory(constant_flows(4, s, 0, 0), constant_flows(4, s, 0, 0));
  EXPECT_EQ(t.u.max(), 0.0f);
  EXPECT_EQ(t.v.min(), 0.0f);
}

TEST(TrainingTrajectory, MatchesOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<FlowField> fwd, bwd;
    for (int n = 0; n < 6; ++n) {
      fwd.push_back(oracle::random_flow(rng, 8, 8));
      bwd.push_back(n == 0 ? FlowField(Shape{8, 8}, 0, 0) : oracle::random_flow(rng, 8, 8));
    }
    const auto t = accumulate_training_trajectory(fwd, bwd);
    const auto [u, v] = oracle::training_trajectory(fwd, bwd);
    EXPECT_LT(oracle::max_abs_diff(u, t.u), 1e-4);
    EXPECT_LT(oracle::max_abs_diff(v, t.v), 1e-4);
  }
}

TEST(TrainingTrajectory, Errors) {
  EXPECT_THROW(accumulate_training_trajectory({}, {}), InvalidInput);
  EXPECT_THROW(accumulate_training_trajectory(constant_flows(2, {4, 4}, 1, 0), constant_flows(2, {4, 5}, 1, 0)),
               InvalidInput);
  EXPECT_THROW(accumulate_training_trajectory(constant_flows(2, {4, 4}, 1, 0), constant_flows(3, {4, 4}, 1, 0)),
               InvalidInput);
}

TEST(MagnitudeGroundTruth, Examples) {
  auto m = magnitude_ground_truth(constant_traj({2, 3}, 3, 4), Tau(10));
  for (float x : m.m.values()) EXPECT_FLOAT_EQ(x, 0.5f);
  m = magnitude_ground_truth(constant_traj({2, 3}, 0, 0), Tau(10));
  EXPECT_EQ(m.m.max(), 0.0f);

  TrajectoryMap two(Plane(1, 2, std::vector<float>{3, 6}), Plane(1, 2, std::vector<float>{4, 8}));
  m = magnitude_ground_truth(two, Tau(10));
  EXPECT_FLOAT_EQ(m.m(0, 0), 0.5f);
  EXPECT_FLOAT_EQ(m.m(0, 1), 1.0f);
}

TEST(MagnitudeGroundTruth, Errors) {
  EXPECT_THROW(Tau(0.0), InvalidInput);
  EXPECT_THROW(Tau(-1.0), InvalidInput);
  EXPECT_THROW(magnitude_ground_truth(constant_traj({2, 2}, 30, 40), Tau(10)), OutOfRange);
}

TEST(MagnitudeGroundTruth, ScaleCovariant) {
  std::mt19937_64 rng(3);
  const TrajectoryMap t(oracle::random_plane(rng, 9, 7, -3, 3), oracle::random_plane(rng, 9, 7, -3, 3));
  const double tau = 5.0;
  const auto base = magnitude_ground_truth(t, Tau(tau));
  for (double k : {0.5, 2.0, 10.0}) {
    TrajectoryMap scaled = t;
    for (float& x : scaled.u.values()) x = static_cast<float>(x * k);
    for (float& x : scaled.v.values()) x = static_cast<float>(x * k);
    const auto m = magnitude_ground_truth(scaled, Tau(tau * k));
    for (std::size_t i = 0; i < m.m.size(); ++i) EXPECT_NEAR(m.m.values()[i], base.m.values()[i], 1e-6);
  }
}

TEST(TestTrajectory, Examples) {
  const Shape s{2, 2};
  auto t = accumulate_test_trajectory(constant_flows(4, s, 1, 0));
  EXPECT_EQ(t.u(1, 1), 4.0f);
  EXPECT_EQ(t.v(0, 0), 0.0f);
  const std::vector<FlowField> mixed{{s, 1, 0}, {s, 0, 1}, {s, -1, 0}, {s, 0, 1}};
  t = accumulate_test_trajectory(mixed);
  EXPECT_EQ(t.u(0, 1), 0.0f);
  EXPECT_EQ(t.v(0, 1), 2.0f);
}

TEST(TestTrajectory, Errors) {
  EXPECT_THROW(accumulate_test_trajectory(constant_flows(3, {2, 2}, 1, 0)), InvalidInput);
  EXPECT_THROW(accumulate_test_trajectory(constant_flows(5, {2, 2}, 1, 0)), InvalidInput);
  std::vector<FlowField> bad = constant_flows(4, {2, 2}, 1, 0);
  bad[2] = FlowField(Shape{3, 2}, 0, 0);
  EXPECT_THROW(accumulate_test_trajectory(bad), InvalidInput);
}

TEST(TestTrajectory, OrderIndependentWithinTolerance) {
  std::mt19937_64 rng(5);
  std::vector<FlowField> flows;
  for (int i = 0; i < 4; ++i) flows.push_back(oracle::random_flow(rng, 16, 16));
  const auto a = accumulate_test_trajectory(flows);
  std::vector<FlowField> rev(flows.rbegin(), flows.rend());
  const auto b = accumulate_test_trajectory(rev);
  for (std::size_t i = 0; i < a.u.size(); ++i) {
    EXPECT_NEAR(a.u.values()[i], b.u.values()[i], 1e-5);
    EXPECT_NEAR(a.v.values()[i], b.v.values()[i], 1e-5);
  }
}

TEST(Orientation, Examples) {
  TrajectoryMap t(Plane(1, 3, std::vector<float>{3, 0, -5}), Plane(1, 3, std::vector<float>{4, 0, 0}));
  const auto o = orientation_field(t);
  EXPECT_FLOAT_EQ(o.ox(0, 0), 0.6f);
  EXPECT_FLOAT_EQ(o.oy(0, 0), 0.8f);
  EXPECT_EQ(o.ox(0, 1), 0.0f);
  EXPECT_EQ(o.oy(0, 1), 0.0f);
  EXPECT_FLOAT_EQ(o.ox(0, 2), -1.0f);
  EXPECT_EQ(o.oy(0, 2), 0.0f);
  EXPECT_THROW(orientation_field(t, 0.0f), InvalidInput);
}

TEST(Orientation, InvariantToPositiveScaling) {
  std::mt19937_64 rng(8);
  std::vector<FlowField> flows;
  for (int i = 0; i < 4; ++i) flows.push_back(oracle::random_flow(rng, 12, 12));
  const auto base = orientation_field(accumulate_test_trajectory(flows));
  for (float k : {0.25f, 4.0f}) {
    auto scaled = flows;
    for (auto& f : scaled) {
      for (float& x : f.u.values()) x *= k;
      for (float& x : f.v.values()) x *= k;
    }
    const auto o = orientation_field(accumulate_test_trajectory(scaled));
    for (std::size_t i = 0; i < o.ox.size(); ++i) {
      EXPECT_NEAR(o.ox.values()[i], base.ox.values()[i], 1e-5);
      EXPECT_NEAR(o.oy.values()[i], base.oy.values()[i], 1e-5);
    }
  }
}

TEST(AdaptMagnitude, Examples) {
  const BlurMagnitudeMap zero{Plane(2, 2)};
  const std::vector<BlurMagnitudeMap> nbrs(4, BlurMagnitudeMap{Plane(2, 2, 0.7f)});
  EXPECT_EQ(adapt_magnitude(zero, nbrs).m.max(), 0.0f);

  const BlurMagnitudeMap c{Plane(1, 3, std::vector<float>{0.0f, 0.2f, 0.4f})};
  const std::vector<BlurMagnitudeMap> n8(4, BlurMagnitudeMap{Plane(1, 3, 0.8f)});
  const auto out = adapt_magnitude(c, n8);
  EXPECT_FLOAT_EQ(out.m(0, 0), 0.0f);
  EXPECT_FLOAT_EQ(out.m(0, 1), 0.4f);
  EXPECT_FLOAT_EQ(out.m(0, 2), 0.8f);
}

TEST(AdaptMagnitude, BoundedByNeighborMeanAndMatchesOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const BlurMagnitudeMap c{oracle::random_plane(rng, 10, 6, 0, 1)};
    std::vector<BlurMagnitudeMap> nbrs;
    std::vector<Plane> raw;
    for (int i = 0; i < 4; ++i) {
      raw.push_back(oracle::random_plane(rng, 10, 6, 0, 1));
      nbrs.push_back({raw.back()});
    }
    const auto out = adapt_magnitude(c, nbrs);
    const auto ref = oracle::adapt_magnitude(c.m, raw);
    EXPECT_LT(oracle::max_abs_diff(ref, out.m), 1e-6);

    std::size_t argmax = 0;
    for (std::size_t i = 0; i < c.m.size(); ++i) {
      double avg = 0.0;
      for (const auto& n : raw) avg += n.values()[i];
      avg /= 4.0;
      EXPECT_LE(out.m.values()[i], avg + 1e-6);
      if (c.m.values()[i] > c.m.values()[argmax]) argmax = i;
    }
    double avg_at = 0.0;
    for (const auto& n : raw) avg_at += n.values()[argmax];
    EXPECT_NEAR(out.m.values()[argmax], avg_at / 4.0, 1e-6);
  }
}

TEST(AdaptMagnitude, ScalarModeBroadcastsOneMean) {
  const BlurMagnitudeMap c{Plane(1, 2, std::vector<float>{0.5f, 1.0f})};
  std::vector<BlurMagnitudeMap> nbrs(4, BlurMagnitudeMap{Plane(1, 2, std::vector<float>{0.2f, 0.6f})});
  const auto out = adapt_magnitude(c, nbrs, NeighborAverage::scalar);
  EXPECT_FLOAT_EQ(out.m(0, 0), 0.2f);
  EXPECT_FLOAT_EQ(out.m(0, 1), 0.4f);
}

TEST(AdaptMagnitude, WrongNeighborCount) {
  const BlurMagnitudeMap c{Plane(2, 2)};
  EXPECT_THROW(adapt_magnitude(c, std::vector<BlurMagnitudeMap>(3, c)), InvalidInput);
}

TEST(AssembleCondition, Examples) {
  const OrientationField zero_o{Plane(2, 2), Plane(2, 2)};
  const auto zc = assemble_condition(zero_o, {Plane(2, 2)});
  EXPECT_EQ(zc.x.max(), 0.0f);
  EXPECT_EQ(zc.z.max(), 0.0f);

  const OrientationField unit_x{Plane(2, 2, 1.0f), Plane(2, 2)};
  const auto c = assemble_condition(unit_x, {Plane(2, 2, 0.5f)});
  EXPECT_EQ(c.x(1, 1), 1.0f);
  EXPECT_EQ(c.y(1, 1), 0.0f);
  EXPECT_EQ(c.z(1, 1), 0.5f);
  EXPECT_THROW(assemble_condition(unit_x, {Plane(2, 3)}), InvalidInput);
}

TEST(AssembleCondition, BcfRoundTripIsBitExact) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const auto traj = accumulate_test_trajectory(std::vector<FlowField>{
        oracle::random_flow(rng, 13, 17), oracle::random_flow(rng, 13, 17), oracle::random_flow(rng, 13, 17),
        oracle::random_flow(rng, 13, 17)});
    const auto cond = assemble_condition(orientation_field(traj), {oracle::random_plane(rng, 13, 17, 0, 1)});
    const auto back = io::decode_bcf(io::encode_bcf(cond));
    EXPECT_EQ(std::memcmp(back.x.data(), cond.x.data(), cond.x.size() * 4), 0);
    EXPECT_EQ(std::memcmp(back.y.data(), cond.y.data(), cond.y.size() * 4), 0);
    EXPECT_EQ(std::memcmp(back.z.data(), cond.z.data(), cond.z.size() * 4), 0);
  }
}

TEST(Fields, DeterministicOutputs) {
  std::mt19937_64 rng(99);
  std::vector<FlowField> flows;
  for (int i = 0; i < 4; ++i) flows.push_back(oracle::random_flow(rng, 20, 20));
  const auto a = orientation_field(accumulate_test_trajectory(flows));
  const auto b = orientation_field(accumulate_test_trajectory(flows));
  EXPECT_TRUE(a == b);
}
