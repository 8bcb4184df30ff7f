#include "ttdeblur/fields.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ttdeblur/error.hpp"

namespace ttdeblur {

namespace {

void require_finite(const Plane& p, const char* what) {
  for (float v : p.values()) {
    if (!std::isfinite(v)) throw InvalidInput(std::string(what) + ": non-finite value");
  }
}

float norm2(float u, float v) { return std::sqrt(u * u + v * v); }

}  // namespace

FlowField::FlowField(Plane u_, Plane v_) : u(std::move(u_)), v(std::move(v_)) {
  require_same_shape(u.shape(), v.shape(), "FlowField");
}

TrajectoryMap::TrajectoryMap(Plane u_, Plane v_) : u(std::move(u_)), v(std::move(v_)) {
  require_same_shape(u.shape(), v.shape(), "TrajectoryMap");
}

BlurConditionField::BlurConditionField(Plane x_, Plane y_, Plane z_)
    : x(std::move(x_)), y(std::move(y_)), z(std::move(z_)) {
  require_same_shape(x.shape(), y.shape(), "BlurConditionField");
  require_same_shape(x.shape(), z.shape(), "BlurConditionField");
}

Tau::Tau(double value) : value_(value) {
  if (!(value > 0.0) || !std::isfinite(value)) throw InvalidInput("tau must be a finite positive value");
}

TrajectoryMap accumulate_training_trajectory(std::span<const FlowField> forward_flows,
                                             std::span<const FlowField> backward_flows) {
  if (forward_flows.empty()) throw InvalidInput("accumulate_training_trajectory: empty flow list");
  if (forward_flows.size() != backward_flows.size()) {
    throw InvalidInput("accumulate_training_trajectory: forward/backward counts differ");
  }
  const Shape shape = forward_flows.front().shape();
  for (std::size_t n = 0; n < forward_flows.size(); ++n) {
    require_same_shape(forward_flows[n].u.shape(), shape, "accumulate_training_trajectory");
    require_same_shape(forward_flows[n].v.shape(), shape, "accumulate_training_trajectory");
    require_same_shape(backward_flows[n].u.shape(), shape, "accumulate_training_trajectory");
    require_same_shape(backward_flows[n].v.shape(), shape, "accumulate_training_trajectory");
  }

  TrajectoryMap out{Plane(shape), Plane(shape)};
  auto ou = out.u.values();
  auto ov = out.v.values();
  for (std::size_t n = 0; n < forward_flows.size(); ++n) {
    auto fu = forward_flows[n].u.values();
    auto fv = forward_flows[n].v.values();
    auto bu = backward_flows[n].u.values();
    auto bv = backward_flows[n].v.values();
    for (std::size_t i = 0; i < ou.size(); ++i) {
      ou[i] += (fu[i] - bu[i]) * 0.5f;
      ov[i] += (fv[i] - bv[i]) * 0.5f;
    }
  }
  require_finite(out.u, "accumulate_training_trajectory");
  require_finite(out.v, "accumulate_training_trajectory");
  return out;
}

double max_trajectory_norm(const TrajectoryMap& traj) {
  float best = 0.0f;
  auto u = traj.u.values();
  auto v = traj.v.values();
  for (std::size_t i = 0; i < u.size(); ++i) best = std::max(best, norm2(u[i], v[i]));
  return best;
}

BlurMagnitudeMap magnitude_ground_truth(const TrajectoryMap& traj, Tau tau) {
  const float t = static_cast<float>(tau.value());
  BlurMagnitudeMap out{Plane(traj.shape())};
  auto u = traj.u.values();
  auto v = traj.v.values();
  auto m = out.m.values();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const float n = norm2(u[i], v[i]);
    if (n > t) {
      throw OutOfRange("magnitude_ground_truth: trajectory norm " + std::to_string(n) + " exceeds tau " +
                       std::to_string(t) + " (stale normalization constant?)");
    }
    m[i] = std::min(n / t, 1.0f);
  }
  return out;
}

TrajectoryMap accumulate_test_trajectory(std::span<const FlowField> flows) {
  if (flows.size() != 4) {
    throw InvalidInput("accumulate_test_trajectory: expected 4 flows, got " + std::to_string(flows.size()));
  }
  const Shape shape = flows.front().shape();
  TrajectoryMap out{Plane(shape), Plane(shape)};
  auto ou = out.u.values();
  auto ov = out.v.values();
  for (const auto& f : flows) {
    require_same_shape(f.u.shape(), shape, "accumulate_test_trajectory");
    require_same_shape(f.v.shape(), shape, "accumulate_test_trajectory");
    auto fu = f.u.values();
    auto fv = f.v.values();
    for (std::size_t i = 0; i < ou.size(); ++i) {
      ou[i] += fu[i];
      ov[i] += fv[i];
    }
  }
  return out;
}

OrientationField orientation_field(const TrajectoryMap& traj, float eps) {
  if (!(eps > 0.0f)) throw InvalidInput("orientation_field: eps must be positive");
  require_same_shape(traj.u.shape(), traj.v.shape(), "orientation_field");
  OrientationField out{Plane(traj.shape()), Plane(traj.shape())};
  auto u = traj.u.values();
  auto v = traj.v.values();
  auto ox = out.ox.values();
  auto oy = out.oy.values();
  for (std::size_t i = 0; i < u.size(); ++i) {
    // Normalize in double so the float result is unit-norm to rounding.
    const double n = std::hypot(static_cast<double>(u[i]), static_cast<double>(v[i]));
    if (n > eps) {
      ox[i] = static_cast<float>(u[i] / n);
      oy[i] = static_cast<float>(v[i] / n);
    }
  }
  return out;
}

BlurMagnitudeMap adapt_magnitude(const BlurMagnitudeMap& center, std::span<const BlurMagnitudeMap> neighbors,
                                 NeighborAverage mode) {
  if (neighbors.size() != 4) {
    throw InvalidInput("adapt_magnitude: expected 4 neighbor maps, got " + std::to_string(neighbors.size()));
  }
  const Shape shape = center.shape();
  for (const auto& n : neighbors) require_same_shape(n.shape(), shape, "adapt_magnitude");

  Plane avg(shape);
  auto a = avg.values();
  for (const auto& n : neighbors) {
    auto nv = n.m.values();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += nv[i];
  }
  for (float& v : a) v *= 0.25f;
  if (mode == NeighborAverage::scalar) {
    const float s = static_cast<float>(avg.mean());
    std::fill(a.begin(), a.end(), s);
  }

  const float peak = center.m.max();
  BlurMagnitudeMap out{Plane(shape)};
  auto c = center.m.values();
  auto o = out.m.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const float normed = peak > 0.0f ? c[i] / peak : c[i];
    o[i] = std::clamp(normed * a[i], 0.0f, 1.0f);
  }
  return out;
}

BlurConditionField assemble_condition(const OrientationField& orient, const BlurMagnitudeMap& mag) {
  require_same_shape(orient.ox.shape(), orient.oy.shape(), "assemble_condition");
  require_same_shape(orient.shape(), mag.shape(), "assemble_condition");
  return BlurConditionField(orient.ox, orient.oy, mag.m);
}

void validate_condition(const BlurConditionField& cond, float unit_tol) {
  require_same_shape(cond.x.shape(), cond.y.shape(), "condition");
  require_same_shape(cond.x.shape(), cond.z.shape(), "condition");
  auto x = cond.x.values();
  auto y = cond.y.values();
  auto z = cond.z.values();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(z[i] >= 0.0f && z[i] <= 1.0f)) throw InvalidInput("condition: magnitude outside [0, 1]");
    if (x[i] == 0.0f && y[i] == 0.0f) continue;
    if (std::abs(x[i] * x[i] + y[i] * y[i] - 1.0f) > unit_tol) {
      throw InvalidInput("condition: orientation is neither unit nor zero");
    }
  }
}

}  // namespace ttdeblur
