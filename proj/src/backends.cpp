#include "ttdeblur/backends.hpp"

#include <cstdio>

#include "ttdeblur/error.hpp"
#include "ttdeblur/field_io.hpp"
#include "ttdeblur/synth.hpp"

namespace ttdeblur {

void InjectedFlowEstimator::insert(const std::string& video, int from, int to, FlowField flow) {
  table_.insert_or_assign(std::make_tuple(video, from, to), std::move(flow));
}

bool InjectedFlowEstimator::contains(const std::string& video, int from, int to) const {
  if (table_.contains(std::make_tuple(video, from, to))) return true;
  return root_ && std::filesystem::exists(flow_path(*root_, video, from, to));
}

std::filesystem::path InjectedFlowEstimator::flow_path(const std::filesystem::path& root, const std::string& video,
                                                       int from, int to) {
  char name[40];
  std::snprintf(name, sizeof(name), "%06d_%06d.flo", from, to);
  return root / video / name;
}

FlowField InjectedFlowEstimator::estimate(const Frame& a, const Frame& b, const FramePairId& id) const {
  require_same_shape(a.shape(), b.shape(), "InjectedFlowEstimator");
  FlowField full;
  if (auto it = table_.find(std::make_tuple(id.video, id.from, id.to)); it != table_.end()) {
    full = it->second;
  } else if (root_) {
    const auto path = flow_path(*root_, id.video, id.from, id.to);
    if (!std::filesystem::exists(path)) throw LoadError("no injected flow at " + path.string());
    full = io::read_flo(path);
  } else {
    throw InvalidInput("no injected flow for " + id.video + " " + std::to_string(id.from) + "->" +
                       std::to_string(id.to));
  }
  if (id.crop) full = FlowField(crop(full.u, *id.crop), crop(full.v, *id.crop));
  require_same_shape(full.shape(), a.shape(), "InjectedFlowEstimator");
  return full;
}

OracleBlurringModel::OracleBlurringModel(Tau tau, int steps) : tau_(tau), steps_(steps) {
  if (steps < 1) throw InvalidInput("oracle backend: steps must be >= 1");
}

Frame OracleBlurringModel::blur(const Frame& sharp, const BlurConditionField& cond) const {
  Frame out = synth::render_conditioned_blur(sharp, cond, tau_, steps_);
  out.clamp01();
  return out;
}

std::unique_ptr<BlurringModel> oracle_backend(Tau tau, int steps) {
  return std::make_unique<OracleBlurringModel>(tau, steps);
}

}  // namespace ttdeblur
