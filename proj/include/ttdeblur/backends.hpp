#pragma once

// Interfaces for the two external neural dependencies (optical flow and
// conditional blurring) plus the deterministic test doubles. The neural
// adapters live in ttdeblur/nn/neural_backends.hpp.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>

#include "ttdeblur/fields.hpp"
#include "ttdeblur/grid.hpp"

namespace ttdeblur {

/// Identity of a frame pair. `crop` is set when the frames handed to the
/// estimator are crops of the full frames at that window.
struct FramePairId {
  std::string video;
  int from = 0;
  int to = 0;
  std::optional<Window> crop;
};

class FlowEstimator {
 public:
  virtual ~FlowEstimator() = default;
  /// Flow from `a` to `b`, same spatial shape as the inputs.
  virtual FlowField estimate(const Frame& a, const Frame& b, const FramePairId& id) const = 0;
  virtual bool concurrent_safe() const = 0;
  virtual std::string kind() const = 0;
};

class BlurringModel {
 public:
  virtual ~BlurringModel() = default;
  /// Blurred version of `sharp` under `cond`; same shape, values in [0, 1].
  virtual Frame blur(const Frame& sharp, const BlurConditionField& cond) const = 0;
  virtual bool concurrent_safe() const = 0;
  virtual bool stochastic() const = 0;
  virtual std::string kind() const = 0;
};

/// Returns precomputed flows keyed by (video, from, to). Entries may be
/// inserted directly or read on demand from `<root>/<video>/<from>_<to>.flo`
/// (six-digit zero-padded indices).
class InjectedFlowEstimator final : public FlowEstimator {
 public:
  InjectedFlowEstimator() = default;
  explicit InjectedFlowEstimator(std::filesystem::path root) : root_(std::move(root)) {}

  void insert(const std::string& video, int from, int to, FlowField flow);
  bool contains(const std::string& video, int from, int to) const;
  std::size_t size() const { return table_.size(); }

  FlowField estimate(const Frame& a, const Frame& b, const FramePairId& id) const override;
  bool concurrent_safe() const override { return true; }
  std::string kind() const override { return "injected"; }

  static std::filesystem::path flow_path(const std::filesystem::path& root, const std::string& video, int from, int to);

 private:
  std::optional<std::filesystem::path> root_;
  std::map<std::tuple<std::string, int, int>, FlowField> table_;
};

/// Deterministic blurring backend: delegates to render_conditioned_blur.
class OracleBlurringModel final : public BlurringModel {
 public:
  OracleBlurringModel(Tau tau, int steps);

  Frame blur(const Frame& sharp, const BlurConditionField& cond) const override;
  bool concurrent_safe() const override { return true; }
  bool stochastic() const override { return false; }
  std::string kind() const override { return "oracle"; }

  Tau tau() const { return tau_; }
  int steps() const { return steps_; }

 private:
  Tau tau_;
  int steps_;
};

std::unique_ptr<BlurringModel> oracle_backend(Tau tau, int steps = 15);

}  // namespace ttdeblur
