#include "ttdeblur/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "ttdeblur/error.hpp"
#include "ttdeblur/field_io.hpp"
#include "ttdeblur/hash.hpp"
#include "ttdeblur/image_io.hpp"
#include "ttdeblur/metrics.hpp"
#include "ttdeblur/synth.hpp"

namespace fs = std::filesystem;

namespace ttdeblur::adapt {

std::string to_string(PatchMode m) { return m == PatchMode::rsdm ? "rsdm" : "random"; }

std::string to_string(ConditionMode m) {
  switch (m) {
    case ConditionMode::dbcgm: return "dbcgm";
    case ConditionMode::flow: return "flow";
    case ConditionMode::random: return "random";
  }
  return "?";
}

PatchMode parse_patch_mode(const std::string& s) {
  if (s == "rsdm") return PatchMode::rsdm;
  if (s == "random") return PatchMode::random;
  throw InvalidInput("unknown patch mode '" + s + "' (rsdm|random)");
}

ConditionMode parse_condition_mode(const std::string& s) {
  if (s == "dbcgm") return ConditionMode::dbcgm;
  if (s == "flow") return ConditionMode::flow;
  if (s == "random") return ConditionMode::random;
  throw InvalidInput("unknown condition mode '" + s + "' (dbcgm|flow|random)");
}

ConditionSource dbcgm_conditions(const FlowEstimator& flow, const dbcgm::MagnitudeEstimator& magnitude,
                                 dbcgm::ConditionOptions options) {
  return [&flow, &magnitude, options](const dbcgm::CollocatedWindow& w) {
    return dbcgm::generate_condition(w, flow, magnitude, options);
  };
}

ConditionSource flow_conditions(const FlowEstimator& flow, Tau tau) {
  return [&flow, tau](const dbcgm::CollocatedWindow& w) {
    const auto flows = dbcgm::window_flows(w, flow);
    const TrajectoryMap traj = accumulate_test_trajectory(flows);
    const OrientationField orient = orientation_field(traj);
    BlurMagnitudeMap mag{Plane(traj.shape())};
    auto u = traj.u.values();
    auto v = traj.v.values();
    auto m = mag.m.values();
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = static_cast<float>(std::min(std::hypot(u[i], v[i]) / tau.value(), 1.0));
    }
    return assemble_condition(orient, mag);
  };
}

ConditionSource random_conditions(std::uint64_t seed, int block) {
  if (block < 1) throw InvalidInput("random_conditions: block must be >= 1");
  return [seed, block](const dbcgm::CollocatedWindow& w) {
    synth::SplitMix64 rng(fnv1a(w.video_id, seed) ^ (static_cast<std::uint64_t>(w.center_frame) * 0x9E3779B97F4A7C15ull));
    const Shape shape = w.patches[dbcgm::kCenter].shape();
    BlurConditionField cond{Plane(shape), Plane(shape), Plane(shape)};
    for (int by = 0; by < shape.height; by += block) {
      for (int bx = 0; bx < shape.width; bx += block) {
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        const float ox = static_cast<float>(std::cos(angle));
        const float oy = static_cast<float>(std::sin(angle));
        const float z = static_cast<float>(rng.uniform());
        for (int y = by; y < std::min(by + block, shape.height); ++y) {
          for (int x = bx; x < std::min(bx + block, shape.width); ++x) {
            cond.x(y, x) = ox;
            cond.y(y, x) = oy;
            cond.z(y, x) = z;
          }
        }
      }
    }
    return cond;
  };
}

std::vector<rsdm::PatchSelection> random_selections(const std::string& video_id, int frame_count, Shape frame_shape,
                                                    int count, int patch, std::uint64_t seed) {
  std::vector<int> eligible;
  for (int t = rsdm::kTemporalRadius; t + rsdm::kTemporalRadius < frame_count; ++t) eligible.push_back(t);
  if (frame_shape.height < patch || frame_shape.width < patch) eligible.clear();
  synth::SplitMix64 rng(fnv1a(video_id, seed));
  for (std::size_t i = eligible.size(); i > 1; --i) {
    std::swap(eligible[i - 1], eligible[rng.next() % i]);
  }
  eligible.resize(std::min<std::size_t>(eligible.size(), static_cast<std::size_t>(std::max(count, 0))));
  std::sort(eligible.begin(), eligible.end());

  std::vector<rsdm::PatchSelection> out;
  for (int t : eligible) {
    const int top = static_cast<int>(rng.next() % static_cast<std::uint64_t>(frame_shape.height - patch + 1));
    const int left = static_cast<int>(rng.next() % static_cast<std::uint64_t>(frame_shape.width - patch + 1));
    out.push_back({video_id, t, Window{top, left, patch, patch}, 0.0, 0.0});
  }
  return out;
}

PseudoDataset build_pseudo_dataset(std::span<const rsdm::PatchSelection> selections,
                                   std::span<const VideoFrames> videos, const ConditionSource& conditions,
                                   const BlurringModel& backend, const std::string& condition_label,
                                   std::uint64_t seed) {
  if (selections.empty()) throw InvalidInput("build_pseudo_dataset: no selections");
  PseudoDataset out;
  for (const auto& sel : selections) {
    auto video = std::find_if(videos.begin(), videos.end(), [&](const VideoFrames& v) { return v.id == sel.video_id; });
    if (video == videos.end()) throw InvalidInput("build_pseudo_dataset: unknown video " + sel.video_id);
    const auto window = dbcgm::gather_window(video->frames, sel);
    try {
      BlurConditionField cond = conditions(window);
      Frame blurred = backend.blur(window.patches[dbcgm::kCenter], cond);
      out.pairs.push_back(PseudoPair{window.patches[dbcgm::kCenter], std::move(blurred), std::move(cond),
                                     Provenance{sel.video_id, sel.frame, sel.window, backend.kind(), seed,
                                                condition_label}});
    } catch (const std::exception& e) {
      out.failures.push_back(sel.video_id + " t" + std::to_string(sel.frame) + ": " + e.what());
    }
  }
  if (out.pairs.empty()) {
    throw StageError("pseudo pairs", "no pair survived (" + std::to_string(out.failures.size()) + " failures)");
  }
  return out;
}

std::vector<fs::path> write_pairs(const fs::path& root, std::span<const PseudoPair> pairs) {
  std::vector<fs::path> written;
  for (const auto& p : pairs) {
    const std::string stem = "t" + std::to_string(p.provenance.frame);
    const fs::path patch = root / "patches" / p.provenance.video_id / (stem + ".png");
    const fs::path blurred = root / "pairs" / p.provenance.video_id / (stem + "_blurred.png");
    const fs::path cond = root / "conditions" / p.provenance.video_id / (stem + ".bcf");
    io::write_png(patch, p.sharp);
    io::write_png(blurred, p.blurred);
    io::write_bcf(cond, p.condition);
    written.insert(written.end(), {patch, blurred, cond});
  }
  return written;
}

FinetuneLog finetune(DeblurringModel& model, std::span<const PseudoPair> pairs, const FinetuneOptions& options) {
  if (pairs.empty()) throw InvalidInput("finetune: no pseudo pairs");
  if (options.epochs < 0 || options.batch_size < 1) throw InvalidInput("finetune: invalid epochs or batch size");
  FinetuneLog log;
  if (options.epochs == 0) return log;

  model.start_finetune(options.seed);
  synth::SplitMix64 rng(options.seed ^ 0x5EEDF1E7ull);
  std::vector<std::size_t> order(pairs.size());
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.next() % i]);
    double total = 0.0;
    int steps = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(options.batch_size)) {
      std::vector<const PseudoPair*> batch;
      for (std::size_t k = start; k < std::min(order.size(), start + options.batch_size); ++k) {
        batch.push_back(&pairs[order[k]]);
      }
      total += model.finetune_step(batch);
      ++steps;
    }
    log.epoch_loss.push_back(total / steps);
  }
  return log;
}

std::vector<Frame> temporal_window(std::span<const Frame> frames, int center, int size) {
  if (frames.empty() || size < 1 || size % 2 == 0) throw InvalidInput("temporal_window: bad window");
  const int n = static_cast<int>(frames.size());
  std::vector<Frame> out;
  for (int k = -(size / 2); k <= size / 2; ++k) out.push_back(frames[static_cast<std::size_t>(std::clamp(center + k, 0, n - 1))]);
  return out;
}

namespace {

template <typename RestoreFn>
MetricsSummary evaluate_with(std::span<const EvalVideo> videos, RestoreFn restore) {
  if (videos.empty()) throw InvalidInput("evaluate: no videos");
  MetricsSummary summary;
  for (const auto& v : videos) {
    if (v.blurred.size() != v.sharp.size() || v.blurred.empty()) {
      throw InvalidInput("evaluate: video " + v.id + " has misaligned blurred/sharp frame counts");
    }
    VideoMetrics vm{v.id, 0.0, 0.0, static_cast<int>(v.blurred.size())};
    for (int t = 0; t < vm.frames; ++t) {
      const Frame restored = restore(v, t);
      vm.psnr += metrics::psnr(restored, v.sharp[static_cast<std::size_t>(t)]);
      vm.ssim += metrics::ssim(restored, v.sharp[static_cast<std::size_t>(t)]);
    }
    vm.psnr /= vm.frames;
    vm.ssim /= vm.frames;
    summary.videos.push_back(vm);
  }
  for (const auto& vm : summary.videos) {
    summary.psnr += vm.psnr;
    summary.ssim += vm.ssim;
  }
  summary.psnr /= static_cast<double>(summary.videos.size());
  summary.ssim /= static_cast<double>(summary.videos.size());
  return summary;
}

}  // namespace

MetricsSummary evaluate(const DeblurringModel& model, std::span<const EvalVideo> videos) {
  return evaluate_with(videos, [&model](const EvalVideo& v, int t) {
    const auto window = temporal_window(v.blurred, t, model.window_frames());
    return model.deblur(window);
  });
}

MetricsSummary evaluate_identity(std::span<const EvalVideo> videos) {
  return evaluate_with(videos, [](const EvalVideo& v, int t) { return v.blurred[static_cast<std::size_t>(t)]; });
}

std::string format_table(const MetricsReport& report) {
  auto num = [](double v, int prec) {
    if (std::isinf(v)) return std::string("inf");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << "Model: " << report.model << "   Dataset: " << report.dataset << "\n";
  out << "            PSNR     SSIM\n";
  out << "Baseline  " << std::string(8 - std::min<std::size_t>(8, num(report.baseline.psnr, 2).size()), ' ')
      << num(report.baseline.psnr, 2) << "    " << num(report.baseline.ssim, 3) << "\n";
  out << "+Adapted  " << std::string(8 - std::min<std::size_t>(8, num(report.adapted.psnr, 2).size()), ' ')
      << num(report.adapted.psnr, 2) << "    " << num(report.adapted.ssim, 3) << "\n";
  return out.str();
}

std::uint64_t checksum(const Frame& f, std::uint64_t seed) {
  auto v = f.values();
  return fnv1a(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(v.data()), v.size_bytes()), seed);
}

std::uint64_t checksum(std::span<const PseudoPair> pairs) {
  std::uint64_t h = kFnvOffset;
  for (const auto& p : pairs) {
    h = checksum(p.sharp, h);
    h = checksum(p.blurred, h);
    h = fnv1a(io::encode_bcf(p.condition), h);
  }
  return h;
}

}  // namespace ttdeblur::adapt
