#include "ttdeblur/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ttdeblur/error.hpp"

namespace ttdeblur::synth {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

float CrfSpec::apply(float linear) const {
  switch (kind) {
    case Kind::identity: return linear;
    case Kind::gamma: return static_cast<float>(std::pow(std::max(0.0f, linear), 1.0 / gamma_value));
  }
  return linear;
}

std::string CrfSpec::name() const { return kind == Kind::identity ? "identity" : "gamma"; }

CrfSpec CrfSpec::parse(const std::string& kind, double gamma_value) {
  if (!(gamma_value > 0.0)) throw InvalidInput("CRF gamma must be positive");
  if (kind == "identity") return {Kind::identity, gamma_value};
  if (kind == "gamma") return {Kind::gamma, gamma_value};
  throw InvalidInput("unknown CRF kind '" + kind + "'");
}

int center_index(int frame_count) { return (frame_count - 1) / 2; }

Frame synthesize_blurred_frame(std::span<const Frame> frames, const CrfSpec& crf) {
  if (frames.empty() || frames.size() % 2 == 0) {
    throw InvalidInput("synthesize_blurred_frame: need an odd number of frames, got " +
                       std::to_string(frames.size()));
  }
  const Frame& first = frames.front();
  std::vector<double> acc(first.size(), 0.0);
  for (const auto& f : frames) {
    require_same_shape(f.shape(), first.shape(), "synthesize_blurred_frame");
    if (f.channels() != first.channels()) throw InvalidInput("synthesize_blurred_frame: channel mismatch");
    auto v = f.values();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
  }
  Frame out(first.channels(), first.shape());
  auto o = out.values();
  const double inv = 1.0 / static_cast<double>(frames.size());
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = crf.apply(static_cast<float>(acc[i] * inv));
  return out;
}

Frame render_conditioned_blur(const Frame& sharp, const BlurConditionField& cond, Tau tau, int steps) {
  if (steps < 1) throw InvalidInput("render_conditioned_blur: steps must be >= 1");
  require_same_shape(cond.x.shape(), sharp.shape(), "render_conditioned_blur");
  require_same_shape(cond.y.shape(), sharp.shape(), "render_conditioned_blur");
  require_same_shape(cond.z.shape(), sharp.shape(), "render_conditioned_blur");

  const int h = sharp.height();
  const int w = sharp.width();
  Frame out(sharp.channels(), sharp.shape());
  std::vector<double> fractions(static_cast<std::size_t>(steps), 0.0);
  for (int s = 0; s < steps; ++s) {
    fractions[static_cast<std::size_t>(s)] = steps == 1 ? 0.0 : static_cast<double>(s) / (steps - 1) - 0.5;
  }

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double len = static_cast<double>(cond.z(y, x)) * tau.value();
      const double dx = len * cond.x(y, x);
      const double dy = len * cond.y(y, x);
      for (int c = 0; c < sharp.channels(); ++c) {
        if (dx == 0.0 && dy == 0.0) {
          out.at(c, y, x) = sharp.at(c, y, x);
          continue;
        }
        auto plane = sharp.channel(c);
        double acc = 0.0;
        for (double f : fractions) acc += sample_bilinear_clamped(plane, h, w, y + f * dy, x + f * dx);
        out.at(c, y, x) = static_cast<float>(acc / steps);
      }
    }
  }
  return out;
}

namespace {

/// Periodic two-octave value noise.
class Texture {
 public:
  Texture(SplitMix64& rng, int channels, double spacing, double lo, double hi)
      : channels_(channels), spacing_(spacing) {
    for (auto* octave : {&coarse_, &fine_}) {
      octave->resize(static_cast<std::size_t>(channels) * kLattice * kLattice);
      for (float& v : *octave) v = static_cast<float>(rng.uniform(lo, hi));
    }
  }

  float sample(int c, double y, double x) const {
    return 0.65f * lookup(coarse_, c, y / spacing_, x / spacing_) +
           0.35f * lookup(fine_, c, y / (spacing_ * 0.4), x / (spacing_ * 0.4));
  }

 private:
  static constexpr int kLattice = 64;

  float lookup(const std::vector<float>& lat, int c, double gy, double gx) const {
    const double fy = std::floor(gy);
    const double fx = std::floor(gx);
    const double ty = gy - fy;
    const double tx = gx - fx;
    auto wrap = [](double v) {
      long i = static_cast<long>(v) % kLattice;
      return static_cast<int>(i < 0 ? i + kLattice : i);
    };
    const int y0 = wrap(fy);
    const int x0 = wrap(fx);
    const int y1 = (y0 + 1) % kLattice;
    const int x1 = (x0 + 1) % kLattice;
    const std::size_t base = static_cast<std::size_t>(c) * kLattice * kLattice;
    auto at = [&](int yy, int xx) { return static_cast<double>(lat[base + static_cast<std::size_t>(yy) * kLattice + xx]); };
    const double top = at(y0, x0) * (1 - tx) + at(y0, x1) * tx;
    const double bot = at(y1, x0) * (1 - tx) + at(y1, x1) * tx;
    return static_cast<float>(top * (1 - ty) + bot * ty);
  }

  int channels_;
  double spacing_;
  std::vector<float> coarse_;
  std::vector<float> fine_;
};

Vec2 step_velocity(const MotionSpec& spec, int step) {
  if (spec.background_schedule.empty()) return spec.background_velocity;
  return spec.background_schedule.at(static_cast<std::size_t>(step));
}

struct Surface {
  int object = -1;  // -1 = background
  double ty = 0.0;  // texture coordinates
  double tx = 0.0;
};

}  // namespace

namespace {

/// Textures and motion of a toy spec; renders any frame independently.
class Scene {
 public:
  explicit Scene(const MotionSpec& spec) : spec_(spec) {
    if (spec.height <= 0 || spec.width <= 0 || spec.frame_count < 1) {
      throw InvalidInput("generate_toy_sequence: invalid dimensions or frame count");
    }
    if (spec.channels != 1 && spec.channels != 3) throw InvalidInput("generate_toy_sequence: channels must be 1 or 3");
    if (!spec.background_schedule.empty() &&
        spec.background_schedule.size() + 1 < static_cast<std::size_t>(spec.frame_count)) {
      throw InvalidInput("generate_toy_sequence: background schedule shorter than frame_count - 1");
    }
    SplitMix64 rng(spec.seed);
    background_.emplace_back(rng, spec.channels, spec.texture_spacing, 0.05, 0.75);
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
      objects_.emplace_back(rng, spec.channels, spec.texture_spacing * 0.6, 0.3, 1.0);
    }
    bg_offset_.resize(static_cast<std::size_t>(spec.frame_count));
    for (int n = 1; n < spec.frame_count; ++n) {
      const Vec2 v = step_velocity(spec, n - 1);
      bg_offset_[n] = {bg_offset_[n - 1].x + v.x, bg_offset_[n - 1].y + v.y};
    }
  }

  Surface surface_at(int n, int y, int x) const {
    for (int k = static_cast<int>(spec_.objects.size()) - 1; k >= 0; --k) {
      const auto& o = spec_.objects[static_cast<std::size_t>(k)];
      const double oy = o.top + n * o.velocity.y;
      const double ox = o.left + n * o.velocity.x;
      if (y >= oy && y < oy + o.size && x >= ox && x < ox + o.size) return Surface{k, y - oy, x - ox};
    }
    const Vec2 off = bg_offset_[static_cast<std::size_t>(n)];
    return Surface{-1, y - off.y, x - off.x};
  }

  Frame render(int n) const {
    Frame frame(spec_.channels, spec_.height, spec_.width);
    for (int y = 0; y < spec_.height; ++y) {
      for (int x = 0; x < spec_.width; ++x) {
        const Surface s = surface_at(n, y, x);
        const Texture& tex = s.object < 0 ? background_.front() : objects_[static_cast<std::size_t>(s.object)];
        for (int c = 0; c < spec_.channels; ++c) frame.at(c, y, x) = tex.sample(c, s.ty, s.tx);
      }
    }
    return frame;
  }

 private:
  const MotionSpec& spec_;
  std::vector<Texture> background_;
  std::vector<Texture> objects_;
  std::vector<Vec2> bg_offset_;
};

}  // namespace

ToySequence generate_toy_sequence(const MotionSpec& spec) {
  const Scene scene(spec);
  const Shape shape{spec.height, spec.width};
  ToySequence seq;
  for (int n = 0; n < spec.frame_count; ++n) {
    FlowField fwd(shape, 0.0f, 0.0f);
    FlowField bwd(shape, 0.0f, 0.0f);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const Surface s = scene.surface_at(n, y, x);
        Vec2 next{};
        Vec2 prev{};
        if (s.object >= 0) {
          next = prev = spec.objects[static_cast<std::size_t>(s.object)].velocity;
        } else {
          if (n + 1 < spec.frame_count) next = step_velocity(spec, n);
          if (n > 0) prev = step_velocity(spec, n - 1);
        }
        fwd.u(y, x) = static_cast<float>(next.x);
        fwd.v(y, x) = static_cast<float>(next.y);
        if (n > 0) {
          bwd.u(y, x) = static_cast<float>(-prev.x);
          bwd.v(y, x) = static_cast<float>(-prev.y);
        }
      }
    }
    seq.frames.push_back(scene.render(n));
    if (n + 1 < spec.frame_count) seq.forward_flows.push_back(std::move(fwd));
    seq.backward_flows.push_back(std::move(bwd));
  }
  return seq;
}

void for_each_toy_frame(const MotionSpec& spec, const std::function<void(int, const Frame&)>& visit) {
  const Scene scene(spec);
  for (int n = 0; n < spec.frame_count; ++n) visit(n, scene.render(n));
}

MotionSpec random_motion_spec(std::uint64_t seed, int height, int width, int frame_count, double max_speed) {
  SplitMix64 rng(seed ^ 0xA5A5A5A5DEADBEEFull);
  MotionSpec spec;
  spec.height = height;
  spec.width = width;
  spec.frame_count = frame_count;
  spec.seed = seed;
  auto random_velocity = [&](double speed_scale) {
    const double angle = rng.uniform(0.0, 2.0 * M_PI);
    const double speed = rng.uniform(0.0, max_speed * speed_scale);
    return Vec2{speed * std::cos(angle), speed * std::sin(angle)};
  };
  spec.background_velocity = random_velocity(0.5);
  const int count = static_cast<int>(rng.next() % 4);
  for (int i = 0; i < count; ++i) {
    MovingObject o;
    o.size = 12 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(std::max(1, std::min(height, width) / 3)));
    o.top = rng.uniform(0.0, std::max(1.0, height - o.size * 1.0));
    o.left = rng.uniform(0.0, std::max(1.0, width - o.size * 1.0));
    o.velocity = random_velocity(1.0);
    spec.objects.push_back(o);
  }
  return spec;
}

void register_flows(InjectedFlowEstimator& table, const std::string& video, const ToySequence& seq) {
  for (std::size_t n = 0; n < seq.forward_flows.size(); ++n) {
    table.insert(video, static_cast<int>(n), static_cast<int>(n + 1), seq.forward_flows[n]);
  }
  for (std::size_t n = 1; n < seq.backward_flows.size(); ++n) {
    table.insert(video, static_cast<int>(n), static_cast<int>(n - 1), seq.backward_flows[n]);
  }
}

TrajectoryMap sequence_trajectory(const SharpSequence& seq, const FlowEstimator& flow) {
  const int n_frames = static_cast<int>(seq.frames.size());
  if (n_frames < 3 || n_frames % 2 == 0) {
    throw InvalidInput("sequence " + seq.id + ": need an odd length >= 3, got " + std::to_string(n_frames));
  }
  std::vector<FlowField> forward;
  std::vector<FlowField> backward;
  const Shape shape = seq.frames.front().shape();
  for (int n = 0; n + 1 < n_frames; ++n) {
    const auto& cur = seq.frames[static_cast<std::size_t>(n)];
    forward.push_back(flow.estimate(cur, seq.frames[static_cast<std::size_t>(n + 1)], {seq.id, n, n + 1, {}}));
    if (n == 0) {
      // The frame before the sequence does not exist: clamp to zero motion.
      backward.emplace_back(shape, 0.0f, 0.0f);
    } else {
      backward.push_back(flow.estimate(cur, seq.frames[static_cast<std::size_t>(n - 1)], {seq.id, n, n - 1, {}}));
    }
  }
  return accumulate_training_trajectory(forward, backward);
}

BmeDataset build_bme_dataset(std::span<const SharpSequence> sequences, const FlowEstimator& flow,
                             const CrfSpec& crf) {
  if (sequences.empty()) throw InvalidInput("build_bme_dataset: no sequences");
  std::vector<TrajectoryMap> trajectories;
  trajectories.reserve(sequences.size());
  double tau = 0.0;
  for (const auto& seq : sequences) {
    try {
      trajectories.push_back(sequence_trajectory(seq, flow));
    } catch (const InvalidInput&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError("build_bme_dataset", "sequence " + seq.id + ": " + e.what());
    }
    tau = std::max(tau, max_trajectory_norm(trajectories.back()));
  }
  // A motionless corpus has no defining pixel; any positive tau yields zero maps.
  const Tau shared(tau > 0.0 ? tau : 1.0);

  BmeDataset out{{}, shared, static_cast<int>(sequences.front().frames.size()), crf};
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const auto& seq = sequences[i];
    out.samples.push_back(TrainingSample{
        seq.id,
        synthesize_blurred_frame(seq.frames, crf),
        seq.frames[static_cast<std::size_t>(center_index(static_cast<int>(seq.frames.size())))],
        magnitude_ground_truth(trajectories[i], shared),
        shared,
    });
  }
  return out;
}

}  // namespace ttdeblur::synth
