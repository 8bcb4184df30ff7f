#include "ttdeblur/toy_corpus.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ttdeblur/error.hpp"
#include "ttdeblur/field_io.hpp"
#include "ttdeblur/hash.hpp"
#include "ttdeblur/image_io.hpp"

namespace fs = std::filesystem;

namespace ttdeblur::synth {

nlohmann::json BlurStyle::to_json() const {
  return {{"direction", {direction.x, direction.y}},
          {"speed_min", speed_min},
          {"speed_max", speed_max},
          {"still_probability", still_probability},
          {"still_speed", still_speed},
          {"objects", objects}};
}

BlurStyle BlurStyle::from_json(const nlohmann::json& j) {
  BlurStyle s;
  if (j.contains("direction")) s.direction = {j.at("direction").at(0).get<double>(), j.at("direction").at(1).get<double>()};
  s.speed_min = j.value("speed_min", s.speed_min);
  s.speed_max = j.value("speed_max", s.speed_max);
  s.still_probability = j.value("still_probability", s.still_probability);
  s.still_speed = j.value("still_speed", s.still_speed);
  s.objects = j.value("objects", s.objects);
  if (std::hypot(s.direction.x, s.direction.y) == 0.0 || s.speed_min < 0.0 || s.speed_max < s.speed_min) {
    throw InvalidInput("blur style: invalid direction or speed range");
  }
  return s;
}

BlurredVideo render_blurred_video(const std::string& id, const BlurStyle& style, int frames, int height, int width,
                                  int exposure, std::uint64_t seed) {
  if (frames < 1 || exposure < 1 || exposure % 2 == 0) {
    throw InvalidInput("render_blurred_video: need frames >= 1 and an odd exposure");
  }
  const double norm = std::hypot(style.direction.x, style.direction.y);
  if (norm == 0.0) throw InvalidInput("render_blurred_video: zero motion direction");
  const Vec2 dir{style.direction.x / norm, style.direction.y / norm};

  SplitMix64 rng(seed ^ 0xB1u);
  BlurredVideo video;
  video.id = id;
  const double sign = (rng.next() & 1u) ? 1.0 : -1.0;
  for (int t = 0; t < frames; ++t) {
    const bool still = rng.uniform() < style.still_probability;
    video.speeds.push_back(still ? style.still_speed : rng.uniform(style.speed_min, style.speed_max));
  }

  MotionSpec spec;
  spec.height = height;
  spec.width = width;
  spec.frame_count = frames * exposure;
  spec.seed = seed;
  for (int s = 0; s + 1 < spec.frame_count; ++s) {
    const double speed = sign * video.speeds[static_cast<std::size_t>(s / exposure)];
    spec.background_schedule.push_back({dir.x * speed, dir.y * speed});
  }
  for (int k = 0; k < style.objects; ++k) {
    MovingObject o;
    o.size = 16 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(std::max(1, std::min(height, width) / 4)));
    o.top = rng.uniform(0.0, std::max(1.0, height - o.size * 1.0));
    o.left = rng.uniform(0.0, std::max(1.0, width - o.size * 1.0));
    const double angle = rng.uniform(0.0, 2.0 * M_PI);
    const double speed = rng.uniform(style.speed_min, style.speed_max);
    o.velocity = {speed * std::cos(angle), speed * std::sin(angle)};
    spec.objects.push_back(o);
  }

  const int center = center_index(exposure);
  std::vector<double> acc;
  for_each_toy_frame(spec, [&](int n, const Frame& f) {
    const int k = n % exposure;
    if (k == 0) acc.assign(f.size(), 0.0);
    auto v = f.values();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
    if (k == center) video.sharp.push_back(f);
    if (k == exposure - 1) {
      Frame b(f.channels(), f.shape());
      auto o = b.values();
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = static_cast<float>(acc[i] / exposure);
      video.blurred.push_back(std::move(b));
    }
  });

  if (style.objects == 0) {
    // Center of exposure t to center of exposure t + 1.
    for (int t = 0; t + 1 < frames; ++t) {
      Vec2 total{};
      for (int s = t * exposure + center; s < (t + 1) * exposure + center; ++s) {
        total.x += spec.background_schedule[static_cast<std::size_t>(s)].x;
        total.y += spec.background_schedule[static_cast<std::size_t>(s)].y;
      }
      video.flows.emplace_back(Shape{height, width}, static_cast<float>(total.x), static_cast<float>(total.y));
    }
  }
  return video;
}

nlohmann::json ToyCorpusOptions::to_json() const {
  return {{"seed", seed},
          {"exposure", exposure},
          {"bme_sequences", bme_sequences},
          {"bme_size", bme_size},
          {"bme_max_speed", bme_max_speed},
          {"source_videos", source_videos},
          {"source_frames", source_frames},
          {"source_size", source_size},
          {"source_style", source_style.to_json()},
          {"target_videos", target_videos},
          {"target_frames", target_frames},
          {"target_size", target_size},
          {"eval_videos", eval_videos},
          {"eval_frames", eval_frames},
          {"target_style", target_style.to_json()}};
}

ToyCorpusOptions ToyCorpusOptions::from_json(const nlohmann::json& j) {
  ToyCorpusOptions o;
  o.seed = j.value("seed", o.seed);
  o.exposure = j.value("exposure", o.exposure);
  o.bme_sequences = j.value("bme_sequences", o.bme_sequences);
  o.bme_size = j.value("bme_size", o.bme_size);
  o.bme_max_speed = j.value("bme_max_speed", o.bme_max_speed);
  o.source_videos = j.value("source_videos", o.source_videos);
  o.source_frames = j.value("source_frames", o.source_frames);
  o.source_size = j.value("source_size", o.source_size);
  if (j.contains("source_style")) o.source_style = BlurStyle::from_json(j.at("source_style"));
  o.target_videos = j.value("target_videos", o.target_videos);
  o.target_frames = j.value("target_frames", o.target_frames);
  o.target_size = j.value("target_size", o.target_size);
  o.eval_videos = j.value("eval_videos", o.eval_videos);
  o.eval_frames = j.value("eval_frames", o.eval_frames);
  if (j.contains("target_style")) o.target_style = BlurStyle::from_json(j.at("target_style"));
  if (o.target_style.objects != 0) throw InvalidInput("toy corpus: target videos need exact flows (objects = 0)");
  return o;
}

namespace {

std::string video_name(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%03d", prefix, i);
  return buf;
}

}  // namespace

ToyCorpus make_toy_corpus(const ToyCorpusOptions& o) {
  ToyCorpus corpus;
  for (int i = 0; i < o.bme_sequences; ++i) {
    const std::string id = video_name("seq", i);
    const auto spec = random_motion_spec(fnv1a(id, o.seed), o.bme_size, o.bme_size, o.exposure, o.bme_max_speed);
    const auto seq = generate_toy_sequence(spec);
    register_flows(corpus.sequence_flows, id, seq);
    corpus.sequences.push_back({id, seq.frames});
  }
  for (int i = 0; i < o.source_videos; ++i) {
    const std::string id = video_name("src", i);
    corpus.source.push_back(render_blurred_video(id, o.source_style, o.source_frames, o.source_size, o.source_size,
                                                 o.exposure, fnv1a(id, o.seed)));
  }
  for (int i = 0; i < o.target_videos; ++i) {
    const std::string id = video_name("tgt", i);
    auto v = render_blurred_video(id, o.target_style, o.target_frames, o.target_size, o.target_size, o.exposure,
                                  fnv1a(id, o.seed));
    for (std::size_t t = 0; t < v.flows.size(); ++t) {
      corpus.target_flows.insert(id, static_cast<int>(t), static_cast<int>(t + 1), v.flows[t]);
    }
    corpus.target.push_back(std::move(v));
  }
  for (int i = 0; i < o.eval_videos; ++i) {
    const std::string id = video_name("val", i);
    corpus.eval.push_back(render_blurred_video(id, o.target_style, o.eval_frames, o.target_size, o.target_size,
                                               o.exposure, fnv1a(id, o.seed)));
  }
  return corpus;
}

namespace {

void write_frames(const fs::path& dir, const std::vector<Frame>& frames) {
  for (std::size_t t = 0; t < frames.size(); ++t) io::write_png(dir / io::frame_filename(static_cast<int>(t)), frames[t]);
}

}  // namespace

void write_toy_corpus(const fs::path& root, const ToyCorpus& corpus, const ToyCorpusOptions& options) {
  for (const auto& seq : corpus.sequences) {
    write_frames(root / "sequences" / seq.id, seq.frames);
    for (int n = 0; n + 1 < static_cast<int>(seq.frames.size()); ++n) {
      for (const auto& [from, to] : {std::pair{n, n + 1}, std::pair{n + 1, n}}) {
        const Frame& a = seq.frames[static_cast<std::size_t>(from)];
        io::write_flo(InjectedFlowEstimator::flow_path(root / "sequence_flows", seq.id, from, to),
                      corpus.sequence_flows.estimate(a, a, {seq.id, from, to, {}}));
      }
    }
  }
  for (const auto& v : corpus.source) {
    write_frames(root / "source" / v.id / "blur", v.blurred);
    write_frames(root / "source" / v.id / "sharp", v.sharp);
  }
  for (const auto& v : corpus.target) {
    write_frames(root / "target" / v.id, v.blurred);
    for (std::size_t t = 0; t < v.flows.size(); ++t) {
      io::write_flo(InjectedFlowEstimator::flow_path(root / "target_flows", v.id, static_cast<int>(t),
                                                     static_cast<int>(t + 1)),
                    v.flows[t]);
    }
  }
  for (const auto& v : corpus.eval) {
    write_frames(root / "eval" / v.id / "blur", v.blurred);
    write_frames(root / "eval" / v.id / "sharp", v.sharp);
  }
  std::ofstream(root / "corpus.json") << options.to_json().dump(2) << "\n";
}

adapt::EvalVideo as_eval_video(const BlurredVideo& v) { return {v.id, v.blurred, v.sharp}; }

}  // namespace ttdeblur::synth
