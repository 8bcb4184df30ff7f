#include "ttdeblur/nn/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ttdeblur/error.hpp"
#include "ttdeblur/field_io.hpp"
#include "ttdeblur/hash.hpp"
#include "ttdeblur/image_io.hpp"
#include "ttdeblur/nn/tensor.hpp"

namespace ttdeblur::pipeline {

using json = nlohmann::json;

namespace {

std::string crop_mode_name(rsdm::CropMode m) {
  return m == rsdm::CropMode::window_search ? "window_search" : "connected_component";
}

rsdm::CropMode parse_crop_mode(const std::string& s) {
  if (s == "window_search") return rsdm::CropMode::window_search;
  if (s == "connected_component") return rsdm::CropMode::connected_component;
  throw InvalidInput("unknown crop_mode '" + s + "' (window_search | connected_component)");
}

std::string neighbor_average_name(NeighborAverage m) {
  return m == NeighborAverage::elementwise ? "elementwise" : "scalar";
}

NeighborAverage parse_neighbor_average(const std::string& s) {
  if (s == "elementwise") return NeighborAverage::elementwise;
  if (s == "scalar") return NeighborAverage::scalar;
  throw InvalidInput("unknown neighbor_average '" + s + "' (elementwise | scalar)");
}

json flow_json(const FlowSpec& f) {
  return {{"kind", f.kind}, {"root", f.root.string()}, {"checkpoint", f.checkpoint.string()}, {"raft", f.raft.to_json()}};
}

FlowSpec parse_flow(const json& j) {
  FlowSpec f;
  f.kind = j.value("kind", f.kind);
  f.root = j.value("root", std::string());
  f.checkpoint = j.value("checkpoint", std::string());
  if (j.contains("raft")) f.raft = nn::RaftOptions::from_json(j.at("raft"));
  if (f.kind != "injected" && f.kind != "raft") throw InvalidInput("unknown flow kind '" + f.kind + "' (injected | raft)");
  return f;
}

json blurring_json(const BlurringSpec& b) {
  return {{"kind", b.kind},
          {"steps", b.steps},
          {"tau", b.tau ? json(*b.tau) : json(nullptr)},
          {"checkpoint", b.checkpoint.string()},
          {"sampler", b.sampler.to_json()}};
}

BlurringSpec parse_blurring(const json& j) {
  BlurringSpec b;
  b.kind = j.value("kind", b.kind);
  b.steps = j.value("steps", b.steps);
  if (j.contains("tau") && !j.at("tau").is_null()) b.tau = j.at("tau").get<double>();
  b.checkpoint = j.value("checkpoint", std::string());
  if (j.contains("sampler")) b.sampler = nn::DiffusionSamplerConfig::from_json(j.at("sampler"));
  if (b.kind != "oracle" && b.kind != "idblau") throw InvalidInput("unknown blurring kind '" + b.kind + "' (oracle | idblau)");
  if (b.steps < 1) throw InvalidInput("blurring.steps must be >= 1");
  if (b.tau && !(*b.tau > 0.0)) throw InvalidInput("blurring.tau must be positive");
  return b;
}

/// Every key of `user` must exist in `defaults`, recursively through objects.
void check_keys(const json& user, const json& defaults, const std::string& prefix) {
  if (!user.is_object()) return;
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!defaults.contains(key)) throw InvalidInput("unknown config key '" + path + "'");
    if (value.is_object() && defaults.at(key).is_object()) check_keys(value, defaults.at(key), path);
  }
}

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

void set_path(json& root, const std::string& dotted, json value) {
  json* node = &root;
  std::stringstream ss(dotted);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw InvalidInput("malformed override key '" + dotted + "'");
    parts.push_back(part);
  }
  if (parts.empty()) throw InvalidInput("malformed override key '" + dotted + "'");
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    json& next = (*node)[parts[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw InvalidInput("override '" + dotted + "' descends into a non-object");
    node = &next;
  }
  (*node)[parts.back()] = std::move(value);
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << "\n";
  if (!out) throw LoadError("cannot write " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const std::exception& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string hash_json(const json& j) { return hex64(fnv1a(j.dump())); }

/// Content hash of every regular file below `root`, keyed by relative path.
std::string hash_tree(const fs::path& root, const std::vector<std::string>& skip = {}) {
  if (!fs::exists(root)) return "missing";
  if (fs::is_regular_file(root)) return hex64(hash_file(root));
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root);
    if (std::find(skip.begin(), skip.end(), rel.begin()->string()) != skip.end()) continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = kFnvOffset;
  for (const auto& rel : files) {
    h = fnv1a(rel.generic_string(), h);
    h = hash_file(root / rel, h);
  }
  return hex64(h);
}

/// Runs `fn`, re-raising failures as StageError(stage, ..., cause).
template <typename Fn>
auto in_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw StageError(stage, e.what(), "invalid_input");
  } catch (const OutOfRange& e) {
    throw StageError(stage, e.what(), "out_of_range");
  } catch (const LoadError& e) {
    throw StageError(stage, e.what(), "load_error");
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), "error");
  }
}

void require_paths(const std::string& stage, const std::vector<std::pair<std::string, fs::path>>& required) {
  std::vector<std::string> missing;
  for (const auto& [label, path] : required) {
    if (path.empty()) {
      missing.push_back(label + " (not configured)");
    } else if (!fs::exists(path)) {
      missing.push_back(label + " = " + path.string());
    }
  }
  if (missing.empty()) return;
  std::string msg = "missing inputs:";
  for (const auto& m : missing) msg += " [" + m + "]";
  throw StageError(stage, msg, "load_error");
}

void require_flow_inputs(const std::string& stage, const FlowSpec& f, const std::string& label) {
  if (f.kind == "injected") {
    require_paths(stage, {{label + ".root", f.root}});
  } else {
    require_paths(stage, {{label + ".checkpoint", f.checkpoint}});
  }
}

std::unique_ptr<FlowEstimator> make_flow(const FlowSpec& f) {
  if (f.kind == "injected") return std::make_unique<InjectedFlowEstimator>(f.root);
  return nn::raft_adapter_load(f.checkpoint, f.raft);
}

std::string flow_key(const FlowSpec& f) {
  return hash_json({flow_json(f), f.kind == "injected" ? hash_tree(f.root) : hash_tree(f.checkpoint)});
}

std::unique_ptr<BlurringModel> make_blurring(const BlurringSpec& b, Tau bme_tau) {
  if (b.kind == "oracle") return oracle_backend(b.tau ? Tau(*b.tau) : bme_tau, b.steps);
  return nn::idblau_adapter_load(b.checkpoint, b.sampler);
}

std::string frame_stem(int t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "t%06d", t);
  return buf;
}

json window_json(const Window& w) {
  return {{"top", w.top}, {"left", w.left}, {"height", w.height}, {"width", w.width}};
}

Window parse_window(const json& j) {
  return {j.at("top").get<int>(), j.at("left").get<int>(), j.at("height").get<int>(), j.at("width").get<int>()};
}

json artifact_hashes(const fs::path& root) {
  json out = json::object();
  if (!fs::exists(root)) return out;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root);
    const std::string first = rel.begin()->string();
    if (first == "cache" || first == "cells" || first == "shared") continue;
    const std::string name = rel.filename().string();
    if (name.rfind("report.", 0) == 0 || name.rfind("summary.", 0) == 0) continue;
    if (rel.extension() == ".pt") continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  for (const auto& rel : files) out[rel.generic_string()] = hex64(hash_file(root / rel));
  return out;
}

}  // namespace

nlohmann::json PipelineConfig::to_json() const {
  json bme_json = bme.to_json();
  bme_json["max_steps"] = bme_max_steps;
  std::vector<std::string> pm, cm;
  for (auto m : ablation.patch_modes) pm.push_back(adapt::to_string(m));
  for (auto m : ablation.condition_modes) cm.push_back(adapt::to_string(m));
  return {
      {"paths",
       {{"sequences", paths.sequences.string()},
        {"dataset", paths.dataset.string()},
        {"bme_checkpoint", paths.bme_checkpoint.string()},
        {"deblur_checkpoint", paths.deblur_checkpoint.string()},
        {"source_videos", paths.source_videos.string()},
        {"target_videos", paths.target_videos.string()},
        {"eval_videos", paths.eval_videos.string()},
        {"adapted_checkpoint", paths.adapted_checkpoint.string()},
        {"output", paths.output.string()}}},
      {"r", r},
      {"patch", patch},
      {"stride", stride},
      {"epochs", epochs},
      {"batch_size", batch_size},
      {"seed", seed},
      {"threads", threads},
      {"patch_mode", adapt::to_string(patch_mode)},
      {"condition_mode", adapt::to_string(condition_mode)},
      {"ratio_range", ratio_range ? json{ratio_range->first, ratio_range->second} : json(nullptr)},
      {"crop_mode", crop_mode_name(crop_mode)},
      {"neighbor_average", neighbor_average_name(neighbor_average)},
      {"random_condition_block", random_condition_block},
      {"crf", {{"kind", crf.name()}, {"gamma", crf.gamma_value}}},
      {"sequence_flow", flow_json(sequence_flow)},
      {"flow", flow_json(flow)},
      {"blurring", blurring_json(blurring)},
      {"bme", bme_json},
      {"deblur",
       {{"model", deblur.to_json()},
        {"source_training",
         {{"steps", source_training.steps},
          {"batch_size", source_training.batch_size},
          {"crop", source_training.crop},
          {"lr", source_training.lr}}}}},
      {"ablation", {{"patch_modes", pm}, {"condition_modes", cm}, {"ratios", ablation.ratios}}},
      {"toy", toy.to_json()},
  };
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig c;
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    auto get = [&](const char* key, fs::path& dst) { dst = p.value(key, dst.string()); };
    get("sequences", c.paths.sequences);
    get("dataset", c.paths.dataset);
    get("bme_checkpoint", c.paths.bme_checkpoint);
    get("deblur_checkpoint", c.paths.deblur_checkpoint);
    get("source_videos", c.paths.source_videos);
    get("target_videos", c.paths.target_videos);
    get("eval_videos", c.paths.eval_videos);
    get("adapted_checkpoint", c.paths.adapted_checkpoint);
    get("output", c.paths.output);
  }
  c.r = j.value("r", c.r);
  c.patch = j.value("patch", c.patch);
  c.stride = j.value("stride", c.stride);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  c.patch_mode = adapt::parse_patch_mode(j.value("patch_mode", adapt::to_string(c.patch_mode)));
  c.condition_mode = adapt::parse_condition_mode(j.value("condition_mode", adapt::to_string(c.condition_mode)));
  if (j.contains("ratio_range") && !j.at("ratio_range").is_null()) {
    const auto& rr = j.at("ratio_range");
    if (!rr.is_array() || rr.size() != 2) throw InvalidInput("ratio_range must be [lo, hi]");
    c.ratio_range = std::pair{rr.at(0).get<double>(), rr.at(1).get<double>()};
    if (!(c.ratio_range->first >= 0.0 && c.ratio_range->first < c.ratio_range->second &&
          c.ratio_range->second <= 100.0)) {
      throw InvalidInput("ratio_range needs 0 <= lo < hi <= 100");
    }
  }
  c.crop_mode = parse_crop_mode(j.value("crop_mode", crop_mode_name(c.crop_mode)));
  c.neighbor_average = parse_neighbor_average(j.value("neighbor_average", neighbor_average_name(c.neighbor_average)));
  c.random_condition_block = j.value("random_condition_block", c.random_condition_block);
  if (j.contains("crf")) {
    c.crf = synth::CrfSpec::parse(j.at("crf").value("kind", std::string("identity")), j.at("crf").value("gamma", 2.2));
  }
  if (j.contains("sequence_flow")) c.sequence_flow = parse_flow(j.at("sequence_flow"));
  if (j.contains("flow")) c.flow = parse_flow(j.at("flow"));
  if (j.contains("blurring")) c.blurring = parse_blurring(j.at("blurring"));
  if (j.contains("bme")) {
    c.bme = nn::BMEConfig::from_json(j.at("bme"));
    c.bme_max_steps = j.at("bme").value("max_steps", 0);
    if (c.bme_max_steps < 0) throw InvalidInput("bme.max_steps must be >= 0");
  }
  if (j.contains("deblur")) {
    const auto& d = j.at("deblur");
    if (d.contains("model")) c.deblur = nn::ToyDeblurConfig::from_json(d.at("model"));
    if (d.contains("source_training")) {
      const auto& s = d.at("source_training");
      c.source_training.steps = s.value("steps", c.source_training.steps);
      c.source_training.batch_size = s.value("batch_size", c.source_training.batch_size);
      c.source_training.crop = s.value("crop", c.source_training.crop);
      c.source_training.lr = s.value("lr", c.source_training.lr);
    }
  }
  if (j.contains("ablation")) {
    const auto& a = j.at("ablation");
    if (a.contains("patch_modes")) {
      c.ablation.patch_modes.clear();
      for (const auto& m : a.at("patch_modes")) c.ablation.patch_modes.push_back(adapt::parse_patch_mode(m.get<std::string>()));
    }
    if (a.contains("condition_modes")) {
      c.ablation.condition_modes.clear();
      for (const auto& m : a.at("condition_modes")) {
        c.ablation.condition_modes.push_back(adapt::parse_condition_mode(m.get<std::string>()));
      }
    }
    if (a.contains("ratios")) c.ablation.ratios = a.at("ratios").get<std::vector<double>>();
  }
  if (j.contains("toy")) c.toy = synth::ToyCorpusOptions::from_json(j.at("toy"));

  if (!(c.r > 0.0 && c.r <= 100.0)) throw InvalidInput("r must be in (0, 100]");
  for (double r : c.ablation.ratios) {
    if (!(r > 0.0 && r <= 100.0)) throw InvalidInput("ablation.ratios entries must be in (0, 100]");
  }
  if (c.patch < 8 || c.stride < 1) throw InvalidInput("patch must be >= 8 and stride >= 1");
  if (c.epochs < 0 || c.batch_size < 1) throw InvalidInput("epochs must be >= 0 and batch_size >= 1");
  if (c.threads < 1) throw InvalidInput("threads must be >= 1");
  if (c.random_condition_block < 1) throw InvalidInput("random_condition_block must be >= 1");
  if (c.ablation.patch_modes.empty() || c.ablation.condition_modes.empty()) {
    throw InvalidInput("ablation grid needs at least one patch mode and one condition mode");
  }
  return c;
}

PipelineConfig load_config(const fs::path& file, const std::vector<std::string>& overrides) {
  json user = json::object();
  if (!file.empty()) {
    user = read_json(file);
    if (!user.is_object()) throw InvalidInput("config " + file.string() + " must hold a JSON object");
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidInput("override '" + o + "' is not key=value");
    set_path(user, o.substr(0, eq), parse_value(o.substr(eq + 1)));
  }
  json defaults = PipelineConfig{}.to_json();
  if (user.contains("bme") && user.at("bme").is_object() && user.at("bme").value("toy_mode", false)) {
    defaults["bme"] = nn::BMEConfig::toy().to_json();
    defaults["bme"]["max_steps"] = 0;
  }
  check_keys(user, defaults, "");
  defaults.merge_patch(user);
  return PipelineConfig::from_json(defaults);
}

nlohmann::json toy_config_json(const fs::path& root) {
  const fs::path r = fs::absolute(root).lexically_normal();
  json bme = nn::BMEConfig::toy().to_json();
  bme["max_steps"] = 200;
  return {{"paths",
           {{"sequences", (r / "sequences").string()},
            {"dataset", (r / "dataset").string()},
            {"bme_checkpoint", (r / "models" / "bme.pt").string()},
            {"deblur_checkpoint", (r / "models" / "deblur.pt").string()},
            {"source_videos", (r / "source").string()},
            {"target_videos", (r / "target").string()},
            {"eval_videos", (r / "eval").string()},
            {"output", (r / "runs" / "adapt").string()}}},
          {"sequence_flow", {{"kind", "injected"}, {"root", (r / "sequence_flows").string()}}},
          {"flow", {{"kind", "injected"}, {"root", (r / "target_flows").string()}}},
          {"blurring", {{"kind", "oracle"}}},
          {"bme", bme},
          {"deblur", {{"source_training", {{"steps", 400}}}}}};
}

bool StageCache::hit(const std::string& stage, const std::string& key) const {
  const auto entry = load(stage);
  if (!entry || entry->key != key) return false;
  for (const auto& [rel, hash] : entry->artifacts) {
    const fs::path p = root_ / rel;
    if (!fs::exists(p) || hex64(hash_file(p)) != hash) return false;
  }
  return true;
}

CacheEntry StageCache::record(const std::string& stage, const std::string& key,
                              const std::vector<fs::path>& artifacts) const {
  CacheEntry entry{stage, key, {}};
  for (const auto& a : artifacts) entry.artifacts[fs::relative(a, root_).generic_string()] = hex64(hash_file(a));
  json arts = json::object();
  for (const auto& [rel, hash] : entry.artifacts) arts[rel] = hash;
  write_json(root_ / "cache" / (stage + ".json"), {{"stage", stage}, {"key", key}, {"artifacts", arts}});
  return entry;
}

std::optional<CacheEntry> StageCache::load(const std::string& stage) const {
  const fs::path p = root_ / "cache" / (stage + ".json");
  if (!fs::exists(p)) return std::nullopt;
  try {
    const json j = read_json(p);
    CacheEntry e{j.at("stage").get<std::string>(), j.at("key").get<std::string>(), {}};
    for (const auto& [rel, hash] : j.at("artifacts").items()) e.artifacts[rel] = hash.get<std::string>();
    return e;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<adapt::EvalVideo> read_paired_videos(const fs::path& root) {
  std::vector<adapt::EvalVideo> videos;
  for (const auto& id : io::list_videos(root)) {
    adapt::EvalVideo v{id, io::read_video(root / id / "blur"), io::read_video(root / id / "sharp")};
    if (v.blurred.empty() || v.blurred.size() != v.sharp.size()) {
      throw InvalidInput("video " + (root / id).string() + ": blur/sharp frame counts differ or are empty");
    }
    videos.push_back(std::move(v));
  }
  if (videos.empty()) throw InvalidInput("no paired videos under " + root.string());
  return videos;
}

std::vector<adapt::VideoFrames> read_videos(const fs::path& root) {
  std::vector<adapt::VideoFrames> videos;
  for (const auto& id : io::list_videos(root)) {
    auto frames = io::read_video(root / id);
    if (frames.empty()) throw InvalidInput("video " + (root / id).string() + " has no frames");
    videos.push_back({id, std::move(frames)});
  }
  if (videos.empty()) throw InvalidInput("no videos under " + root.string());
  return videos;
}

nlohmann::json metrics_json(const adapt::MetricsSummary& m) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json("inf"); };
  json videos = json::array();
  for (const auto& v : m.videos) {
    videos.push_back({{"id", v.id}, {"psnr", num(v.psnr)}, {"ssim", v.ssim}, {"frames", v.frames}});
  }
  return {{"psnr", num(m.psnr)}, {"ssim", m.ssim}, {"videos", videos}};
}

namespace {

void apply_threads(const PipelineConfig& config) { torch::set_num_threads(config.threads); }

// ---------------------------------------------------------------- adapt

struct AdaptContext {
  std::vector<adapt::VideoFrames> videos;
  std::string videos_hash;
  std::optional<nn::BMEModel> bme;
  std::string bme_hash;
  std::optional<nn::ToyDeblurModel> base;
  std::string base_hash;
  std::vector<adapt::EvalVideo> eval;
  std::optional<adapt::MetricsSummary> baseline;
};

AdaptContext load_adapt_inputs(const PipelineConfig& config, bool need_eval) {
  std::vector<std::pair<std::string, fs::path>> required = {{"paths.target_videos", config.paths.target_videos},
                                                            {"paths.bme_checkpoint", config.paths.bme_checkpoint},
                                                            {"paths.deblur_checkpoint", config.paths.deblur_checkpoint}};
  if (need_eval && !config.paths.eval_videos.empty()) required.push_back({"paths.eval_videos", config.paths.eval_videos});
  require_paths("adapt", required);
  require_flow_inputs("adapt", config.flow, "flow");
  if (config.blurring.kind == "idblau") require_paths("adapt", {{"blurring.checkpoint", config.blurring.checkpoint}});

  AdaptContext ctx;
  in_stage("adapt/load", [&] {
    ctx.videos = read_videos(config.paths.target_videos);
    ctx.videos_hash = hash_tree(config.paths.target_videos);
    ctx.bme.emplace(nn::BMEModel::load(config.paths.bme_checkpoint));
    ctx.bme_hash = hash_tree(config.paths.bme_checkpoint);
    ctx.base.emplace(nn::ToyDeblurModel::load(config.paths.deblur_checkpoint));
    ctx.base_hash = hex64(ctx.base->parameter_checksum());
    if (need_eval && !config.paths.eval_videos.empty()) ctx.eval = read_paired_videos(config.paths.eval_videos);
  });
  if (!ctx.eval.empty()) {
    ctx.baseline = in_stage("adapt/baseline", [&] { return adapt::evaluate(*ctx.base, ctx.eval); });
  }
  return ctx;
}

/// Magnitude maps of every target frame, stored as PLN1 under `dir`.
std::string magnitudes_stage(AdaptContext& ctx, const fs::path& dir, std::vector<StageOutcome>& outcomes,
                             std::map<std::string, std::vector<BlurMagnitudeMap>>& out) {
  return in_stage("magnitudes", [&] {
    const std::string key = hash_json({"magnitudes", ctx.bme_hash, ctx.videos_hash});
    StageCache cache(dir);
    const bool cached = cache.hit("magnitudes", key);
    std::vector<fs::path> written;
    for (const auto& v : ctx.videos) {
      auto& maps = out[v.id];
      maps.clear();
      for (std::size_t t = 0; t < v.frames.size(); ++t) {
        const fs::path p = dir / "magnitudes" / v.id / (frame_stem(static_cast<int>(t)) + ".pln");
        if (!cached) {
          io::write_plane(p, ctx.bme->estimate(v.frames[t]).m);
          written.push_back(p);
        }
        maps.push_back(BlurMagnitudeMap(io::read_plane(p)));
      }
    }
    if (!cached) cache.record("magnitudes", key, written);
    outcomes.push_back({"magnitudes", cached, key});
    return key;
  });
}

int random_selection_count(const PipelineConfig& config, int frames) {
  const int eligible = std::max(0, frames - 2 * rsdm::kTemporalRadius);
  int count = rsdm::selection_count(config.r, frames);
  if (config.ratio_range) {
    count = rsdm::selection_count(config.ratio_range->second, eligible) -
            rsdm::selection_count(config.ratio_range->first, eligible);
  }
  return std::min(count, eligible);
}

json selection_json(const rsdm::SelectionReport& rep, const PipelineConfig& config, const std::string& id) {
  json sel = json::array();
  for (const auto& s : rep.selections) {
    sel.push_back({{"frame", s.frame}, {"window", window_json(s.window)}, {"score", s.score}});
  }
  return {{"video", id},
          {"r", config.r},
          {"ratio_range", config.ratio_range ? json{config.ratio_range->first, config.ratio_range->second} : json(nullptr)},
          {"stride", config.stride},
          {"patch", config.patch},
          {"patch_mode", adapt::to_string(config.patch_mode)},
          {"eta_implied", rep.eta_implied},
          {"selections", sel},
          {"ineligible_frames", rep.ineligible_frames},
          {"warnings", rep.warnings}};
}

std::vector<rsdm::PatchSelection> read_selections(const fs::path& path) {
  const json j = read_json(path);
  std::vector<rsdm::PatchSelection> out;
  for (const auto& s : j.at("selections")) {
    out.push_back({j.at("video").get<std::string>(), s.at("frame").get<int>(), parse_window(s.at("window")),
                   s.at("score").get<double>(), j.at("eta_implied").get<double>()});
  }
  return out;
}

struct AdaptOutcome {
  json report;
  std::optional<adapt::MetricsSummary> adapted;
};

AdaptOutcome run_adaptation(AdaptContext& ctx, const PipelineConfig& config, const fs::path& out,
                            const fs::path& shared, std::vector<StageOutcome>& outcomes) {
  fs::create_directories(out);
  StageCache cache(out);

  std::map<std::string, std::vector<BlurMagnitudeMap>> mags;
  std::string upstream = "no-magnitudes";
  if (config.patch_mode == adapt::PatchMode::rsdm) upstream = magnitudes_stage(ctx, shared, outcomes, mags);

  // Selections.
  std::vector<rsdm::PatchSelection> selections;
  const std::string select_key = in_stage("select", [&] {
    json frame_counts = json::array();
    for (const auto& v : ctx.videos) frame_counts.push_back({v.id, v.frames.size(), v.frames.front().height(), v.frames.front().width()});
    const std::string key = hash_json({"select", upstream, adapt::to_string(config.patch_mode), config.r,
                                       config.ratio_range ? json{config.ratio_range->first, config.ratio_range->second}
                                                          : json(nullptr),
                                       config.patch, config.stride, crop_mode_name(config.crop_mode), config.seed,
                                       frame_counts});
    const bool cached = cache.hit("select", key);
    std::vector<fs::path> written;
    for (const auto& v : ctx.videos) {
      const fs::path p = out / "selections" / (v.id + ".json");
      if (!cached) {
        rsdm::SelectionReport rep;
        if (config.patch_mode == adapt::PatchMode::rsdm) {
          rsdm::SelectionOptions opt;
          opt.ratio = config.r;
          opt.patch = config.patch;
          opt.stride = config.stride;
          opt.ratio_range = config.ratio_range;
          opt.crop_mode = config.crop_mode;
          rep = rsdm::select_pseudo_sharp(v.id, mags.at(v.id), opt);
        } else {
          const int frames = static_cast<int>(v.frames.size());
          rep.selections = adapt::random_selections(v.id, frames, v.frames.front().shape(),
                                                    random_selection_count(config, frames), config.patch,
                                                    fnv1a(v.id, config.seed));
        }
        write_json(p, selection_json(rep, config, v.id));
        written.push_back(p);
      }
      auto s = read_selections(p);
      selections.insert(selections.end(), s.begin(), s.end());
    }
    if (!cached) cache.record("select", key, written);
    outcomes.push_back({"select", cached, key});
    return key;
  });
  if (selections.empty()) throw StageError("select", "no pseudo-sharp patches selected in any video", "invalid_input");

  // Conditions, reblurring and pair files.
  std::vector<adapt::PseudoPair> pairs;
  const std::string pairs_key = in_stage("pairs", [&] {
    const std::string backend_hash =
        config.blurring.kind == "idblau" ? hash_tree(config.blurring.checkpoint) : std::string("oracle");
    const std::string key = hash_json({"pairs", select_key, ctx.videos_hash, adapt::to_string(config.condition_mode),
                                       flow_key(config.flow), blurring_json(config.blurring), backend_hash,
                                       ctx.bme_hash, neighbor_average_name(config.neighbor_average),
                                       config.random_condition_block, config.seed});
    const fs::path index = out / "pairs.json";
    const bool cached = cache.hit("pairs", key);
    if (!cached) {
      for (const char* sub : {"patches", "pairs", "conditions"}) fs::remove_all(out / sub);
      const auto flow = make_flow(config.flow);
      const auto backend = make_blurring(config.blurring, ctx.bme->tau());
      adapt::ConditionSource source;
      switch (config.condition_mode) {
        case adapt::ConditionMode::dbcgm: {
          dbcgm::ConditionOptions opt;
          opt.neighbor_average = config.neighbor_average;
          source = adapt::dbcgm_conditions(*flow, *ctx.bme, opt);
          break;
        }
        case adapt::ConditionMode::flow:
          source = adapt::flow_conditions(*flow, ctx.bme->tau());
          break;
        case adapt::ConditionMode::random:
          source = adapt::random_conditions(config.seed, config.random_condition_block);
          break;
      }
      auto ds = adapt::build_pseudo_dataset(selections, ctx.videos, source, *backend,
                                            adapt::to_string(config.condition_mode), config.seed);
      auto written = adapt::write_pairs(out, ds.pairs);
      json list = json::array();
      for (const auto& p : ds.pairs) {
        const auto& pr = p.provenance;
        list.push_back({{"video", pr.video_id},
                        {"frame", pr.frame},
                        {"window", window_json(pr.window)},
                        {"backend", pr.backend},
                        {"seed", pr.seed},
                        {"condition_mode", pr.condition_mode}});
      }
      write_json(index, {{"pairs", list}, {"failures", ds.failures}});
      written.push_back(index);
      cache.record("pairs", key, written);
    }
    const json stored = read_json(index);
    for (const auto& item : stored.at("pairs")) {
      adapt::PseudoPair p;
      p.provenance = {item.at("video").get<std::string>(), item.at("frame").get<int>(), parse_window(item.at("window")),
                      item.at("backend").get<std::string>(), item.at("seed").get<std::uint64_t>(),
                      item.at("condition_mode").get<std::string>()};
      const std::string stem = "t" + std::to_string(p.provenance.frame);
      p.sharp = io::read_png(out / "patches" / p.provenance.video_id / (stem + ".png"));
      p.blurred = io::read_png(out / "pairs" / p.provenance.video_id / (stem + "_blurred.png"));
      p.condition = io::read_bcf(out / "conditions" / p.provenance.video_id / (stem + ".bcf"));
      pairs.push_back(std::move(p));
    }
    outcomes.push_back({"pairs", cached, key});
    return key;
  });
  if (pairs.empty()) throw StageError("pairs", "no pseudo pairs survived", "invalid_input");

  // Fine-tuning.
  std::unique_ptr<adapt::DeblurringModel> adapted;
  json finetune_log;
  in_stage("finetune", [&] {
    const std::string key = hash_json({"finetune", pairs_key, ctx.base_hash, config.deblur.to_json(), config.epochs,
                                       config.batch_size, config.seed});
    const fs::path ckpt = out / "adapted.pt";
    const fs::path log_path = out / "finetune_log.json";
    const bool cached = cache.hit("finetune", key);
    if (cached) {
      adapted = std::make_unique<nn::ToyDeblurModel>(nn::ToyDeblurModel::load(ckpt));
      finetune_log = read_json(log_path);
    } else {
      const auto before = adapt::checksum(pairs);
      adapted = ctx.base->clone();
      const auto log = adapt::finetune(*adapted, pairs, {config.epochs, config.batch_size, config.seed});
      if (adapt::checksum(pairs) != before) throw StageError("finetune", "pseudo pairs were modified", "error");
      dynamic_cast<nn::ToyDeblurModel&>(*adapted).save(ckpt);
      finetune_log = {{"epoch_loss", log.epoch_loss},
                      {"epochs", config.epochs},
                      {"pairs", pairs.size()},
                      {"parameter_checksum", hex64(adapted->parameter_checksum())}};
      write_json(log_path, finetune_log);
      cache.record("finetune", key, {ckpt, log_path});
    }
    outcomes.push_back({"finetune", cached, key});
  });

  AdaptOutcome result;
  json report = {{"dataset", config.paths.eval_videos.empty() ? std::string() : config.paths.eval_videos.filename().string()},
                 {"model", ctx.base->name()},
                 {"patch_mode", adapt::to_string(config.patch_mode)},
                 {"condition_mode", adapt::to_string(config.condition_mode)},
                 {"r", config.r},
                 {"backend", config.blurring.kind},
                 {"pairs", pairs.size()},
                 {"finetune", finetune_log}};
  if (ctx.baseline) {
    result.adapted = in_stage("evaluate", [&] { return adapt::evaluate(*adapted, ctx.eval); });
    report["baseline"] = metrics_json(*ctx.baseline);
    report["adapted"] = metrics_json(*result.adapted);
    report["delta"] = {{"psnr", result.adapted->psnr - ctx.baseline->psnr}, {"ssim", result.adapted->ssim - ctx.baseline->ssim}};
    const std::string table = adapt::format_table(
        {report["dataset"].get<std::string>(), ctx.base->name(), *ctx.baseline, *result.adapted});
    write_text(out / "report.txt", table);
  } else {
    report["baseline"] = nullptr;
    report["adapted"] = nullptr;
    report["delta"] = nullptr;
  }
  report["config"] = config.to_json();
  report["artifacts"] = artifact_hashes(out);
  report["artifacts"]["adapted.pt#parameters"] = finetune_log.at("parameter_checksum");
  if (config.patch_mode == adapt::PatchMode::rsdm) report["artifacts"]["magnitudes#tree"] = hash_tree(shared / "magnitudes");
  write_json(out / "report.json", report);
  result.report = report;
  return result;
}

std::string cell_name(adapt::PatchMode p, adapt::ConditionMode c, std::optional<double> r) {
  std::string name = adapt::to_string(p) + "-" + adapt::to_string(c);
  if (r) {
    std::ostringstream ss;
    ss << "-r" << *r;
    name += ss.str();
  }
  return name;
}

}  // namespace

CommandResult cmd_make_toy(const PipelineConfig& config) {
  apply_threads(config);
  if (config.paths.output.empty()) throw StageError("make-toy", "paths.output (--out) is required", "invalid_input");
  const fs::path root = config.paths.output;
  return in_stage("make-toy", [&] {
    const auto corpus = synth::make_toy_corpus(config.toy);
    synth::write_toy_corpus(root, corpus, config.toy);
    json cfg = toy_config_json(root);
    cfg["toy"] = config.toy.to_json();
    cfg["seed"] = config.seed;
    write_json(root / "config.json", cfg);
    CommandResult r;
    r.stages.push_back({"make-toy", false, hash_json(config.toy.to_json())});
    r.summary = {{"root", root.string()},
                 {"config", (root / "config.json").string()},
                 {"sequences", corpus.sequences.size()},
                 {"source_videos", corpus.source.size()},
                 {"target_videos", corpus.target.size()},
                 {"eval_videos", corpus.eval.size()}};
    return r;
  });
}

CommandResult cmd_prepare_data(const PipelineConfig& config) {
  apply_threads(config);
  require_paths("prepare-data", {{"paths.sequences", config.paths.sequences}});
  if (config.paths.dataset.empty()) throw StageError("prepare-data", "paths.dataset is required", "invalid_input");
  require_flow_inputs("prepare-data", config.sequence_flow, "sequence_flow");
  return in_stage("prepare-data", [&] {
    const fs::path out = config.paths.dataset;
    const auto ids = io::list_videos(config.paths.sequences);
    if (ids.empty()) throw InvalidInput("no sequence directories under " + config.paths.sequences.string());
    const std::string key = hash_json({"prepare-data", hash_tree(config.paths.sequences), flow_key(config.sequence_flow),
                                       config.crf.name(), config.crf.gamma_value});
    StageCache cache(out);
    CommandResult r;
    const fs::path meta_path = out / "dataset_meta.json";
    if (cache.hit("prepare-data", key)) {
      r.stages.push_back({"prepare-data", true, key});
      r.summary = read_json(meta_path);
      return r;
    }
    std::vector<synth::SharpSequence> sequences;
    for (const auto& id : ids) {
      auto frames = io::read_video(config.paths.sequences / id);
      if (frames.empty()) throw InvalidInput("sequence " + (config.paths.sequences / id).string() + " has no frames");
      sequences.push_back({id, std::move(frames)});
    }
    const auto flow = make_flow(config.sequence_flow);
    const auto ds = synth::build_bme_dataset(sequences, *flow, config.crf);
    std::vector<fs::path> written;
    json samples = json::array();
    for (const auto& s : ds.samples) {
      const fs::path dir = out / "samples" / s.sequence_id;
      io::write_png(dir / "blurred.png", s.blurred);
      io::write_png(dir / "sharp.png", s.sharp);
      io::write_plane(dir / "magnitude.pln", s.magnitude_gt.m);
      written.insert(written.end(), {dir / "blurred.png", dir / "sharp.png", dir / "magnitude.pln"});
      samples.push_back(s.sequence_id);
    }
    const json meta = {{"tau", ds.tau.value()},
                       {"exposure_frames", ds.exposure_frames},
                       {"crf", {{"kind", ds.crf.name()}, {"gamma", ds.crf.gamma_value}}},
                       {"count", ds.samples.size()},
                       {"samples", samples}};
    write_json(meta_path, meta);
    written.push_back(meta_path);
    cache.record("prepare-data", key, written);
    r.stages.push_back({"prepare-data", false, key});
    r.summary = meta;
    return r;
  });
}

CommandResult cmd_train_bme(const PipelineConfig& config) {
  apply_threads(config);
  require_paths("train-bme", {{"paths.dataset", config.paths.dataset}});
  if (config.paths.bme_checkpoint.empty()) throw StageError("train-bme", "paths.bme_checkpoint is required", "invalid_input");
  return in_stage("train-bme", [&] {
    const fs::path data = config.paths.dataset;
    const json meta = read_json(data / "dataset_meta.json");
    const fs::path ckpt = config.paths.bme_checkpoint;
    const fs::path dir = ckpt.has_parent_path() ? ckpt.parent_path() : fs::path(".");
    const fs::path log_path = dir / (ckpt.stem().string() + "_log.json");
    const std::string key = hash_json({"train-bme", hash_tree(data, {"cache"}), config.bme.to_json(),
                                       config.bme_max_steps, config.seed, ckpt.filename().string()});
    StageCache cache(dir);
    const std::string stage = "train-bme-" + ckpt.stem().string();
    CommandResult r;
    if (cache.hit(stage, key)) {
      r.stages.push_back({"train-bme", true, key});
      r.summary = read_json(log_path);
      return r;
    }
    std::vector<synth::TrainingSample> samples;
    const Tau tau(meta.at("tau").get<double>());
    for (const auto& id : meta.at("samples")) {
      const fs::path sdir = data / "samples" / id.get<std::string>();
      samples.push_back({id.get<std::string>(), io::read_png(sdir / "blurred.png"), io::read_png(sdir / "sharp.png"),
                         BlurMagnitudeMap(io::read_plane(sdir / "magnitude.pln")), tau});
    }
    auto result = nn::train_bme(samples, tau, config.bme, config.seed, config.bme_max_steps);
    result.model.save(ckpt);
    const json log = {{"epoch_l1", result.log.epoch_l1},
                      {"steps", result.log.steps},
                      {"tau", tau.value()},
                      {"samples", samples.size()},
                      {"config", config.bme.to_json()},
                      {"parameter_checksum", hex64(nn::parameter_checksum(*result.model.net()))}};
    write_json(log_path, log);
    cache.record(stage, key, {ckpt, nn::BMEModel::meta_path(ckpt), log_path});
    r.stages.push_back({"train-bme", false, key});
    r.summary = log;
    return r;
  });
}

CommandResult cmd_train_deblur(const PipelineConfig& config) {
  apply_threads(config);
  require_paths("train-deblur", {{"paths.source_videos", config.paths.source_videos}});
  if (config.paths.deblur_checkpoint.empty()) {
    throw StageError("train-deblur", "paths.deblur_checkpoint is required", "invalid_input");
  }
  return in_stage("train-deblur", [&] {
    const fs::path ckpt = config.paths.deblur_checkpoint;
    const fs::path dir = ckpt.has_parent_path() ? ckpt.parent_path() : fs::path(".");
    const fs::path log_path = dir / (ckpt.stem().string() + "_log.json");
    const auto& st = config.source_training;
    const json training = {{"steps", st.steps}, {"batch_size", st.batch_size}, {"crop", st.crop}, {"lr", st.lr}};
    const std::string key = hash_json({"train-deblur", hash_tree(config.paths.source_videos), config.deblur.to_json(),
                                       training, config.seed, ckpt.filename().string()});
    StageCache cache(dir);
    const std::string stage = "train-deblur-" + ckpt.stem().string();
    CommandResult r;
    if (cache.hit(stage, key)) {
      r.stages.push_back({"train-deblur", true, key});
      r.summary = read_json(log_path);
      return r;
    }
    const auto videos = read_paired_videos(config.paths.source_videos);
    nn::ToyDeblurModel model(config.deblur, config.seed);
    auto options = st;
    options.seed = config.seed;
    const auto losses = nn::train_on_videos(model, videos, options);
    model.save(ckpt);
    const auto identity = adapt::evaluate_identity(videos);
    const auto trained = adapt::evaluate(model, videos);
    const json log = {{"first_loss", losses.empty() ? 0.0 : losses.front()},
                      {"last_loss", losses.empty() ? 0.0 : losses.back()},
                      {"steps", losses.size()},
                      {"source_identity", metrics_json(identity)},
                      {"source_model", metrics_json(trained)},
                      {"parameter_checksum", hex64(model.parameter_checksum())}};
    write_json(log_path, log);
    cache.record(stage, key, {ckpt, log_path});
    r.stages.push_back({"train-deblur", false, key});
    r.summary = log;
    return r;
  });
}

CommandResult cmd_adapt(const PipelineConfig& config) {
  apply_threads(config);
  if (config.paths.output.empty()) throw StageError("adapt", "paths.output (--out) is required", "invalid_input");
  auto ctx = load_adapt_inputs(config, true);
  CommandResult r;
  auto outcome = run_adaptation(ctx, config, config.paths.output, config.paths.output, r.stages);
  r.summary = {{"report", (config.paths.output / "report.json").string()},
               {"pairs", outcome.report.at("pairs")},
               {"baseline", outcome.report.at("baseline")},
               {"adapted", outcome.report.at("adapted")},
               {"delta", outcome.report.at("delta")}};
  for (const char* k : {"baseline", "adapted"}) {
    if (r.summary[k].is_object()) r.summary[k].erase("videos");
  }
  return r;
}

CommandResult cmd_ablate(const PipelineConfig& config) {
  apply_threads(config);
  if (config.paths.output.empty()) throw StageError("ablate", "paths.output (--out) is required", "invalid_input");
  auto ctx = load_adapt_inputs(config, true);
  const fs::path root = config.paths.output;
  const fs::path shared = root / "shared";
  CommandResult r;

  std::vector<std::optional<double>> ratios;
  if (config.ablation.ratios.empty()) {
    ratios.push_back(std::nullopt);
  } else {
    for (double x : config.ablation.ratios) ratios.push_back(x);
  }

  json cells = json::array();
  std::optional<std::string> best;
  double best_psnr = -std::numeric_limits<double>::infinity();
  std::ostringstream table;
  table << "cell                               PSNR     SSIM     dPSNR\n";
  if (ctx.baseline) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-32s %8.3f %8.4f %9s\n", "baseline", ctx.baseline->psnr, ctx.baseline->ssim, "-");
    table << line;
  }
  for (const auto ratio : ratios) {
    for (const auto pm : config.ablation.patch_modes) {
      for (const auto cm : config.ablation.condition_modes) {
        PipelineConfig cell = config;
        cell.patch_mode = pm;
        cell.condition_mode = cm;
        if (ratio) cell.r = *ratio;
        const std::string name = cell_name(pm, cm, ratio);
        cell.paths.output = root / "cells" / name;
        json entry = {{"cell", name}, {"patch_mode", adapt::to_string(pm)}, {"condition_mode", adapt::to_string(cm)},
                      {"r", cell.r}, {"report", (fs::path("cells") / name / "report.json").generic_string()}};
        try {
          std::vector<StageOutcome> stages;
          auto outcome = run_adaptation(ctx, cell, cell.paths.output, shared, stages);
          for (auto& s : stages) {
            s.stage = name + "/" + s.stage;
            r.stages.push_back(s);
          }
          if (outcome.adapted) {
            entry["psnr"] = outcome.adapted->psnr;
            entry["ssim"] = outcome.adapted->ssim;
            entry["delta_psnr"] = outcome.adapted->psnr - ctx.baseline->psnr;
            if (outcome.adapted->psnr > best_psnr) {
              best_psnr = outcome.adapted->psnr;
              best = name;
            }
            char line[160];
            std::snprintf(line, sizeof(line), "%-32s %8.3f %8.4f %+9.3f\n", name.c_str(), outcome.adapted->psnr,
                          outcome.adapted->ssim, outcome.adapted->psnr - ctx.baseline->psnr);
            table << line;
          }
          entry["pairs"] = outcome.report.at("pairs");
        } catch (const StageError& e) {
          entry["error"] = {{"stage", e.stage()}, {"type", e.cause()}, {"message", e.what()}};
          table << name << "  FAILED (" << e.stage() << ")\n";
        } catch (const std::exception& e) {
          entry["error"] = {{"stage", name}, {"type", "error"}, {"message", e.what()}};
          table << name << "  FAILED\n";
        }
        cells.push_back(entry);
      }
    }
  }
  json summary = {{"baseline", ctx.baseline ? metrics_json(*ctx.baseline) : json(nullptr)},
                  {"cells", cells},
                  {"best", best ? json(*best) : json(nullptr)},
                  {"config", config.to_json()}};
  write_json(root / "summary.json", summary);
  write_text(root / "summary.txt", table.str());
  r.summary = {{"summary", (root / "summary.json").string()}, {"best", summary.at("best")}, {"cells", cells}};
  return r;
}

CommandResult cmd_evaluate(const PipelineConfig& config) {
  apply_threads(config);
  require_paths("evaluate", {{"paths.eval_videos", config.paths.eval_videos},
                             {"paths.deblur_checkpoint", config.paths.deblur_checkpoint}});
  if (!config.paths.adapted_checkpoint.empty()) {
    require_paths("evaluate", {{"paths.adapted_checkpoint", config.paths.adapted_checkpoint}});
  }
  return in_stage("evaluate", [&] {
    const auto videos = read_paired_videos(config.paths.eval_videos);
    const auto base = nn::ToyDeblurModel::load(config.paths.deblur_checkpoint);
    const auto baseline = adapt::evaluate(base, videos);
    json report = {{"dataset", config.paths.eval_videos.filename().string()},
                   {"model", base.name()},
                   {"identity", metrics_json(adapt::evaluate_identity(videos))},
                   {"baseline", metrics_json(baseline)},
                   {"adapted", nullptr},
                   {"delta", nullptr}};
    std::optional<adapt::MetricsSummary> adapted;
    if (!config.paths.adapted_checkpoint.empty()) {
      const auto model = nn::ToyDeblurModel::load(config.paths.adapted_checkpoint);
      adapted = adapt::evaluate(model, videos);
      report["adapted"] = metrics_json(*adapted);
      report["delta"] = {{"psnr", adapted->psnr - baseline.psnr}, {"ssim", adapted->ssim - baseline.ssim}};
    }
    report["config"] = config.to_json();
    CommandResult r;
    if (!config.paths.output.empty()) {
      write_json(config.paths.output / "evaluation.json", report);
      write_text(config.paths.output / "evaluation.txt",
                 adapt::format_table({report["dataset"].get<std::string>(), base.name(), baseline,
                                      adapted ? *adapted : baseline}));
    }
    r.stages.push_back({"evaluate", false, ""});
    report.erase("config");
    for (const char* k : {"identity", "baseline", "adapted"}) {
      if (report[k].is_object()) report[k].erase("videos");
    }
    r.summary = report;
    return r;
  });
}

}  // namespace ttdeblur::pipeline
