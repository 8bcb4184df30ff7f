// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
//   acceptance [WORKDIR]
//
// Criteria 5-8 run the pipeline commands on the desk-scale toy corpus under
// WORKDIR (default: <tmp>/ttdeblur_acceptance, wiped first).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "oracles.hpp"
#include "ttdeblur/error.hpp"
#include "ttdeblur/fields.hpp"
#include "ttdeblur/hash.hpp"
#include "ttdeblur/image_io.hpp"
#include "ttdeblur/field_io.hpp"
#include "ttdeblur/nn/bme.hpp"
#include "ttdeblur/nn/pipeline.hpp"
#include "ttdeblur/rsdm.hpp"
#include "ttdeblur/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace ttdeblur;
namespace pl = ttdeblur::pipeline;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double max_abs(const oracle::Grid& g, const Plane& p) { return oracle::max_abs_diff(g, p); }

// ---- 1. field math ---------------------------------------------------------

Verdict field_oracles() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> side(8, 64);
  constexpr int kInstances = 100;
  std::map<std::string, double> worst;
  for (int i = 0; i < kInstances; ++i) {
    const int h = side(rng), w = side(rng);

    std::uniform_int_distribution<int> count(2, 9);
    const int n = count(rng);
    std::vector<FlowField> fwd, bwd;
    for (int k = 0; k < n; ++k) {
      fwd.push_back(oracle::random_flow(rng, h, w, 3.0));
      bwd.push_back(k == 0 ? FlowField({h, w}, 0.0f, 0.0f) : oracle::random_flow(rng, h, w, 3.0));
    }
    const auto tt = accumulate_training_trajectory(fwd, bwd);
    const auto [ou, ov] = oracle::training_trajectory(fwd, bwd);
    worst["accumulate_training_trajectory"] =
        std::max({worst["accumulate_training_trajectory"], max_abs(ou, tt.u), max_abs(ov, tt.v)});

    std::vector<FlowField> window;
    for (int k = 0; k < 4; ++k) window.push_back(oracle::random_flow(rng, h, w, 4.0));
    const auto te = accumulate_test_trajectory(window);
    const auto [eu, ev] = oracle::test_trajectory(window);
    worst["accumulate_test_trajectory"] =
        std::max({worst["accumulate_test_trajectory"], max_abs(eu, te.u), max_abs(ev, te.v)});

    const double tau = max_trajectory_norm(tt) * 1.25 + 1e-3;
    const auto mag = magnitude_ground_truth(tt, Tau(tau));
    worst["magnitude_ground_truth"] =
        std::max(worst["magnitude_ground_truth"], max_abs(oracle::magnitude(tt.u, tt.v, tau), mag.m));

    const auto orient = orientation_field(te);
    const auto [ox, oy] = oracle::orientation(te.u, te.v, kDefaultOrientationEps);
    worst["orientation_field"] =
        std::max({worst["orientation_field"], max_abs(ox, orient.ox), max_abs(oy, orient.oy)});

    const Plane center = oracle::random_plane(rng, h, w, 0.0, 1.0);
    std::vector<Plane> nbr_planes;
    std::vector<BlurMagnitudeMap> nbrs;
    for (int k = 0; k < 4; ++k) {
      nbr_planes.push_back(oracle::random_plane(rng, h, w, 0.0, 1.0));
      nbrs.push_back({nbr_planes.back()});
    }
    const auto adapted = adapt_magnitude({center}, nbrs);
    worst["adapt_magnitude"] =
        std::max(worst["adapt_magnitude"], max_abs(oracle::adapt_magnitude(center, nbr_planes), adapted.m));
  }
  Verdict v{true, std::to_string(kInstances) + " instances each, 8..64 px; max err"};
  for (const auto& [name, err] : worst) {
    v.pass = v.pass && err < 1e-4;
    v.detail += " " + name + "=" + fmt("%.2e", err);
  }
  v.detail += " (tol 1e-4)";
  return v;
}

// ---- 2. orientation invariant ---------------------------------------------

Verdict orientation_invariant() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u01(0.0, 1.0), big(-20.0, 20.0), tiny(-1e-7, 1e-7);
  Plane u(100, 100), v(100, 100);
  int zeros = 0, small = 0;
  for (int y = 0; y < 100; ++y) {
    for (int x = 0; x < 100; ++x) {
      const double pick = u01(rng);
      if (pick < 0.1) {
        ++zeros;
      } else if (pick < 0.2) {
        u(y, x) = static_cast<float>(tiny(rng));
        v(y, x) = static_cast<float>(tiny(rng));
        ++small;
      } else {
        u(y, x) = static_cast<float>(big(rng) * std::pow(10.0, -4.0 * u01(rng)));
        v(y, x) = static_cast<float>(big(rng) * std::pow(10.0, -4.0 * u01(rng)));
      }
    }
  }
  const auto o = orientation_field(TrajectoryMap(u, v));
  double worst = 0.0;
  int violations = 0;
  for (int y = 0; y < 100; ++y) {
    for (int x = 0; x < 100; ++x) {
      const double n = std::hypot(double(u(y, x)), double(v(y, x)));
      if (n > kDefaultOrientationEps) {
        worst = std::max(worst, std::abs(std::hypot(double(o.ox(y, x)), double(o.oy(y, x))) - 1.0));
      } else if (o.ox(y, x) != 0.0f || o.oy(y, x) != 0.0f) {
        ++violations;
      }
    }
  }
  return {worst < 1e-5 && violations == 0,
          "10000 pixels (" + std::to_string(zeros) + " zero, " + std::to_string(small) +
              " below eps); max |norm-1|=" + fmt("%.2e", worst) + " (tol 1e-5), non-zero sub-eps=" +
              std::to_string(violations)};
}

// ---- 3. RSDM ----------------------------------------------------------------

Verdict rsdm_properties() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> len(5, 60);
  constexpr int kSize = 288;
  int bad_count = 0, bad_order = 0, bad_subset = 0, frames = 0;
  for (int video = 0; video < 50; ++video) {
    const int t = len(rng);
    frames += t;
    std::vector<BlurMagnitudeMap> mags;
    for (int i = 0; i < t; ++i) {
      // Smooth random field: a coarse random grid upsampled bilinearly.
      const Plane coarse = oracle::random_plane(rng, 10, 10, 0.0, 1.0);
      Plane m(kSize, kSize);
      for (int y = 0; y < kSize; ++y) {
        for (int x = 0; x < kSize; ++x) {
          m(y, x) = static_cast<float>(oracle::bilinear(coarse, y * 9.0 / (kSize - 1), x * 9.0 / (kSize - 1)));
        }
      }
      mags.push_back({m});
    }
    std::vector<double> brute(static_cast<std::size_t>(t));
    for (int f = 0; f < t; ++f) brute[static_cast<std::size_t>(f)] = oracle::window_min(mags[f].m, 256, 32).score;
    const int eligible = std::max(0, t - 4);
    std::vector<std::set<int>> chosen;
    for (double r : {10.0, 20.0, 30.0}) {
      rsdm::SelectionOptions opt;
      opt.ratio = r;
      const auto rep = rsdm::select_pseudo_sharp("v" + std::to_string(video), mags, opt);
      if (static_cast<int>(rep.selections.size()) != std::min(rsdm::selection_count(r, t), eligible)) ++bad_count;
      std::set<int> s;
      double worst_selected = -1.0;
      for (const auto& p : rep.selections) {
        s.insert(p.frame);
        worst_selected = std::max(worst_selected, brute[static_cast<std::size_t>(p.frame)]);
      }
      for (int f = 2; f < t - 2; ++f) {
        if (!s.count(f) && worst_selected > brute[static_cast<std::size_t>(f)] + 1e-6) ++bad_order;
      }
      chosen.push_back(s);
    }
    if (!std::includes(chosen[1].begin(), chosen[1].end(), chosen[0].begin(), chosen[0].end()) ||
        !std::includes(chosen[2].begin(), chosen[2].end(), chosen[1].begin(), chosen[1].end())) {
      ++bad_subset;
    }
  }
  return {bad_count == 0 && bad_order == 0 && bad_subset == 0,
          "50 videos, " + std::to_string(frames) + " frames of 288x288, patch 256 stride 32; count mismatches=" +
              std::to_string(bad_count) + " ordering violations=" + std::to_string(bad_order) +
              " non-monotone r in {10,20,30}=" + std::to_string(bad_subset)};
}

// ---- 4. oracle reblur -------------------------------------------------------

Verdict reblur_oracle() {
  std::mt19937_64 rng(404);
  bool identical = true;
  for (int i = 0; i < 20; ++i) {
    Frame f(3, 33, 47);
    std::uniform_real_distribution<float> d(0.0f, 1.0f);
    for (float& v : f.values()) v = d(rng);
    std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
    Plane ox(f.shape()), oy(f.shape());
    for (int y = 0; y < f.height(); ++y) {
      for (int x = 0; x < f.width(); ++x) {
        const double a = ang(rng);
        ox(y, x) = static_cast<float>(std::cos(a));
        oy(y, x) = static_cast<float>(std::sin(a));
      }
    }
    identical = identical && synth::render_conditioned_blur(f, {ox, oy, Plane(f.shape())}, Tau(10)) == f;
  }
  double worst_energy = 0.0;
  for (double z : {0.1, 0.25, 0.5, 1.0}) {
    Frame f(1, 21, 41);
    f.at(0, 10, 20) = 1.0f;
    const BlurConditionField cond{Plane(f.shape(), 1.0f), Plane(f.shape()), Plane(f.shape(), static_cast<float>(z))};
    const Frame out = synth::render_conditioned_blur(f, cond, Tau(16));
    const auto ref = oracle::line_render(f.plane(0), cond.x, cond.y, cond.z, 16.0, synth::kDefaultRenderSteps);
    double err = 0.0;
    for (int y = 0; y < f.height(); ++y) {
      for (int x = 0; x < f.width(); ++x) err += std::abs(ref.at(y, x) - double(out.at(0, y, x)));
    }
    worst_energy = std::max(worst_energy, err);
  }
  return {identical && worst_energy < 1e-4, std::string("z=0 bit-identical on 20 frames: ") +
                                                (identical ? "yes" : "no") + "; impulse total-energy error " +
                                                fmt("%.2e", worst_energy) + " (tol 1e-4)"};
}

// ---- 5-8. pipeline ------------------------------------------------------------

struct Toy {
  fs::path root;
  fs::path config;
  pl::PipelineConfig load(const std::vector<std::string>& extra = {}) const { return pl::load_config(config, extra); }
};

Verdict bme_training(const Toy& toy) {
  pl::cmd_make_toy(pl::load_config({}, {"paths.output=" + json(toy.root.string()).dump()}));
  const auto cfg = toy.load();
  pl::cmd_prepare_data(cfg);
  const auto log = pl::cmd_train_bme(cfg).summary;
  const int steps = log.at("steps").get<int>();
  const double last_epoch = log.at("epoch_l1").back().get<double>();

  const auto model = nn::BMEModel::load(cfg.paths.bme_checkpoint);
  const json meta = json::parse(std::ifstream(cfg.paths.dataset / "dataset_meta.json"));
  double l1 = 0.0;
  std::size_t pixels = 0;
  int samples = 0, size = 0;
  for (const auto& id : meta.at("samples")) {
    const fs::path dir = cfg.paths.dataset / "samples" / id.get<std::string>();
    const Frame blurred = io::read_png(dir / "blurred.png");
    const Plane gt = io::read_plane(dir / "magnitude.pln");
    const auto est = model.estimate(blurred);
    for (std::size_t i = 0; i < gt.size(); ++i) l1 += std::abs(double(est.m.values()[i]) - gt.values()[i]);
    pixels += gt.size();
    size = blurred.height();
    ++samples;
  }
  l1 /= static_cast<double>(pixels);

  // Gradient check on the trained architecture, in double precision.
  torch::manual_seed(7);
  nn::BMENet net(model.config().base_channels);
  net->to(torch::kDouble);
  net->eval();
  const auto x = torch::rand({2, 3, 32, 32}, torch::kDouble);
  const auto w = torch::randn({2, 1, 32, 32}, torch::kDouble);
  auto loss_of = [&] { return (net->forward(x) * w).sum(); };
  net->zero_grad();
  loss_of().backward();
  std::vector<torch::Tensor> params;
  for (auto& p : net->parameters()) params.push_back(p);
  std::mt19937_64 rng(8);
  int checked = 0, straddled = 0;
  double worst = 0.0;
  {
    torch::NoGradGuard guard;
    auto central = [&](torch::Tensor flat, int64_t i, double orig, double h) {
      flat[i] = orig + h;
      const double up = loss_of().item<double>();
      flat[i] = orig - h;
      const double down = loss_of().item<double>();
      flat[i] = orig;
      return (up - down) / (2 * h);
    };
    while (checked < 100 && straddled < 100) {
      auto& p = params[rng() % params.size()];
      auto flat = p.view(-1);
      const auto i = static_cast<int64_t>(rng() % static_cast<std::uint64_t>(flat.numel()));
      const double analytic = p.grad().view(-1)[i].item<double>();
      const double orig = flat[i].item<double>();
      const double numeric = central(flat, i, orig, 1e-5);
      const double wide = central(flat, i, orig, 2e-5);
      const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      if (std::abs(numeric - wide) / scale > 1e-3) {
        ++straddled;
        continue;
      }
      worst = std::max(worst, std::abs(analytic - numeric) / scale);
      ++checked;
    }
  }
  const bool pass = model.config().base_channels == 4 && samples == 64 && size == 128 && steps <= 200 && l1 < 0.05 &&
                    checked >= 100 && worst < 1e-3;
  return {pass, "base_channels " + std::to_string(model.config().base_channels) + ", " + std::to_string(samples) +
                    " samples of " + std::to_string(size) + "px, " + std::to_string(steps) +
                    " steps; eval-mode mean L1 " + fmt("%.4f", l1) + " (tol 0.05), last train-epoch L1 " +
                    fmt("%.4f", last_epoch) + "; gradcheck " + std::to_string(checked) + " params, max rel err " +
                    fmt("%.2e", worst) + " (tol 1e-3), " + std::to_string(straddled) + " kink straddles resampled"};
}

double adapt_delta(const fs::path& report) {
  return json::parse(std::ifstream(report)).at("delta").at("psnr").get<double>();
}

Verdict end_to_end(const Toy& toy) {
  const auto cfg = toy.load();
  pl::cmd_train_deblur(cfg);
  pl::cmd_adapt(cfg);
  const json report = json::parse(std::ifstream(cfg.paths.output / "report.json"));
  const double base = report.at("baseline").at("psnr").get<double>();
  const double adapted = report.at("adapted").at("psnr").get<double>();
  return {adapted - base >= 0.3, "baseline " + fmt("%.3f", base) + " dB, adapted " + fmt("%.3f", adapted) +
                                     " dB, delta " + fmt("%+.3f", adapted - base) + " dB (need >= +0.3); seed " +
                                     std::to_string(cfg.seed) + ", toy seed " + std::to_string(cfg.toy.seed) +
                                     ", " + std::to_string(report.at("pairs").get<int>()) + " pseudo pairs"};
}

Verdict ablation(const Toy& toy) {
  const auto cfg = toy.load({"paths.output=" + json((toy.root / "runs" / "ablate").string()).dump()});
  const json summary = pl::cmd_ablate(cfg).summary;
  std::string detail;
  double best = -1e9, second = -1e9, rsdm_dbcgm = std::nan("");
  for (const auto& c : summary.at("cells")) {
    if (!c.contains("psnr")) {
      detail += " " + c.at("cell").get<std::string>() + "=FAILED";
      continue;
    }
    const double p = c.at("psnr").get<double>();
    detail += " " + c.at("cell").get<std::string>() + "=" + fmt("%.3f", p);
    if (c.at("cell") == "rsdm-dbcgm") rsdm_dbcgm = p;
    if (p > best) {
      second = best;
      best = p;
    } else if (p > second) {
      second = p;
    }
  }
  const bool top = summary.at("best") == "rsdm-dbcgm" && summary.at("cells").size() == 6;
  // The rsdm-dbcgm cell repeats the criterion 6 configuration, so its PSNR is a re-run of that result.
  const double rerun =
      json::parse(std::ifstream(toy.load().paths.output / "report.json")).at("adapted").at("psnr").get<double>();
  const bool stable = std::abs(rerun - rsdm_dbcgm) <= 0.1;
  return {top && stable, "best=" + summary.at("best").dump() + ", margin " + fmt("%.3f", best - second) +
                             " dB;" + detail + "; re-run of rsdm-dbcgm differs by " +
                             fmt("%.4f", std::abs(rerun - rsdm_dbcgm)) + " dB (tol 0.1); seed " +
                             std::to_string(cfg.seed)};
}

std::map<std::string, std::string> artifact_hashes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension().string();
    const auto name = e.path().filename().string();
    if (ext == ".bcf" || ext == ".png" || name == "report.json" || name == "report.txt") {
      out[fs::relative(e.path(), dir).generic_string()] = hex64(hash_file(e.path()));
    }
  }
  return out;
}

Verdict reproducibility(const Toy& toy) {
  const auto cfg = toy.load();
  const fs::path out = cfg.paths.output;
  if (!fs::exists(out / "report.json")) pl::cmd_adapt(cfg);
  const auto first = artifact_hashes(out);
  fs::remove_all(out);
  pl::cmd_adapt(cfg);
  const auto second = artifact_hashes(out);
  int bcf = 0, png = 0, reports = 0, differing = 0;
  for (const auto& [path, hash] : first) {
    const auto ext = fs::path(path).extension();
    bcf += ext == ".bcf";
    png += ext == ".png";
    reports += ext != ".bcf" && ext != ".png";
    const auto it = second.find(path);
    if (it == second.end() || it->second != hash) ++differing;
  }
  const bool pass = differing == 0 && first.size() == second.size() && bcf > 0 && png > 0 && reports == 2;
  return {pass, std::to_string(bcf) + " BCF1, " + std::to_string(png) + " PNG, " + std::to_string(reports) +
                    " report files compared across two seeded runs; differing=" + std::to_string(differing) +
                    (first.size() == second.size() ? "" : " (file sets differ)")};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "ttdeblur_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  const Toy toy{fs::absolute(work), fs::absolute(work) / "config.json"};

  int failed = 0;
  auto run = [&](int id, const char* name, double limit_s, const std::function<Verdict()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0 && secs > limit_s) v.pass = false;
    failed += !v.pass;
    std::printf("%s  %d %s: %s [%.1f s", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), secs);
    if (limit_s > 0) std::printf(" / limit %.0f s", limit_s);
    std::printf("]\n");
    std::fflush(stdout);
  };

  run(1, "field-math oracles", 60, field_oracles);
  run(2, "orientation invariant", 0, orientation_invariant);
  run(3, "RSDM count/ordering", 120, rsdm_properties);
  run(4, "oracle reblur", 0, reblur_oracle);
  run(5, "BME toy training", 600, [&] { return bme_training(toy); });
  run(6, "end-to-end adaptation", 1200, [&] { return end_to_end(toy); });
  run(7, "ablation ordering", 0, [&] { return ablation(toy); });
  run(8, "reproducibility", 0, [&] { return reproducibility(toy); });

  std::printf("%d of 8 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
