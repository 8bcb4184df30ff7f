#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttdeblur/error.hpp"
#include "ttdeblur/nn/pipeline.hpp"

using json = nlohmann::json;
namespace pl = ttdeblur::pipeline;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kLoad = 3, kStage = 4 };

int fail(const std::string& type, const std::string& stage, const std::string& message, int code) {
  json err = {{"status", "error"}, {"error", {{"type", type}, {"stage", stage}, {"message", message}}}};
  std::cerr << err.dump() << "\n";
  return code;
}

int exit_code_for(const std::string& cause) {
  if (cause == "invalid_input" || cause == "out_of_range") return kUsage;
  if (cause == "load_error") return kLoad;
  return kStage;
}

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::optional<double> r;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> patch_mode;
  std::optional<std::string> condition_mode;
  std::vector<double> ratio_range;
  std::optional<int> epochs;
  std::optional<std::string> out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON pipeline config")->check(CLI::ExistingFile);
  app->add_option("--set", c.sets, "Override a config key: key.path=value (repeatable)");
  app->add_option("--r", c.r, "Pseudo-sharp ratio in percent");
  app->add_option("--seed", c.seed, "Global seed");
  app->add_option("--patch-mode", c.patch_mode, "rsdm | random");
  app->add_option("--condition-mode", c.condition_mode, "dbcgm | flow | random");
  app->add_option("--ratio-range", c.ratio_range, "Rank band lo,hi in percent")->expected(2)->delimiter(',');
  app->add_option("--epochs", c.epochs, "Fine-tuning epochs");
  app->add_option("--out", c.out, "Output location (see command help)");
}

json quote(const std::string& s) { return json(s); }

std::vector<std::string> overrides(const Common& c, const std::string& out_key,
                                   const std::vector<std::pair<std::string, std::string>>& extra) {
  std::vector<std::string> o = c.sets;
  if (c.r) o.push_back("r=" + json(*c.r).dump());
  if (c.seed) o.push_back("seed=" + json(*c.seed).dump());
  if (c.patch_mode) o.push_back("patch_mode=" + quote(*c.patch_mode).dump());
  if (c.condition_mode) o.push_back("condition_mode=" + quote(*c.condition_mode).dump());
  if (!c.ratio_range.empty()) o.push_back("ratio_range=" + json(c.ratio_range).dump());
  if (c.epochs) o.push_back("epochs=" + json(*c.epochs).dump());
  if (c.out) o.push_back(out_key + "=" + quote(*c.out).dump());
  for (const auto& [k, v] : extra) o.push_back(k + "=" + v);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Test-time blur adaptation for video deblurring"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  struct Command {
    CLI::App* app;
    Common common;
    std::string out_key;
    std::function<pl::CommandResult(const pl::PipelineConfig&)> run;
  };
  std::map<std::string, Command> commands;
  auto add = [&](const std::string& name, const std::string& help, const std::string& out_key,
                 std::function<pl::CommandResult(const pl::PipelineConfig&)> run) -> Command& {
    Command& c = commands[name];
    c.app = app.add_subcommand(name, help);
    c.out_key = out_key;
    c.run = std::move(run);
    add_common(c.app, c.common);
    return c;
  };

  add("make-toy", "Write the desk-scale synthetic corpus and a matching config.json (--out: corpus root)",
      "paths.output", pl::cmd_make_toy);

  std::string sequences;
  auto& prep = add("prepare-data", "Build the BME training set and dataset_meta.json (--out: dataset dir)",
                   "paths.dataset", pl::cmd_prepare_data);
  prep.app->add_option("--sequences", sequences, "Directory of sharp high-frame-rate sequences");

  std::string data;
  bool toy = false;
  auto& tb = add("train-bme", "Train the blur magnitude estimator (--out: checkpoint path)", "paths.bme_checkpoint",
                 pl::cmd_train_bme);
  tb.app->add_option("--data", data, "Dataset written by prepare-data");
  tb.app->add_flag("--toy", toy, "Desk-scale BME settings");

  std::string source;
  auto& td = add("train-deblur", "Train the toy deblurring model on paired source videos (--out: checkpoint path)",
                 "paths.deblur_checkpoint", pl::cmd_train_deblur);
  td.app->add_option("--source", source, "Paired source videos <id>/{blur,sharp}");

  std::string target, bme, model, eval_dir, adapted;
  for (const char* name : {"adapt", "ablate"}) {
    auto& c = add(name,
                  std::string(name) == "adapt" ? "RSDM, DBCGM, reblurring, fine-tuning and evaluation (--out: run dir)"
                                               : "Run the patch x condition (and r) grid (--out: grid dir)",
                  "paths.output", std::string(name) == "adapt" ? pl::cmd_adapt : pl::cmd_ablate);
    c.app->add_option("--target", target, "Blurred target videos");
    c.app->add_option("--bme", bme, "BME checkpoint");
    c.app->add_option("--model", model, "Source-trained deblurring checkpoint");
    c.app->add_option("--eval", eval_dir, "Held-out paired target videos");
  }
  auto& ev = add("evaluate", "PSNR/SSIM of a deblurring checkpoint (--out: report dir)", "paths.output",
                 pl::cmd_evaluate);
  ev.app->add_option("--model", model, "Deblurring checkpoint");
  ev.app->add_option("--adapted", adapted, "Adapted checkpoint to compare against --model");
  ev.app->add_option("--eval", eval_dir, "Paired videos <id>/{blur,sharp}");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", "cli", e.what(), kUsage);
  }

  for (auto& [name, cmd] : commands) {
    if (!cmd.app->parsed()) continue;
    std::vector<std::pair<std::string, std::string>> extra;
    auto path_opt = [&](const std::string& value, const char* key) {
      if (!value.empty()) extra.push_back({key, json(value).dump()});
    };
    if (name == "prepare-data") path_opt(sequences, "paths.sequences");
    if (name == "train-bme") {
      path_opt(data, "paths.dataset");
      if (toy) extra.push_back({"bme.toy_mode", "true"});
    }
    if (name == "train-deblur") path_opt(source, "paths.source_videos");
    if (name == "adapt" || name == "ablate" || name == "evaluate") {
      path_opt(target, "paths.target_videos");
      path_opt(bme, "paths.bme_checkpoint");
      path_opt(model, "paths.deblur_checkpoint");
      path_opt(eval_dir, "paths.eval_videos");
      path_opt(adapted, "paths.adapted_checkpoint");
    }
    try {
      const auto config = pl::load_config(cmd.common.config, overrides(cmd.common, cmd.out_key, extra));
      const auto result = cmd.run(config);
      json stages = json::array();
      for (const auto& s : result.stages) stages.push_back({{"stage", s.stage}, {"cached", s.cached}, {"key", s.key}});
      std::cout << json{{"status", "ok"}, {"command", name}, {"stages", stages}, {"summary", result.summary}}.dump(2)
                << "\n";
      return kOk;
    } catch (const ttdeblur::StageError& e) {
      return fail(e.cause(), e.stage(), e.what(), exit_code_for(e.cause()));
    } catch (const ttdeblur::InvalidInput& e) {
      return fail("invalid_input", name, e.what(), kUsage);
    } catch (const ttdeblur::OutOfRange& e) {
      return fail("out_of_range", name, e.what(), kUsage);
    } catch (const ttdeblur::LoadError& e) {
      return fail("load_error", name, e.what(), kLoad);
    } catch (const json::exception& e) {
      return fail("invalid_input", name, e.what(), kUsage);
    } catch (const std::exception& e) {
      return fail("error", name, e.what(), kFailure);
    }
  }
  return fail("usage", "cli", "no command given", kUsage);
}
