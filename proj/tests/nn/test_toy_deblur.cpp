#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "ttdeblur/error.hpp"
#include "ttdeblur/metrics.hpp"
#include "ttdeblur/nn/tensor.hpp"
#include "ttdeblur/nn/toy_deblur.hpp"
#include "ttdeblur/synth.hpp"
#include "ttdeblur/toy_corpus.hpp"

namespace fs = std::filesystem;
using namespace ttdeblur;
using namespace ttdeblur::nn;

namespace {

Frame random_frame(std::uint64_t seed, int h, int w) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> d(0, 1);
  Frame f(3, h, w);
  for (float& v : f.values()) v = d(rng);
  return f;
}

adapt::PseudoPair pair_from(const Frame& sharp) {
  adapt::PseudoPair p;
  p.sharp = sharp;
  const BlurConditionField cond{Plane(sharp.shape(), 1.0f), Plane(sharp.shape()), Plane(sharp.shape(), 0.5f)};
  p.blurred = synth::render_conditioned_blur(sharp, cond, Tau(10));
  p.condition = cond;
  return p;
}

}  // namespace

TEST(ToyDeblur, UntrainedShapeAndSeededInit) {
  ToyDeblurModel a({}, 1), b({}, 1), c({}, 2);
  EXPECT_EQ(a.parameter_checksum(), b.parameter_checksum());
  EXPECT_NE(a.parameter_checksum(), c.parameter_checksum());
  const std::vector<Frame> window{random_frame(1, 30, 42), random_frame(2, 30, 42), random_frame(3, 30, 42)};
  const Frame out = a.deblur(window);
  EXPECT_EQ(out.shape(), (Shape{30, 42}));
  EXPECT_EQ(out.channels(), 3);
  EXPECT_EQ(a.window_frames(), 3);
}

TEST(ToyDeblur, FinetuneReducesLossOnFixedPairs) {
  ToyDeblurConfig cfg;
  cfg.finetune_crop = 0;
  cfg.finetune_lr = 1e-3;
  ToyDeblurModel m(cfg, 3);
  std::vector<adapt::PseudoPair> pairs{pair_from(random_frame(4, 32, 32)), pair_from(random_frame(5, 32, 32))};
  std::vector<const adapt::PseudoPair*> batch{&pairs[0], &pairs[1]};
  m.start_finetune(0);
  const double first = m.finetune_step(batch);
  double last = first;
  for (int i = 0; i < 30; ++i) last = m.finetune_step(batch);
  EXPECT_LT(last, first);
}

TEST(ToyDeblur, FinetuneIsSeedDeterministic) {
  std::vector<adapt::PseudoPair> pairs{pair_from(random_frame(6, 48, 48))};
  std::vector<const adapt::PseudoPair*> batch{&pairs[0]};
  ToyDeblurConfig cfg;
  cfg.finetune_crop = 32;
  ToyDeblurModel a(cfg, 1), b(cfg, 1);
  a.start_finetune(9);
  b.start_finetune(9);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(a.finetune_step(batch), b.finetune_step(batch));
  EXPECT_EQ(a.parameter_checksum(), b.parameter_checksum());
}

TEST(ToyDeblur, CloneIsIndependent) {
  ToyDeblurModel m({}, 4);
  auto copy = m.clone();
  EXPECT_EQ(copy->parameter_checksum(), m.parameter_checksum());
  std::vector<adapt::PseudoPair> pairs{pair_from(random_frame(7, 32, 32))};
  std::vector<const adapt::PseudoPair*> batch{&pairs[0]};
  copy->start_finetune(0);
  copy->finetune_step(batch);
  EXPECT_NE(copy->parameter_checksum(), m.parameter_checksum());
}

TEST(ToyDeblur, SaveLoadRoundTrip) {
  const fs::path dir = fs::temp_directory_path() / "ttdeblur_deblur_ckpt";
  fs::remove_all(dir);
  ToyDeblurModel m({}, 5);
  m.save(dir / "d.pt");
  const auto loaded = ToyDeblurModel::load(dir / "d.pt");
  EXPECT_EQ(loaded.parameter_checksum(), m.parameter_checksum());
  const std::vector<Frame> window(3, random_frame(8, 16, 16));
  EXPECT_TRUE(loaded.deblur(window) == m.deblur(window));
  EXPECT_THROW(ToyDeblurModel::load(dir / "nope.pt"), LoadError);
}

TEST(ToyDeblur, SourceTrainingBeatsIdentity) {
  synth::BlurStyle style{{1.0, 0.0}, 1.0, 2.5, 0.0, 0.1, 0};
  std::vector<adapt::EvalVideo> train, val;
  for (int i = 0; i < 3; ++i) {
    train.push_back(synth::as_eval_video(synth::render_blurred_video("t" + std::to_string(i), style, 6, 64, 64, 7,
                                                                     static_cast<std::uint64_t>(i))));
  }
  val.push_back(synth::as_eval_video(synth::render_blurred_video("v", style, 6, 64, 64, 7, 99)));
  ToyDeblurModel m({}, 0);
  SourceTrainOptions opt;
  opt.steps = 150;
  opt.batch_size = 4;
  opt.crop = 32;
  const auto losses = train_on_videos(m, train, opt);
  ASSERT_EQ(losses.size(), 150u);
  EXPECT_GT(adapt::evaluate(m, val).psnr, adapt::evaluate_identity(val).psnr);
}
