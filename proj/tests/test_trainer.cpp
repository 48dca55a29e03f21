/* Copyright 2026 The HRForge Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hrforge/error.hpp"
#include "hrforge/run_config.hpp"
#include "hrforge/synthetic.hpp"
#include "hrforge/trainer.hpp"
#include "temp_dir.hpp"

namespace hrforge {
namespace {

using testing_util::TempDir;

RunConfig small_config(Task task) {
  RunConfig c = *preset(task == Task::kLandmarks ? "tiny-lmk" : "tiny-seg");
  c.precision = Precision::kVerify;
  c.network = tiny_config(32);
  c.network.num_outputs = task == Task::kLandmarks ? 5 : 2;
  c.data.samples = 8;
  c.optim.batch_size = 2;
  c.optim.max_iter = 6;
  c.train.checkpoint_every = 3;
  c.seed = 5;
  return c;
}

Trainer<double> make_trainer(const RunConfig& c) {
  return Trainer<double>(c, load_dataset(c));
}

TEST(Trainer, SameSeedIsBitIdentical) {
  for (Task t : {Task::kSegmentation, Task::kLandmarks}) {
    const RunConfig c = small_config(t);
    Trainer<double> a = make_trainer(c);
    Trainer<double> b = make_trainer(c);
    const TrainResult ra = a.run();
    const TrainResult rb = b.run();
    ASSERT_EQ(ra.losses.size(), 6u);
    for (size_t i = 0; i < ra.losses.size(); ++i)
      EXPECT_EQ(ra.losses[i].loss, rb.losses[i].loss) << to_string(t);
    EXPECT_EQ(a.snapshot(), b.snapshot()) << to_string(t);
  }
}

TEST(Trainer, DifferentSeedDiffers) {
  RunConfig c = small_config(Task::kSegmentation);
  Trainer<double> a = make_trainer(c);
  c.seed = 6;
  Trainer<double> b = make_trainer(c);
  EXPECT_NE(a.step(), b.step());
}

TEST(Trainer, ResumeIsBitExact) {
  TempDir dir;
  const RunConfig c = small_config(Task::kSegmentation);
  Trainer<double> full = make_trainer(c);
  TrainOptions no_eval;
  no_eval.final_eval = false;
  const TrainResult whole = full.run(no_eval);

  Trainer<double> first = make_trainer(c);
  TrainOptions part;
  part.out_dir = dir.str();
  part.stop_at = 3;
  part.final_eval = false;
  first.run(part);
  const std::string ck = dir.file("checkpoint_000003.hrfg");
  ASSERT_TRUE(std::filesystem::exists(ck));

  Trainer<double> second = make_trainer(c);
  second.resume(ck);
  const TrainResult rest = second.run(no_eval);
  ASSERT_EQ(rest.losses.size(), 3u);
  for (size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(rest.losses[i].iter, whole.losses[3 + i].iter);
    EXPECT_EQ(rest.losses[i].loss, whole.losses[3 + i].loss);
  }
  EXPECT_EQ(second.snapshot(), full.snapshot());
}

TEST(Trainer, ResumeRejectsOtherConfig) {
  TempDir dir;
  const RunConfig c = small_config(Task::kSegmentation);
  Trainer<double> t = make_trainer(c);
  save_checkpoint(dir.file("x.hrfg"), t.snapshot());
  RunConfig other = c;
  other.optim.base_lr *= 2;
  Trainer<double> u = make_trainer(other);
  EXPECT_THROW(u.resume(dir.file("x.hrfg")), IoError);
}

TEST(Trainer, EvalAfterTrainingMatchesFinalMetric) {
  TempDir dir;
  const RunConfig c = small_config(Task::kSegmentation);
  Trainer<double> t = make_trainer(c);
  TrainOptions o;
  o.out_dir = dir.str();
  const TrainResult r = t.run(o);
  ASSERT_FALSE(r.final_checkpoint.empty());
  Trainer<double> e = make_trainer(c);
  e.resume(r.final_checkpoint);
  EXPECT_NEAR(e.evaluate().headline(), r.final_eval.headline(), 1e-6);
  EXPECT_TRUE(std::filesystem::exists(dir.file("loss.txt")));
  EXPECT_TRUE(std::filesystem::exists(dir.file("metrics.txt")));
}

TEST(Trainer, LossFileListsEveryIteration) {
  TempDir dir;
  const RunConfig c = small_config(Task::kSegmentation);
  Trainer<double> t = make_trainer(c);
  TrainOptions o;
  o.out_dir = dir.str();
  o.final_eval = false;
  t.run(o);
  std::ifstream in(dir.file("loss.txt"));
  int64_t iter = 0, expected = 0;
  double loss = 0, lr = 0;
  while (in >> iter >> loss >> lr) EXPECT_EQ(iter, expected++);
  EXPECT_EQ(expected, 6);
}

TEST(Trainer, UntrainedSegmentationIsNearChance) {
  // Balanced two-class data; predictions unrelated to the labels give mIoU
  // between 1/4 (constant) and 1/3 (fair coin). Averaged over
  // initializations.
  double sum = 0;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    RunConfig c = *preset("tiny-seg");
    c.precision = Precision::kVerify;
    c.data.samples = 16;
    c.seed = seed;
    Trainer<double> t = make_trainer(c);
    sum += t.evaluate().headline();
  }
  EXPECT_NEAR(sum / 5, 1.0 / 3.0, 0.1);
}

TEST(Trainer, FlipEvalUsesMirroredPass) {
  const RunConfig c = small_config(Task::kLandmarks);
  Trainer<double> t = make_trainer(c);
  const EvalReport plain = t.evaluate(false);
  const EvalReport flip = t.evaluate(true);
  EXPECT_TRUE(flip.flip);
  EXPECT_EQ(plain.samples, flip.samples);
  EXPECT_TRUE(std::isfinite(flip.nme));
}

TEST(Trainer, FlipHorizontal) {
  Tensor t(Shape{1, 1, 2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6});
  const Tensor f = flip_horizontal(t);
  EXPECT_EQ(f.data()[0], 3);
  EXPECT_EQ(f.data()[5], 4);
  EXPECT_EQ(flip_horizontal(f), t);
}

TEST(Trainer, RejectsMismatchedData) {
  RunConfig c = small_config(Task::kSegmentation);
  const Dataset d = generate_synthetic(Task::kSegmentation, 4, 32, 32, 3, 0);
  EXPECT_THROW(Trainer<double>(c, d), ConfigError);
}

}  // namespace
}  // namespace hrforge
