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

#ifndef HRFORGE_TRAINER_HPP_
#define HRFORGE_TRAINER_HPP_

// Training and evaluation drivers.
//
// Iteration i draws its batch indices and augmentation from a stream keyed
// by (seed, i), so a run resumed from a checkpoint at iteration k replays
// exactly the batches of the uninterrupted run.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hrforge/checkpoint.hpp"
#include "hrforge/metrics.hpp"
#include "hrforge/network.hpp"
#include "hrforge/optim.hpp"
#include "hrforge/run_config.hpp"
#include "hrforge/synthetic.hpp"

namespace hrforge {

struct EvalReport {
  Task task = Task::kSegmentation;
  int64_t samples = 0;
  bool flip = false;
  // segmentation
  SegmentationScores seg;
  ConfusionMatrix confusion;
  // landmarks
  double nme = 0;
  double mean_pixel_error = 0;
  double auc = 0;
  double fr = 0;
  std::vector<double> sample_nme;
  std::vector<std::vector<Point2>> predictions;
  // classification
  double accuracy = 0;

  // mIoU, mean pixel error or top-1 accuracy.
  double headline() const;
  const char* headline_name() const;
  std::string render() const;
};

struct LossRecord {
  int64_t iter = 0;
  double loss = 0;
  double lr = 0;
};

struct TrainOptions {
  std::string out_dir;      // empty: no files written
  int64_t stop_at = -1;     // stop after this many iterations (< max_iter)
  bool final_eval = true;
  std::function<void(const LossRecord&)> on_step;
};

struct TrainResult {
  int64_t iterations = 0;
  std::vector<LossRecord> losses;
  EvalReport final_eval;
  std::string final_checkpoint;
};

template <typename T>
class Trainer {
 public:
  Trainer(RunConfig config, Dataset data);

  const RunConfig& config() const { return config_; }
  Network<T>& network() { return *net_; }
  OptimizerState<T>& optimizer() { return opt_; }
  const Dataset& data() const { return data_; }
  uint64_t digest() const { return digest_; }

  void resume(const Checkpoint& ckpt);
  void resume(const std::string& checkpoint_path);

  // One SGD step at the current iteration; returns the batch loss.
  double step();
  TrainResult run(const TrainOptions& options = {});

  EvalReport evaluate(bool flip = false);
  Checkpoint snapshot() { return capture_state(*net_, opt_, digest_); }

 private:
  int64_t train_h() const;
  int64_t train_w() const;

  RunConfig config_;
  Dataset data_;
  uint64_t digest_ = 0;
  std::unique_ptr<Network<T>> net_;
  OptimizerState<T> opt_;
  std::vector<bool> decays_;
};

extern template class Trainer<float>;
extern template class Trainer<double>;

// Mirrors the last axis of every plane.
template <typename T>
BasicTensor<T> flip_horizontal(const BasicTensor<T>& t);

}  // namespace hrforge

#endif  // HRFORGE_TRAINER_HPP_
