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

#include "hrforge/trainer.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hrforge/augment.hpp"
#include "hrforge/error.hpp"
#include "hrforge/rng.hpp"
#include "hrforge/topology.hpp"

namespace hrforge {

namespace {

constexpr uint64_t kBatchStream = 0xBA7C4;
constexpr int kHeadStride = 4;

std::string shortest(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

double EvalReport::headline() const {
  switch (task) {
    case Task::kSegmentation: return seg.miou;
    case Task::kLandmarks: return mean_pixel_error;
    default: return accuracy;
  }
}

const char* EvalReport::headline_name() const {
  switch (task) {
    case Task::kSegmentation: return "miou";
    case Task::kLandmarks: return "mean_pixel_error";
    default: return "accuracy";
  }
}

std::string EvalReport::render() const {
  std::ostringstream os;
  os << "task = " << to_string(task) << '\n'
     << "samples = " << samples << '\n'
     << "flip_eval = " << (flip ? "true" : "false") << '\n';
  switch (task) {
    case Task::kSegmentation:
      os << "miou = " << shortest(seg.miou) << '\n'
         << "pixel_acc = " << shortest(seg.pixel_acc) << '\n'
         << "mean_acc = " << shortest(seg.mean_acc) << '\n';
      for (size_t c = 0; c < seg.per_class_iou.size(); ++c) {
        os << "iou." << c << " = "
           << (seg.supported[c] ? shortest(seg.per_class_iou[c]) : "excluded")
           << '\n';
      }
      break;
    case Task::kLandmarks:
      os << "mean_pixel_error = " << shortest(mean_pixel_error) << '\n'
         << "nme = " << shortest(nme) << '\n'
         << "auc = " << shortest(auc) << '\n'
         << "fr = " << shortest(fr) << '\n';
      break;
    default:
      os << "accuracy = " << shortest(accuracy) << '\n';
      break;
  }
  return os.str();
}

template <typename T>
BasicTensor<T> flip_horizontal(const BasicTensor<T>& t) {
  BasicTensor<T> out(t.shape());
  const Shape s = t.shape();
  for (int64_t p = 0; p < s.n * s.c * s.h; ++p) {
    const T* src = t.ptr() + p * s.w;
    T* dst = out.ptr() + p * s.w;
    for (int64_t x = 0; x < s.w; ++x) dst[x] = src[s.w - 1 - x];
  }
  return out;
}

template <typename T>
Trainer<T>::Trainer(RunConfig config, Dataset data)
    : config_(std::move(config)), data_(std::move(data)) {
  config_.validate();
  if (config_.task == Task::kPyramid) {
    throw ConfigError("task 'pyramid' has no training objective; use "
                      "describe or cost");
  }
  if (data_.task != config_.task) {
    throw ConfigError("dataset task " + to_string(data_.task) +
                      " does not match config task " + to_string(config_.task));
  }
  if (data_.samples.empty()) throw ConfigError("dataset is empty");
  if (data_.classes != config_.network.num_outputs) {
    throw ConfigError("field 'network.num_outputs': dataset has " +
                      std::to_string(data_.classes) + " classes/landmarks");
  }
  for (const Sample& s : data_.samples) {
    if (s.image.channels != config_.network.input_channels) {
      throw ConfigError("field 'network.input_channels': dataset images have " +
                        std::to_string(s.image.channels) + " channels");
    }
  }
  digest_ = config_digest(config_);
  NetworkConfig nc = config_.network;
  nc.input_h = train_h();
  nc.input_w = train_w();
  net_ = std::make_unique<Network<T>>(build_network(nc), config_.seed);
  decays_ = decay_mask(net_->graph());
  opt_.base_lr = config_.optim.base_lr;
  opt_.momentum = config_.optim.momentum;
  opt_.weight_decay = config_.optim.weight_decay;
  opt_.nesterov = config_.optim.nesterov;
  opt_.schedule = config_.schedule();
}

template <typename T>
int64_t Trainer<T>::train_h() const {
  return config_.augment.crop_h > 0 ? config_.augment.crop_h
                                    : config_.network.input_h;
}

template <typename T>
int64_t Trainer<T>::train_w() const {
  return config_.augment.crop_w > 0 ? config_.augment.crop_w
                                    : config_.network.input_w;
}

template <typename T>
void Trainer<T>::resume(const Checkpoint& ckpt) {
  if (ckpt.config_digest != digest_) {
    throw IoError("checkpoint was written for a different config");
  }
  restore_state(ckpt, *net_, opt_);
}

template <typename T>
void Trainer<T>::resume(const std::string& checkpoint_path) {
  resume(load_checkpoint(checkpoint_path, digest_));
}

template <typename T>
double Trainer<T>::step() {
  const int64_t iter = opt_.iter;
  if (iter >= config_.optim.max_iter) {
    throw ConfigError("training already reached optim.max_iter");
  }
  const int64_t B = config_.optim.batch_size;
  const int64_t C = config_.network.input_channels;
  const int64_t H = train_h();
  const int64_t W = train_w();
  const int64_t N = static_cast<int64_t>(data_.samples.size());
  Rng rng(mix_seed(config_.seed, kBatchStream), static_cast<uint64_t>(iter));

  BasicTensor<T> input(Shape{B, C, H, W});
  std::vector<int32_t> labels;
  std::vector<std::vector<Point2>> points;
  for (int64_t b = 0; b < B; ++b) {
    const Sample& s = data_.samples[rng.integer(0, N - 1)];
    const AugmentParams p =
        sample_augment(config_.augment, config_.task == Task::kLandmarks,
                       s.image.h, s.image.w, H, W, rng);
    AugmentedSample<T> a = augment_sample<T>(s, p, H, W);
    std::copy(a.image.begin(), a.image.end(), input.ptr() + b * C * H * W);
    switch (config_.task) {
      case Task::kSegmentation:
        labels.insert(labels.end(), a.labels.begin(), a.labels.end());
        break;
      case Task::kLandmarks:
        points.push_back(std::move(a.landmarks));
        break;
      default:
        labels.push_back(a.class_id);
        break;
    }
  }

  double loss = 0;
  try {
    net_->zero_grad();
    net_->forward(input, BnMode::kTrain);
    const BasicTensor<T>& out = net_->output("logits");
    BasicTensor<T> grad;
    switch (config_.task) {
      case Task::kSegmentation: {
        const BasicTensor<T> up =
            upsample(out, kHeadStride, UpsampleMode::kBilinear);
        LossResult<T> r = softmax_cross_entropy<T>(up, labels, kIgnoreLabel);
        loss = r.loss;
        grad = upsample_backward(r.grad, out.shape(), kHeadStride,
                                 UpsampleMode::kBilinear);
        break;
      }
      case Task::kLandmarks: {
        const Shape s = out.shape();
        BasicTensor<T> target(s);
        for (int64_t b = 0; b < B; ++b) {
          std::vector<Point2> cells;
          for (const Point2& q : points[b]) {
            cells.push_back({(q.x - config_.metrics.decode_shift) / kHeadStride,
                             (q.y - config_.metrics.decode_shift) / kHeadStride});
          }
          const BasicTensor<T> t =
              gaussian_target<T>(cells, s.h, s.w, config_.metrics.sigma);
          std::copy(t.data().begin(), t.data().end(),
                    target.ptr() + b * s.c * s.plane());
        }
        LossResult<T> r = mse_loss(out, target);
        loss = r.loss;
        grad = std::move(r.grad);
        break;
      }
      default: {
        LossResult<T> r = softmax_cross_entropy<T>(out, labels, kIgnoreLabel);
        loss = r.loss;
        grad = std::move(r.grad);
        break;
      }
    }
    if (!std::isfinite(loss)) {
      throw NumericalError("loss is " + shortest(loss));
    }
    std::vector<std::pair<std::string, BasicTensor<T>>> grads;
    grads.emplace_back("logits", std::move(grad));
    net_->backward(grads);
    sgd_step(net_->params(), net_->grads(), decays_, opt_);
  } catch (const NumericalError& e) {
    throw NumericalError("iteration " + std::to_string(iter) + ": " + e.what());
  }
  return loss;
}

template <typename T>
TrainResult Trainer<T>::run(const TrainOptions& options) {
  namespace fs = std::filesystem;
  TrainResult result;
  std::ofstream log;
  const fs::path dir(options.out_dir);
  if (!options.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + options.out_dir + "'");
    log.open(dir / "loss.txt", opt_.iter > 0 ? std::ios::app : std::ios::trunc);
    if (!log) throw IoError("cannot write loss log in '" + options.out_dir + "'");
  }
  auto save = [&](const std::string& name) {
    const std::string path = (dir / name).string();
    save_checkpoint(path, snapshot());
    return path;
  };
  const int64_t end = options.stop_at >= 0
                          ? std::min(options.stop_at, config_.optim.max_iter)
                          : config_.optim.max_iter;
  while (opt_.iter < end) {
    LossRecord rec;
    rec.iter = opt_.iter;
    rec.lr = opt_.current_lr();
    rec.loss = step();
    result.losses.push_back(rec);
    if (options.on_step) options.on_step(rec);
    if (log.is_open() && rec.iter % config_.train.log_every == 0) {
      log << rec.iter << ' ' << shortest(rec.loss) << ' ' << shortest(rec.lr)
          << '\n';
    }
    if (!options.out_dir.empty() && config_.train.checkpoint_every > 0 &&
        opt_.iter % config_.train.checkpoint_every == 0) {
      char name[48];
      std::snprintf(name, sizeof name, "checkpoint_%06lld.hrfg",
                    static_cast<long long>(opt_.iter));
      save(name);
    }
  }
  result.iterations = opt_.iter;
  if (!options.out_dir.empty()) {
    log.flush();
    if (!log) throw IoError("failed writing loss log");
    result.final_checkpoint = save("final.hrfg");
  }
  if (options.final_eval) {
    result.final_eval = evaluate(false);
    if (!options.out_dir.empty()) {
      std::ofstream m(dir / "metrics.txt", std::ios::trunc);
      m << "iteration = " << opt_.iter << '\n' << result.final_eval.render();
      if (!m) throw IoError("cannot write metrics.txt");
    }
  }
  return result;
}

template <typename T>
EvalReport Trainer<T>::evaluate(bool flip) {
  EvalReport rep;
  rep.task = config_.task;
  rep.flip = flip;
  rep.samples = static_cast<int64_t>(data_.samples.size());
  if (config_.task == Task::kSegmentation) {
    rep.confusion = ConfusionMatrix(config_.network.num_outputs);
  }
  const int64_t C = config_.network.input_channels;
  const int64_t B = config_.optim.batch_size;
  std::unique_ptr<Network<T>> resized;
  Network<T>* net = net_.get();
  const Image& first = data_.samples.front().image;
  if (first.h != train_h() || first.w != train_w()) {
    resized = std::make_unique<Network<T>>(
        net_->graph().reshaped(first.h, first.w), config_.seed);
    resized->params() = net_->params();
    auto dst = resized->buffers();
    auto src = net_->buffers();
    for (size_t i = 0; i < dst.size(); ++i) *dst[i].values = *src[i].values;
    net = resized.get();
  }
  double pixel_err_sum = 0;
  int64_t pixel_err_count = 0;
  int64_t correct = 0;
  const int64_t N = rep.samples;
  for (int64_t start = 0; start < N; start += B) {
    const int64_t nb = std::min(B, N - start);
    const int64_t H = first.h;
    const int64_t W = first.w;
    BasicTensor<T> input(Shape{nb, C, H, W});
    for (int64_t b = 0; b < nb; ++b) {
      const Sample& s = data_.samples[start + b];
      if (s.image.h != H || s.image.w != W) {
        throw ConfigError("evaluation needs equally sized images");
      }
      AugmentedSample<T> a = augment_sample<T>(s, AugmentParams{}, H, W);
      std::copy(a.image.begin(), a.image.end(), input.ptr() + b * C * H * W);
    }
    net->forward(input, BnMode::kEval);
    BasicTensor<T> out = net->output("logits");
    if (flip && config_.task != Task::kClassification) {
      net->forward(flip_horizontal(input), BnMode::kEval);
      const BasicTensor<T> back = flip_horizontal(net->output("logits"));
      for (int64_t i = 0; i < out.numel(); ++i) {
        out[i] = (out[i] + back[i]) / T{2};
      }
    }
    const Shape s = out.shape();
    for (int64_t b = 0; b < nb; ++b) {
      const Sample& smp = data_.samples[start + b];
      switch (config_.task) {
        case Task::kSegmentation: {
          BasicTensor<T> one(Shape{1, s.c, s.h, s.w},
                             std::vector<T>(out.ptr() + b * s.c * s.plane(),
                                            out.ptr() + (b + 1) * s.c * s.plane()));
          const BasicTensor<T> up =
              upsample(one, kHeadStride, UpsampleMode::kBilinear);
          accumulate_confusion(rep.confusion, argmax_labels(up), smp.labels);
          break;
        }
        case Task::kLandmarks: {
          DecodeOptions opt;
          opt.scale = kHeadStride;
          opt.shift = config_.metrics.decode_shift;
          const DecodedKeypoints d = decode_heatmap<T>(
              std::span<const T>(out.ptr() + b * s.c * s.plane(),
                                 s.c * s.plane()),
              s.c, s.h, s.w, opt);
          rep.sample_nme.push_back(
              nme(d.coords, smp.landmarks, config_.metrics.nme_normalizer));
          for (size_t l = 0; l < d.coords.size(); ++l) {
            pixel_err_sum += std::hypot(d.coords[l].x - smp.landmarks[l].x,
                                        d.coords[l].y - smp.landmarks[l].y);
            ++pixel_err_count;
          }
          rep.predictions.push_back(d.coords);
          break;
        }
        default: {
          int32_t best = 0;
          for (int64_t k = 1; k < s.c; ++k) {
            if (out.at(b, k, 0, 0) > out.at(b, best, 0, 0)) {
              best = static_cast<int32_t>(k);
            }
          }
          if (best == smp.class_id) ++correct;
          break;
        }
      }
    }
  }
  switch (config_.task) {
    case Task::kSegmentation:
      rep.seg = miou(rep.confusion);
      break;
    case Task::kLandmarks: {
      rep.mean_pixel_error = pixel_err_sum / static_cast<double>(pixel_err_count);
      double total = 0;
      for (double v : rep.sample_nme) total += v;
      rep.nme = total / static_cast<double>(rep.sample_nme.size());
      const AucFr a = auc_fr(rep.sample_nme, config_.metrics.fr_threshold);
      rep.auc = a.auc;
      rep.fr = a.fr;
      break;
    }
    default:
      rep.accuracy = static_cast<double>(correct) / static_cast<double>(N);
      break;
  }
  return rep;
}

template class Trainer<float>;
template class Trainer<double>;
template BasicTensor<float> flip_horizontal<float>(const TensorF&);
template BasicTensor<double> flip_horizontal<double>(const Tensor&);

}  // namespace hrforge
