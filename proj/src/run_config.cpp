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

#include "hrforge/run_config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "hrforge/error.hpp"

namespace hrforge {

std::string to_string(Task t) {
  switch (t) {
    case Task::kSegmentation: return "segmentation";
    case Task::kLandmarks: return "landmarks";
    case Task::kClassification: return "classification";
    case Task::kPyramid: return "pyramid";
  }
  return "?";
}

Task parse_task(const std::string& s) {
  for (Task t : {Task::kSegmentation, Task::kLandmarks, Task::kClassification,
                 Task::kPyramid}) {
    if (to_string(t) == s) return t;
  }
  throw ConfigError("unknown task '" + s +
                    "' (expected segmentation, landmarks, classification, "
                    "pyramid)");
}

std::string to_string(Precision p) {
  return p == Precision::kVerify ? "verify" : "fast";
}

Precision parse_precision(const std::string& s) {
  if (s == "verify") return Precision::kVerify;
  if (s == "fast") return Precision::kFast;
  throw ConfigError("unknown precision '" + s + "' (expected verify or fast)");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& s) {
  double v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ConfigError("expected a real number, got '" + s + "'");
  }
  return v;
}

template <typename I>
I to_int(const std::string& s) {
  I v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ConfigError("expected an integer, got '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError("expected true or false, got '" + s + "'");
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::vector<int64_t> to_list(const std::string& s) {
  std::vector<int64_t> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int<int64_t>(trim(item)));
  return out;
}

template <typename C>
std::string fmt_list(const C& v) {
  std::string out;
  for (auto x : v) {
    if (!out.empty()) out += ",";
    out += std::to_string(x);
  }
  return out;
}

std::string fmt_size(int64_t h, int64_t w) {
  return std::to_string(h) + "x" + std::to_string(w);
}

struct Field {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define HF_REAL(KEY, M)                                                   \
  Field{KEY, [](const RunConfig& c) { return fmt_double(c.M); },          \
        [](RunConfig& c, const std::string& v) { c.M = to_double(v); }}
#define HF_INT(KEY, M)                                                    \
  Field{KEY, [](const RunConfig& c) { return std::to_string(c.M); },      \
        [](RunConfig& c, const std::string& v) {                          \
          c.M = to_int<decltype(c.M)>(v);                                 \
        }}
#define HF_BOOL(KEY, M)                                                   \
  Field{KEY, [](const RunConfig& c) { return fmt_bool(c.M); },            \
        [](RunConfig& c, const std::string& v) { c.M = to_bool(v); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> kFields = {
      HF_INT("seed", seed),
      Field{"precision",
            [](const RunConfig& c) { return to_string(c.precision); },
            [](RunConfig& c, const std::string& v) {
              c.precision = parse_precision(v);
            }},
      Field{"task", [](const RunConfig& c) { return to_string(c.task); },
            [](RunConfig& c, const std::string& v) { c.task = parse_task(v); }},
      HF_INT("network.width", network.width),
      Field{"network.stage_blocks",
            [](const RunConfig& c) { return fmt_list(c.network.stage_blocks); },
            [](RunConfig& c, const std::string& v) {
              const auto l = to_list(v);
              if (l.size() != 3) {
                throw ConfigError("expected three comma-separated counts");
              }
              for (int i = 0; i < 3; ++i) {
                c.network.stage_blocks[i] = static_cast<int>(l[i]);
              }
            }},
      HF_INT("network.units_per_branch", network.units_per_branch),
      HF_INT("network.stage1_units", network.stage1_units),
      HF_INT("network.stage1_bottleneck_width",
             network.stage1_bottleneck_width),
      HF_INT("network.stem_width", network.stem_width),
      HF_INT("network.input_channels", network.input_channels),
      Field{"network.head",
            [](const RunConfig& c) { return to_string(c.network.head); },
            [](RunConfig& c, const std::string& v) {
              c.network.head = parse_head_variant(v);
            }},
      HF_INT("network.num_outputs", network.num_outputs),
      HF_INT("network.pyramid_levels", network.pyramid_levels),
      Field{"network.input_size",
            [](const RunConfig& c) {
              return fmt_size(c.network.input_h, c.network.input_w);
            },
            [](RunConfig& c, const std::string& v) {
              std::tie(c.network.input_h, c.network.input_w) = parse_size(v);
            }},
      Field{"network.fusion_upsample",
            [](const RunConfig& c) {
              return to_string(c.network.fusion_upsample);
            },
            [](RunConfig& c, const std::string& v) {
              c.network.fusion_upsample = parse_upsample_mode(v);
            }},
      Field{"network.head_upsample",
            [](const RunConfig& c) {
              return to_string(c.network.head_upsample);
            },
            [](RunConfig& c, const std::string& v) {
              c.network.head_upsample = parse_upsample_mode(v);
            }},
      HF_REAL("optim.base_lr", optim.base_lr),
      HF_REAL("optim.momentum", optim.momentum),
      HF_REAL("optim.weight_decay", optim.weight_decay),
      HF_BOOL("optim.nesterov", optim.nesterov),
      Field{"optim.schedule",
            [](const RunConfig& c) -> std::string {
              return c.optim.schedule == ScheduleKind::kPoly ? "poly" : "step";
            },
            [](RunConfig& c, const std::string& v) {
              if (v == "poly") {
                c.optim.schedule = ScheduleKind::kPoly;
              } else if (v == "step") {
                c.optim.schedule = ScheduleKind::kStep;
              } else {
                throw ConfigError("expected poly or step, got '" + v + "'");
              }
            }},
      HF_REAL("optim.poly_power", optim.poly_power),
      HF_INT("optim.max_iter", optim.max_iter),
      Field{"optim.milestones",
            [](const RunConfig& c) { return fmt_list(c.optim.milestones); },
            [](RunConfig& c, const std::string& v) {
              c.optim.milestones = to_list(v);
            }},
      HF_REAL("optim.step_factor", optim.step_factor),
      HF_INT("optim.batch_size", optim.batch_size),
      HF_INT("train.checkpoint_every", train.checkpoint_every),
      HF_INT("train.log_every", train.log_every),
      Field{"data.source",
            [](const RunConfig& c) -> std::string {
              return c.data.source == DataSource::kSynthetic ? "synthetic"
                                                             : "directory";
            },
            [](RunConfig& c, const std::string& v) {
              if (v == "synthetic") {
                c.data.source = DataSource::kSynthetic;
              } else if (v == "directory") {
                c.data.source = DataSource::kDirectory;
              } else {
                throw ConfigError("expected synthetic or directory, got '" +
                                  v + "'");
              }
            }},
      Field{"data.dir", [](const RunConfig& c) { return c.data.dir; },
            [](RunConfig& c, const std::string& v) { c.data.dir = v; }},
      HF_INT("data.samples", data.samples),
      HF_REAL("augment.flip_prob", augment.flip_prob),
      HF_REAL("augment.scale_min", augment.scale_min),
      HF_REAL("augment.scale_max", augment.scale_max),
      HF_REAL("augment.rotation_deg", augment.rotation_deg),
      Field{"augment.crop_size",
            [](const RunConfig& c) {
              return fmt_size(c.augment.crop_h, c.augment.crop_w);
            },
            [](RunConfig& c, const std::string& v) {
              if (v == "0" || v == "0x0") {
                c.augment.crop_h = c.augment.crop_w = 0;
              } else {
                std::tie(c.augment.crop_h, c.augment.crop_w) = parse_size(v);
              }
            }},
      HF_REAL("metrics.sigma", metrics.sigma),
      HF_REAL("metrics.decode_shift", metrics.decode_shift),
      HF_REAL("metrics.fr_threshold", metrics.fr_threshold),
      HF_REAL("metrics.nme_normalizer", metrics.nme_normalizer),
  };
  return kFields;
}

#undef HF_REAL
#undef HF_INT
#undef HF_BOOL

void check(bool ok, const char* field, const std::string& why) {
  if (!ok) throw ConfigError("field '" + std::string(field) + "': " + why);
}

}  // namespace

std::pair<int64_t, int64_t> parse_size(const std::string& s) {
  const auto x = s.find('x');
  int64_t h = 0;
  int64_t w = 0;
  if (x == std::string::npos) {
    h = w = to_int<int64_t>(s);
  } else {
    h = to_int<int64_t>(s.substr(0, x));
    w = to_int<int64_t>(s.substr(x + 1));
  }
  if (h <= 0 || w <= 0) {
    throw ConfigError("size '" + s + "' must have positive height and width");
  }
  return {h, w};
}

Schedule RunConfig::schedule() const {
  Schedule s;
  s.kind = optim.schedule;
  s.power = optim.poly_power;
  s.max_iter = optim.max_iter;
  s.milestones = optim.milestones;
  s.factor = optim.step_factor;
  return s;
}

void RunConfig::validate() const {
  network.validate();
  check(optim.base_lr > 0, "optim.base_lr", "must be positive");
  check(optim.momentum >= 0 && optim.momentum < 1, "optim.momentum",
        "must be in [0, 1)");
  check(optim.weight_decay >= 0, "optim.weight_decay", "must be >= 0");
  check(optim.poly_power > 0, "optim.poly_power", "must be positive");
  check(optim.max_iter >= 1, "optim.max_iter", "must be >= 1");
  for (size_t i = 1; i < optim.milestones.size(); ++i) {
    check(optim.milestones[i] > optim.milestones[i - 1], "optim.milestones",
          "must be strictly increasing");
  }
  check(optim.step_factor > 0, "optim.step_factor", "must be positive");
  check(optim.batch_size >= 1, "optim.batch_size", "must be >= 1");
  check(train.checkpoint_every >= 0, "train.checkpoint_every", "must be >= 0");
  check(train.log_every >= 1, "train.log_every", "must be >= 1");
  check(data.samples >= 1, "data.samples", "must be >= 1");
  check(data.source != DataSource::kDirectory || !data.dir.empty(), "data.dir",
        "required when data.source = directory");
  check(augment.flip_prob >= 0 && augment.flip_prob <= 1, "augment.flip_prob",
        "must be in [0, 1]");
  check(augment.scale_min > 0 && augment.scale_min <= augment.scale_max,
        "augment.scale_min", "must satisfy 0 < scale_min <= scale_max");
  check(augment.rotation_deg >= 0, "augment.rotation_deg", "must be >= 0");
  check(augment.crop_h >= 0 && augment.crop_w >= 0, "augment.crop_size",
        "must be non-negative");
  check(metrics.sigma > 0, "metrics.sigma", "must be positive");
  check(metrics.fr_threshold > 0, "metrics.fr_threshold", "must be positive");
  check(metrics.nme_normalizer > 0, "metrics.nme_normalizer",
        "must be positive");
  const bool cls = network.is_classification();
  check(cls == (task == Task::kClassification), "network.head",
        "head " + to_string(network.head) + " does not fit task " +
            to_string(task));
  check((network.head == HeadVariant::kV2p) == (task == Task::kPyramid),
        "network.head",
        "head " + to_string(network.head) + " does not fit task " +
            to_string(task));
  if (task == Task::kSegmentation) {
    check(network.num_outputs >= 2, "network.num_outputs",
          "segmentation needs at least two classes");
  }
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Field* f = nullptr;
    for (const Field& cand : fields()) {
      if (key == cand.key) f = &cand;
    }
    if (f == nullptr) throw ConfigError(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) {
      throw ConfigError(where + ": duplicate key '" + key + "'");
    }
    try {
      f->set(c, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": field '" + key + "': " + e.what());
    }
  }
  c.validate();
  return c;
}

std::string render_run_config(const RunConfig& config) {
  std::string out;
  for (const Field& f : fields()) {
    out += f.key;
    out += " = ";
    out += f.get(config);
    out += '\n';
  }
  return out;
}

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t config_digest(const RunConfig& config) {
  return fnv1a64(render_run_config(config));
}

namespace {

RunConfig segmentation_preset(int64_t width) {
  RunConfig c;
  c.network.width = width;
  c.network.num_outputs = 19;
  c.network.input_h = 1024;
  c.network.input_w = 2048;
  c.augment.scale_min = 0.5;
  c.augment.scale_max = 2.0;
  c.augment.crop_h = 512;
  c.augment.crop_w = 1024;
  c.optim.max_iter = 120000;
  return c;
}

RunConfig classification_preset(int64_t width, HeadVariant head) {
  RunConfig c;
  c.task = Task::kClassification;
  c.network.width = width;
  c.network.head = head;
  c.network.num_outputs = 1000;
  c.optim.base_lr = 0.1;
  c.optim.weight_decay = 0.0001;
  c.optim.nesterov = true;
  c.optim.schedule = ScheduleKind::kStep;
  c.optim.milestones = {30, 60, 90};
  c.optim.max_iter = 100;
  c.optim.batch_size = 256;
  return c;
}

RunConfig tiny_preset(Task task, int64_t outputs) {
  RunConfig c;
  c.task = task;
  c.precision = Precision::kFast;
  c.network = tiny_config(64);
  c.network.num_outputs = outputs;
  c.network.input_channels = 3;
  c.optim.base_lr = 0.05;
  c.optim.weight_decay = 0.0001;
  c.optim.max_iter = 2000;
  c.optim.batch_size = 8;
  c.train.checkpoint_every = 500;
  c.train.log_every = 1;
  c.data.samples = 64;
  c.augment.flip_prob = 0.5;
  c.metrics.sigma = 1.5;
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"w48seg", "w40seg", "w18lmk", "w18cls", "w30cls", "w40cls",
          "w27ci",  "w25cii", "w48p",   "tiny-seg", "tiny-lmk"};
}

std::optional<RunConfig> preset(const std::string& name) {
  if (name == "w48seg") return segmentation_preset(48);
  if (name == "w40seg") return segmentation_preset(40);
  if (name == "w18lmk") {
    RunConfig c;
    c.task = Task::kLandmarks;
    c.network.width = 18;
    c.network.num_outputs = 98;
    c.network.input_h = c.network.input_w = 256;
    c.optim.base_lr = 0.0001;
    c.optim.weight_decay = 0;
    c.optim.schedule = ScheduleKind::kStep;
    c.optim.milestones = {30, 50};
    c.optim.max_iter = 60;
    c.augment.scale_min = 0.75;
    c.augment.scale_max = 1.25;
    c.augment.rotation_deg = 30;
    return c;
  }
  if (name == "w18cls") return classification_preset(18, HeadVariant::kClsC);
  if (name == "w30cls") return classification_preset(30, HeadVariant::kClsC);
  if (name == "w40cls") return classification_preset(40, HeadVariant::kClsC);
  if (name == "w27ci") return classification_preset(27, HeadVariant::kClsCi);
  if (name == "w25cii") return classification_preset(25, HeadVariant::kClsCii);
  if (name == "w48p") {
    RunConfig c;
    c.task = Task::kPyramid;
    c.network.width = 48;
    c.network.head = HeadVariant::kV2p;
    c.network.num_outputs = 256;
    c.network.input_h = 768;
    c.network.input_w = 1216;
    return c;
  }
  if (name == "tiny-seg") return tiny_preset(Task::kSegmentation, 2);
  if (name == "tiny-lmk") {
    RunConfig c = tiny_preset(Task::kLandmarks, 5);
    // Mean-normalized heatmap MSE yields small gradients.
    c.optim.base_lr = 0.4;
    c.augment.rotation_deg = 15;
    return c;
  }
  return std::nullopt;
}

RunConfig load_run_config(const std::string& path_or_preset) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::is_regular_file(path_or_preset, ec)) {
    std::ifstream in(path_or_preset, std::ios::binary);
    if (!in) throw IoError("cannot open config '" + path_or_preset + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      return parse_run_config(ss.str());
    } catch (const ConfigError& e) {
      throw ConfigError(path_or_preset + ": " + e.what());
    }
  }
  if (auto p = preset(path_or_preset)) {
    p->validate();
    return *p;
  }
  throw IoError("config '" + path_or_preset +
                "' is neither a readable file nor a preset name");
}

}  // namespace hrforge
