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

#include "hrforge/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "hrforge/cost.hpp"
#include "hrforge/error.hpp"
#include "hrforge/network.hpp"
#include "hrforge/rng.hpp"
#include "hrforge/synthetic.hpp"
#include "hrforge/topology.hpp"
#include "hrforge/trainer.hpp"

namespace hrforge {

namespace {

const char* kind_name(OpKind k) {
  switch (k) {
    case OpKind::kInput: return "input";
    case OpKind::kConv: return "conv";
    case OpKind::kBatchNorm: return "batchnorm";
    case OpKind::kRelu: return "relu";
    case OpKind::kAdd: return "add";
    case OpKind::kUpsample: return "upsample";
    case OpKind::kAvgPool: return "avgpool";
    case OpKind::kGlobalAvgPool: return "gap";
    case OpKind::kConcat: return "concat";
    case OpKind::kLinear: return "linear";
  }
  return "?";
}

std::string chw(const Chw& s) {
  return "(" + std::to_string(s.c) + "," + std::to_string(s.h) + "," +
         std::to_string(s.w) + ")";
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

RunConfig resolve_config(const CliOptions& opts, const std::string& fallback) {
  const std::string name = opts.config.empty() ? fallback : opts.config;
  if (name.empty()) throw ConfigError("--config is required");
  RunConfig c = load_run_config(name);
  if (opts.size) {
    c.network.input_h = opts.size->first;
    c.network.input_w = opts.size->second;
  }
  if (opts.seed) c.seed = *opts.seed;
  if (opts.precision) c.precision = *opts.precision;
  c.validate();
  return c;
}

int cmd_describe(const CliOptions& opts, std::ostream& out, std::ostream&) {
  const RunConfig c = resolve_config(opts);
  const LayerGraph g = build_network(c.network);
  out << "# " << to_string(c.network.head) << " W" << c.network.width
      << " input " << c.network.input_channels << "x" << c.network.input_h
      << "x" << c.network.input_w << '\n';
  for (const Node& n : g.nodes()) {
    out << std::left << std::setw(56) << n.name << std::setw(10)
        << kind_name(n.kind);
    std::string ins;
    for (int i : n.inputs) {
      if (!ins.empty()) ins += " ";
      ins += chw(g.node(i).shape);
    }
    out << std::setw(28) << (ins.empty() ? "-" : ins) << " -> "
        << chw(n.shape) << '\n';
  }
  out << "# outputs\n";
  for (const auto& [name, id] : g.outputs()) {
    out << name << ' ' << chw(g.node(id).shape) << '\n';
  }
  return 0;
}

int cmd_cost(const CliOptions& opts, std::ostream& out, std::ostream&) {
  const RunConfig c = resolve_config(opts);
  const Calibration cal = calibrate_flop_unit();
  const LayerGraph g = build_network(c.network);
  CostOptions co;
  co.include_head = !opts.backbone_only;
  co.unit = cal.unit;
  const CostReport r =
      analyze(g, c.network.input_h, c.network.input_w, co);
  if (opts.format == "tsv") {
    out << render_report(r, ReportFormat::kTsv);
  } else if (opts.format == "json") {
    out << render_report(r, ReportFormat::kJson);
  } else if (opts.format == "table") {
    out << render_report(r, ReportFormat::kTable);
    out << "calibration: ResNet-50 " << fixed(cal.resnet_params / 1e6, 2)
        << "M / " << fixed(cal.resnet_gflops, 3) << " G in "
        << to_string(cal.unit) << (cal.matched ? "" : " (unmatched)") << '\n';
  } else {
    throw ConfigError("unknown --format '" + opts.format +
                      "' (expected table, tsv or json)");
  }
  return 0;
}

GradCheckReport network_gradcheck(const NetworkConfig& config, uint64_t seed,
                                  const GradCheckOptions& options,
                                  bool inject_fault) {
  Network<double> net(build_network(config), seed);
  net.set_fault_injection(inject_fault);
  constexpr int64_t kBatch = 2;
  const Chw in = net.graph().input_shape();
  Tensor input(Shape{kBatch, in.c, in.h, in.w});
  Rng rng(seed, 0x1A7);
  for (double& v : input.data()) v = rng.normal();
  std::vector<std::pair<std::string, Tensor>> weights;
  for (const auto& [name, id] : net.graph().outputs()) {
    const Chw s = net.graph().node(id).shape;
    Tensor w(Shape{kBatch, s.c, s.h, s.w});
    for (double& v : w.data()) v = rng.normal();
    weights.emplace_back(name, std::move(w));
  }
  auto loss = [&]() {
    net.forward(input, BnMode::kTrain);
    double total = 0;
    for (const auto& [name, w] : weights) {
      const Tensor& o = net.output(name);
      for (int64_t i = 0; i < o.numel(); ++i) total += o[i] * w[i];
    }
    return total;
  };
  const double l0 = loss();
  const std::vector<bool> pattern = net.relu_pattern();
  net.zero_grad();
  net.backward(weights);
  std::vector<GradCheckTarget> targets;
  for (size_t i = 0; i < net.params().size(); ++i) {
    targets.push_back({net.graph().params()[i].name, net.params()[i].data(),
                       net.grads()[i].data()});
  }
  const Tensor input_grad = net.input_grad();
  targets.push_back({"input", input.data(), input_grad.data()});
  // Central differences resolve gradients only down to about
  // eps * |L| / step, so the floor scales with the loss.
  GradCheckOptions scaled = options;
  scaled.floor = options.floor * std::max(1.0, std::abs(l0));
  return grad_check(loss, targets, scaled,
                    [&] { return net.relu_pattern() != pattern; });
}

int cmd_gradcheck(const CliOptions& opts, std::ostream& out, std::ostream&) {
  if (opts.precision && *opts.precision != Precision::kVerify) {
    throw ConfigError("gradcheck runs in verify precision only");
  }
  NetworkConfig nc = tiny_config(32);
  if (!opts.config.empty()) nc = resolve_config(opts).network;
  if (opts.size) {
    nc.input_h = opts.size->first;
    nc.input_w = opts.size->second;
  }
  nc.validate();
  GradCheckOptions go;
  go.tolerance = 1e-3;
  go.seed = opts.seed.value_or(0);
  const GradCheckReport r =
      network_gradcheck(nc, go.seed, go, opts.inject_fault);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", r.max_rel_error);
  out << "probes = " << r.probes << '\n'
      << "max_rel_error = " << buf << '\n'
      << "worst = " << r.worst_tensor << "[" << r.worst_index << "]"
      << " analytic " << r.worst_analytic << " numeric " << r.worst_numeric
      << '\n'
      << "skipped_at_kinks = " << r.skipped << '\n'
      << "tolerance = " << r.tolerance << '\n'
      << "result = " << (r.passed ? "PASS" : "FAIL") << '\n';
  return r.passed ? 0 : static_cast<int>(ExitCode::kNumerical);
}

namespace {

template <typename T>
int train_with(const RunConfig& c, const CliOptions& opts, std::ostream& out) {
  Trainer<T> trainer(c, load_dataset(c));
  if (!opts.resume.empty()) trainer.resume(opts.resume);
  TrainOptions to;
  to.out_dir = opts.out.empty() ? "hrforge_run" : opts.out;
  const TrainResult r = trainer.run(to);
  out << "iterations = " << r.iterations << '\n';
  if (!r.losses.empty()) {
    out << "final_loss = " << r.losses.back().loss << '\n';
  }
  out << "checkpoint = " << r.final_checkpoint << '\n'
      << r.final_eval.render();
  return 0;
}

template <typename T>
int eval_with(const RunConfig& c, const CliOptions& opts, std::ostream& out) {
  Trainer<T> trainer(c, load_dataset(c));
  trainer.resume(opts.checkpoint);
  const EvalReport r = trainer.evaluate(opts.flip_eval);
  const std::string text = r.render();
  out << text;
  if (!opts.out.empty()) {
    std::filesystem::create_directories(opts.out);
    std::ofstream f(std::filesystem::path(opts.out) / "eval.txt");
    f << text;
    if (!f) throw IoError("cannot write eval.txt in '" + opts.out + "'");
  }
  return 0;
}

}  // namespace

int cmd_train(const CliOptions& opts, std::ostream& out, std::ostream&) {
  const RunConfig c = resolve_config(opts);
  return c.precision == Precision::kVerify ? train_with<double>(c, opts, out)
                                           : train_with<float>(c, opts, out);
}

int cmd_eval(const CliOptions& opts, std::ostream& out, std::ostream&) {
  const RunConfig c = resolve_config(opts);
  if (opts.checkpoint.empty()) throw ConfigError("eval needs --checkpoint");
  return c.precision == Precision::kVerify ? eval_with<double>(c, opts, out)
                                           : eval_with<float>(c, opts, out);
}

int cmd_gen_data(const CliOptions& opts, std::ostream& out, std::ostream&) {
  const RunConfig c = resolve_config(opts);
  if (opts.out.empty()) throw ConfigError("gen-data needs --out DIR");
  const int64_t n = opts.samples > 0 ? opts.samples : c.data.samples;
  const Dataset d =
      generate_synthetic(c.task, n, c.network.input_h, c.network.input_w,
                         c.network.num_outputs, c.seed);
  write_dataset(opts.out, d);
  out << "wrote " << n << " " << to_string(c.task) << " samples to "
      << opts.out << '\n';
  return 0;
}

int run_command(const std::string& name, const CliOptions& opts,
                std::ostream& out, std::ostream& err) {
  try {
    if (name == "describe") return cmd_describe(opts, out, err);
    if (name == "cost") return cmd_cost(opts, out, err);
    if (name == "gradcheck") return cmd_gradcheck(opts, out, err);
    if (name == "train") return cmd_train(opts, out, err);
    if (name == "eval") return cmd_eval(opts, out, err);
    if (name == "gen-data") return cmd_gen_data(opts, out, err);
    err << "error: unknown command '" << name << "'\n";
    return static_cast<int>(ExitCode::kUsage);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::kIo);
  }
}

}  // namespace hrforge
