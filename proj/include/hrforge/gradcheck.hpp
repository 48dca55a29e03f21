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

#ifndef HRFORGE_GRADCHECK_HPP_
#define HRFORGE_GRADCHECK_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hrforge {

// One tensor to probe: `values` is perturbed in place while the loss is
// re-evaluated; `analytic` holds the gradient computed at the unperturbed
// point.
struct GradCheckTarget {
  std::string name;
  std::span<double> values;
  std::span<const double> analytic;
};

struct GradCheckOptions {
  double tolerance = 1e-4;
  // Coordinates sampled per tensor; smaller tensors are checked fully.
  int samples_per_tensor = 64;
  uint64_t seed = 0;
  // Central-difference step is step * max(1, |x|).
  double step = 1e-5;
  // Denominator floor of the relative error.
  double floor = 1e-6;
  // Step multipliers tried, in order, when a perturbation crosses a kink.
  std::vector<double> kink_scales{1.0, 0.1, 0.01};
};

struct GradCheckReport {
  double max_rel_error = 0;
  std::string worst_tensor;
  int64_t worst_index = -1;
  double worst_analytic = 0;
  double worst_numeric = 0;
  int64_t probes = 0;
  int64_t skipped = 0;  // probes that sat on a kink at every step
  double tolerance = 0;
  bool passed = true;
};

// Relative error |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor);

// Returns true when the most recent loss evaluation took a different branch
// of some non-smooth op (a ReLU input changed sign) than the unperturbed
// point.
using KinkTest = std::function<bool()>;

// Compares analytic gradients against central finite differences. A
// difference whose evaluations cross a kink is retried with a smaller step;
// probes that cross at every step are skipped and counted. Throws
// NumericalError if the loss becomes non-finite.
GradCheckReport grad_check(const std::function<double()>& loss,
                           std::span<const GradCheckTarget> targets,
                           const GradCheckOptions& options,
                           const KinkTest& crossed = {});

}  // namespace hrforge

#endif  // HRFORGE_GRADCHECK_HPP_
