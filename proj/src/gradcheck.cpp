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

#include "hrforge/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hrforge/error.hpp"

namespace hrforge {

double relative_error(double analytic, double numeric, double floor) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const std::function<double()>& loss,
                           std::span<const GradCheckTarget> targets,
                           const GradCheckOptions& options,
                           const KinkTest& crossed) {
  GradCheckReport report;
  report.tolerance = options.tolerance;
  std::mt19937_64 rng(options.seed);

  auto eval = [&](const std::string& where) {
    const double v = loss();
    if (!std::isfinite(v)) {
      throw NumericalError("grad_check: non-finite loss while probing " +
                           where);
    }
    return v;
  };

  for (const GradCheckTarget& t : targets) {
    if (t.values.size() != t.analytic.size()) {
      throw ConfigError("grad_check: value/gradient size mismatch for " +
                        t.name);
    }
    const int64_t size = static_cast<int64_t>(t.values.size());
    std::vector<int64_t> coords(static_cast<size_t>(size));
    std::iota(coords.begin(), coords.end(), int64_t{0});
    if (size > options.samples_per_tensor) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(static_cast<size_t>(options.samples_per_tensor));
      std::sort(coords.begin(), coords.end());
    }
    for (int64_t i : coords) {
      double& x = t.values[i];
      const double orig = x;
      const double analytic = t.analytic[i];
      const double h0 = options.step * std::max(1.0, std::abs(orig));
      bool smooth = false;
      double numeric = 0;
      for (double scale : options.kink_scales) {
        const double h = h0 * scale;
        x = orig + h;
        const double up = eval(t.name);
        const bool kink_up = crossed && crossed();
        x = orig - h;
        const double down = eval(t.name);
        const bool kink_down = crossed && crossed();
        x = orig;
        if (kink_up || kink_down) continue;
        numeric = (up - down) / (2 * h);
        smooth = true;
        break;
      }
      if (!smooth) {
        ++report.skipped;
        continue;
      }
      const double err = relative_error(analytic, numeric, options.floor);
      ++report.probes;
      if (err > report.max_rel_error || report.worst_index < 0) {
        report.max_rel_error = std::max(report.max_rel_error, err);
        report.worst_tensor = t.name;
        report.worst_index = i;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed =
      report.probes > 0 && report.max_rel_error <= options.tolerance;
  return report;
}

}  // namespace hrforge
