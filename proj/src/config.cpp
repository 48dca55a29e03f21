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

#include "hrforge/config.hpp"

#include "hrforge/error.hpp"

namespace hrforge {

std::string to_string(HeadVariant v) {
  switch (v) {
    case HeadVariant::kV1: return "V1";
    case HeadVariant::kV1h: return "V1h";
    case HeadVariant::kV2: return "V2";
    case HeadVariant::kV2p: return "V2p";
    case HeadVariant::kClsC: return "ClsC";
    case HeadVariant::kClsCi: return "ClsCi";
    case HeadVariant::kClsCii: return "ClsCii";
  }
  return "?";
}

HeadVariant parse_head_variant(const std::string& s) {
  for (HeadVariant v :
       {HeadVariant::kV1, HeadVariant::kV1h, HeadVariant::kV2,
        HeadVariant::kV2p, HeadVariant::kClsC, HeadVariant::kClsCi,
        HeadVariant::kClsCii}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown head variant '" + s +
                    "' (expected V1, V1h, V2, V2p, ClsC, ClsCi, ClsCii)");
}

std::string to_string(UpsampleMode m) {
  return m == UpsampleMode::kNearest ? "nearest" : "bilinear";
}

UpsampleMode parse_upsample_mode(const std::string& s) {
  if (s == "nearest") return UpsampleMode::kNearest;
  if (s == "bilinear") return UpsampleMode::kBilinear;
  throw ConfigError("unknown upsample mode '" + s +
                    "' (expected nearest or bilinear)");
}

namespace {
void field_check(bool ok, const char* field, const std::string& why) {
  if (!ok) throw ConfigError("field '" + std::string(field) + "': " + why);
}
}  // namespace

void NetworkConfig::validate() const {
  field_check(width > 0, "network.width", "must be positive");
  for (int b : stage_blocks) {
    field_check(b >= 1, "network.stage_blocks", "every count must be >= 1");
  }
  field_check(units_per_branch >= 1, "network.units_per_branch",
              "must be >= 1");
  field_check(stage1_units >= 1, "network.stage1_units", "must be >= 1");
  field_check(stage1_bottleneck_width > 0, "network.stage1_bottleneck_width",
              "must be positive");
  field_check(stem_width > 0, "network.stem_width", "must be positive");
  field_check(input_channels > 0, "network.input_channels", "must be positive");
  field_check(num_outputs > 0, "network.num_outputs", "must be positive");
  field_check(input_h > 0 && input_w > 0, "network.input_size",
              "must be positive");
  field_check(input_h % 32 == 0 && input_w % 32 == 0, "network.input_size",
              "height and width must be divisible by 32");
  if (head == HeadVariant::kV2p) {
    field_check(pyramid_levels >= 1 && pyramid_levels <= 16,
                "network.pyramid_levels", "must be in [1, 16]");
    // Each level halves (flooring) the 1/4-resolution map.
    const int shift = pyramid_levels - 1;
    field_check((input_h / 4 >> shift) >= 1 && (input_w / 4 >> shift) >= 1,
                "network.input_size",
                "too small for " + std::to_string(pyramid_levels) +
                    " pyramid levels");
  }
}

NetworkConfig tiny_config(int64_t input_size) {
  NetworkConfig c;
  c.width = 4;
  c.stage_blocks = {1, 1, 1};
  c.units_per_branch = 1;
  c.stage1_units = 1;
  c.stage1_bottleneck_width = 8;
  c.stem_width = 16;
  c.head = HeadVariant::kV2;
  c.num_outputs = 2;
  c.input_h = c.input_w = input_size;
  return c;
}

}  // namespace hrforge
