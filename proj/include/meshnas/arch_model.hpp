// Copyright 2026 The meshnas Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Exact MAC and parameter counts for CIFAR-style ResNet-18 and SENet-18
// under depth/width/resolution scaling.
//
// Counting conventions:
//   conv    MACs = k*k*Cin*Cout*Hout*Wout, params = k*k*Cin*Cout (no bias),
//           Hout = floor((H + 2*pad - k)/stride) + 1
//   BN      params = 2*C, no MACs
//   linear  MACs = Cin*Cout, params = Cin*Cout + Cout
//   SE      two 1x1 convs evaluated at 1x1 spatial size
// Activations, pooling and channel-wise scaling cost nothing.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace meshnas {

enum class Family { resnet18, senet18 };

std::string_view to_string(Family family);
Family family_from_string(std::string_view text);

struct ConvSpec {
  int kernel = 3;
  int out_channels = 64;
  int stride = 1;
  int padding = 1;

  bool operator==(const ConvSpec&) const = default;
};

struct StageSpec {
  int block_count = 2;
  int out_channels = 64;
  int first_stride = 1;

  bool operator==(const StageSpec&) const = default;
};

struct ArchDescriptor {
  Family family = Family::resnet18;
  int input_resolution = 32;
  int input_channels = 3;
  ConvSpec stem;
  std::vector<StageSpec> stages;
  int se_reduction = 0;  // 16 for senet18, unused for resnet18
  int classifier_classes = 10;

  bool operator==(const ArchDescriptor&) const = default;
};

struct ScalingMultipliers {
  double depth = 1.0;
  double width = 1.0;
  double resolution = 1.0;
};

// Closed interval applied to each multiplier.
struct MultiplierBounds {
  double lower = 0.25;
  double upper = 2.0;
};

ArchDescriptor baseline(Family family);

// Half away from zero.
std::int64_t round_half_away(double x);

// Throws BoundsError when a multiplier is outside `bounds` or not finite.
ArchDescriptor scale(const ArchDescriptor& base, const ScalingMultipliers& m,
                     const MultiplierBounds& bounds = {});

struct LayerCost {
  std::string name;
  std::string kind;  // conv, bn, se_conv, pool, linear
  int channels = 0;
  int height = 0;
  int width = 0;
  std::uint64_t macs = 0;
  std::uint64_t params = 0;
};

// Throws ConfigError for descriptors with non-positive sizes.
std::vector<LayerCost> enumerate_layers(const ArchDescriptor& arch);

std::uint64_t mac_count(const ArchDescriptor& arch);
std::uint64_t param_count(const ArchDescriptor& arch);

struct CostRatios {
  double mac_ratio = 1.0;
  double param_ratio = 1.0;
};

CostRatios ratios(const ArchDescriptor& base, const ArchDescriptor& scaled);

void write_layer_table(std::ostream& out, const std::vector<LayerCost>& layers);
void write_layer_csv(std::ostream& out, const std::vector<LayerCost>& layers);

}  // namespace meshnas
