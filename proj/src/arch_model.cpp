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

#include "meshnas/arch_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "meshnas/errors.hpp"

namespace meshnas {

namespace {

int scaled_count(int value, double multiplier) {
  return static_cast<int>(std::max<std::int64_t>(1, round_half_away(value * multiplier)));
}

int se_hidden(int channels) {
  return static_cast<int>(std::max<std::int64_t>(1, round_half_away(channels / 16.0)));
}

int conv_output(int size, int kernel, int stride, int padding) {
  return (size + 2 * padding - kernel) / stride + 1;
}

class LayerWalker {
 public:
  int conv(std::string name, int cin, int cout, int kernel, int stride, int padding,
           int size, std::string kind = "conv") {
    const int out = conv_output(size, kernel, stride, padding);
    if (out < 1) throw ConfigError(fmt::format("layer {} collapses to zero size", name));
    const auto k2 = static_cast<std::uint64_t>(kernel) * kernel;
    const auto weights = k2 * static_cast<std::uint64_t>(cin) * static_cast<std::uint64_t>(cout);
    layers_.push_back({std::move(name), std::move(kind), cout, out, out,
                       weights * static_cast<std::uint64_t>(out) * static_cast<std::uint64_t>(out),
                       weights});
    return out;
  }

  void bn(std::string name, int channels, int size) {
    layers_.push_back({std::move(name), "bn", channels, size, size, 0,
                       2 * static_cast<std::uint64_t>(channels)});
  }

  void pool(std::string name, int channels) {
    layers_.push_back({std::move(name), "pool", channels, 1, 1, 0, 0});
  }

  void linear(std::string name, int cin, int cout) {
    const auto w = static_cast<std::uint64_t>(cin) * static_cast<std::uint64_t>(cout);
    layers_.push_back({std::move(name), "linear", cout, 1, 1, w,
                       w + static_cast<std::uint64_t>(cout)});
  }

  std::vector<LayerCost> take() { return std::move(layers_); }

 private:
  std::vector<LayerCost> layers_;
};

void check_descriptor(const ArchDescriptor& a) {
  auto positive = [](int x) { return x >= 1; };
  bool ok = positive(a.input_resolution) && positive(a.input_channels) &&
            positive(a.stem.kernel) && positive(a.stem.out_channels) &&
            positive(a.stem.stride) && a.stem.padding >= 0 &&
            positive(a.classifier_classes) && !a.stages.empty();
  for (const auto& s : a.stages)
    ok = ok && positive(s.block_count) && positive(s.out_channels) && positive(s.first_stride);
  if (!ok) throw ConfigError("architecture descriptor has a non-positive size");
}

}  // namespace

std::string_view to_string(Family family) {
  return family == Family::resnet18 ? "resnet18" : "senet18";
}

Family family_from_string(std::string_view text) {
  if (text == "resnet18") return Family::resnet18;
  if (text == "senet18") return Family::senet18;
  throw ConfigError(fmt::format("unknown family '{}' (expected resnet18 or senet18)", text));
}

ArchDescriptor baseline(Family family) {
  ArchDescriptor a;
  a.family = family;
  a.input_resolution = 32;
  a.input_channels = 3;
  a.stem = ConvSpec{3, 64, 1, 1};
  a.stages = {{2, 64, 1}, {2, 128, 2}, {2, 256, 2}, {2, 512, 2}};
  a.se_reduction = family == Family::senet18 ? 16 : 0;
  a.classifier_classes = 10;
  return a;
}

std::int64_t round_half_away(double x) { return std::llround(x); }

ArchDescriptor scale(const ArchDescriptor& base, const ScalingMultipliers& m,
                     const MultiplierBounds& bounds) {
  const std::pair<const char*, double> checks[] = {
      {"depth", m.depth}, {"width", m.width}, {"resolution", m.resolution}};
  for (const auto& [name, value] : checks) {
    if (!std::isfinite(value) || value < bounds.lower || value > bounds.upper)
      throw BoundsError(fmt::format("{} multiplier {} outside [{}, {}]", name, value,
                                    bounds.lower, bounds.upper));
  }
  check_descriptor(base);
  ArchDescriptor a = base;
  a.input_resolution = scaled_count(base.input_resolution, m.resolution);
  a.stem.out_channels = scaled_count(base.stem.out_channels, m.width);
  for (auto& s : a.stages) {
    s.block_count = scaled_count(s.block_count, m.depth);
    s.out_channels = scaled_count(s.out_channels, m.width);
  }
  return a;
}

std::vector<LayerCost> enumerate_layers(const ArchDescriptor& a) {
  check_descriptor(a);
  const bool se = a.family == Family::senet18;
  LayerWalker walk;
  int size = walk.conv("stem.conv", a.input_channels, a.stem.out_channels, a.stem.kernel,
                       a.stem.stride, a.stem.padding, a.input_resolution);
  walk.bn("stem.bn", a.stem.out_channels, size);
  int cin = a.stem.out_channels;

  for (std::size_t s = 0; s < a.stages.size(); ++s) {
    const auto& stage = a.stages[s];
    for (int b = 0; b < stage.block_count; ++b) {
      const int stride = b == 0 ? stage.first_stride : 1;
      const int cout = stage.out_channels;
      const std::string prefix = fmt::format("layer{}.{}", s + 1, b);
      const bool projection = stride != 1 || cin != cout;
      const int in_size = size;
      if (se) {
        // Pre-activation block: BN over the input, conv1, BN, conv2, SE.
        // The projection shortcut has no BN.
        walk.bn(prefix + ".bn1", cin, in_size);
        if (projection) walk.conv(prefix + ".shortcut", cin, cout, 1, stride, 0, in_size);
        size = walk.conv(prefix + ".conv1", cin, cout, 3, stride, 1, in_size);
        walk.bn(prefix + ".bn2", cout, size);
        walk.conv(prefix + ".conv2", cout, cout, 3, 1, 1, size);
        const int hidden = se_hidden(cout);
        walk.pool(prefix + ".se_pool", cout);
        walk.conv(prefix + ".se_fc1", cout, hidden, 1, 1, 0, 1, "se_conv");
        walk.conv(prefix + ".se_fc2", hidden, cout, 1, 1, 0, 1, "se_conv");
      } else {
        size = walk.conv(prefix + ".conv1", cin, cout, 3, stride, 1, in_size);
        walk.bn(prefix + ".bn1", cout, size);
        walk.conv(prefix + ".conv2", cout, cout, 3, 1, 1, size);
        walk.bn(prefix + ".bn2", cout, size);
        if (projection) {
          walk.conv(prefix + ".shortcut", cin, cout, 1, stride, 0, in_size);
          walk.bn(prefix + ".shortcut_bn", cout, size);
        }
      }
      cin = cout;
    }
  }
  walk.pool("avgpool", cin);
  walk.linear("linear", cin, a.classifier_classes);
  return walk.take();
}

std::uint64_t mac_count(const ArchDescriptor& arch) {
  const auto layers = enumerate_layers(arch);
  return std::accumulate(layers.begin(), layers.end(), std::uint64_t{0},
                         [](std::uint64_t acc, const LayerCost& l) { return acc + l.macs; });
}

std::uint64_t param_count(const ArchDescriptor& arch) {
  const auto layers = enumerate_layers(arch);
  return std::accumulate(layers.begin(), layers.end(), std::uint64_t{0},
                         [](std::uint64_t acc, const LayerCost& l) { return acc + l.params; });
}

CostRatios ratios(const ArchDescriptor& base, const ArchDescriptor& scaled) {
  if (base.family != scaled.family)
    throw ConfigError("cost ratios need descriptors of the same family");
  return {static_cast<double>(mac_count(scaled)) / static_cast<double>(mac_count(base)),
          static_cast<double>(param_count(scaled)) / static_cast<double>(param_count(base))};
}

void write_layer_table(std::ostream& out, const std::vector<LayerCost>& layers) {
  std::size_t name_width = 5;
  for (const auto& l : layers) name_width = std::max(name_width, l.name.size());
  fmt::print(out, "{:<{}}  {:<7}  {:>16}  {:>14}  {:>12}\n", "layer", name_width, "kind",
             "output (CxHxW)", "macs", "params");
  std::uint64_t macs = 0, params = 0;
  for (const auto& l : layers) {
    fmt::print(out, "{:<{}}  {:<7}  {:>16}  {:>14}  {:>12}\n", l.name, name_width, l.kind,
               fmt::format("{}x{}x{}", l.channels, l.height, l.width), l.macs, l.params);
    macs += l.macs;
    params += l.params;
  }
  fmt::print(out, "{:<{}}  {:<7}  {:>16}  {:>14}  {:>12}\n", "total", name_width, "", "",
             macs, params);
}

void write_layer_csv(std::ostream& out, const std::vector<LayerCost>& layers) {
  out << "layer,kind,channels,height,width,macs,params\n";
  for (const auto& l : layers)
    fmt::print(out, "{},{},{},{},{},{},{}\n", l.name, l.kind, l.channels, l.height, l.width,
               l.macs, l.params);
}

}  // namespace meshnas
