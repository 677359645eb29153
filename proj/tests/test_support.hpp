#pragma once

#include <random>
#include <vector>

#include "ilash/model_graph.hpp"

namespace ilash::testing {

// Five stride-1 conv layers, spatial-preserving; kernels all distinct so
// every encode window in the chain is unique.
inline std::vector<LayerSpec> small_conv_template() {
  return {
      conv2d(3, 1, Padding::Same, 4),
      depthwise_conv2d(5, 1, Padding::Same),
      conv2d(1, 1, Padding::Valid, 6),
      depthwise_conv2d(7, 1, Padding::Same),
      conv2d(9, 1, Padding::Same, 6),
  };
}

// Depthwise chain with strictly increasing kernel sizes; arbitrary length
// with no spatial shrinkage, so windows stay unique at any depth.
inline std::vector<LayerSpec> odd_kernel_template(int depth) {
  std::vector<LayerSpec> layers;
  layers.push_back(conv2d(1, 1, Padding::Same, 4));
  for (int i = 1; i < depth; ++i) {
    layers.push_back(depthwise_conv2d(2 * i + 1, 1, Padding::Same));
  }
  return layers;
}

inline std::vector<double> random_unit_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

}  // namespace ilash::testing
