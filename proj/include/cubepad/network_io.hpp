#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "cubepad/neural_net.hpp"

namespace cubepad {

// A network plus optional ConvLSTM weights, as stored in a JSON manifest
// that references CPT1 tensor files by path relative to the manifest.
// The schema is described in docs/formats.md.
struct NetworkBundle {
  NetworkSpec net;
  std::optional<ConvLSTMWeights> lstm;
};

NetworkBundle load_manifest(const std::filesystem::path& manifest);

// Writes the manifest and one .cpt file per tensor into the manifest's
// directory.
void save_manifest(const NetworkBundle& bundle, const std::filesystem::path& manifest);

struct ToyNetOptions {
  std::size_t input_channels = 3;
  std::size_t hidden_channels = 8;
  std::size_t classes = 4;
  std::size_t post_pool = 3;
};

// conv3x3(in -> hidden) ReLU, maxpool 2x2/2, conv3x3(hidden -> hidden) ReLU,
// 1x1 head to `classes`. He-uniform weights, zero biases.
NetworkSpec toy_network(std::uint64_t seed, const ToyNetOptions& options = {});

// Small He-uniform gate kernels, peepholes in [-0.1, 0.1], zero biases.
ConvLSTMWeights toy_convlstm(std::uint64_t seed, std::size_t channels);

}  // namespace cubepad
