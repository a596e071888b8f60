#pragma once

// Layer kernels over a stack of plane groups: [groups, channels, h, w].
// A cubemap is 6 groups of square planes; an equirect map is one group.

#include <cstddef>
#include <vector>

#include "cubepad/neural_net.hpp"

namespace cubepad::detail {

struct Stack {
  std::size_t groups = 0, channels = 0, height = 0, width = 0;
  std::vector<float> data;

  Stack() = default;
  Stack(std::size_t g, std::size_t c, std::size_t h, std::size_t w)
      : groups(g), channels(c), height(h), width(w), data(g * c * h * w, 0.0f) {}

  std::size_t plane() const { return height * width; }
  float* plane_ptr(std::size_t g, std::size_t c) { return data.data() + (g * channels + c) * plane(); }
  const float* plane_ptr(std::size_t g, std::size_t c) const {
    return data.data() + (g * channels + c) * plane();
  }
};

Stack from_cubemap(const CubeMap& cm);
CubeMap to_cubemap(Stack s);
Stack from_equirect(const EquirectMap& m);
EquirectMap to_equirect(Stack s);

Stack pad(const Stack& x, std::size_t k, PadMode mode);

// Valid cross-correlation after padding by (k - 1) / 2. bias may be null.
Stack conv(const Stack& x, const Tensor& kernel, const Tensor* bias, std::size_t stride,
           PadMode mode, Activation act);
Stack maxpool(const Stack& x, std::size_t kernel, std::size_t stride, PadMode mode);
Stack resize(const Stack& x, std::size_t height, std::size_t width);
Stack head(const Stack& x, const Tensor& w_fc);
Stack channel_max(const Stack& x);

struct LstmState {
  Stack hidden, cell;
};
LstmState lstm_step(const LstmState& state, const Stack& input, const ConvLSTMWeights& w,
                    PadMode mode);

// Runs every layer of the network with all convolutions and pools in `mode`.
Stack trunk(const Stack& x, const NetworkSpec& net, PadMode mode);

}  // namespace cubepad::detail
