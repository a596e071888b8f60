#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cubepad/cube_padding.hpp"
#include "cubepad/sphere_geom.hpp"
#include "cubepad/tensor.hpp"

namespace cubepad {

enum class Activation { None, ReLU };

// Square odd kernel [c_out, c_in, k, k] with bias [c_out]; padding width is
// (k - 1) / 2 so stride 1 keeps the face size.
struct ConvLayer {
  Tensor kernel;
  Tensor bias;
  std::size_t stride = 1;
  PadMode pad = PadMode::Cube;
  Activation activation = Activation::ReLU;

  std::size_t out_channels() const { return kernel.dim(0); }
  std::size_t in_channels() const { return kernel.dim(1); }
  std::size_t kernel_size() const { return kernel.dim(2); }
  void validate() const;
};

// Max pooling with padding width (kernel - 1) / 2.
struct PoolLayer {
  std::size_t kernel = 2;
  std::size_t stride = 2;
};

struct UpsampleLayer {
  std::size_t factor = 2;
};

using Layer = std::variant<ConvLayer, PoolLayer, UpsampleLayer>;

struct NetworkSpec {
  std::vector<Layer> layers;
  Tensor head = Tensor::zeros({1, 1, 1, 1});  // [K, c_last, 1, 1]
  std::size_t post_pool = 3;   // stride-1 max pool after the channel max; 1 disables

  std::size_t classes() const { return head.dim(0); }
  std::size_t input_channels() const;
  // Feature width after the layer stack for an input of the given width.
  std::size_t output_extent(std::size_t extent) const;
  void validate() const;
};

// Gate kernels [K, c_in, 3, 3] (input) and [K, K, 3, 3] (hidden); peephole
// weights and biases are per-channel vectors [K].
struct ConvLSTMWeights {
  Tensor x_i, x_f, x_c, x_o;
  Tensor h_i, h_f, h_c, h_o;
  Tensor c_i, c_f, c_o;
  Tensor b_i, b_f, b_c, b_o;

  std::size_t channels() const { return b_i.dim(0); }
  std::size_t input_channels() const { return x_i.dim(1); }
  void validate() const;
  static ConvLSTMWeights zeros(std::size_t channels, std::size_t input_channels);
};

struct ConvLSTMState {
  CubeMap hidden;
  CubeMap cell;

  static ConvLSTMState zeros(std::size_t channels, std::size_t width);
};

CubeMap conv2d(const CubeMap& x, const ConvLayer& layer);
CubeMap maxpool(const CubeMap& x, std::size_t kernel, std::size_t stride, PadMode pad);

// Half-pixel (align_corners = false) bilinear upsampling, edges clamped.
CubeMap upsample_bilinear(const CubeMap& x, std::size_t factor);
EquirectMap upsample_bilinear(const EquirectMap& x, std::size_t factor);
EquirectMap resize_bilinear(const EquirectMap& x, std::size_t height, std::size_t width);

// 1x1 convolution by the classifier weights w_fc [K, c, 1, 1].
CubeMap saliency_head(const CubeMap& features, const Tensor& w_fc);
CubeMap channel_max(const CubeMap& x);

ConvLSTMState convlstm_step(const ConvLSTMState& state, const CubeMap& input,
                            const ConvLSTMWeights& weights, PadMode pad = PadMode::Cube);

enum class PipelineMode { CP, ZP, EQUI, OVERLAP };
const char* pipeline_mode_name(PipelineMode m);
PipelineMode parse_pipeline_mode(const std::string& name);

inline constexpr double kOverlapFov = 2.0943951023931957;  // 120 degrees

// Min-max normalisation to [0, 1]; a flat map becomes all zeros.
EquirectMap normalize_min_max(const EquirectMap& m);

// Frame -> saliency pipeline with its projection tables built once. run()
// is const and safe to call from several threads.
class StaticPipeline {
 public:
  // q, p are both the frame and the output size; p must equal 2q.
  StaticPipeline(const NetworkSpec& net, PipelineMode mode, std::size_t q, std::size_t p);
  ~StaticPipeline();
  StaticPipeline(StaticPipeline&&) noexcept;

  EquirectMap run(const EquirectMap& frame) const;

  PipelineMode mode() const;
  // Face width fed to the network (p/4, or the widened overlap face).
  std::size_t face_width() const;
  // Pixels entering the first layer.
  std::size_t input_pixels() const;

 private:
  friend class TemporalPipeline;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class TemporalPipeline {
 public:
  TemporalPipeline(const NetworkSpec& net, const ConvLSTMWeights& lstm, PipelineMode mode,
                   std::size_t q, std::size_t p, std::size_t z);
  ~TemporalPipeline();

  // Zero state at frames 0, Z, 2Z, ...
  std::vector<EquirectMap> run(std::span<const EquirectMap> frames) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

EquirectMap forward_static(const EquirectMap& frame, const NetworkSpec& net, PipelineMode mode);
std::vector<EquirectMap> forward_temporal(std::span<const EquirectMap> frames,
                                          const NetworkSpec& net, const ConvLSTMWeights& lstm,
                                          std::size_t z, PipelineMode mode = PipelineMode::CP);

}  // namespace cubepad
