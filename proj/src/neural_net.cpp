#include "cubepad/neural_net.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>

#include "feature_ops.hpp"

namespace cubepad {
namespace {

using detail::Stack;

void expect_dims(const Tensor& t, const Dims& want, const char* what) {
  if (t.dims() != want)
    throw ShapeError(std::string(what) + " must be " + dims_to_string(want) + ", got " +
                     dims_to_string(t.dims()));
}

std::size_t window_extent(std::size_t extent, std::size_t kernel, std::size_t stride) {
  const std::size_t padded = extent + 2 * ((kernel - 1) / 2);
  if (padded < kernel) throw ShapeError("window larger than padded extent");
  return (padded - kernel) / stride + 1;
}

PadMode trunk_pad(PipelineMode m) { return m == PipelineMode::CP ? PadMode::Cube : PadMode::Zero; }

Stack cube_stack_from_channel_major(std::vector<float> cm, std::size_t channels, std::size_t w) {
  // Resampler output is [c, 6, w, w]; the stack wants [6, c, w, w].
  Stack s(kFaceCount, channels, w, w);
  const std::size_t plane = w * w;
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t f = 0; f < kFaceCount; ++f)
      std::copy_n(cm.data() + (c * kFaceCount + f) * plane, plane, s.plane_ptr(f, c));
  return s;
}

Stack crop_faces(const Stack& x, std::size_t offset, std::size_t size) {
  Stack out(x.groups, x.channels, size, size);
  for (std::size_t g = 0; g < x.groups; ++g)
    for (std::size_t c = 0; c < x.channels; ++c) {
      const float* src = x.plane_ptr(g, c);
      float* dst = out.plane_ptr(g, c);
      for (std::size_t y = 0; y < size; ++y)
        std::copy_n(src + (y + offset) * x.width + offset, size, dst + y * size);
    }
  return out;
}

}  // namespace

void ConvLayer::validate() const {
  if (kernel.ndim() != 4) throw ShapeError("conv kernel must have rank 4");
  if (kernel.dim(2) != kernel.dim(3) || kernel.dim(2) % 2 == 0)
    throw ShapeError("conv kernel must be square with odd size, got " +
                     dims_to_string(kernel.dims()));
  expect_dims(bias, {kernel.dim(0)}, "conv bias");
  if (stride < 1) throw ArgumentError("conv stride must be positive");
}

std::size_t NetworkSpec::input_channels() const {
  for (const Layer& l : layers)
    if (const auto* c = std::get_if<ConvLayer>(&l)) return c->in_channels();
  return head.dim(1);
}

std::size_t NetworkSpec::output_extent(std::size_t extent) const {
  for (const Layer& l : layers) {
    if (const auto* c = std::get_if<ConvLayer>(&l)) {
      extent = window_extent(extent, c->kernel_size(), c->stride);
    } else if (const auto* p = std::get_if<PoolLayer>(&l)) {
      extent = window_extent(extent, p->kernel, p->stride);
    } else {
      extent *= std::get<UpsampleLayer>(l).factor;
    }
  }
  return extent;
}

void NetworkSpec::validate() const {
  if (head.ndim() != 4 || head.dim(2) != 1 || head.dim(3) != 1)
    throw ShapeError("head weight must be [K, c, 1, 1], got " + dims_to_string(head.dims()));
  std::size_t channels = input_channels();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    if (const auto* c = std::get_if<ConvLayer>(&l)) {
      c->validate();
      if (c->in_channels() != channels)
        throw ShapeError("layer " + std::to_string(i) + " expects " +
                         std::to_string(c->in_channels()) + " channels, previous layer gives " +
                         std::to_string(channels));
      channels = c->out_channels();
    } else if (const auto* p = std::get_if<PoolLayer>(&l)) {
      if (p->kernel < 1 || p->stride < 1)
        throw ArgumentError("pool kernel and stride must be positive");
    } else if (std::get<UpsampleLayer>(l).factor < 1) {
      throw ArgumentError("upsample factor must be positive");
    }
  }
  if (head.dim(1) != channels)
    throw ShapeError("head expects " + std::to_string(head.dim(1)) +
                     " channels, last layer gives " + std::to_string(channels));
  if (post_pool < 1 || post_pool % 2 == 0)
    throw ArgumentError("post pool kernel must be odd and positive");
}

void ConvLSTMWeights::validate() const {
  if (b_i.ndim() != 1) throw ShapeError("ConvLSTM biases must be vectors");
  const std::size_t k = channels();
  if (x_i.ndim() != 4) throw ShapeError("ConvLSTM input kernels must have rank 4");
  const std::size_t cin = input_channels();
  for (const Tensor* t : {&x_i, &x_f, &x_c, &x_o}) expect_dims(*t, {k, cin, 3, 3}, "ConvLSTM input kernel");
  for (const Tensor* t : {&h_i, &h_f, &h_c, &h_o}) expect_dims(*t, {k, k, 3, 3}, "ConvLSTM hidden kernel");
  for (const Tensor* t : {&c_i, &c_f, &c_o, &b_i, &b_f, &b_c, &b_o})
    expect_dims(*t, {k}, "ConvLSTM peephole/bias vector");
}

ConvLSTMWeights ConvLSTMWeights::zeros(std::size_t channels, std::size_t input_channels) {
  const Tensor xk = Tensor::zeros({channels, input_channels, 3, 3});
  const Tensor hk = Tensor::zeros({channels, channels, 3, 3});
  const Tensor v = Tensor::zeros({channels});
  return {xk, xk, xk, xk, hk, hk, hk, hk, v, v, v, v, v, v, v};
}

ConvLSTMState ConvLSTMState::zeros(std::size_t channels, std::size_t width) {
  return {CubeMap::filled(channels, width, 0.0f), CubeMap::filled(channels, width, 0.0f)};
}

CubeMap conv2d(const CubeMap& x, const ConvLayer& layer) {
  layer.validate();
  return detail::to_cubemap(detail::conv(detail::from_cubemap(x), layer.kernel, &layer.bias,
                                         layer.stride, layer.pad, layer.activation));
}

CubeMap maxpool(const CubeMap& x, std::size_t kernel, std::size_t stride, PadMode pad) {
  return detail::to_cubemap(detail::maxpool(detail::from_cubemap(x), kernel, stride, pad));
}

CubeMap upsample_bilinear(const CubeMap& x, std::size_t factor) {
  if (factor < 1) throw ArgumentError("upsample factor must be positive");
  return detail::to_cubemap(
      detail::resize(detail::from_cubemap(x), x.width() * factor, x.width() * factor));
}

EquirectMap upsample_bilinear(const EquirectMap& x, std::size_t factor) {
  if (factor < 1) throw ArgumentError("upsample factor must be positive");
  return resize_bilinear(x, x.height() * factor, x.width() * factor);
}

EquirectMap resize_bilinear(const EquirectMap& x, std::size_t height, std::size_t width) {
  return detail::to_equirect(detail::resize(detail::from_equirect(x), height, width));
}

CubeMap saliency_head(const CubeMap& features, const Tensor& w_fc) {
  return detail::to_cubemap(detail::head(detail::from_cubemap(features), w_fc));
}

CubeMap channel_max(const CubeMap& x) {
  return detail::to_cubemap(detail::channel_max(detail::from_cubemap(x)));
}

ConvLSTMState convlstm_step(const ConvLSTMState& state, const CubeMap& input,
                            const ConvLSTMWeights& weights, PadMode pad) {
  detail::LstmState s{detail::from_cubemap(state.hidden), detail::from_cubemap(state.cell)};
  detail::LstmState next = detail::lstm_step(s, detail::from_cubemap(input), weights, pad);
  return {detail::to_cubemap(std::move(next.hidden)), detail::to_cubemap(std::move(next.cell))};
}

const char* pipeline_mode_name(PipelineMode m) {
  switch (m) {
    case PipelineMode::CP: return "CP";
    case PipelineMode::ZP: return "ZP";
    case PipelineMode::EQUI: return "EQUI";
    case PipelineMode::OVERLAP: return "OVERLAP";
  }
  return "?";
}

PipelineMode parse_pipeline_mode(const std::string& name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (PipelineMode m : {PipelineMode::CP, PipelineMode::ZP, PipelineMode::EQUI, PipelineMode::OVERLAP})
    if (up == pipeline_mode_name(m)) return m;
  throw ArgumentError("unknown pipeline mode '" + name + "' (expected CP, ZP, EQUI or OVERLAP)");
}

EquirectMap normalize_min_max(const EquirectMap& m) {
  const auto d = m.data();
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  std::vector<float> out(d.size(), 0.0f);
  if (*hi > *lo) {
    const double a = *lo, range = static_cast<double>(*hi) - a;
    for (std::size_t i = 0; i < d.size(); ++i)
      out[i] = static_cast<float>((static_cast<double>(d[i]) - a) / range);
  }
  return EquirectMap(m.channels(), m.height(), m.width(), std::move(out));
}

struct StaticPipeline::Impl {
  NetworkSpec net;
  PipelineMode mode = PipelineMode::CP;
  std::size_t q = 0, p = 0;
  std::size_t face = 0;         // width fed to the trunk
  std::size_t feature_face = 0; // trunk output width of the retained faces
  std::size_t crop_offset = 0;
  std::optional<Resampler> project;
  std::optional<Resampler> unproject;

  bool cube() const { return mode != PipelineMode::EQUI; }

  void check_frame(const EquirectMap& frame) const {
    if (frame.height() != q || frame.width() != p)
      throw ArgumentError("frame is " + std::to_string(frame.height()) + "x" +
                          std::to_string(frame.width()) + ", pipeline expects " +
                          std::to_string(q) + "x" + std::to_string(p));
    if (frame.channels() != net.input_channels())
      throw ShapeError("frame has " + std::to_string(frame.channels()) +
                       " channels, network expects " + std::to_string(net.input_channels()));
  }

  // Frame -> head output M_S.
  Stack features(const EquirectMap& frame) const {
    check_frame(frame);
    Stack x = cube() ? cube_stack_from_channel_major(project->apply(frame.data(), frame.channels()),
                                                     frame.channels(), face)
                     : detail::from_equirect(frame);
    x = detail::trunk(x, net, trunk_pad(mode));
    return detail::head(x, net.head);
  }

  // Multi-channel response -> normalised saliency map [1, q, p].
  EquirectMap finish(const Stack& response) const {
    Stack s = detail::channel_max(response);
    if (net.post_pool > 1) s = detail::maxpool(s, net.post_pool, 1, trunk_pad(mode));
    if (cube()) {
      if (mode == PipelineMode::OVERLAP) s = crop_faces(s, crop_offset, feature_face);
      std::vector<float> eq = unproject->apply(s.data, 1);
      Stack flat(1, 1, 2 * feature_face, 4 * feature_face);
      flat.data = std::move(eq);
      s = std::move(flat);
    }
    s = detail::resize(s, q, p);
    return normalize_min_max(detail::to_equirect(std::move(s)));
  }
};

StaticPipeline::StaticPipeline(const NetworkSpec& net, PipelineMode mode, std::size_t q,
                               std::size_t p)
    : impl_(std::make_unique<Impl>()) {
  net.validate();
  if (q < 1 || p != 2 * q)
    throw ArgumentError("frame must be canonical (p = 2q), got " + std::to_string(q) + "x" +
                        std::to_string(p));
  Impl& im = *impl_;
  im.net = net;
  im.mode = mode;
  im.q = q;
  im.p = p;
  if (mode == PipelineMode::EQUI) {
    im.face = 0;
    im.net.output_extent(q);
    im.net.output_extent(p);
    return;
  }
  if (p % 4 != 0) throw ArgumentError("cube pipelines need p divisible by 4");
  const std::size_t w = p / 4;
  if (mode == PipelineMode::OVERLAP) {
    const std::size_t wide = overlap_face_width(w, kOverlapFov);
    im.face = wide;
    im.feature_face = im.net.output_extent(w);
    const std::size_t wide_out = im.net.output_extent(wide);
    im.crop_offset = (wide_out - im.feature_face) / 2;
    im.project = Resampler::equirect_to_cube(p, q, wide, std::tan(kOverlapFov / 2.0));
  } else {
    im.face = w;
    im.feature_face = im.net.output_extent(w);
    im.project = Resampler::equirect_to_cube(p, q, w);
  }
  if (im.feature_face < 1) throw ShapeError("network reduces the face to nothing");
  im.unproject = Resampler::cube_to_equirect(im.feature_face, 4 * im.feature_face,
                                             2 * im.feature_face);
}

StaticPipeline::~StaticPipeline() = default;
StaticPipeline::StaticPipeline(StaticPipeline&&) noexcept = default;

EquirectMap StaticPipeline::run(const EquirectMap& frame) const {
  return impl_->finish(impl_->features(frame));
}

PipelineMode StaticPipeline::mode() const { return impl_->mode; }
std::size_t StaticPipeline::face_width() const { return impl_->face; }
std::size_t StaticPipeline::input_pixels() const {
  return impl_->cube() ? kFaceCount * impl_->face * impl_->face : impl_->q * impl_->p;
}

struct TemporalPipeline::Impl {
  StaticPipeline stat;
  ConvLSTMWeights lstm;
  std::size_t z;
};

TemporalPipeline::TemporalPipeline(const NetworkSpec& net, const ConvLSTMWeights& lstm,
                                   PipelineMode mode, std::size_t q, std::size_t p, std::size_t z)
    : impl_(std::make_unique<Impl>(Impl{StaticPipeline(net, mode, q, p), lstm, z})) {
  if (z < 1) throw ArgumentError("Z must be at least 1");
  lstm.validate();
  if (lstm.input_channels() != net.classes())
    throw ShapeError("ConvLSTM input channels " + std::to_string(lstm.input_channels()) +
                     " do not match the head's " + std::to_string(net.classes()) + " classes");
}

TemporalPipeline::~TemporalPipeline() = default;

std::vector<EquirectMap> TemporalPipeline::run(std::span<const EquirectMap> frames) const {
  if (frames.empty()) throw ArgumentError("temporal pipeline needs at least one frame");
  const StaticPipeline::Impl& st = *impl_->stat.impl_;
  const PadMode pad = trunk_pad(st.mode);
  const std::size_t k = impl_->lstm.channels();
  std::vector<EquirectMap> out;
  out.reserve(frames.size());
  detail::LstmState state;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const Stack ms = st.features(frames[t]);
    if (t % impl_->z == 0)
      state = {Stack(ms.groups, k, ms.height, ms.width), Stack(ms.groups, k, ms.height, ms.width)};
    state = detail::lstm_step(state, ms, impl_->lstm, pad);
    out.push_back(st.finish(state.hidden));
  }
  return out;
}

EquirectMap forward_static(const EquirectMap& frame, const NetworkSpec& net, PipelineMode mode) {
  return StaticPipeline(net, mode, frame.height(), frame.width()).run(frame);
}

std::vector<EquirectMap> forward_temporal(std::span<const EquirectMap> frames,
                                          const NetworkSpec& net, const ConvLSTMWeights& lstm,
                                          std::size_t z, PipelineMode mode) {
  if (frames.empty()) throw ArgumentError("temporal pipeline needs at least one frame");
  return TemporalPipeline(net, lstm, mode, frames[0].height(), frames[0].width(), z).run(frames);
}

}  // namespace cubepad
