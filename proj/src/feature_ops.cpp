#include "feature_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cubepad::detail {
namespace {

inline float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

// Half-pixel source coordinate, clamped to the valid range.
struct AxisTap {
  std::size_t i0, i1;
  double frac;
};

std::vector<AxisTap> axis_taps(std::size_t in, std::size_t out) {
  std::vector<AxisTap> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  const double last = static_cast<double>(in - 1);
  for (std::size_t o = 0; o < out; ++o) {
    const double s = std::clamp((static_cast<double>(o) + 0.5) * scale - 0.5, 0.0, last);
    const double base = std::floor(s);
    const auto i0 = static_cast<std::size_t>(base);
    taps[o] = {i0, std::min(i0 + 1, in - 1), s - base};
  }
  return taps;
}

}  // namespace

Stack from_cubemap(const CubeMap& cm) {
  Stack s;
  s.groups = kFaceCount;
  s.channels = cm.channels();
  s.height = s.width = cm.width();
  s.data.assign(cm.data().begin(), cm.data().end());
  return s;
}

CubeMap to_cubemap(Stack s) {
  if (s.groups != kFaceCount || s.height != s.width)
    throw ShapeError("feature stack is not a cubemap");
  return CubeMap(s.channels, s.width, std::move(s.data));
}

Stack from_equirect(const EquirectMap& m) {
  Stack s;
  s.groups = 1;
  s.channels = m.channels();
  s.height = m.height();
  s.width = m.width();
  s.data.assign(m.data().begin(), m.data().end());
  return s;
}

EquirectMap to_equirect(Stack s) {
  if (s.groups != 1) throw ShapeError("feature stack is not a single equirect raster");
  return EquirectMap(s.channels, s.height, s.width, std::move(s.data));
}

Stack pad(const Stack& x, std::size_t k, PadMode mode) {
  if (k == 0) return x;
  Stack out(x.groups, x.channels, x.height + 2 * k, x.width + 2 * k);
  if (mode == PadMode::Cube) {
    if (x.groups != kFaceCount || x.height != x.width)
      throw ShapeError("cube padding needs a 6-face stack of square planes");
    cube_pad_into(x.data, x.channels, x.width, k, CornerFill::EdgeAverage, out.data);
  } else {
    zero_pad_into(x.data, x.groups * x.channels, x.height, x.width, k, out.data);
  }
  return out;
}

namespace {

// Stride-1 convolution over a materialised padded plane. Each tap is one
// pass over the plane treated as a flat array; the 2k columns that straddle
// two padded rows are computed and then dropped.
void conv_flat_padded(const Stack& padded, const float* kw, std::size_t ci, std::size_t ks,
                      std::size_t o, std::size_t g, float init, float* dst, std::size_t oh,
                      std::size_t ow, std::vector<float>& scratch) {
  const std::size_t pw = padded.width;
  const std::size_t span = (oh - 1) * pw + ow;
  scratch.assign(span, init);
  float* acc = scratch.data();
  for (std::size_t i = 0; i < ci; ++i) {
    const float* src = padded.plane_ptr(g, i);
    for (std::size_t ky = 0; ky < ks; ++ky)
      for (std::size_t kx = 0; kx < ks; ++kx) {
        const float wv = kw[((o * ci + i) * ks + ky) * ks + kx];
        const float* s = src + ky * pw + kx;
        for (std::size_t n = 0; n < span; ++n) acc[n] += wv * s[n];
      }
  }
  for (std::size_t y = 0; y < oh; ++y) std::copy_n(acc + y * pw, ow, dst + y * ow);
}

// Stride-1 convolution with implicit zero padding. Flat passes as above,
// but over the unpadded plane: positions whose tap would fall in the zero
// border instead read a neighbouring row, so they are saved beforehand and
// restored afterwards (a zero tap leaves them unchanged).
void conv_flat_zero(const Stack& x, const float* kw, std::size_t ci, std::size_t ks,
                    std::size_t o, std::size_t g, float* dst, std::vector<float>& saved) {
  const std::size_t h = x.height, w = x.width, k = (ks - 1) / 2;
  for (std::size_t i = 0; i < ci; ++i) {
    const float* src = x.plane_ptr(g, i);
    for (std::size_t ky = 0; ky < ks; ++ky) {
      const std::size_t y_lo = ky < k ? k - ky : 0;
      const std::size_t y_hi = std::min(h, h + k - ky);
      if (y_lo >= y_hi) continue;
      for (std::size_t kx = 0; kx < ks; ++kx) {
        const float wv = kw[((o * ci + i) * ks + ky) * ks + kx];
        const std::size_t left = kx < k ? k - kx : 0;   // bad columns [0, left)
        const std::size_t right = kx > k ? kx - k : 0;  // bad columns [w - right, w)
        if (left >= w || right >= w) continue;
        const std::size_t n_lo = y_lo * w + left, n_hi = y_hi * w - right;
        // Output n_lo reads source row y_lo + ky - k, column left + kx - k.
        const float* s = src + (y_lo + ky - k) * w + left + kx - k;
        float* d = dst + n_lo;
        saved.clear();
        if (left || right)
          for (std::size_t y = y_lo; y < y_hi; ++y) {
            for (std::size_t c = w - right; c < w && y + 1 < y_hi; ++c) saved.push_back(dst[y * w + c]);
            for (std::size_t c = 0; c < left && y > y_lo; ++c) saved.push_back(dst[y * w + c]);
          }
        for (std::size_t n = 0; n < n_hi - n_lo; ++n) d[n] += wv * s[n];
        if (left || right) {
          std::size_t m = 0;
          for (std::size_t y = y_lo; y < y_hi; ++y) {
            for (std::size_t c = w - right; c < w && y + 1 < y_hi; ++c) dst[y * w + c] = saved[m++];
            for (std::size_t c = 0; c < left && y > y_lo; ++c) dst[y * w + c] = saved[m++];
          }
        }
      }
    }
  }
}

}  // namespace

Stack conv(const Stack& x, const Tensor& kernel, const Tensor* bias, std::size_t stride,
           PadMode mode, Activation act) {
  if (kernel.ndim() != 4 || kernel.dim(2) != kernel.dim(3) || kernel.dim(2) % 2 == 0)
    throw ShapeError("conv kernel must be [c_out, c_in, k, k] with odd k");
  const std::size_t co = kernel.dim(0), ci = kernel.dim(1), ks = kernel.dim(2);
  if (ci != x.channels)
    throw ShapeError("conv expects " + std::to_string(ci) + " input channels, got " +
                     std::to_string(x.channels));
  if (bias && (bias->ndim() != 1 || bias->dim(0) != co))
    throw ShapeError("conv bias must be [c_out]");
  if (stride < 1) throw ArgumentError("conv stride must be positive");
  const std::size_t k = (ks - 1) / 2;
  if (x.height + 2 * k < ks || x.width + 2 * k < ks)
    throw ShapeError("conv kernel larger than padded input");
  // Zero padding stays implicit; cube padding materialises the neighbour
  // strips first.
  const bool implicit = mode == PadMode::Zero;
  const Stack padded = implicit || k == 0 ? Stack() : pad(x, k, mode);
  const bool materialised = !implicit && k > 0;
  const std::size_t oh = (x.height + 2 * k - ks) / stride + 1;
  const std::size_t ow = (x.width + 2 * k - ks) / stride + 1;
  Stack out(x.groups, co, oh, ow);
  const float* kw = kernel.data().data();
  std::vector<float> scratch;
  for (std::size_t g = 0; g < x.groups; ++g) {
    for (std::size_t o = 0; o < co; ++o) {
      float* dst = out.plane_ptr(g, o);
      const float init = bias ? (*bias)[o] : 0.0f;
      if (stride == 1 && materialised) {
        conv_flat_padded(padded, kw, ci, ks, o, g, init, dst, oh, ow, scratch);
      } else if (stride == 1) {
        std::fill(dst, dst + oh * ow, init);
        conv_flat_zero(x, kw, ci, ks, o, g, dst, scratch);
      } else {
        std::fill(dst, dst + oh * ow, init);
        const Stack& src_stack = materialised ? padded : x;
        const std::size_t shift = materialised ? 0 : k;
        const std::size_t sh = src_stack.height, sw = src_stack.width;
        for (std::size_t i = 0; i < ci; ++i) {
          const float* src = src_stack.plane_ptr(g, i);
          for (std::size_t ky = 0; ky < ks; ++ky)
            for (std::size_t kx = 0; kx < ks; ++kx) {
              const float wv = kw[((o * ci + i) * ks + ky) * ks + kx];
              for (std::size_t oy = 0; oy < oh; ++oy) {
                const std::size_t iy = oy * stride + ky;
                if (iy < shift || iy >= sh + shift) continue;
                const float* row = src + (iy - shift) * sw;
                float* drow = dst + oy * ow;
                for (std::size_t ox = 0; ox < ow; ++ox) {
                  const std::size_t ix = ox * stride + kx;
                  if (ix >= shift && ix < sw + shift) drow[ox] += wv * row[ix - shift];
                }
              }
            }
        }
      }
      if (act == Activation::ReLU)
        for (std::size_t n = 0; n < oh * ow; ++n) dst[n] = std::max(dst[n], 0.0f);
    }
  }
  return out;
}

Stack maxpool(const Stack& x, std::size_t kernel, std::size_t stride, PadMode mode) {
  if (kernel < 1 || stride < 1) throw ArgumentError("pool kernel and stride must be positive");
  const std::size_t k = (kernel - 1) / 2;
  const Stack padded_copy = k ? pad(x, k, mode) : Stack();
  const Stack& padded = k ? padded_copy : x;
  const std::size_t ph = padded.height, pw = padded.width;
  if (kernel > ph || kernel > pw) throw ShapeError("pool kernel larger than padded input");
  const std::size_t oh = (ph - kernel) / stride + 1, ow = (pw - kernel) / stride + 1;
  Stack out(x.groups, x.channels, oh, ow);
  for (std::size_t g = 0; g < x.groups; ++g) {
    for (std::size_t c = 0; c < x.channels; ++c) {
      const float* src = padded.plane_ptr(g, c);
      float* dst = out.plane_ptr(g, c);
      for (std::size_t oy = 0; oy < oh; ++oy) {
        float* drow = dst + oy * ow;
        std::fill(drow, drow + ow, -std::numeric_limits<float>::infinity());
        for (std::size_t ky = 0; ky < kernel; ++ky) {
          const float* row = src + (oy * stride + ky) * pw;
          for (std::size_t kx = 0; kx < kernel; ++kx) {
            const float* r = row + kx;
            if (stride == 1) {
              for (std::size_t ox = 0; ox < ow; ++ox) drow[ox] = std::max(drow[ox], r[ox]);
            } else {
              for (std::size_t ox = 0; ox < ow; ++ox) drow[ox] = std::max(drow[ox], r[ox * stride]);
            }
          }
        }
      }
    }
  }
  return out;
}

Stack resize(const Stack& x, std::size_t height, std::size_t width) {
  if (height < 1 || width < 1) throw ArgumentError("resize target must be at least 1x1");
  if (height == x.height && width == x.width) return x;
  const auto ty = axis_taps(x.height, height);
  const auto tx = axis_taps(x.width, width);
  Stack out(x.groups, x.channels, height, width);
  for (std::size_t g = 0; g < x.groups; ++g) {
    for (std::size_t c = 0; c < x.channels; ++c) {
      const float* src = x.plane_ptr(g, c);
      float* dst = out.plane_ptr(g, c);
      for (std::size_t y = 0; y < height; ++y) {
        const float* r0 = src + ty[y].i0 * x.width;
        const float* r1 = src + ty[y].i1 * x.width;
        for (std::size_t xo = 0; xo < width; ++xo) {
          const AxisTap& t = tx[xo];
          const double a = r0[t.i0], b = r0[t.i1], cc = r1[t.i0], d = r1[t.i1];
          const double top = a + (b - a) * t.frac;
          const double bottom = cc + (d - cc) * t.frac;
          dst[y * width + xo] = static_cast<float>(top + (bottom - top) * ty[y].frac);
        }
      }
    }
  }
  return out;
}

Stack head(const Stack& x, const Tensor& w_fc) {
  if (w_fc.ndim() != 4 || w_fc.dim(2) != 1 || w_fc.dim(3) != 1)
    throw ShapeError("head weight must be [K, c, 1, 1]");
  return conv(x, w_fc, nullptr, 1, PadMode::Zero, Activation::None);
}

Stack channel_max(const Stack& x) {
  Stack out(x.groups, 1, x.height, x.width);
  for (std::size_t g = 0; g < x.groups; ++g) {
    float* dst = out.plane_ptr(g, 0);
    std::copy_n(x.plane_ptr(g, 0), x.plane(), dst);
    for (std::size_t c = 1; c < x.channels; ++c) {
      const float* src = x.plane_ptr(g, c);
      for (std::size_t n = 0; n < x.plane(); ++n) dst[n] = std::max(dst[n], src[n]);
    }
  }
  return out;
}

LstmState lstm_step(const LstmState& state, const Stack& input, const ConvLSTMWeights& w,
                    PadMode mode) {
  w.validate();
  const std::size_t k = w.channels();
  const Stack& h = state.hidden;
  const Stack& c = state.cell;
  if (h.channels != k || c.channels != k || h.groups != c.groups || h.height != c.height ||
      h.width != c.width)
    throw ShapeError("ConvLSTM state does not match the weights");
  if (input.groups != h.groups || input.height != h.height || input.width != h.width)
    throw ShapeError("ConvLSTM input does not match the state layout");
  if (input.channels != w.input_channels())
    throw ShapeError("ConvLSTM input channel count does not match the weights");

  auto gate = [&](const Tensor& wx, const Tensor& wh) {
    Stack a = conv(input, wx, nullptr, 1, mode, Activation::None);
    const Stack b = conv(h, wh, nullptr, 1, mode, Activation::None);
    for (std::size_t n = 0; n < a.data.size(); ++n) a.data[n] += b.data[n];
    return a;
  };
  const Stack gi = gate(w.x_i, w.h_i);
  const Stack gf = gate(w.x_f, w.h_f);
  const Stack gc = gate(w.x_c, w.h_c);
  const Stack go = gate(w.x_o, w.h_o);

  LstmState next{Stack(h.groups, k, h.height, h.width), Stack(h.groups, k, h.height, h.width)};
  const std::size_t plane = h.plane();
  for (std::size_t g = 0; g < h.groups; ++g) {
    for (std::size_t ch = 0; ch < k; ++ch) {
      const std::size_t base = (g * k + ch) * plane;
      const float wci = w.c_i[ch], wcf = w.c_f[ch], wco = w.c_o[ch];
      const float bi = w.b_i[ch], bf = w.b_f[ch], bc = w.b_c[ch], bo = w.b_o[ch];
      for (std::size_t n = base; n < base + plane; ++n) {
        const float prev = c.data[n];
        const float i = sigmoid(gi.data[n] + wci * prev + bi);
        const float f = sigmoid(gf.data[n] + wcf * prev + bf);
        const float cand = std::tanh(gc.data[n] + bc);
        const float cell = i * cand + f * prev;
        const float o = sigmoid(go.data[n] + wco * cell + bo);
        next.cell.data[n] = cell;
        next.hidden.data[n] = o * std::tanh(cell);
      }
    }
  }
  return next;
}

Stack trunk(const Stack& x, const NetworkSpec& net, PadMode mode) {
  Stack cur = x;
  for (const Layer& layer : net.layers) {
    if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      cur = conv(cur, c->kernel, &c->bias, c->stride, mode, c->activation);
    } else if (const auto* p = std::get_if<PoolLayer>(&layer)) {
      cur = maxpool(cur, p->kernel, p->stride, mode);
    } else {
      const auto& u = std::get<UpsampleLayer>(layer);
      cur = resize(cur, cur.height * u.factor, cur.width * u.factor);
    }
  }
  return cur;
}

}  // namespace cubepad::detail
