#pragma once

// Shared fixtures and brute-force oracles for the unit and acceptance
// tests. Nothing here calls into the padding or layer kernels under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <unistd.h>

#include "cubepad/cube_padding.hpp"
#include "cubepad/neural_net.hpp"
#include "cubepad/rng.hpp"
#include "cubepad/sphere_geom.hpp"
#include "cubepad/tensor.hpp"

namespace testing {

using namespace cubepad;

inline std::vector<float> random_values(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

inline CubeMap random_cubemap(Rng& rng, std::size_t c, std::size_t w, double lo = -1.0,
                              double hi = 1.0) {
  return CubeMap(c, w, random_values(rng, kFaceCount * c * w * w, lo, hi));
}

inline EquirectMap random_equirect(Rng& rng, std::size_t c, std::size_t q, std::size_t p,
                                   double lo = 0.0, double hi = 1.0) {
  return EquirectMap(c, q, p, random_values(rng, c * q * p, lo, hi));
}

inline Tensor random_tensor(Rng& rng, Dims dims, double lo = -1.0, double hi = 1.0) {
  const std::size_t n = element_count(dims);
  return Tensor(std::move(dims), random_values(rng, n, lo, hi));
}

// Where padded texel (row, col) of face f reads from, found by unfolding
// the neighbouring face into the plane of f. Valid for edge bands only
// (exactly one coordinate outside the face).
struct SourceTexel {
  Face face;
  std::size_t row, col;
};

inline SourceTexel unfold_source(Face f, long row, long col, std::size_t w) {
  const double wd = static_cast<double>(w);
  const double u = (2.0 * static_cast<double>(col) + 1.0) / wd - 1.0;
  const double v = (2.0 * static_cast<double>(row) + 1.0) / wd - 1.0;
  const FaceAxes& a = face_axes(f);
  Vec3 p;
  if (u > 1.0) p = (2.0 - u) * a.normal + a.u_axis + v * a.v_axis;
  else if (u < -1.0) p = (2.0 + u) * a.normal - a.u_axis + v * a.v_axis;
  else if (v > 1.0) p = (2.0 - v) * a.normal + u * a.u_axis + a.v_axis;
  else p = (2.0 + v) * a.normal + u * a.u_axis - a.v_axis;
  Face best = Face::B;
  double depth = -1.0;
  for (Face g : kFaces) {
    const double d = dot(p, face_axes(g).normal);
    if (d > depth) {
      depth = d;
      best = g;
    }
  }
  const FaceAxes& b = face_axes(best);
  const double uu = dot(p, b.u_axis) / depth, vv = dot(p, b.v_axis) / depth;
  const auto c2 = std::lround((uu + 1.0) * wd / 2.0 - 0.5);
  const auto r2 = std::lround((vv + 1.0) * wd / 2.0 - 0.5);
  return {best, static_cast<std::size_t>(r2), static_cast<std::size_t>(c2)};
}

// Reference Cube Padding of a [6, c, w, w] map built from the unfolding
// rule above; corners average the nearest texels of the two bands.
inline std::vector<float> oracle_cube_pad(const CubeMap& cm, std::size_t k) {
  const std::size_t c = cm.channels(), w = cm.width(), pw = w + 2 * k;
  std::vector<float> out(kFaceCount * c * pw * pw, 0.0f);
  auto at = [&](std::size_t f, std::size_t ch, std::size_t r, std::size_t col) -> float& {
    return out[((f * c + ch) * pw + r) * pw + col];
  };
  for (Face f : kFaces)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t r = 0; r < pw; ++r)
        for (std::size_t col = 0; col < pw; ++col) {
          const long fr = static_cast<long>(r) - static_cast<long>(k);
          const long fc = static_cast<long>(col) - static_cast<long>(k);
          const bool row_in = fr >= 0 && fr < static_cast<long>(w);
          const bool col_in = fc >= 0 && fc < static_cast<long>(w);
          if (row_in && col_in) {
            at(face_index(f), ch, r, col) = cm.at(f, ch, fr, fc);
          } else if (row_in || col_in) {
            const SourceTexel s = unfold_source(f, fr, fc, w);
            at(face_index(f), ch, r, col) = cm.at(s.face, ch, s.row, s.col);
          }
        }
  for (std::size_t pl = 0; pl < kFaceCount * c; ++pl) {
    float* plane = out.data() + pl * pw * pw;
    for (std::size_t r = 0; r < pw; ++r)
      for (std::size_t col = 0; col < pw; ++col) {
        const bool top = r < k, bottom = r >= k + w, left = col < k, right = col >= k + w;
        if (!((top || bottom) && (left || right))) continue;
        const std::size_t band_col = left ? k : k + w - 1;
        const std::size_t band_row = top ? k : k + w - 1;
        plane[r * pw + col] = 0.5f * (plane[r * pw + band_col] + plane[band_row * pw + col]);
      }
  }
  return out;
}

inline std::vector<float> oracle_zero_pad(const CubeMap& cm, std::size_t k) {
  const std::size_t c = cm.channels(), w = cm.width(), pw = w + 2 * k;
  std::vector<float> out(kFaceCount * c * pw * pw, 0.0f);
  for (Face f : kFaces)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t r = 0; r < w; ++r)
        for (std::size_t col = 0; col < w; ++col)
          out[((face_index(f) * c + ch) * pw + r + k) * pw + col + k] = cm.at(f, ch, r, col);
  return out;
}

// Direct-index convolution over oracle-padded faces, accumulated in double.
inline CubeMap oracle_conv(const CubeMap& x, const ConvLayer& layer) {
  const std::size_t co = layer.kernel.dim(0), ci = layer.kernel.dim(1), ks = layer.kernel.dim(2);
  const std::size_t k = (ks - 1) / 2, w = x.width();
  const std::vector<float> padded =
      k == 0 ? std::vector<float>(x.data().begin(), x.data().end())
             : (layer.pad == PadMode::Cube ? oracle_cube_pad(x, k) : oracle_zero_pad(x, k));
  const std::size_t pw = w + 2 * k;
  const std::size_t ow = (pw - ks) / layer.stride + 1;
  std::vector<float> out(kFaceCount * co * ow * ow);
  for (std::size_t f = 0; f < kFaceCount; ++f)
    for (std::size_t o = 0; o < co; ++o)
      for (std::size_t y = 0; y < ow; ++y)
        for (std::size_t xo = 0; xo < ow; ++xo) {
          double acc = layer.bias[o];
          for (std::size_t i = 0; i < ci; ++i)
            for (std::size_t ky = 0; ky < ks; ++ky)
              for (std::size_t kx = 0; kx < ks; ++kx)
                acc += static_cast<double>(layer.kernel[((o * ci + i) * ks + ky) * ks + kx]) *
                       padded[((f * ci + i) * pw + y * layer.stride + ky) * pw + xo * layer.stride + kx];
          if (layer.activation == Activation::ReLU) acc = std::max(acc, 0.0);
          out[((f * co + o) * ow + y) * ow + xo] = static_cast<float>(acc);
        }
  return CubeMap(co, ow, std::move(out));
}

inline CubeMap oracle_maxpool(const CubeMap& x, std::size_t kernel, std::size_t stride, PadMode mode) {
  const std::size_t k = (kernel - 1) / 2, c = x.channels(), w = x.width();
  const std::vector<float> padded =
      k == 0 ? std::vector<float>(x.data().begin(), x.data().end())
             : (mode == PadMode::Cube ? oracle_cube_pad(x, k) : oracle_zero_pad(x, k));
  const std::size_t pw = w + 2 * k, ow = (pw - kernel) / stride + 1;
  std::vector<float> out(kFaceCount * c * ow * ow);
  for (std::size_t pl = 0; pl < kFaceCount * c; ++pl)
    for (std::size_t y = 0; y < ow; ++y)
      for (std::size_t xo = 0; xo < ow; ++xo) {
        float m = padded[pl * pw * pw + (y * stride) * pw + xo * stride];
        for (std::size_t ky = 0; ky < kernel; ++ky)
          for (std::size_t kx = 0; kx < kernel; ++kx)
            m = std::max(m, padded[pl * pw * pw + (y * stride + ky) * pw + xo * stride + kx]);
        out[(pl * ow + y) * ow + xo] = m;
      }
  return CubeMap(c, ow, std::move(out));
}

// Isotropic 3x3 blur (weights 4, 2, 1 normalised), identical under any
// 90-degree rotation of the kernel.
inline Tensor symmetric_kernel(std::size_t co, std::size_t ci, float scale = 1.0f) {
  const float base[9] = {1, 2, 1, 2, 4, 2, 1, 2, 1};
  std::vector<float> v(co * ci * 9);
  for (std::size_t n = 0; n < co * ci; ++n)
    for (int t = 0; t < 9; ++t) v[n * 9 + t] = scale * base[t] / (16.0f * static_cast<float>(ci));
  return Tensor({co, ci, 3, 3}, std::move(v));
}

// Owned copy of a map's values, safe to iterate when the map is a temporary.
template <typename M>
std::vector<float> values(const M& m) {
  return {m.data().begin(), m.data().end()};
}

inline double max_abs_diff(std::span<const float> a, std::span<const float> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(double(a[i]) - double(b[i])));
  return m;
}


// Best summed score over every feasible candidate path, by exhaustive
// depth-first enumeration. Returns -inf when no path exists.
inline double brute_force_best(const std::vector<std::vector<double>>& scores,
                               const std::vector<Vec3>& dirs, double d_max) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const std::size_t n = dirs.size();
  std::vector<char> ok(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) ok[a * n + b] = angle_between(dirs[a], dirs[b]) <= d_max + 1e-12;
  double best = kNegInf;
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t t, std::size_t prev, double sum) {
    if (t == scores.size()) {
      best = std::max(best, sum);
      return;
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (scores[t][c] == kNegInf || (t > 0 && !ok[prev * n + c])) continue;
      walk(t + 1, c, sum + scores[t][c]);
    }
  };
  walk(0, 0, 0.0);
  return best;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(std::hash<std::string>{}(tag) ^ static_cast<std::uint64_t>(::getpid()));
    path_ = std::filesystem::temp_directory_path() /
            ("cubepad_" + tag + "_" + std::to_string(rng.next() % 1000000000ULL));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
