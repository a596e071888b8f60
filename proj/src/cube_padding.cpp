#include "cubepad/cube_padding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cubepad/sphere_geom.hpp"

namespace cubepad {
namespace {

constexpr Side kSides[kSideCount] = {Side::Top, Side::Bottom, Side::Left, Side::Right};

constexpr std::size_t side_index(Side s) { return static_cast<std::size_t>(s); }

constexpr AdjacencyEntry entry(Face f, Side s, Face g, Side t, bool reversed) {
  return {{f, s}, {g, t}, reversed};
}

using F = Face;
using S = Side;
// clang-format off
constexpr AdjacencyTable kAdjacency = {{
    entry(F::B, S::Top, F::T, S::Top, true),
    entry(F::B, S::Bottom, F::D, S::Bottom, true),
    entry(F::B, S::Left, F::R, S::Right, false),
    entry(F::B, S::Right, F::L, S::Left, false),
    entry(F::D, S::Top, F::F, S::Bottom, false),
    entry(F::D, S::Bottom, F::B, S::Bottom, true),
    entry(F::D, S::Left, F::L, S::Bottom, true),
    entry(F::D, S::Right, F::R, S::Bottom, false),
    entry(F::F, S::Top, F::T, S::Bottom, false),
    entry(F::F, S::Bottom, F::D, S::Top, false),
    entry(F::F, S::Left, F::L, S::Right, false),
    entry(F::F, S::Right, F::R, S::Left, false),
    entry(F::L, S::Top, F::T, S::Left, false),
    entry(F::L, S::Bottom, F::D, S::Left, true),
    entry(F::L, S::Left, F::B, S::Right, false),
    entry(F::L, S::Right, F::F, S::Left, false),
    entry(F::R, S::Top, F::T, S::Right, true),
    entry(F::R, S::Bottom, F::D, S::Right, false),
    entry(F::R, S::Left, F::F, S::Right, false),
    entry(F::R, S::Right, F::B, S::Left, false),
    entry(F::T, S::Top, F::B, S::Top, true),
    entry(F::T, S::Bottom, F::F, S::Top, false),
    entry(F::T, S::Left, F::L, S::Top, false),
    entry(F::T, S::Right, F::R, S::Top, true)
}};
// clang-format on

// Unnormalised direction of the boundary point at edge parameter s.
Vec3 boundary_point(Face f, Side side, double s) {
  const FaceAxes& a = face_axes(f);
  double u = 0.0, v = 0.0;
  switch (side) {
    case Side::Top: u = s, v = -1.0; break;
    case Side::Bottom: u = s, v = 1.0; break;
    case Side::Left: u = -1.0, v = s; break;
    case Side::Right: u = 1.0, v = s; break;
  }
  return a.normal + u * a.u_axis + v * a.v_axis;
}

bool sweeps_coincide(FaceSide a, FaceSide b, bool reversed) {
  constexpr double kSamples[] = {-0.875, -0.3, 0.0, 0.45, 1.0};
  for (double s : kSamples) {
    const Vec3 pa = boundary_point(a.face, a.side, s);
    const Vec3 pb = boundary_point(b.face, b.side, reversed ? -s : s);
    if (norm(pa - pb) > 1e-12) return false;
  }
  return true;
}

// Texel index inside a w x w plane of the d-th line in from `side`, at edge
// position s.
inline std::size_t line_texel(Side side, std::size_t d, std::size_t s, std::size_t w) {
  switch (side) {
    case Side::Top: return d * w + s;
    case Side::Bottom: return (w - 1 - d) * w + s;
    case Side::Left: return s * w + d;
    case Side::Right: return s * w + (w - 1 - d);
  }
  return 0;
}

// Padded-plane index of pad depth d (0 touches the edge) at edge position s.
inline std::size_t pad_texel(Side side, std::size_t d, std::size_t s, std::size_t w,
                             std::size_t k) {
  const std::size_t pw = w + 2 * k;
  switch (side) {
    case Side::Top: return (k - 1 - d) * pw + k + s;
    case Side::Bottom: return (k + w + d) * pw + k + s;
    case Side::Left: return (k + s) * pw + (k - 1 - d);
    case Side::Right: return (k + s) * pw + (k + w + d);
  }
  return 0;
}

void copy_interiors(std::span<const float> src, std::size_t planes, std::size_t h, std::size_t w,
                    std::size_t k, std::span<float> dst) {
  const std::size_t pw = w + 2 * k, ph = h + 2 * k;
  for (std::size_t pl = 0; pl < planes; ++pl) {
    const float* in = src.data() + pl * h * w;
    float* out = dst.data() + pl * ph * pw;
    for (std::size_t y = 0; y < h; ++y) std::copy_n(in + y * w, w, out + (y + k) * pw + k);
  }
}

}  // namespace

const char* side_name(Side s) {
  static const char* const names[] = {"Top", "Bottom", "Left", "Right"};
  return names[side_index(s)];
}

const char* pad_mode_name(PadMode m) { return m == PadMode::Cube ? "cube" : "zero"; }

AdjacencyTable build_adjacency() {
  AdjacencyTable table{};
  for (Face f : kFaces) {
    for (Side s : kSides) {
      const FaceSide src{f, s};
      int matches = 0;
      AdjacencyEntry found{};
      for (Face g : kFaces) {
        if (g == f) continue;
        for (Side t : kSides) {
          for (bool reversed : {false, true}) {
            if (sweeps_coincide(src, {g, t}, reversed)) {
              ++matches;
              found = {src, {g, t}, reversed};
            }
          }
        }
      }
      if (matches != 1)
        throw InternalError(std::string("face ") + face_name(f) + " side " + side_name(s) +
                            " has " + std::to_string(matches) + " edge matches");
      table[face_index(f) * kSideCount + side_index(s)] = found;
    }
  }
  return table;
}

const AdjacencyTable& adjacency() {
  static const AdjacencyTable& table = [] () -> const AdjacencyTable& {
    if (build_adjacency() != kAdjacency)
      throw InternalError("compiled adjacency table disagrees with the face axes");
    return kAdjacency;
  }();
  return table;
}

const AdjacencyEntry& adjacent(Face f, Side s) {
  return adjacency()[face_index(f) * kSideCount + side_index(s)];
}

PaddedCubeMap::PaddedCubeMap(Tensor t, std::size_t pad, CornerFill fill)
    : tensor_(std::move(t)), pad_(pad), fill_(fill) {
  if (tensor_.ndim() != 4 || tensor_.dim(0) != kFaceCount || tensor_.dim(2) != tensor_.dim(3))
    throw ShapeError("padded cubemap needs dims [6,c,w+2k,w+2k]");
  if (pad_ < 1 || tensor_.dim(2) <= 2 * pad_) throw ShapeError("padded cubemap pad width invalid");
}

CubeMap PaddedCubeMap::crop() const {
  const std::size_t c = channels(), w = inner_width(), pw = padded_width(), k = pad_;
  std::vector<float> out(kFaceCount * c * w * w);
  for (std::size_t pl = 0; pl < kFaceCount * c; ++pl)
    for (std::size_t y = 0; y < w; ++y)
      std::copy_n(data().data() + pl * pw * pw + (y + k) * pw + k, w, out.data() + (pl * w + y) * w);
  return CubeMap(c, w, std::move(out));
}

void cube_pad_into(std::span<const float> src, std::size_t channels, std::size_t w,
                   std::size_t k, CornerFill fill, std::span<float> dst) {
  if (k < 1 || k >= w) throw ArgumentError("cube pad width must satisfy 1 <= k < w");
  const std::size_t pw = w + 2 * k, plane = w * w, pplane = pw * pw;
  if (src.size() != kFaceCount * channels * plane || dst.size() != kFaceCount * channels * pplane)
    throw ShapeError("cube pad buffer sizes do not match [6,c,w,w]");
  const AdjacencyTable& table = adjacency();
  copy_interiors(src, kFaceCount * channels, w, w, k, dst);
  for (Face f : kFaces) {
    for (Side side : kSides) {
      const AdjacencyEntry& e = table[face_index(f) * kSideCount + side_index(side)];
      for (std::size_t c = 0; c < channels; ++c) {
        const float* nb = src.data() + (face_index(e.neighbor.face) * channels + c) * plane;
        float* out = dst.data() + (face_index(f) * channels + c) * pplane;
        for (std::size_t d = 0; d < k; ++d)
          for (std::size_t s = 0; s < w; ++s)
            out[pad_texel(side, d, s, w, k)] =
                nb[line_texel(e.neighbor.side, d, e.reversed ? w - 1 - s : s, w)];
      }
    }
  }
  // Corners: rows [0,k) or [k+w, pw) crossed with columns [0,k) or [k+w, pw).
  for (std::size_t pl = 0; pl < kFaceCount * channels; ++pl) {
    float* out = dst.data() + pl * pplane;
    for (int cy = 0; cy < 2; ++cy) {
      for (int cx = 0; cx < 2; ++cx) {
        const std::size_t row0 = cy ? k + w : 0, col0 = cx ? k + w : 0;
        // Nearest texel rows/columns of the bands meeting at this corner.
        const std::size_t band_col = cx ? k + w - 1 : k;
        const std::size_t band_row = cy ? k + w - 1 : k;
        for (std::size_t r = row0; r < row0 + k; ++r)
          for (std::size_t c = col0; c < col0 + k; ++c)
            out[r * pw + c] = fill == CornerFill::Zero
                                  ? 0.0f
                                  : 0.5f * (out[r * pw + band_col] + out[band_row * pw + c]);
      }
    }
  }
}

void zero_pad_into(std::span<const float> src, std::size_t planes, std::size_t h, std::size_t w,
                   std::size_t k, std::span<float> dst) {
  const std::size_t pw = w + 2 * k, ph = h + 2 * k;
  if (src.size() != planes * h * w || dst.size() != planes * ph * pw)
    throw ShapeError("zero pad buffer sizes do not match");
  std::fill(dst.begin(), dst.end(), 0.0f);
  copy_interiors(src, planes, h, w, k, dst);
}

PaddedCubeMap cube_pad(const CubeMap& cm, std::size_t k, CornerFill fill) {
  const std::size_t c = cm.channels(), w = cm.width(), pw = w + 2 * k;
  if (k < 1 || k >= w) throw ArgumentError("cube pad width must satisfy 1 <= k < w");
  std::vector<float> out(kFaceCount * c * pw * pw);
  cube_pad_into(cm.data(), c, w, k, fill, out);
  return PaddedCubeMap(Tensor({kFaceCount, c, pw, pw}, std::move(out)), k, fill);
}

PaddedCubeMap zero_pad(const CubeMap& cm, std::size_t k) {
  if (k < 1) throw ArgumentError("zero pad width must be at least 1");
  const std::size_t c = cm.channels(), w = cm.width(), pw = w + 2 * k;
  std::vector<float> out(kFaceCount * c * pw * pw);
  zero_pad_into(cm.data(), kFaceCount * c, w, w, k, out);
  return PaddedCubeMap(Tensor({kFaceCount, c, pw, pw}, std::move(out)), k, CornerFill::Zero);
}

std::size_t overlap_face_width(std::size_t w_base, double fov) {
  if (!(fov >= std::numbers::pi / 2 && fov < std::numbers::pi))
    throw ArgumentError("overlap field of view must lie in [pi/2, pi)");
  if (w_base < 2) throw ArgumentError("overlap base width must be at least 2");
  const double t = std::tan(fov / 2.0);
  return static_cast<std::size_t>(std::ceil(static_cast<double>(w_base) * t - 1e-9));
}

OverlapFaces render_overlap_faces(const EquirectMap& m, std::size_t w_base, double fov) {
  const std::size_t width = overlap_face_width(w_base, fov);
  double t = std::tan(fov / 2.0);
  if (std::fabs(t - 1.0) < 1e-12) t = 1.0;
  const auto sampler = Resampler::equirect_to_cube(m.width(), m.height(), width, t);
  const std::size_t c = m.channels(), plane = width * width;
  const std::vector<float> flat = sampler.apply(m.data(), c);
  std::vector<float> out(flat.size());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t f = 0; f < kFaceCount; ++f)
      std::copy_n(flat.data() + ch * kFaceCount * plane + f * plane, plane,
                  out.data() + (f * c + ch) * plane);
  return {CubeMap(c, width, std::move(out)), t, (width - w_base) / 2, w_base};
}

}  // namespace cubepad
