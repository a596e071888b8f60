#include "cubepad/sphere_geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace cubepad {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

const FaceAxes kAxes[kFaceCount] = {
    {{-1, 0, 0}, {0, -1, 0}, {0, 0, -1}},  // B
    {{0, 0, -1}, {0, 1, 0}, {-1, 0, 0}},   // D
    {{1, 0, 0}, {0, 1, 0}, {0, 0, -1}},    // F
    {{0, -1, 0}, {1, 0, 0}, {0, 0, -1}},   // L
    {{0, 1, 0}, {-1, 0, 0}, {0, 0, -1}},   // R
    {{0, 0, 1}, {0, 1, 0}, {1, 0, 0}},     // T
};

// Equirect position of a direction, split so that rotating the direction
// by a quarter turn about z changes only the integer column. The direction
// is reduced by exact quarter turns into the sector x > 0, -x <= y < x,
// whose longitude lies in [-pi/4, pi/4).
struct EquirectPos {
  std::int64_t x0;
  double fx;
  double y;
};

EquirectPos locate(Vec3 d, std::size_t p, std::size_t q) {
  double x = d.x, y = d.y;
  int quarter = 0;
  if (x > 0 && y >= -x && y < x) {
    quarter = 0;
  } else if (y > 0 && x > -y && x <= y) {
    quarter = 1;
    std::tie(x, y) = std::pair(y, -x);
  } else if (x < 0 && y > x && y <= -x) {
    quarter = 2;
    std::tie(x, y) = std::pair(-x, -y);
  } else if (y < 0 && x >= y && x < -y) {
    quarter = 3;
    std::tie(x, y) = std::pair(-y, x);
  }
  const double lon_local = std::atan2(y, x);
  const double lat = std::atan2(d.z, std::hypot(x, y));
  const double pw = static_cast<double>(p);
  const double x_local = (lon_local / kTwoPi + 0.5) * pw - 0.5;
  EquirectPos pos{};
  if (p % 4 == 0) {
    const double base = std::floor(x_local);
    pos.x0 = static_cast<std::int64_t>(base) + quarter * static_cast<std::int64_t>(p / 4);
    pos.fx = x_local - base;
  } else {
    const double xs = x_local + quarter * pw / 4.0;
    const double base = std::floor(xs);
    pos.x0 = static_cast<std::int64_t>(base);
    pos.fx = xs - base;
  }
  pos.y = (0.5 - lat / kPi) * static_cast<double>(q) - 0.5;
  return pos;
}

std::size_t wrap_index(std::int64_t i, std::size_t n) {
  const auto m = static_cast<std::int64_t>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

std::size_t clamp_index(std::int64_t i, std::size_t n) {
  return static_cast<std::size_t>(std::clamp<std::int64_t>(i, 0, static_cast<std::int64_t>(n) - 1));
}

BilinearTap equirect_tap(Vec3 d, std::size_t p, std::size_t q) {
  const EquirectPos pos = locate(d, p, q);
  const std::size_t xa = wrap_index(pos.x0, p);
  const std::size_t xb = (xa + 1) % p;
  const double yf = std::floor(pos.y);
  const auto y0 = static_cast<std::int64_t>(yf);
  const std::size_t ya = clamp_index(y0, q);
  const std::size_t yb = clamp_index(y0 + 1, q);
  BilinearTap tap;
  tap.group = 0;
  tap.offset = {static_cast<std::uint32_t>(ya * p + xa), static_cast<std::uint32_t>(ya * p + xb),
                static_cast<std::uint32_t>(yb * p + xa), static_cast<std::uint32_t>(yb * p + xb)};
  tap.fx = pos.fx;
  tap.fy = pos.y - yf;
  return tap;
}

void check_raster(std::size_t p, std::size_t q) {
  if (p < 2 || q < 1) throw ArgumentError("equirect raster needs p >= 2 and q >= 1");
  if (p * q > std::numeric_limits<std::uint32_t>::max())
    throw ArgumentError("equirect raster too large");
}

}  // namespace

double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

Vec3 normalize(Vec3 a) {
  const double n = norm(a);
  return {a.x / n, a.y / n, a.z / n};
}

Vec3 Mat3::operator*(Vec3 v) const {
  return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
          m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += m[i * 3 + k] * o.m[k * 3 + j];
      r.m[i * 3 + j] = s;
    }
  return r;
}

Mat3 Mat3::transposed() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m[i * 3 + j] = m[j * 3 + i];
  return r;
}

Mat3 rotation_matrix(double yaw, double pitch, double roll) {
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cr = std::cos(roll), sr = std::sin(roll);
  const Mat3 rz{{cy, -sy, 0, sy, cy, 0, 0, 0, 1}};
  const Mat3 ry{{cp, 0, sp, 0, 1, 0, -sp, 0, cp}};
  const Mat3 rx{{1, 0, 0, 0, cr, -sr, 0, sr, cr}};
  return rz * ry * rx;
}

const FaceAxes& face_axes(Face f) { return kAxes[face_index(f)]; }

Vec3 face_direction(Face f, double u, double v) {
  if (!(u >= -1.0 && u <= 1.0 && v >= -1.0 && v <= 1.0))
    throw ArgumentError("face coordinates must lie in [-1, 1]");
  const FaceAxes& a = face_axes(f);
  return normalize(a.normal + u * a.u_axis + v * a.v_axis);
}

double longitude(Vec3 d) { return std::atan2(d.y, d.x); }
double latitude(Vec3 d) { return std::atan2(d.z, std::hypot(d.x, d.y)); }

Vec3 direction_from_angles(double lon, double lat) {
  const double cl = std::cos(lat);
  return {cl * std::cos(lon), cl * std::sin(lon), std::sin(lat)};
}

double angle_between(Vec3 a, Vec3 b) { return std::atan2(norm(cross(a, b)), dot(a, b)); }

PixelCoord dir_to_equirect(Vec3 d, std::size_t p, std::size_t q) {
  const EquirectPos pos = locate(d, p, q);
  double x = static_cast<double>(wrap_index(pos.x0, p)) + pos.fx;
  if (x >= static_cast<double>(p) - 0.5) x -= static_cast<double>(p);
  return {x, pos.y};
}

Vec3 equirect_pixel_direction(std::size_t x, std::size_t y, std::size_t p, std::size_t q) {
  const double lon = ((static_cast<double>(x) + 0.5) / static_cast<double>(p) - 0.5) * kTwoPi;
  const double lat = (0.5 - (static_cast<double>(y) + 0.5) / static_cast<double>(q)) * kPi;
  return direction_from_angles(lon, lat);
}

float blend(const float* plane, const BilinearTap& tap) {
  const double a = plane[tap.offset[0]], b = plane[tap.offset[1]];
  const double c = plane[tap.offset[2]], d = plane[tap.offset[3]];
  const double top = a + (b - a) * tap.fx;
  const double bottom = c + (d - c) * tap.fx;
  return static_cast<float>(top + (bottom - top) * tap.fy);
}

Resampler::Resampler(std::vector<BilinearTap> taps, std::size_t groups, std::size_t source_plane)
    : taps_(std::move(taps)), groups_(groups), source_plane_(source_plane) {}

std::vector<float> Resampler::apply(std::span<const float> src, std::size_t channels) const {
  if (src.size() != groups_ * channels * source_plane_)
    throw ShapeError("resampler source holds " + std::to_string(src.size()) + " values, expected " +
                     std::to_string(groups_ * channels * source_plane_));
  const std::size_t out_plane = taps_.size();
  std::vector<float> out(channels * out_plane);
  for (std::size_t c = 0; c < channels; ++c) {
    float* dst = out.data() + c * out_plane;
    for (std::size_t k = 0; k < out_plane; ++k) {
      const BilinearTap& tap = taps_[k];
      dst[k] = blend(src.data() + (tap.group * channels + c) * source_plane_, tap);
    }
  }
  return out;
}

Resampler Resampler::equirect_to_cube(std::size_t p, std::size_t q, std::size_t w,
                                      double tan_half_fov) {
  check_raster(p, q);
  if (w < 1) throw ArgumentError("cube face width must be positive");
  std::vector<BilinearTap> taps;
  taps.reserve(kFaceCount * w * w);
  for (Face f : kFaces) {
    const FaceAxes& a = face_axes(f);
    for (std::size_t j = 0; j < w; ++j) {
      const double v = tan_half_fov * face_coord(j, w);
      for (std::size_t i = 0; i < w; ++i) {
        const double u = tan_half_fov * face_coord(i, w);
        taps.push_back(equirect_tap(a.normal + u * a.u_axis + v * a.v_axis, p, q));
      }
    }
  }
  return Resampler(std::move(taps), 1, p * q);
}

Resampler Resampler::cube_to_equirect(std::size_t w, std::size_t p, std::size_t q) {
  check_raster(p, q);
  if (w < 1) throw ArgumentError("cube face width must be positive");
  const double half = static_cast<double>(w) / 2.0;
  std::vector<BilinearTap> taps;
  taps.reserve(p * q);
  for (std::size_t y = 0; y < q; ++y) {
    for (std::size_t x = 0; x < p; ++x) {
      const Vec3 d = equirect_pixel_direction(x, y, p, q);
      const double ax = std::fabs(d.x), ay = std::fabs(d.y), az = std::fabs(d.z);
      Face f;
      if (ax >= ay && ax >= az) {
        f = d.x > 0 ? Face::F : Face::B;
      } else if (ay >= az) {
        f = d.y > 0 ? Face::R : Face::L;
      } else {
        f = d.z > 0 ? Face::T : Face::D;
      }
      const FaceAxes& a = face_axes(f);
      const double depth = dot(d, a.normal);
      const double fi = (dot(d, a.u_axis) / depth + 1.0) * half - 0.5;
      const double fj = (dot(d, a.v_axis) / depth + 1.0) * half - 0.5;
      const double i0 = std::floor(fi), j0 = std::floor(fj);
      const std::size_t xa = clamp_index(static_cast<std::int64_t>(i0), w);
      const std::size_t xb = clamp_index(static_cast<std::int64_t>(i0) + 1, w);
      const std::size_t ya = clamp_index(static_cast<std::int64_t>(j0), w);
      const std::size_t yb = clamp_index(static_cast<std::int64_t>(j0) + 1, w);
      BilinearTap tap;
      tap.group = static_cast<std::uint32_t>(face_index(f));
      tap.offset = {static_cast<std::uint32_t>(ya * w + xa), static_cast<std::uint32_t>(ya * w + xb),
                    static_cast<std::uint32_t>(yb * w + xa), static_cast<std::uint32_t>(yb * w + xb)};
      tap.fx = fi - i0;
      tap.fy = fj - j0;
      taps.push_back(tap);
    }
  }
  return Resampler(std::move(taps), kFaceCount, w * w);
}

Resampler Resampler::rotation(std::size_t p, std::size_t q, const Mat3& r) {
  check_raster(p, q);
  const Mat3 inverse = r.transposed();
  std::vector<BilinearTap> taps;
  taps.reserve(p * q);
  for (std::size_t y = 0; y < q; ++y)
    for (std::size_t x = 0; x < p; ++x)
      taps.push_back(equirect_tap(inverse * equirect_pixel_direction(x, y, p, q), p, q));
  return Resampler(std::move(taps), 1, p * q);
}

CubeMap equirect_to_cubemap(const EquirectMap& m, std::size_t w) {
  if (w < 2) throw ArgumentError("cube face width must be at least 2");
  const auto sampler = Resampler::equirect_to_cube(m.width(), m.height(), w);
  // The resampler emits channel-major planes of 6*w*w; reorder to [6,c,w,w].
  const std::size_t c = m.channels(), plane = w * w;
  const std::vector<float> flat = sampler.apply(m.data(), c);
  std::vector<float> out(flat.size());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t f = 0; f < kFaceCount; ++f)
      std::copy_n(flat.data() + ch * kFaceCount * plane + f * plane, plane,
                  out.data() + (f * c + ch) * plane);
  return CubeMap(c, w, std::move(out));
}

EquirectMap cubemap_to_equirect(const CubeMap& cm, std::size_t p, std::size_t q) {
  if (p != 2 * q) throw ArgumentError("inverse projection needs p = 2q");
  const auto sampler = Resampler::cube_to_equirect(cm.width(), p, q);
  return EquirectMap(cm.channels(), q, p, sampler.apply(cm.data(), cm.channels()));
}

void NFoVSpec::validate() const {
  if (!(fov_x > 0.0 && fov_x < kPi && fov_y > 0.0 && fov_y < kPi))
    throw ArgumentError("NFoV field of view must lie in (0, pi)");
  if (width < 1 || height < 1) throw ArgumentError("NFoV output must be at least 1x1");
  if (!(lat >= -kPi / 2 && lat <= kPi / 2)) throw ArgumentError("NFoV latitude out of range");
  if (!std::isfinite(lon)) throw ArgumentError("NFoV longitude must be finite");
}

std::vector<BilinearTap> nfov_taps(std::size_t p, std::size_t q, const NFoVSpec& spec) {
  spec.validate();
  check_raster(p, q);
  const Vec3 forward = direction_from_angles(spec.lon, spec.lat);
  const Vec3 right{-std::sin(spec.lon), std::cos(spec.lon), 0.0};
  const Vec3 down{std::sin(spec.lat) * std::cos(spec.lon), std::sin(spec.lat) * std::sin(spec.lon),
                  -std::cos(spec.lat)};
  const double tx = std::tan(spec.fov_x / 2.0), ty = std::tan(spec.fov_y / 2.0);
  std::vector<BilinearTap> taps;
  taps.reserve(spec.width * spec.height);
  for (std::size_t j = 0; j < spec.height; ++j) {
    const double v = ty * face_coord(j, spec.height);
    for (std::size_t i = 0; i < spec.width; ++i) {
      const double u = tx * face_coord(i, spec.width);
      taps.push_back(equirect_tap(forward + u * right + v * down, p, q));
    }
  }
  return taps;
}

Tensor render_nfov(const EquirectMap& m, const NFoVSpec& spec) {
  const Resampler sampler(nfov_taps(m.width(), m.height(), spec), 1, m.plane_size());
  return Tensor({m.channels(), spec.height, spec.width}, sampler.apply(m.data(), m.channels()));
}

EquirectMap rotate_sphere(const EquirectMap& m, double yaw, double pitch, double roll) {
  const std::size_t p = m.width(), q = m.height();
  if (pitch == 0.0 && roll == 0.0) {
    const double columns = yaw / kTwoPi * static_cast<double>(p);
    const double whole = std::round(columns);
    if (std::fabs(columns - whole) < 1e-9) {
      const std::size_t shift = wrap_index(static_cast<std::int64_t>(whole), p);
      std::vector<float> out(m.data().size());
      for (std::size_t row = 0; row < m.channels() * q; ++row) {
        const float* src = m.data().data() + row * p;
        float* dst = out.data() + row * p;
        for (std::size_t x = 0; x < p; ++x) dst[(x + shift) % p] = src[x];
      }
      return EquirectMap(m.channels(), q, p, std::move(out));
    }
  }
  const auto sampler = Resampler::rotation(p, q, rotation_matrix(yaw, pitch, roll));
  return EquirectMap(m.channels(), q, p, sampler.apply(m.data(), m.channels()));
}

CubeSymmetry cube_symmetry(const Mat3& r) {
  auto snap = [](double v) {
    const double s = std::round(v);
    if (std::fabs(v - s) > 1e-9) throw ArgumentError("rotation is not a cube symmetry");
    return static_cast<int>(s);
  };
  auto same = [](Vec3 a, Vec3 b) { return norm(a - b) < 1e-9; };
  CubeSymmetry sym;
  for (Face f : kFaces) {
    const FaceAxes& a = face_axes(f);
    const Vec3 n = r * a.normal;
    const Face* hit = std::find_if(std::begin(kFaces), std::end(kFaces),
                                   [&](Face g) { return same(face_axes(g).normal, n); });
    if (hit == std::end(kFaces)) throw ArgumentError("rotation is not a cube symmetry");
    const FaceAxes& b = face_axes(*hit);
    const Vec3 ru = r * a.u_axis, rv = r * a.v_axis;
    sym.target[face_index(f)] = *hit;
    sym.uv[face_index(f)] = {snap(dot(ru, b.u_axis)), snap(dot(rv, b.u_axis)),
                             snap(dot(ru, b.v_axis)), snap(dot(rv, b.v_axis))};
  }
  return sym;
}

CubeMap apply_symmetry(const CubeMap& cm, const CubeSymmetry& sym) {
  const std::size_t c = cm.channels(), w = cm.width();
  std::vector<float> out(cm.data().size());
  auto pick = [w](int cu, int cv, std::size_t i, std::size_t j) {
    if (cu != 0) return cu > 0 ? i : w - 1 - i;
    return cv > 0 ? j : w - 1 - j;
  };
  for (Face f : kFaces) {
    const auto& m = sym.uv[face_index(f)];
    const std::size_t g = face_index(sym.target[face_index(f)]);
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t j = 0; j < w; ++j)
        for (std::size_t i = 0; i < w; ++i) {
          const std::size_t ni = pick(m[0], m[1], i, j);
          const std::size_t nj = pick(m[2], m[3], i, j);
          out[((g * c + ch) * w + nj) * w + ni] = cm.at(f, ch, j, i);
        }
  }
  return CubeMap(c, w, std::move(out));
}

}  // namespace cubepad
