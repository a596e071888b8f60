#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cubepad/tensor.hpp"

namespace cubepad {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double norm(Vec3 a);
Vec3 normalize(Vec3 a);

// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 operator*(Vec3 v) const;
  Mat3 operator*(const Mat3& o) const;
  Mat3 transposed() const;
};

// R = Rz(yaw) * Ry(pitch) * Rx(roll). World frame: x forward, y right of
// forward, z up. Positive yaw moves content towards +y (increasing column).
Mat3 rotation_matrix(double yaw, double pitch, double roll);

// Face frame: the direction of face pixel (u, v) in [-1, 1]^2 is
// normal + u * u_axis + v * v_axis; u grows with the column index and v
// with the row index.
struct FaceAxes {
  Vec3 normal, u_axis, v_axis;
};
const FaceAxes& face_axes(Face f);

// Unit direction through face coordinates (u, v). Throws ArgumentError when
// u or v lies outside [-1, 1].
Vec3 face_direction(Face f, double u, double v);

// Longitude/latitude (radians) of a direction; need not be normalised.
double longitude(Vec3 d);
double latitude(Vec3 d);
Vec3 direction_from_angles(double lon, double lat);
// Great-circle angle (radians) between two directions.
double angle_between(Vec3 a, Vec3 b);

struct PixelCoord {
  double x = 0.0, y = 0.0;
};

// Continuous equirect pixel coordinate of d, pixel centres at integers.
// x is wrapped into [-0.5, p - 0.5).
PixelCoord dir_to_equirect(Vec3 d, std::size_t p, std::size_t q);

// Direction through the centre of equirect pixel (x, y).
Vec3 equirect_pixel_direction(std::size_t x, std::size_t y, std::size_t p, std::size_t q);

// Pixel-centre face coordinate (2i + 1) / w - 1.
inline double face_coord(std::size_t i, std::size_t w) {
  return (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(w) - 1.0;
}

// One precomputed bilinear sample. All four taps lie in the same source
// plane group (a cube face, or the single equirect plane).
struct BilinearTap {
  std::uint32_t group = 0;
  std::array<std::uint32_t, 4> offset{};  // (x0,y0) (x1,y0) (x0,y1) (x1,y1)
  double fx = 0.0, fy = 0.0;
};

// A fixed geometric resampling: output pixel k of every channel is a
// bilinear blend of source pixels described by taps[k]. Building the table
// is the expensive part; applying it is a gather.
class Resampler {
 public:
  Resampler(std::vector<BilinearTap> taps, std::size_t groups, std::size_t source_plane);

  // Cube faces of width w sampled from a p x q equirect raster. tan_half_fov
  // widens each face beyond 90 degrees (1.0 gives the plain cubemap).
  static Resampler equirect_to_cube(std::size_t p, std::size_t q, std::size_t w,
                                    double tan_half_fov = 1.0);
  static Resampler cube_to_equirect(std::size_t w, std::size_t p, std::size_t q);
  static Resampler rotation(std::size_t p, std::size_t q, const Mat3& r);

  std::size_t output_size() const { return taps_.size(); }
  std::size_t source_groups() const { return groups_; }
  std::size_t source_plane() const { return source_plane_; }

  // src holds groups x channels x source_plane floats; the result holds
  // channels x output_size floats.
  std::vector<float> apply(std::span<const float> src, std::size_t channels) const;

 private:
  std::vector<BilinearTap> taps_;
  std::size_t groups_;
  std::size_t source_plane_;
};

// Bilinear blend with the fractional weights; exact on constant input and
// never leaves [min, max] of the four taps.
float blend(const float* plane, const BilinearTap& tap);

CubeMap equirect_to_cubemap(const EquirectMap& m, std::size_t w);
EquirectMap cubemap_to_equirect(const CubeMap& cm, std::size_t p, std::size_t q);

struct NFoVSpec {
  double lon = 0.0;  // [-pi, pi)
  double lat = 0.0;  // [-pi/2, pi/2]
  double fov_x = 0.0;
  double fov_y = 0.0;
  std::size_t width = 1;
  std::size_t height = 1;

  void validate() const;
};

// Gnomonic view taps over a p x q raster.
std::vector<BilinearTap> nfov_taps(std::size_t p, std::size_t q, const NFoVSpec& spec);

// Rectilinear view of m, returned as a [c, height, width] tensor.
Tensor render_nfov(const EquirectMap& m, const NFoVSpec& spec);

// Output pixel at direction d samples m at R^-1 d. Yaw-only rotations by a
// whole number of columns are exact column shifts.
EquirectMap rotate_sphere(const EquirectMap& m, double yaw, double pitch, double roll);

// How a rotation that maps the cube onto itself moves face content: face f
// lands on target[f], and its coordinates (u, v) become
// (uv[f][0] * u + uv[f][1] * v, uv[f][2] * u + uv[f][3] * v).
struct CubeSymmetry {
  std::array<Face, kFaceCount> target{};
  std::array<std::array<int, 4>, kFaceCount> uv{};
};

// Throws ArgumentError if r is not (within 1e-9) one of the 24 cube
// rotations.
CubeSymmetry cube_symmetry(const Mat3& r);

// Pure texel permutation of cm under sym; commutes with
// equirect_to_cubemap(rotate_sphere(...)) for the same rotation.
CubeMap apply_symmetry(const CubeMap& cm, const CubeSymmetry& sym);

}  // namespace cubepad
