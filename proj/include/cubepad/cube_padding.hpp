#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "cubepad/tensor.hpp"

namespace cubepad {

enum class Side : unsigned char { Top = 0, Bottom = 1, Left = 2, Right = 3 };
inline constexpr std::size_t kSideCount = 4;
const char* side_name(Side s);

struct FaceSide {
  Face face;
  Side side;
  friend bool operator==(const FaceSide&, const FaceSide&) = default;
};

// Edge pairing of two faces. Along a side the edge parameter runs with the
// column index (Top, Bottom) or the row index (Left, Right); reversed means
// the two faces traverse the shared edge in opposite directions.
struct AdjacencyEntry {
  FaceSide source;
  FaceSide neighbor;
  bool reversed;
  friend bool operator==(const AdjacencyEntry&, const AdjacencyEntry&) = default;
};

// Indexed by face_index(face) * 4 + side.
using AdjacencyTable = std::array<AdjacencyEntry, kFaceCount * kSideCount>;

// Derives the table from the face axes by matching boundary sweeps. Throws
// InternalError if any side has zero or several matches.
AdjacencyTable build_adjacency();

// Compiled-in table, checked against build_adjacency() on first use.
const AdjacencyTable& adjacency();
const AdjacencyEntry& adjacent(Face f, Side s);

// Border policy of a layer: neighbour faces (Cube Padding) or zeros.
enum class PadMode { Cube, Zero };
const char* pad_mode_name(PadMode m);

enum class CornerFill {
  // Corner texel (r, c) averages the nearest texel of the row band and of
  // the column band that meet there.
  EdgeAverage,
  Zero,
};

class PaddedCubeMap {
 public:
  PaddedCubeMap(Tensor t, std::size_t pad, CornerFill fill);

  std::size_t pad() const { return pad_; }
  CornerFill corner_fill() const { return fill_; }
  std::size_t channels() const { return tensor_.dim(1); }
  std::size_t padded_width() const { return tensor_.dim(2); }
  std::size_t inner_width() const { return padded_width() - 2 * pad_; }

  const Tensor& tensor() const { return tensor_; }
  std::span<const float> data() const { return tensor_.data(); }
  // Row/column indices are padded coordinates.
  float at(Face f, std::size_t c, std::size_t y, std::size_t x) const {
    const std::size_t pw = padded_width();
    return tensor_[((face_index(f) * channels() + c) * pw + y) * pw + x];
  }

  // Interior block as a CubeMap.
  CubeMap crop() const;

 private:
  Tensor tensor_;
  std::size_t pad_;
  CornerFill fill_;
};

// Requires 1 <= k < w.
PaddedCubeMap cube_pad(const CubeMap& cm, std::size_t k,
                       CornerFill fill = CornerFill::EdgeAverage);
PaddedCubeMap zero_pad(const CubeMap& cm, std::size_t k);

// Raw-buffer forms used by the layer kernels. src is [6, c, w, w], dst is
// [6, c, w + 2k, w + 2k] and is fully overwritten.
void cube_pad_into(std::span<const float> src, std::size_t channels, std::size_t w,
                   std::size_t k, CornerFill fill, std::span<float> dst);
// src is `planes` planes of h x w; dst is planes of (h + 2k) x (w + 2k).
void zero_pad_into(std::span<const float> src, std::size_t planes, std::size_t h,
                   std::size_t w, std::size_t k, std::span<float> dst);

// Overlap baseline: cube-oriented faces widened to `fov`, plus the square
// that covers the central 90 degrees of each face.
struct OverlapFaces {
  CubeMap faces;
  double tan_half_fov;
  std::size_t crop_offset;  // first row/column of the central square
  std::size_t crop_size;    // equals w_base
};

// Face width is ceil(w_base * tan(fov / 2)). fov must lie in [pi/2, pi);
// fov = pi/2 reproduces equirect_to_cubemap.
std::size_t overlap_face_width(std::size_t w_base, double fov);
OverlapFaces render_overlap_faces(const EquirectMap& m, std::size_t w_base, double fov);

}  // namespace cubepad
