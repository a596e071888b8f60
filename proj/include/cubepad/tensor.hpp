#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cubepad/error.hpp"

namespace cubepad {

using Dims = std::vector<std::size_t>;

// Product of dims. Throws ShapeError for an empty list, a zero extent or
// overflow.
std::size_t element_count(const Dims& dims);

std::string dims_to_string(const Dims& dims);

// Dense row-major float32 tensor, last dimension fastest. Immutable once
// built: operations produce new tensors.
class Tensor {
 public:
  Tensor(Dims dims, std::vector<float> data);

  static Tensor filled(Dims dims, float value);
  static Tensor zeros(Dims dims) { return filled(std::move(dims), 0.0f); }

  const Dims& dims() const { return dims_; }
  std::size_t ndim() const { return dims_.size(); }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  std::size_t size() const { return data_.size(); }

  std::span<const float> data() const { return data_; }
  float operator[](std::size_t i) const { return data_[i]; }

  // Moves the payload out, leaving the tensor empty. Used to build derived
  // tensors without a copy.
  std::vector<float> release() && { return std::move(data_); }

 private:
  Dims dims_;
  std::vector<float> data_;
};

// Same dims and identical bit patterns for every element.
bool bitwise_equal(const Tensor& a, const Tensor& b);
bool all_finite(std::span<const float> values);

enum class Face : unsigned char { B = 0, D = 1, F = 2, L = 3, R = 4, T = 5 };
inline constexpr std::size_t kFaceCount = 6;
inline constexpr Face kFaces[kFaceCount] = {Face::B, Face::D, Face::F,
                                            Face::L, Face::R, Face::T};

constexpr std::size_t face_index(Face f) { return static_cast<std::size_t>(f); }
const char* face_name(Face f);

// Equirectangular raster [c, q, p]; column 0 and column p-1 are neighbours
// on the sphere.
class EquirectMap {
 public:
  explicit EquirectMap(Tensor t);
  EquirectMap(std::size_t channels, std::size_t height, std::size_t width,
              std::vector<float> data);

  static EquirectMap filled(std::size_t channels, std::size_t height,
                            std::size_t width, float value);

  std::size_t channels() const { return tensor_.dim(0); }
  std::size_t height() const { return tensor_.dim(1); }
  std::size_t width() const { return tensor_.dim(2); }
  std::size_t plane_size() const { return height() * width(); }

  const Tensor& tensor() const { return tensor_; }
  std::span<const float> data() const { return tensor_.data(); }
  std::span<const float> channel(std::size_t c) const {
    return data().subspan(c * plane_size(), plane_size());
  }
  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return tensor_[(c * height() + y) * width() + x];
  }

  Tensor release() && { return std::move(tensor_); }

 private:
  Tensor tensor_;
};

// Six square faces [6, c, w, w] in the fixed order B, D, F, L, R, T.
class CubeMap {
 public:
  explicit CubeMap(Tensor t);
  CubeMap(std::size_t channels, std::size_t width, std::vector<float> data);

  static CubeMap filled(std::size_t channels, std::size_t width, float value);

  std::size_t channels() const { return tensor_.dim(1); }
  std::size_t width() const { return tensor_.dim(2); }
  std::size_t face_size() const { return channels() * width() * width(); }

  const Tensor& tensor() const { return tensor_; }
  std::span<const float> data() const { return tensor_.data(); }
  std::span<const float> face(Face f) const {
    return data().subspan(face_index(f) * face_size(), face_size());
  }
  float at(Face f, std::size_t c, std::size_t y, std::size_t x) const {
    return tensor_[((face_index(f) * channels() + c) * width() + y) * width() +
                   x];
  }

  // Face f as a standalone [c, w, w] image tensor.
  Tensor face_image(Face f) const;

  Tensor release() && { return std::move(tensor_); }

 private:
  Tensor tensor_;
};

}  // namespace cubepad
