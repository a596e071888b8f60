#include "cubepad/tensor.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace cubepad {

std::size_t element_count(const Dims& dims) {
  if (dims.empty()) throw ShapeError("tensor needs at least one dimension");
  std::size_t n = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw ShapeError("tensor dimension of extent 0 in " + dims_to_string(dims));
    if (n > std::numeric_limits<std::size_t>::max() / d)
      throw ShapeError("tensor element count overflows");
    n *= d;
  }
  return n;
}

std::string dims_to_string(const Dims& dims) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Dims dims, std::vector<float> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  const std::size_t n = element_count(dims_);
  if (n != data_.size())
    throw ShapeError("tensor dims " + dims_to_string(dims_) + " need " +
                     std::to_string(n) + " values, got " +
                     std::to_string(data_.size()));
}

Tensor Tensor::filled(Dims dims, float value) {
  const std::size_t n = element_count(dims);
  return Tensor(std::move(dims), std::vector<float>(n, value));
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (a.dims() != b.dims()) return false;
  return std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(float)) == 0;
}

bool all_finite(std::span<const float> values) {
  for (float v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

const char* face_name(Face f) {
  static const char* const names[] = {"B", "D", "F", "L", "R", "T"};
  return names[face_index(f)];
}

EquirectMap::EquirectMap(Tensor t) : tensor_(std::move(t)) {
  if (tensor_.ndim() != 3)
    throw ShapeError("equirect map needs dims [c,q,p], got " + dims_to_string(tensor_.dims()));
  if (tensor_.dim(2) < 2) throw ShapeError("equirect map width must be at least 2");
}

EquirectMap::EquirectMap(std::size_t channels, std::size_t height, std::size_t width,
                         std::vector<float> data)
    : EquirectMap(Tensor({channels, height, width}, std::move(data))) {}

EquirectMap EquirectMap::filled(std::size_t channels, std::size_t height,
                                std::size_t width, float value) {
  return EquirectMap(Tensor::filled({channels, height, width}, value));
}

CubeMap::CubeMap(Tensor t) : tensor_(std::move(t)) {
  if (tensor_.ndim() != 4 || tensor_.dim(0) != kFaceCount)
    throw ShapeError("cubemap needs dims [6,c,w,w], got " + dims_to_string(tensor_.dims()));
  if (tensor_.dim(2) != tensor_.dim(3))
    throw ShapeError("cubemap faces must be square, got " + dims_to_string(tensor_.dims()));
}

CubeMap::CubeMap(std::size_t channels, std::size_t width, std::vector<float> data)
    : CubeMap(Tensor({kFaceCount, channels, width, width}, std::move(data))) {}

CubeMap CubeMap::filled(std::size_t channels, std::size_t width, float value) {
  return CubeMap(Tensor::filled({kFaceCount, channels, width, width}, value));
}

Tensor CubeMap::face_image(Face f) const {
  auto src = face(f);
  return Tensor({channels(), width(), width()}, std::vector<float>(src.begin(), src.end()));
}

}  // namespace cubepad
