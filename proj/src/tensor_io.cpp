#include "cubepad/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace cubepad {
namespace {

constexpr char kMagic[4] = {'C', 'P', 'T', '1'};
constexpr std::uint32_t kMaxRank = 16;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{in[offset + i]} << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + 4 * t.ndim() + 4 * t.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(t.ndim()));
  for (std::size_t d : t.dims()) {
    if (d > 0xffffffffu) throw ArgumentError("dimension does not fit in u32");
    put_u32(out, static_cast<std::uint32_t>(d));
  }
  for (float v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("missing CPT1 magic");
  const std::uint32_t ndim = get_u32(bytes, 4);
  if (ndim == 0 || ndim > kMaxRank)
    throw FormatError("CPT1 rank " + std::to_string(ndim) + " out of range");
  if (bytes.size() < 8 + 4 * std::size_t{ndim}) throw FormatError("CPT1 header truncated");
  Dims dims(ndim);
  for (std::uint32_t i = 0; i < ndim; ++i) {
    dims[i] = get_u32(bytes, 8 + 4 * i);
    if (dims[i] == 0) throw FormatError("CPT1 dimension of extent 0");
  }
  std::size_t count = 0;
  try {
    count = element_count(dims);
  } catch (const ShapeError& e) {
    throw FormatError(std::string("CPT1 dims invalid: ") + e.what());
  }
  const std::size_t header = 8 + 4 * std::size_t{ndim};
  const std::size_t payload = bytes.size() - header;
  if (payload / 4 != count || payload % 4 != 0)
    throw FormatError("CPT1 payload holds " + std::to_string(payload) + " bytes, dims " +
                      dims_to_string(dims) + " need " + std::to_string(count * 4));
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = std::bit_cast<float>(get_u32(bytes, header + 4 * i));
  }
  if (!all_finite(data)) throw DataError("CPT1 payload contains NaN or Inf");
  return Tensor(std::move(dims), std::move(data));
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  try {
    return decode_tensor(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  if (!all_finite(t.data())) throw DataError("refusing to write non-finite tensor to " + path.string());
  const auto bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace cubepad
