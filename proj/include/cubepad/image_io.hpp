#pragma once

#include <filesystem>

#include "cubepad/tensor.hpp"

namespace cubepad {

// Loads .png (8-bit gray or RGB; alpha is dropped), .pfm or .cpt as an
// equirect-shaped [c, h, w] map. PNG values scale linearly to [0, 1].
EquirectMap read_image(const std::filesystem::path& path);

struct ImageExportOptions {
  // Render single-channel maps through a blue-to-red "jet" ramp instead of
  // gray. Input is clamped to [0, 1] first.
  bool colormap = false;
};

// Writes a [c, h, w] image (c = 1 or 3) to .png, .pfm or .cpt, picked by
// extension. PNG clamps to [0, 1] and rounds to 8 bits; PFM and CPT store
// floats exactly.
void write_image(const Tensor& image, const std::filesystem::path& path,
                 const ImageExportOptions& options = {});
inline void write_image(const EquirectMap& m, const std::filesystem::path& path,
                        const ImageExportOptions& options = {}) {
  write_image(m.tensor(), path, options);
}

}  // namespace cubepad
