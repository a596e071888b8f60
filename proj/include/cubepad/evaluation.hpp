#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cubepad/tensor.hpp"

namespace cubepad {

struct Viewpoint {
  std::size_t frame = 0;
  double lon = 0.0;  // radians, [-pi, pi)
  double lat = 0.0;  // radians, [-pi/2, pi/2]
  std::string viewer;
};

// JSON lines {"frame": int, "lon_deg": float, "lat_deg": float, "viewer": string}.
// Longitudes are wrapped into [-180, 180); other keys are ignored.
std::vector<Viewpoint> read_viewpoints(const std::filesystem::path& path);
std::vector<Viewpoint> parse_viewpoints(const std::string& text);
std::string format_viewpoint(const Viewpoint& v);

inline constexpr double kGtSigmaDeg = 5.0;
inline constexpr double kGtRadiusDeg = 45.0;

// Sum of great-circle Gaussians (degrees), each cut off beyond 45 degrees,
// scaled so the maximum is 1. Returns [1, q, p].
EquirectMap gt_heatmap(std::span<const Viewpoint> vps, std::size_t p, std::size_t q,
                       double sigma_deg = kGtSigmaDeg);

struct FixationMask {
  EquirectMap mask;  // 1 on fixations, 0 elsewhere
  std::size_t count = 0;
};

// Pixels strictly above mean + 3 * stddev (population).
FixationMask binarize_gt(const EquirectMap& heatmap);

double auc_judd(const EquirectMap& pred, const FixationMask& fix);
double auc_borji(const EquirectMap& pred, const FixationMask& fix, std::size_t n_splits = 100,
                 std::uint64_t seed = 0);
double cc(const EquirectMap& a, const EquirectMap& b);

struct FrameMetrics {
  std::size_t frame = 0;
  double auc_judd = 0.0;
  double auc_borji = 0.0;
  double cc = 0.0;
};

// {"frames": [...], "mean": {...}} with fixed key order.
std::string metrics_report_json(std::span<const FrameMetrics> frames);

}  // namespace cubepad
