#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cubepad/sphere_geom.hpp"
#include "cubepad/tensor.hpp"

namespace cubepad {

struct ViewAngle {
  double lon = 0.0;  // radians
  double lat = 0.0;
};

struct CandidateGrid {
  std::vector<ViewAngle> centers;
  double fov = 1.5707963267948966;  // 90 degrees

  // Longitudes from -180 in lon_step_deg increments below 180; latitudes
  // from -lat_max_deg to lat_max_deg in lat_step_deg increments.
  static CandidateGrid regular(double lon_step_deg = 10.0, double lat_step_deg = 10.0,
                               double lat_max_deg = 45.0, double fov_deg = 90.0);
  // Throws ArgumentError if empty, and drops duplicate centres.
  void validate();
  std::size_t size() const { return centers.size(); }
};

inline constexpr std::size_t kNFoVSamples = 64;

// Caches the NFoV sampling taps of every candidate for one raster size.
class ViewangleScorer {
 public:
  ViewangleScorer(const CandidateGrid& grid, std::size_t p, std::size_t q,
                  std::size_t samples = kNFoVSamples);

  // Mean of channel `channel` of sal over each candidate window on the
  // sphere: every sample is weighted by the solid angle it covers, so the
  // window corners are not over-counted.
  std::vector<double> score(const EquirectMap& sal, std::size_t channel = 0) const;

 private:
  std::size_t p_, q_;
  std::vector<std::vector<BilinearTap>> taps_;
  std::vector<double> weights_;  // per sample, sums to 1
};

std::vector<double> score_viewangles(const EquirectMap& sal, const CandidateGrid& grid,
                                     std::size_t channel = 0);

inline constexpr double kDefaultDMaxDeg = 15.0;

struct Trajectory {
  std::vector<std::size_t> candidate;
  std::vector<ViewAngle> angles;
  std::vector<double> scores;
  double total = 0.0;
};

// Maximises the summed score subject to great-circle steps <= d_max (radians).
// A score of -inf marks a candidate as unavailable in that frame. Ties go to
// the smallest candidate index.
Trajectory link_trajectory(const std::vector<std::vector<double>>& scores,
                           const CandidateGrid& grid, double d_max);

// JSON lines compatible with read_viewpoints, plus a "score" key.
std::string trajectory_jsonl(const Trajectory& t, std::size_t first_frame = 0,
                             const std::string& viewer = "pilot");

}  // namespace cubepad
