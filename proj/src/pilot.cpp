#include "cubepad/pilot.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "json.hpp"

namespace cubepad {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

CandidateGrid CandidateGrid::regular(double lon_step_deg, double lat_step_deg, double lat_max_deg,
                                     double fov_deg) {
  if (!(lon_step_deg > 0.0) || !(lat_step_deg > 0.0) || !(lat_max_deg >= 0.0) ||
      lat_max_deg > 90.0)
    throw ArgumentError("grid steps must be positive and the latitude bound within [0, 90]");
  CandidateGrid g;
  g.fov = fov_deg * kDeg;
  const auto n_lat = static_cast<std::size_t>(std::floor(2.0 * lat_max_deg / lat_step_deg + 1e-9));
  const auto n_lon = static_cast<std::size_t>(std::ceil(360.0 / lon_step_deg - 1e-9));
  for (std::size_t j = 0; j <= n_lat; ++j)
    for (std::size_t i = 0; i < n_lon; ++i)
      g.centers.push_back({(-180.0 + static_cast<double>(i) * lon_step_deg) * kDeg,
                           (-lat_max_deg + static_cast<double>(j) * lat_step_deg) * kDeg});
  g.validate();
  return g;
}

void CandidateGrid::validate() {
  if (centers.empty()) throw ArgumentError("candidate grid is empty");
  if (!(fov > 0.0) || fov >= std::numbers::pi) throw ArgumentError("NFoV fov must lie in (0, 180) degrees");
  std::vector<ViewAngle> unique;
  for (const ViewAngle& c : centers) {
    const Vec3 d = direction_from_angles(c.lon, c.lat);
    bool dup = false;
    for (const ViewAngle& u : unique)
      if (angle_between(d, direction_from_angles(u.lon, u.lat)) < 1e-9) {
        dup = true;
        break;
      }
    if (!dup) unique.push_back(c);
  }
  centers = std::move(unique);
}

ViewangleScorer::ViewangleScorer(const CandidateGrid& grid, std::size_t p, std::size_t q,
                                 std::size_t samples)
    : p_(p), q_(q) {
  if (grid.centers.empty()) throw ArgumentError("candidate grid is empty");
  taps_.reserve(grid.size());
  for (const ViewAngle& c : grid.centers) {
    NFoVSpec spec{c.lon, c.lat, grid.fov, grid.fov, samples, samples};
    taps_.push_back(nfov_taps(p, q, spec));
  }
  // A tangent-plane sample at (x, y) subtends (1 + x^2 + y^2)^(-3/2) of solid angle.
  const double t = std::tan(grid.fov / 2.0);
  weights_.resize(samples * samples);
  double total = 0.0;
  for (std::size_t j = 0; j < samples; ++j)
    for (std::size_t i = 0; i < samples; ++i) {
      const double x = t * face_coord(i, samples), y = t * face_coord(j, samples);
      weights_[j * samples + i] = std::pow(1.0 + x * x + y * y, -1.5);
      total += weights_[j * samples + i];
    }
  for (double& w : weights_) w /= total;
}

std::vector<double> ViewangleScorer::score(const EquirectMap& sal, std::size_t channel) const {
  if (sal.width() != p_ || sal.height() != q_)
    throw ShapeError("saliency map size does not match the scorer");
  if (channel >= sal.channels())
    throw ArgumentError("class index " + std::to_string(channel) + " out of range for " +
                        std::to_string(sal.channels()) + " channels");
  const float* plane = sal.channel(channel).data();
  std::vector<double> out;
  out.reserve(taps_.size());
  for (const auto& taps : taps_) {
    double sum = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k) sum += weights_[k] * blend(plane, taps[k]);
    out.push_back(sum);
  }
  return out;
}

std::vector<double> score_viewangles(const EquirectMap& sal, const CandidateGrid& grid,
                                     std::size_t channel) {
  return ViewangleScorer(grid, sal.width(), sal.height()).score(sal, channel);
}

Trajectory link_trajectory(const std::vector<std::vector<double>>& scores,
                           const CandidateGrid& grid, double d_max) {
  if (scores.empty()) throw ArgumentError("no frames to link");
  if (!(d_max > 0.0)) throw ArgumentError("d_max must be positive");
  const std::size_t n = grid.size();
  for (const auto& s : scores)
    if (s.size() != n) throw ShapeError("score row size does not match the candidate grid");

  std::vector<Vec3> dirs;
  for (const ViewAngle& c : grid.centers) dirs.push_back(direction_from_angles(c.lon, c.lat));
  std::vector<std::vector<std::size_t>> reach(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (angle_between(dirs[a], dirs[b]) <= d_max + 1e-12) reach[a].push_back(b);

  const std::size_t frames = scores.size();
  std::vector<double> best(scores[0]);
  for (double& v : best)
    if (std::isnan(v)) throw DataError("score is NaN");
  std::vector<std::vector<std::size_t>> from(frames, std::vector<std::size_t>(n, 0));
  for (std::size_t t = 1; t < frames; ++t) {
    std::vector<double> next(n, kNegInf);
    for (std::size_t c = 0; c < n; ++c) {
      const double s = scores[t][c];
      if (std::isnan(s)) throw DataError("score is NaN");
      if (s == kNegInf) continue;
      double top = kNegInf;
      std::size_t arg = 0;
      for (std::size_t prev : reach[c])  // ascending, so the first maximum wins
        if (best[prev] > top) {
          top = best[prev];
          arg = prev;
        }
      if (top == kNegInf) continue;
      next[c] = top + s;
      from[t][c] = arg;
    }
    best = std::move(next);
  }
  std::size_t end = 0;
  for (std::size_t c = 1; c < n; ++c)
    if (best[c] > best[end]) end = c;
  if (best[end] == kNegInf)
    throw InfeasibleError("no trajectory satisfies the step limit of " +
                          std::to_string(d_max / kDeg) + " degrees");

  Trajectory tr;
  tr.candidate.assign(frames, 0);
  tr.candidate[frames - 1] = end;
  for (std::size_t t = frames - 1; t > 0; --t) tr.candidate[t - 1] = from[t][tr.candidate[t]];
  for (std::size_t t = 0; t < frames; ++t) {
    tr.angles.push_back(grid.centers[tr.candidate[t]]);
    tr.scores.push_back(scores[t][tr.candidate[t]]);
  }
  tr.total = best[end];
  return tr;
}

std::string trajectory_jsonl(const Trajectory& t, std::size_t first_frame, const std::string& viewer) {
  std::string out;
  for (std::size_t i = 0; i < t.candidate.size(); ++i) {
    nlohmann::ordered_json j;
    j["frame"] = first_frame + i;
    j["lon_deg"] = t.angles[i].lon / kDeg;
    j["lat_deg"] = t.angles[i].lat / kDeg;
    j["viewer"] = viewer;
    j["score"] = t.scores[i];
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace cubepad
