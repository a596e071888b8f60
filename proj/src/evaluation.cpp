#include "cubepad/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "cubepad/rng.hpp"
#include "cubepad/sphere_geom.hpp"
#include "json.hpp"

namespace cubepad {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double wrap_lon_deg(double d) {
  double r = std::fmod(d + 180.0, 360.0);
  if (r < 0.0) r += 360.0;
  return r - 180.0;
}

void check_pair(const EquirectMap& pred, const EquirectMap& other) {
  if (pred.channels() != 1 || other.channels() != 1 || pred.height() != other.height() ||
      pred.width() != other.width())
    throw ShapeError("metric inputs must be matching [1, q, p] maps, got " +
                     dims_to_string(pred.tensor().dims()) + " and " +
                     dims_to_string(other.tensor().dims()));
  if (!all_finite(pred.data()) || !all_finite(other.data()))
    throw DataError("metric inputs must be finite");
}

// Splits pred into fixation and non-fixation values, both sorted descending.
void split_values(const EquirectMap& pred, const FixationMask& fix, std::vector<double>& pos,
                  std::vector<double>& neg) {
  check_pair(pred, fix.mask);
  for (std::size_t i = 0; i < pred.plane_size(); ++i)
    (fix.mask.data()[i] > 0.5f ? pos : neg).push_back(pred.data()[i]);
  if (pos.empty()) throw ArgumentError("fixation mask is empty");
  if (neg.empty()) throw ArgumentError("fixation mask covers every pixel");
  std::sort(pos.begin(), pos.end(), std::greater<>());
  std::sort(neg.begin(), neg.end(), std::greater<>());
}

double trapezoid(const std::vector<double>& fpr, const std::vector<double>& tpr) {
  double area = 0.0;
  for (std::size_t i = 1; i < fpr.size(); ++i)
    area += (fpr[i] - fpr[i - 1]) * (tpr[i] + tpr[i - 1]) * 0.5;
  return area;
}

}  // namespace

std::vector<Viewpoint> parse_viewpoints(const std::string& text) {
  std::vector<Viewpoint> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Viewpoint v;
      v.frame = j.at("frame").get<std::size_t>();
      const double lon = j.at("lon_deg").get<double>();
      const double lat = j.at("lat_deg").get<double>();
      if (!std::isfinite(lon) || !std::isfinite(lat) || lat < -90.0 || lat > 90.0)
        throw DataError("viewpoint angles out of range on line " + std::to_string(lineno));
      v.lon = wrap_lon_deg(lon) * kDeg;
      v.lat = lat * kDeg;
      v.viewer = j.value("viewer", std::string());
      out.push_back(std::move(v));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("bad viewpoint on line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Viewpoint> read_viewpoints(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_viewpoints(ss.str());
}

std::string format_viewpoint(const Viewpoint& v) {
  nlohmann::ordered_json j;
  j["frame"] = v.frame;
  j["lon_deg"] = v.lon / kDeg;
  j["lat_deg"] = v.lat / kDeg;
  j["viewer"] = v.viewer;
  return j.dump();
}

EquirectMap gt_heatmap(std::span<const Viewpoint> vps, std::size_t p, std::size_t q,
                       double sigma_deg) {
  if (vps.empty()) throw ArgumentError("no viewpoints to build a heatmap from");
  if (!(sigma_deg > 0.0)) throw ArgumentError("Gaussian sigma must be positive");
  if (p < 2 || q < 1) throw ArgumentError("heatmap raster too small");
  std::vector<Vec3> centers;
  for (const Viewpoint& v : vps) centers.push_back(direction_from_angles(v.lon, v.lat));
  const double inv = 1.0 / (2.0 * sigma_deg * sigma_deg);
  std::vector<double> acc(p * q, 0.0);
  for (std::size_t y = 0; y < q; ++y)
    for (std::size_t x = 0; x < p; ++x) {
      const Vec3 d = equirect_pixel_direction(x, y, p, q);
      double sum = 0.0;
      for (const Vec3& c : centers) {
        const double ang = angle_between(d, c) / kDeg;
        if (ang <= kGtRadiusDeg) sum += std::exp(-ang * ang * inv);
      }
      acc[y * p + x] = sum;
    }
  const double peak = *std::max_element(acc.begin(), acc.end());
  std::vector<float> out(acc.size(), 0.0f);
  if (peak > 0.0)
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i] / peak);
  return EquirectMap(1, q, p, std::move(out));
}

FixationMask binarize_gt(const EquirectMap& heatmap) {
  if (heatmap.channels() != 1) throw ShapeError("heatmap must have one channel");
  const auto d = heatmap.data();
  double sum = 0.0;
  for (float v : d) sum += v;
  const double mean = sum / static_cast<double>(d.size());
  double var = 0.0;
  for (float v : d) var += (v - mean) * (v - mean);
  var /= static_cast<double>(d.size());
  if (!(var > 0.0)) throw DegenerateError("heatmap is constant; mean + 3 std mask is undefined");
  const double threshold = mean + 3.0 * std::sqrt(var);
  std::vector<float> mask(d.size(), 0.0f);
  std::size_t count = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] > threshold) {
      mask[i] = 1.0f;
      ++count;
    }
  if (count == 0) throw DegenerateError("no pixel exceeds mean + 3 std");
  return {EquirectMap(1, heatmap.height(), heatmap.width(), std::move(mask)), count};
}

double auc_judd(const EquirectMap& pred, const FixationMask& fix) {
  std::vector<double> pos, neg;
  split_values(pred, fix, pos, neg);
  std::vector<double> fpr{0.0}, tpr{0.0};
  std::size_t np = 0, nn = 0;
  for (std::size_t i = 0; i < pos.size();) {
    const double thr = pos[i];
    while (i < pos.size() && pos[i] >= thr) ++i;
    np = i;
    while (nn < neg.size() && neg[nn] >= thr) ++nn;
    tpr.push_back(static_cast<double>(np) / static_cast<double>(pos.size()));
    fpr.push_back(static_cast<double>(nn) / static_cast<double>(neg.size()));
  }
  tpr.push_back(1.0);
  fpr.push_back(1.0);
  return trapezoid(fpr, tpr);
}

double auc_borji(const EquirectMap& pred, const FixationMask& fix, std::size_t n_splits,
                 std::uint64_t seed) {
  if (n_splits < 1) throw ArgumentError("AUC-Borji needs at least one split");
  check_pair(pred, fix.mask);
  const auto d = pred.data();
  const auto [lo_it, hi_it] = std::minmax_element(d.begin(), d.end());
  const double lo = *lo_it, range = static_cast<double>(*hi_it) - lo;
  std::vector<double> norm_pred(d.size(), 0.0);
  if (range > 0.0)
    for (std::size_t i = 0; i < d.size(); ++i) norm_pred[i] = (d[i] - lo) / range;

  std::vector<double> pos;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (fix.mask.data()[i] > 0.5f) pos.push_back(norm_pred[i]);
  if (pos.empty()) throw ArgumentError("fixation mask is empty");
  if (pos.size() == d.size()) throw ArgumentError("fixation mask covers every pixel");

  constexpr std::size_t kThresholds = 100;
  auto rate = [](const std::vector<double>& v, double thr) {
    std::size_t n = 0;
    for (double x : v) n += x >= thr;
    return static_cast<double>(n) / static_cast<double>(v.size());
  };
  Rng rng(seed);
  double total = 0.0;
  std::vector<double> neg(pos.size());
  for (std::size_t s = 0; s < n_splits; ++s) {
    for (double& v : neg) v = norm_pred[rng.index(d.size())];
    std::vector<double> fpr{0.0}, tpr{0.0};
    for (std::size_t k = 0; k < kThresholds; ++k) {
      const double thr = 1.0 - static_cast<double>(k) / static_cast<double>(kThresholds - 1);
      tpr.push_back(rate(pos, thr));
      fpr.push_back(rate(neg, thr));
    }
    tpr.push_back(1.0);
    fpr.push_back(1.0);
    total += trapezoid(fpr, tpr);
  }
  return total / static_cast<double>(n_splits);
}

double cc(const EquirectMap& a, const EquirectMap& b) {
  check_pair(a, b);
  const auto x = a.data(), y = b.data();
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DegenerateError("CC is undefined for a constant map");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string metrics_report_json(std::span<const FrameMetrics> frames) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  double sj = 0.0, sb = 0.0, sc = 0.0;
  for (const FrameMetrics& f : frames) {
    nlohmann::ordered_json j;
    j["frame"] = f.frame;
    j["auc_judd"] = f.auc_judd;
    j["auc_borji"] = f.auc_borji;
    j["cc"] = f.cc;
    list.push_back(std::move(j));
    sj += f.auc_judd;
    sb += f.auc_borji;
    sc += f.cc;
  }
  doc["frames"] = std::move(list);
  const double n = frames.empty() ? 1.0 : static_cast<double>(frames.size());
  nlohmann::ordered_json mean;
  mean["auc_judd"] = sj / n;
  mean["auc_borji"] = sb / n;
  mean["cc"] = sc / n;
  doc["mean"] = std::move(mean);
  doc["frame_count"] = frames.size();
  return doc.dump(2);
}

}  // namespace cubepad
