#include "cubepad/temporal_loss.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cubepad {
namespace {

void check_map(const EquirectMap& m, const char* what) {
  if (m.channels() != 1) throw ShapeError(std::string(what) + " must have one channel");
}

void check_same(const EquirectMap& a, const EquirectMap& b) {
  if (a.height() != b.height() || a.width() != b.width() || a.channels() != b.channels())
    throw ShapeError("maps differ in shape: " + dims_to_string(a.tensor().dims()) + " vs " +
                     dims_to_string(b.tensor().dims()));
}

void check_flow(const FlowField& flow, const EquirectMap& m) {
  if (flow.channels() != 2 || flow.height() != m.height() || flow.width() != m.width())
    throw ShapeError("flow " + dims_to_string(flow.tensor().dims()) + " does not match map " +
                     dims_to_string(m.tensor().dims()));
}

double mean_sq_diff(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

bool is_static(const FlowField& flow, std::size_t i, std::size_t plane, double epsilon) {
  const double dx = flow.data()[i], dy = flow.data()[plane + i];
  return std::sqrt(dx * dx + dy * dy) <= epsilon;
}

}  // namespace

void LossWeights::validate() const {
  if (!(lambda_r >= 0.0) || !(lambda_s >= 0.0) || !(lambda_m >= 0.0))
    throw ArgumentError("loss weights must be non-negative");
  if (!(epsilon >= 0.0)) throw ArgumentError("motion margin must be non-negative");
  if (z < 1) throw ArgumentError("Z must be at least 1");
}

std::string LossWeights::to_json() const {
  nlohmann::ordered_json j;
  j["lambda_r"] = lambda_r;
  j["lambda_s"] = lambda_s;
  j["lambda_m"] = lambda_m;
  j["epsilon"] = epsilon;
  j["z"] = z;
  return j.dump(2);
}

LossWeights LossWeights::from_json(const std::string& text) {
  LossWeights w;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw FormatError("loss weights must be a JSON object");
    w.lambda_r = j.value("lambda_r", w.lambda_r);
    w.lambda_s = j.value("lambda_s", w.lambda_s);
    w.lambda_m = j.value("lambda_m", w.lambda_m);
    w.epsilon = j.value("epsilon", w.epsilon);
    w.z = j.value("z", w.z);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad loss weights: ") + e.what());
  }
  w.validate();
  return w;
}

LossWeights LossWeights::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

EquirectMap warp(const EquirectMap& prev, const FlowField& flow) {
  check_flow(flow, prev);
  const std::size_t q = prev.height(), p = prev.width(), plane = q * p;
  const auto fd = flow.data();
  std::vector<float> out(prev.channels() * plane);
  const double pd = static_cast<double>(p);
  for (std::size_t y = 0; y < q; ++y) {
    for (std::size_t x = 0; x < p; ++x) {
      const std::size_t i = y * p + x;
      double sx = std::fmod(static_cast<double>(x) + fd[i], pd);
      if (sx < 0.0) sx += pd;
      const double sy = std::clamp(static_cast<double>(y) + fd[plane + i], 0.0,
                                   static_cast<double>(q - 1));
      const double bx = std::floor(sx), by = std::floor(sy);
      const double fx = sx - bx, fy = sy - by;
      const std::size_t x0 = static_cast<std::size_t>(bx) % p, x1 = (x0 + 1) % p;
      const std::size_t y0 = static_cast<std::size_t>(by), y1 = std::min(y0 + 1, q - 1);
      for (std::size_t c = 0; c < prev.channels(); ++c) {
        const float* src = prev.data().data() + c * plane;
        const double a = src[y0 * p + x0], b = src[y0 * p + x1];
        const double cc = src[y1 * p + x0], d = src[y1 * p + x1];
        const double top = a + (b - a) * fx, bottom = cc + (d - cc) * fx;
        out[c * plane + i] = static_cast<float>(top + (bottom - top) * fy);
      }
    }
  }
  return EquirectMap(prev.channels(), q, p, std::move(out));
}

double loss_recons(const EquirectMap& cur, const EquirectMap& prev, const FlowField& flow) {
  check_map(cur, "O_t");
  check_same(cur, prev);
  return mean_sq_diff(cur.data(), warp(prev, flow).data());
}

double loss_smooth(const EquirectMap& cur, const EquirectMap& prev) {
  check_map(cur, "O_t");
  check_same(cur, prev);
  return mean_sq_diff(cur.data(), prev.data());
}

double loss_motion(const EquirectMap& cur, const FlowField& flow, double epsilon) {
  check_map(cur, "O_t");
  check_flow(flow, cur);
  const std::size_t plane = cur.plane_size();
  double sum = 0.0;
  for (std::size_t i = 0; i < plane; ++i)
    if (is_static(flow, i, plane, epsilon)) {
      const double v = cur.data()[i];
      sum += v * v;
    }
  return sum / static_cast<double>(plane);
}

LossBreakdown loss_total(std::span<const EquirectMap> maps, std::span<const FlowField> flows,
                         const LossWeights& w) {
  w.validate();
  if (maps.size() < 2 || maps.size() > w.z + 1)
    throw ArgumentError("loss_total needs between 2 and Z + 1 = " + std::to_string(w.z + 1) +
                        " maps, got " + std::to_string(maps.size()));
  if (flows.size() != maps.size() - 1)
    throw ArgumentError("loss_total needs " + std::to_string(maps.size() - 1) + " flows, got " +
                        std::to_string(flows.size()));
  LossBreakdown b;
  for (std::size_t t = 1; t < maps.size(); ++t) {
    const double r = loss_recons(maps[t], maps[t - 1], flows[t - 1]);
    const double s = loss_smooth(maps[t], maps[t - 1]);
    const double m = loss_motion(maps[t], flows[t - 1], w.epsilon);
    b.recons += r;
    b.smooth += s;
    b.motion += m;
    b.total += w.lambda_r * r + w.lambda_s * s + w.lambda_m * m;
    ++b.steps;
  }
  return b;
}

EquirectMap loss_grad(const EquirectMap& cur, const EquirectMap& prev, const FlowField& flow,
                      const LossWeights& w) {
  check_map(cur, "O_t");
  check_same(cur, prev);
  check_flow(flow, cur);
  const EquirectMap warped = warp(prev, flow);
  const std::size_t n = cur.plane_size();
  const double scale = 2.0 / static_cast<double>(n);
  std::vector<float> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double o = cur.data()[i];
    double v = w.lambda_r * (o - warped.data()[i]) + w.lambda_s * (o - prev.data()[i]);
    if (is_static(flow, i, n, w.epsilon)) v += w.lambda_m * o;
    g[i] = static_cast<float>(scale * v);
  }
  return EquirectMap(1, cur.height(), cur.width(), std::move(g));
}

FlowField constant_flow(std::size_t q, std::size_t p, double dx, double dy) {
  std::vector<float> v(2 * q * p);
  std::fill(v.begin(), v.begin() + q * p, static_cast<float>(dx));
  std::fill(v.begin() + q * p, v.end(), static_cast<float>(dy));
  return FlowField(2, q, p, std::move(v));
}

FlowField rotation_flow(std::size_t q, std::size_t p, double deg_per_frame) {
  return constant_flow(q, p, deg_per_frame / 360.0 * static_cast<double>(p), 0.0);
}

FlowField blob_flow(std::size_t q, std::size_t p, double cx, double cy, double radius, double dx,
                    double dy) {
  std::vector<float> v(2 * q * p, 0.0f);
  for (std::size_t y = 0; y < q; ++y)
    for (std::size_t x = 0; x < p; ++x) {
      double ddx = std::fabs(static_cast<double>(x) - cx);
      ddx = std::min(ddx, static_cast<double>(p) - ddx);
      const double ddy = static_cast<double>(y) - cy;
      if (ddx * ddx + ddy * ddy <= radius * radius) {
        v[y * p + x] = static_cast<float>(dx);
        v[q * p + y * p + x] = static_cast<float>(dy);
      }
    }
  return FlowField(2, q, p, std::move(v));
}

}  // namespace cubepad
