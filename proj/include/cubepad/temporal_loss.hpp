#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cubepad/tensor.hpp"

namespace cubepad {

// Flow fields are [2, q, p] maps holding (dx, dy) in pixels per frame.
using FlowField = EquirectMap;

struct LossWeights {
  double lambda_r = 0.1;
  double lambda_s = 0.7;
  double lambda_m = 0.001;
  double epsilon = 0.5;  // motion margin in pixels
  std::size_t z = 5;

  void validate() const;
  std::string to_json() const;
  // Missing keys keep their defaults.
  static LossWeights from_json(const std::string& text);
  static LossWeights load(const std::filesystem::path& path);
};

// Samples prev at (x + dx, y + dy): columns wrap, rows clamp.
EquirectMap warp(const EquirectMap& prev, const FlowField& flow);

double loss_recons(const EquirectMap& cur, const EquirectMap& prev, const FlowField& flow);
double loss_smooth(const EquirectMap& cur, const EquirectMap& prev);
double loss_motion(const EquirectMap& cur, const FlowField& flow, double epsilon);

struct LossBreakdown {
  double recons = 0.0;  // unweighted sums over steps
  double smooth = 0.0;
  double motion = 0.0;
  double total = 0.0;   // weighted
  std::size_t steps = 0;
};

// maps O_1..O_n with flows[i] aligned O_{i+1} -> O_{i+2}. Needs
// flows.size() == maps.size() - 1 and 2 <= maps.size() <= Z + 1.
LossBreakdown loss_total(std::span<const EquirectMap> maps, std::span<const FlowField> flows,
                         const LossWeights& w);

// dL_t/dO_t for one step.
EquirectMap loss_grad(const EquirectMap& cur, const EquirectMap& prev, const FlowField& flow,
                      const LossWeights& w);

// Synthetic flows for tests and the CLI.
FlowField constant_flow(std::size_t q, std::size_t p, double dx, double dy);
// Yaw rotation by deg_per_frame: a uniform horizontal shift.
FlowField rotation_flow(std::size_t q, std::size_t p, double deg_per_frame);
// (dx, dy) inside the disc of the given pixel radius around (cx, cy), zero elsewhere.
FlowField blob_flow(std::size_t q, std::size_t p, double cx, double cy, double radius,
                    double dx, double dy);

}  // namespace cubepad
