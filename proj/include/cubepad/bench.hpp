#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cubepad/neural_net.hpp"

namespace cubepad {

enum class BenchMode { EQUI, CUBEMAP_ZP, CUBEMAP_CP, OVERLAP, CP_CONVLSTM, EQUI_CONVLSTM };
const char* bench_mode_name(BenchMode m);
BenchMode parse_bench_mode(const std::string& name);
PipelineMode bench_pipeline_mode(BenchMode m);
bool bench_mode_temporal(BenchMode m);

struct BenchConfig {
  std::vector<std::size_t> widths{480, 960};
  std::vector<BenchMode> modes{BenchMode::EQUI, BenchMode::CUBEMAP_ZP, BenchMode::CUBEMAP_CP,
                               BenchMode::OVERLAP};
  std::size_t reps = 20;
  std::size_t warmup = 2;
  std::size_t threads = 1;
  // Adds CP_CONVLSTM and EQUI_CONVLSTM when set.
  bool temporal = false;
  std::size_t z = 5;
  std::uint64_t seed = 0;
  // Feature channels of the toy network that is timed.
  std::size_t hidden_channels = 16;

  // Widths must be multiples of 4 and at least 64; reps >= 3.
  void validate() const;
  std::vector<BenchMode> effective_modes() const;
  std::string to_json() const;
  // Missing keys keep their defaults.
  static BenchConfig from_json(const std::string& text);
  static BenchConfig load(const std::filesystem::path& path);
};

struct BenchRow {
  BenchMode mode;
  std::size_t p = 0, q = 0;
  std::size_t input_pixels = 0;  // pixels entering the first layer per frame
  std::size_t reps = 0;
  double median_s = 0.0;  // seconds per frame
  double min_s = 0.0;
  double max_s = 0.0;
  double fps = 0.0;       // 1 / median_s
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::size_t threads = 1;
  std::string build;
  double overlap_ratio = 0.0;           // tan^2(60) / tan^2(45)
  double overlap_ratio_measured = 0.0;  // face pixel ratio at the first width

  const BenchRow* find(BenchMode m, std::size_t p) const;
  std::string to_csv() const;
  std::string to_json() const;
  // Whitespace table: p followed by one FPS column per mode.
  std::string to_gnuplot() const;
};

// Seeded noise plus a few Gaussian blobs, [3, q, p] in [0, 1].
EquirectMap synthetic_frame(std::size_t q, std::size_t p, std::uint64_t seed);

// Forward passes only are timed; pipelines and frames are built beforehand.
// Modes are interleaved within every repetition.
BenchReport run_bench(const BenchConfig& config);

}  // namespace cubepad
