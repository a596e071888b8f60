#include "cubepad/bench.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <thread>

#include "cubepad/network_io.hpp"
#include "cubepad/rng.hpp"
#include "json.hpp"

namespace cubepad {
namespace {

constexpr BenchMode kAllModes[] = {BenchMode::EQUI,       BenchMode::CUBEMAP_ZP,
                                   BenchMode::CUBEMAP_CP, BenchMode::OVERLAP,
                                   BenchMode::CP_CONVLSTM, BenchMode::EQUI_CONVLSTM};

std::string build_stamp() {
  std::string s = "gcc " __VERSION__;
#ifdef NDEBUG
  s += ", optimised (NDEBUG)";
#else
  s += ", debug";
#endif
  return s;
}

// Runs `work(i)` for i in [0, n) on n threads (inline when n == 1).
template <typename F>
void run_parallel(std::size_t n, F&& work) {
  if (n == 1) {
    work(0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pool.emplace_back([&work, i] { work(i); });
  for (auto& t : pool) t.join();
}

// One timed unit of work for a (mode, width) cell.
struct Job {
  BenchMode mode;
  std::size_t p, q;
  std::size_t frames_per_run;  // frames processed per thread in one run
  std::unique_ptr<StaticPipeline> stat;
  std::unique_ptr<TemporalPipeline> temporal;
  std::vector<std::vector<EquirectMap>> inputs;  // one set per thread
  std::vector<double> samples;
};

}  // namespace

const char* bench_mode_name(BenchMode m) {
  switch (m) {
    case BenchMode::EQUI: return "EQUI";
    case BenchMode::CUBEMAP_ZP: return "CUBEMAP_ZP";
    case BenchMode::CUBEMAP_CP: return "CUBEMAP_CP";
    case BenchMode::OVERLAP: return "OVERLAP";
    case BenchMode::CP_CONVLSTM: return "CP_CONVLSTM";
    case BenchMode::EQUI_CONVLSTM: return "EQUI_CONVLSTM";
  }
  return "?";
}

BenchMode parse_bench_mode(const std::string& name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  for (BenchMode m : kAllModes)
    if (up == bench_mode_name(m)) return m;
  throw ArgumentError("unknown bench mode '" + name + "'");
}

PipelineMode bench_pipeline_mode(BenchMode m) {
  switch (m) {
    case BenchMode::EQUI:
    case BenchMode::EQUI_CONVLSTM: return PipelineMode::EQUI;
    case BenchMode::CUBEMAP_ZP: return PipelineMode::ZP;
    case BenchMode::CUBEMAP_CP:
    case BenchMode::CP_CONVLSTM: return PipelineMode::CP;
    case BenchMode::OVERLAP: return PipelineMode::OVERLAP;
  }
  return PipelineMode::CP;
}

bool bench_mode_temporal(BenchMode m) {
  return m == BenchMode::CP_CONVLSTM || m == BenchMode::EQUI_CONVLSTM;
}

void BenchConfig::validate() const {
  if (widths.empty()) throw ArgumentError("bench needs at least one width");
  for (std::size_t p : widths)
    if (p < 64 || p % 4 != 0)
      throw ArgumentError("bench width " + std::to_string(p) + " must be >= 64 and a multiple of 4");
  if (modes.empty() && !temporal) throw ArgumentError("bench needs at least one mode");
  if (reps < 3) throw ArgumentError("bench needs at least 3 repetitions");
  if (threads < 1) throw ArgumentError("thread count must be positive");
  if (z < 1) throw ArgumentError("Z must be at least 1");
  if (hidden_channels < 1) throw ArgumentError("hidden channel count must be positive");
}

std::vector<BenchMode> BenchConfig::effective_modes() const {
  std::vector<BenchMode> out = modes;
  if (temporal)
    for (BenchMode m : {BenchMode::CP_CONVLSTM, BenchMode::EQUI_CONVLSTM})
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  return out;
}

std::string BenchConfig::to_json() const {
  nlohmann::ordered_json j;
  j["widths"] = widths;
  std::vector<std::string> names;
  for (BenchMode m : modes) names.emplace_back(bench_mode_name(m));
  j["modes"] = names;
  j["reps"] = reps;
  j["warmup"] = warmup;
  j["threads"] = threads;
  j["temporal"] = temporal;
  j["z"] = z;
  j["seed"] = seed;
  j["hidden_channels"] = hidden_channels;
  return j.dump(2);
}

BenchConfig BenchConfig::from_json(const std::string& text) {
  BenchConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw FormatError("bench config must be a JSON object");
    c.widths = j.value("widths", c.widths);
    if (j.contains("modes")) {
      c.modes.clear();
      for (const auto& m : j.at("modes")) c.modes.push_back(parse_bench_mode(m.get<std::string>()));
    }
    c.reps = j.value("reps", c.reps);
    c.warmup = j.value("warmup", c.warmup);
    c.threads = j.value("threads", c.threads);
    c.temporal = j.value("temporal", c.temporal);
    c.z = j.value("z", c.z);
    c.seed = j.value("seed", c.seed);
    c.hidden_channels = j.value("hidden_channels", c.hidden_channels);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad bench config: ") + e.what());
  }
  c.validate();
  return c;
}

BenchConfig BenchConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

const BenchRow* BenchReport::find(BenchMode m, std::size_t p) const {
  for (const BenchRow& r : rows)
    if (r.mode == m && r.p == p) return &r;
  return nullptr;
}

std::string BenchReport::to_csv() const {
  std::ostringstream out;
  out.precision(9);
  out << "mode,p,q,input_pixels,reps,median_s,min_s,max_s,fps\n";
  for (const BenchRow& r : rows)
    out << bench_mode_name(r.mode) << ',' << r.p << ',' << r.q << ',' << r.input_pixels << ','
        << r.reps << ',' << r.median_s << ',' << r.min_s << ',' << r.max_s << ',' << r.fps << '\n';
  return out.str();
}

std::string BenchReport::to_json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json env;
  env["threads"] = threads;
  env["build"] = build;
  j["environment"] = env;
  j["overlap_pixel_ratio"] = overlap_ratio;
  j["overlap_pixel_ratio_measured"] = overlap_ratio_measured;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const BenchRow& r : rows) {
    nlohmann::ordered_json o;
    o["mode"] = bench_mode_name(r.mode);
    o["p"] = r.p;
    o["q"] = r.q;
    o["input_pixels"] = r.input_pixels;
    o["reps"] = r.reps;
    o["median_s"] = r.median_s;
    o["min_s"] = r.min_s;
    o["max_s"] = r.max_s;
    o["fps"] = r.fps;
    list.push_back(std::move(o));
  }
  j["results"] = std::move(list);
  return j.dump(2);
}

std::string BenchReport::to_gnuplot() const {
  std::vector<BenchMode> modes;
  std::vector<std::size_t> widths;
  for (const BenchRow& r : rows) {
    if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
    if (std::find(widths.begin(), widths.end(), r.p) == widths.end()) widths.push_back(r.p);
  }
  std::ostringstream out;
  out.precision(6);
  out << "# p";
  for (BenchMode m : modes) out << ' ' << bench_mode_name(m);
  out << '\n';
  for (std::size_t p : widths) {
    out << p;
    for (BenchMode m : modes) {
      const BenchRow* r = find(m, p);
      out << ' ';
      if (r) out << r->fps; else out << "NaN";
    }
    out << '\n';
  }
  return out.str();
}

EquirectMap synthetic_frame(std::size_t q, std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t plane = q * p;
  std::vector<float> v(3 * plane);
  for (float& x : v) x = static_cast<float>(0.2 * rng.uniform());
  for (int b = 0; b < 4; ++b) {
    const double cx = rng.uniform(0.0, static_cast<double>(p));
    const double cy = rng.uniform(0.2, 0.8) * static_cast<double>(q);
    const double r = rng.uniform(0.02, 0.06) * static_cast<double>(p);
    const std::size_t c = rng.index(3);
    for (std::size_t y = 0; y < q; ++y)
      for (std::size_t x = 0; x < p; ++x) {
        double dx = std::fabs(static_cast<double>(x) - cx);
        dx = std::min(dx, static_cast<double>(p) - dx);
        const double dy = static_cast<double>(y) - cy;
        const double g = 0.8 * std::exp(-(dx * dx + dy * dy) / (2.0 * r * r));
        float& px = v[c * plane + y * p + x];
        px = static_cast<float>(std::min(1.0, px + g));
      }
  }
  return EquirectMap(3, q, p, std::move(v));
}

BenchReport run_bench(const BenchConfig& config) {
  config.validate();
  ToyNetOptions opts;
  opts.hidden_channels = config.hidden_channels;
  const NetworkSpec net = toy_network(config.seed, opts);
  const ConvLSTMWeights lstm = toy_convlstm(config.seed + 1, net.classes());
  const std::vector<BenchMode> modes = config.effective_modes();
  const std::size_t threads = config.threads;

  std::vector<Job> jobs;
  for (std::size_t p : config.widths) {
    const std::size_t q = p / 2;
    for (BenchMode m : modes) {
      Job job{m, p, q, 1, nullptr, nullptr, {}, {}};
      const PipelineMode pm = bench_pipeline_mode(m);
      if (bench_mode_temporal(m)) {
        job.temporal = std::make_unique<TemporalPipeline>(net, lstm, pm, q, p, config.z);
        job.stat = std::make_unique<StaticPipeline>(net, pm, q, p);
        job.frames_per_run = config.z;
      } else {
        job.stat = std::make_unique<StaticPipeline>(net, pm, q, p);
      }
      for (std::size_t t = 0; t < threads; ++t) {
        std::vector<EquirectMap> frames;
        for (std::size_t f = 0; f < job.frames_per_run; ++f)
          frames.push_back(synthetic_frame(q, p, config.seed + 1000 * (t + 1) + f));
        job.inputs.push_back(std::move(frames));
      }
      jobs.push_back(std::move(job));
    }
  }

  for (std::size_t rep = 0; rep < config.warmup + config.reps; ++rep) {
    for (Job& job : jobs) {
      const auto start = std::chrono::steady_clock::now();
      run_parallel(threads, [&job](std::size_t t) {
        if (job.temporal) {
          job.temporal->run(job.inputs[t]);
        } else {
          for (const EquirectMap& f : job.inputs[t]) job.stat->run(f);
        }
      });
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
      if (rep >= config.warmup)
        job.samples.push_back(dt.count() / static_cast<double>(threads * job.frames_per_run));
    }
  }

  BenchReport report;
  report.threads = threads;
  report.build = build_stamp();
  const double t60 = std::tan(kOverlapFov / 2.0), t45 = std::tan(std::numbers::pi / 4.0);
  report.overlap_ratio = (t60 * t60) / (t45 * t45);
  {
    const std::size_t w = config.widths.front() / 4;
    const double wide = static_cast<double>(overlap_face_width(w, kOverlapFov));
    report.overlap_ratio_measured = wide * wide / static_cast<double>(w * w);
  }
  for (Job& job : jobs) {
    std::vector<double> s = job.samples;
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    const double median = n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
    report.rows.push_back({job.mode, job.p, job.q, job.stat->input_pixels(), n, median, s.front(),
                           s.back(), 1.0 / median});
  }
  return report;
}

}  // namespace cubepad
