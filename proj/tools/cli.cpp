#include "cli.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "cubepad/bench.hpp"
#include "cubepad/evaluation.hpp"
#include "cubepad/image_io.hpp"
#include "cubepad/network_io.hpp"
#include "cubepad/pilot.hpp"
#include "cubepad/temporal_loss.hpp"
#include "cubepad/tensor_io.hpp"

namespace cubepad::cli {
namespace {

namespace fs = std::filesystem;

// Bad invocation detected after parsing (exit 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string format = "json";
};

bool is_map_file(const fs::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".png" || ext == ".pfm" || ext == ".cpt";
}

// Map files in dir sorted by name. Only .cpt files when cpt_only is set.
std::vector<fs::path> list_maps(const fs::path& dir, bool cpt_only = false) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && (cpt_only ? e.path().extension() == ".cpt" : is_map_file(e.path())))
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no input maps in " + dir.string());
  return files;
}

// Keeps one file per stem, preferring .cpt (exact floats) over images.
std::vector<fs::path> list_frames(const fs::path& dir) {
  std::map<std::string, fs::path> by_stem;
  for (const fs::path& f : list_maps(dir)) {
    auto [it, inserted] = by_stem.emplace(f.stem().string(), f);
    if (!inserted && f.extension() == ".cpt") it->second = f;
  }
  std::vector<fs::path> out;
  for (auto& [stem, path] : by_stem) out.push_back(path);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

void emit(std::ostream& out, const std::string& text, const std::string& path) {
  if (path.empty()) {
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
  } else {
    write_text(path, text.back() == '\n' ? text : text + '\n');
  }
}

std::string frame_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%05zu", i);
  return buf;
}

template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void add_project(CLI::App& app, std::function<void()>& action, std::ostream& err) {
  auto* cmd = app.add_subcommand("project", "Equirect image to a [6, c, w, w] cubemap tensor");
  auto in = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto w = std::make_shared<std::size_t>(0);
  cmd->add_option("input", *in, "Equirect image (.png, .pfm or .cpt)")->required();
  cmd->add_option("output", *out, "Output .cpt file")->required();
  cmd->add_option("-w,--width", *w, "Face width (default p / 4)");
  cmd->callback([&action, &err, in, out, w] {
    action = [&err, in, out, w] {
      const EquirectMap m = read_image(*in);
      if (m.width() % 2 != 0)
        throw UsageError("equirect width must be even, got p = " + std::to_string(m.width()));
      const std::size_t face = *w ? *w : m.width() / 4;
      if (face < 2) throw UsageError("face width must be at least 2");
      const CubeMap cm = equirect_to_cubemap(m, face);
      write_tensor(cm.tensor(), *out);
      err << "wrote " << dims_to_string(cm.tensor().dims()) << " cubemap to " << *out << '\n';
    };
  });
}

void add_unproject(CLI::App& app, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("unproject", "Cubemap tensor back to an equirect image");
  auto in = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto p = std::make_shared<std::size_t>(0);
  auto colormap = std::make_shared<bool>(false);
  cmd->add_option("input", *in, "Cubemap .cpt file [6, c, w, w]")->required();
  cmd->add_option("output", *out, "Output image (.png, .pfm or .cpt)")->required();
  cmd->add_option("-p,--width", *p, "Equirect width (default 4w); height is p / 2");
  cmd->add_flag("--colormap", *colormap, "Jet colormap for single-channel PNG output");
  cmd->callback([&action, in, out, p, colormap] {
    action = [in, out, p, colormap] {
      const CubeMap cm(read_tensor(*in));
      const std::size_t width = *p ? *p : 4 * cm.width();
      if (width % 2 != 0 || width < 2)
        throw UsageError("equirect width must be even, got p = " + std::to_string(width));
      write_image(cubemap_to_equirect(cm, width, width / 2), *out, {*colormap});
    };
  });
}

void add_saliency(CLI::App& app, std::function<void()>& action, const Globals& g, std::ostream& err) {
  auto* cmd = app.add_subcommand("saliency", "Per-frame saliency maps from a network manifest");
  struct Opts {
    std::string frames, manifest, out, mode = "CP";
    std::size_t temporal = 0;
    bool colormap = false;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("frames", o->frames, "Directory of equirect frames")->required();
  cmd->add_option("manifest", o->manifest, "Network manifest JSON")->required();
  cmd->add_option("output", o->out, "Output directory")->required();
  cmd->add_option("-m,--mode", o->mode, "CP, ZP, EQUI or OVERLAP");
  auto* t = cmd->add_option("--temporal", o->temporal, "Run the ConvLSTM with state reset every Z frames")
                ->expected(0, 1)
                ->default_str("5");
  cmd->add_flag("--colormap", o->colormap, "Jet colormap for the PNG previews");
  cmd->callback([&action, &g, &err, o, t] {
    const bool temporal = t->count() > 0;
    if (temporal && o->temporal == 0) o->temporal = 5;
    action = [&g, &err, o, temporal] {
      PipelineMode mode;
      try {
        mode = parse_pipeline_mode(o->mode);
      } catch (const ArgumentError& e) {
        throw UsageError(e.what());
      }
      const NetworkBundle bundle = load_manifest(o->manifest);
      const std::vector<fs::path> files = list_frames(o->frames);
      std::vector<EquirectMap> frames;
      for (const fs::path& f : files) frames.push_back(read_image(f));
      const std::size_t q = frames[0].height(), p = frames[0].width();
      for (const EquirectMap& f : frames)
        if (f.height() != q || f.width() != p) throw ShapeError("frames differ in size");
      StaticPipeline stat(bundle.net, mode, q, p);
      if (mode == PipelineMode::OVERLAP)
        err << "OVERLAP face width " << stat.face_width() << " for base width " << p / 4
            << " (ceil(w * tan 60))\n";
      std::vector<std::optional<EquirectMap>> outputs(frames.size());
      if (temporal) {
        if (!bundle.lstm) throw FormatError("manifest has no convlstm weights for --temporal");
        TemporalPipeline tp(bundle.net, *bundle.lstm, mode, q, p, o->temporal);
        auto seq = tp.run(frames);
        for (std::size_t i = 0; i < seq.size(); ++i) outputs[i] = std::move(seq[i]);
        err << "temporal: Z = " << o->temporal << ", " << (frames.size() + o->temporal - 1) / o->temporal
            << " state resets\n";
      } else {
        parallel_for(frames.size(), g.threads, [&](std::size_t i) { outputs[i] = stat.run(frames[i]); });
      }
      fs::create_directories(o->out);
      for (std::size_t i = 0; i < files.size(); ++i) {
        const fs::path stem = fs::path(o->out) / files[i].stem();
        write_tensor(outputs[i]->tensor(), stem.string() + ".cpt");
        write_image(*outputs[i], stem.string() + ".png", {o->colormap});
      }
      err << "wrote " << files.size() << " saliency maps to " << o->out << '\n';
    };
  });
}

void add_loss(CLI::App& app, std::function<void()>& action, std::ostream& out) {
  auto* cmd = app.add_subcommand("loss", "Temporal loss breakdown over a saliency sequence");
  struct Opts {
    std::string maps, flows, config, output;
    std::optional<double> lr, ls, lm, eps;
    std::optional<std::size_t> z;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("maps", o->maps, "Directory of [1, q, p] .cpt saliency maps")->required();
  cmd->add_option("flows", o->flows, "Directory of [2, q, p] .cpt flows, one per consecutive pair")
      ->required();
  cmd->add_option("--config", o->config, "Loss weights JSON");
  cmd->add_option("--lambda-r", o->lr, "Reconstruction weight (default 0.1)");
  cmd->add_option("--lambda-s", o->ls, "Smoothness weight (default 0.7)");
  cmd->add_option("--lambda-m", o->lm, "Motion-mask weight (default 0.001)");
  cmd->add_option("--epsilon", o->eps, "Motion margin in pixels (default 0.5)");
  cmd->add_option("--z", o->z, "Window length Z (default 5)");
  cmd->add_option("-o,--output", o->output, "Write the JSON here instead of stdout");
  cmd->callback([&action, &out, o] {
    action = [&out, o] {
      LossWeights w = o->config.empty() ? LossWeights{} : LossWeights::load(o->config);
      if (o->lr) w.lambda_r = *o->lr;
      if (o->ls) w.lambda_s = *o->ls;
      if (o->lm) w.lambda_m = *o->lm;
      if (o->eps) w.epsilon = *o->eps;
      if (o->z) w.z = *o->z;
      try {
        w.validate();
      } catch (const ArgumentError& e) {
        throw UsageError(e.what());
      }
      std::vector<EquirectMap> maps;
      for (const fs::path& f : list_maps(o->maps, true)) maps.emplace_back(read_tensor(f));
      if (maps.size() < 2) throw ArgumentError("need at least two maps");
      std::vector<fs::path> flow_files;
      if (fs::is_directory(o->flows))
        for (const auto& e : fs::directory_iterator(o->flows))
          if (e.path().extension() == ".cpt") flow_files.push_back(e.path());
      std::sort(flow_files.begin(), flow_files.end());
      if (flow_files.size() != maps.size() - 1)
        throw IoError("expected " + std::to_string(maps.size() - 1) + " flow files in " + o->flows +
                      ", found " + std::to_string(flow_files.size()));
      std::vector<FlowField> flows;
      for (const fs::path& f : flow_files) flows.emplace_back(read_tensor(f));

      nlohmann::ordered_json doc;
      doc["weights"] = nlohmann::ordered_json::parse(w.to_json());
      nlohmann::ordered_json windows = nlohmann::ordered_json::array();
      LossBreakdown sum;
      for (std::size_t start = 0; start < maps.size(); start += w.z) {
        const std::size_t len = std::min(w.z, maps.size() - start);
        if (len < 2) continue;
        const LossBreakdown b = loss_total(std::span(maps).subspan(start, len),
                                           std::span(flows).subspan(start, len - 1), w);
        nlohmann::ordered_json j;
        j["first_frame"] = start;
        j["frames"] = len;
        j["recons"] = b.recons;
        j["smooth"] = b.smooth;
        j["motion"] = b.motion;
        j["total"] = b.total;
        windows.push_back(std::move(j));
        sum.recons += b.recons;
        sum.smooth += b.smooth;
        sum.motion += b.motion;
        sum.total += b.total;
        sum.steps += b.steps;
      }
      doc["windows"] = std::move(windows);
      doc["steps"] = sum.steps;
      doc["recons"] = sum.recons;
      doc["smooth"] = sum.smooth;
      doc["motion"] = sum.motion;
      doc["total"] = sum.total;
      emit(out, doc.dump(2), o->output);
    };
  });
}

void add_eval(CLI::App& app, std::function<void()>& action, const Globals& g, std::ostream& out) {
  auto* cmd = app.add_subcommand("eval", "AUC-Judd, AUC-Borji and CC against viewpoint ground truth");
  struct Opts {
    std::string preds, gt, output;
    std::size_t p = 0, q = 0, splits = 100;
    double sigma = kGtSigmaDeg;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("predictions", o->preds, "Directory of predicted maps, one per frame in name order")
      ->required();
  cmd->add_option("trajectories", o->gt, "Viewpoint JSON lines")->required();
  cmd->add_option("-p,--width", o->p, "Raster width (default: prediction width)");
  cmd->add_option("-q,--height", o->q, "Raster height (default: prediction height)");
  cmd->add_option("--splits", o->splits, "AUC-Borji splits");
  cmd->add_option("--sigma", o->sigma, "Ground-truth Gaussian sigma in degrees");
  cmd->add_option("-o,--output", o->output, "Write the JSON here instead of stdout");
  cmd->callback([&action, &g, &out, o] {
    action = [&g, &out, o] {
      const std::vector<Viewpoint> vps = read_viewpoints(o->gt);
      if (vps.empty()) throw ArgumentError("trajectory file " + o->gt + " has no viewpoints");
      const std::vector<fs::path> files = list_frames(o->preds);
      std::vector<FrameMetrics> metrics;
      for (std::size_t i = 0; i < files.size(); ++i) {
        std::vector<Viewpoint> here;
        for (const Viewpoint& v : vps)
          if (v.frame == i) here.push_back(v);
        if (here.empty()) continue;
        EquirectMap pred = read_image(files[i]);
        if (pred.channels() != 1) throw ShapeError("prediction " + files[i].string() + " is not single-channel");
        const std::size_t p = o->p ? o->p : pred.width(), q = o->q ? o->q : pred.height();
        if (pred.width() != p || pred.height() != q) pred = resize_bilinear(pred, q, p);
        const EquirectMap gt = gt_heatmap(here, p, q, o->sigma);
        const FixationMask fix = binarize_gt(gt);
        metrics.push_back({i, auc_judd(pred, fix), auc_borji(pred, fix, o->splits, g.seed + i),
                           cc(pred, gt)});
      }
      if (metrics.empty()) throw ArgumentError("no prediction frame has ground-truth viewpoints");
      if (g.format == "csv") {
        std::string csv = "frame,auc_judd,auc_borji,cc\n";
        char buf[128];
        for (const FrameMetrics& m : metrics) {
          std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g\n", m.frame, m.auc_judd, m.auc_borji, m.cc);
          csv += buf;
        }
        emit(out, csv, o->output);
      } else {
        emit(out, metrics_report_json(metrics), o->output);
      }
    };
  });
}

void add_pilot(CLI::App& app, std::function<void()>& action, const Globals& g, std::ostream& out) {
  auto* cmd = app.add_subcommand("pilot", "Link salient NFoV viewing angles into a trajectory");
  struct Opts {
    std::string maps, output;
    double lon_step = 10.0, lat_step = 10.0, lat_max = 45.0, fov = 90.0, d_max = kDefaultDMaxDeg;
    std::size_t cls = 0;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("saliency", o->maps, "Directory of saliency maps in frame order")->required();
  cmd->add_option("--lon-step", o->lon_step, "Candidate longitude step in degrees");
  cmd->add_option("--lat-step", o->lat_step, "Candidate latitude step in degrees");
  cmd->add_option("--lat-max", o->lat_max, "Candidate latitude bound in degrees");
  cmd->add_option("--fov", o->fov, "NFoV field of view in degrees");
  cmd->add_option("--d-max", o->d_max, "Largest step between frames in degrees");
  cmd->add_option("--class", o->cls, "Channel (class index) of multi-channel maps to score");
  cmd->add_option("-o,--output", o->output, "Write the JSON lines here instead of stdout");
  cmd->callback([&action, &g, &out, o] {
    action = [&g, &out, o] {
      const CandidateGrid grid = CandidateGrid::regular(o->lon_step, o->lat_step, o->lat_max, o->fov);
      const std::vector<fs::path> files = list_frames(o->maps);
      std::vector<EquirectMap> maps;
      for (const fs::path& f : files) maps.push_back(read_image(f));
      const ViewangleScorer scorer(grid, maps[0].width(), maps[0].height());
      std::vector<std::vector<double>> scores(maps.size());
      parallel_for(maps.size(), g.threads, [&](std::size_t i) { scores[i] = scorer.score(maps[i], o->cls); });
      const Trajectory t = link_trajectory(scores, grid, o->d_max * std::numbers::pi / 180.0);
      emit(out, trajectory_jsonl(t), o->output);
    };
  });
}

void add_bench(CLI::App& app, std::function<void()>& action, const Globals& g, std::ostream& out,
               std::ostream& err) {
  auto* cmd = app.add_subcommand("bench", "Forward-pass throughput per pipeline and resolution");
  struct Opts {
    std::string config, prefix;
    std::vector<std::size_t> widths;
    std::vector<std::string> modes;
    std::optional<std::size_t> reps, warmup, z;
    bool temporal = false;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--config", o->config, "Bench config JSON");
  cmd->add_option("--widths", o->widths, "Equirect widths p")->delimiter(',');
  cmd->add_option("--modes", o->modes, "EQUI, CUBEMAP_ZP, CUBEMAP_CP, OVERLAP")->delimiter(',');
  cmd->add_option("--reps", o->reps, "Timed repetitions (>= 3)");
  cmd->add_option("--warmup", o->warmup, "Untimed warm-up repetitions");
  cmd->add_option("--z", o->z, "Sequence length for the temporal modes");
  cmd->add_flag("--temporal", o->temporal, "Also time CP_CONVLSTM and EQUI_CONVLSTM");
  cmd->add_option("--out-prefix", o->prefix, "Write <prefix>.csv, <prefix>.json and <prefix>.dat");
  cmd->callback([&action, &g, &out, &err, o] {
    action = [&g, &out, &err, o] {
      BenchConfig c = o->config.empty() ? BenchConfig{} : BenchConfig::load(o->config);
      if (!o->widths.empty()) c.widths = o->widths;
      try {
        if (!o->modes.empty()) {
          c.modes.clear();
          for (const std::string& m : o->modes) c.modes.push_back(parse_bench_mode(m));
        }
        if (o->reps) c.reps = *o->reps;
        if (o->warmup) c.warmup = *o->warmup;
        if (o->z) c.z = *o->z;
        if (o->temporal) c.temporal = true;
        c.threads = g.threads;
        c.seed = g.seed;
        c.validate();
      } catch (const ArgumentError& e) {
        throw UsageError(e.what());
      }
      const BenchReport r = run_bench(c);
      if (!o->prefix.empty()) {
        write_text(o->prefix + ".csv", r.to_csv());
        write_text(o->prefix + ".json", r.to_json() + "\n");
        write_text(o->prefix + ".dat", r.to_gnuplot());
        err << "wrote " << o->prefix << ".{csv,json,dat}\n";
      }
      out << (g.format == "csv" ? r.to_csv() : r.to_json() + "\n");
    };
  });
}

void add_gen_weights(CLI::App& app, std::function<void()>& action, const Globals& g, std::ostream& err) {
  auto* cmd = app.add_subcommand("gen-weights", "Seeded toy network manifest");
  struct Opts {
    std::string manifest;
    ToyNetOptions net;
    bool lstm = false;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("manifest", o->manifest, "Output manifest path; tensors go next to it")->required();
  cmd->add_option("--input-channels", o->net.input_channels, "Frame channels");
  cmd->add_option("--hidden", o->net.hidden_channels, "Feature channels");
  cmd->add_option("--classes", o->net.classes, "Head classes K");
  cmd->add_option("--post-pool", o->net.post_pool, "Post-process max pool kernel (odd; 1 disables)");
  cmd->add_flag("--convlstm", o->lstm, "Also generate ConvLSTM weights");
  cmd->callback([&action, &g, &err, o] {
    action = [&g, &err, o] {
      NetworkBundle b{toy_network(g.seed, o->net), std::nullopt};
      if (o->lstm) b.lstm = toy_convlstm(g.seed + 1, o->net.classes);
      save_manifest(b, o->manifest);
      err << "wrote " << o->manifest << '\n';
    };
  });
}

void add_gen_flow(CLI::App& app, std::function<void()>& action) {
  auto* cmd = app.add_subcommand("gen-flow", "Synthetic [2, q, p] flow field");
  struct Opts {
    std::string output, pattern = "constant";
    std::size_t p = 64, q = 0;
    double dx = 0.0, dy = 0.0, deg = 1.0, cx = -1.0, cy = -1.0, radius = 8.0;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("output", o->output, "Output .cpt file")->required();
  cmd->add_option("--pattern", o->pattern, "constant, rotation or blob")
      ->check(CLI::IsMember({"constant", "rotation", "blob"}));
  cmd->add_option("-p,--width", o->p, "Width p");
  cmd->add_option("-q,--height", o->q, "Height q (default p / 2)");
  cmd->add_option("--dx", o->dx, "Horizontal displacement in pixels");
  cmd->add_option("--dy", o->dy, "Vertical displacement in pixels");
  cmd->add_option("--deg", o->deg, "Yaw per frame in degrees (rotation)");
  cmd->add_option("--cx", o->cx, "Blob centre column (default p / 2)");
  cmd->add_option("--cy", o->cy, "Blob centre row (default q / 2)");
  cmd->add_option("--radius", o->radius, "Blob radius in pixels");
  cmd->callback([&action, o] {
    action = [o] {
      const std::size_t q = o->q ? o->q : o->p / 2;
      if (o->p < 2 || q < 1) throw UsageError("flow raster too small");
      FlowField f = o->pattern == "constant"   ? constant_flow(q, o->p, o->dx, o->dy)
                    : o->pattern == "rotation" ? rotation_flow(q, o->p, o->deg)
                                               : blob_flow(q, o->p, o->cx < 0 ? o->p / 2.0 : o->cx,
                                                           o->cy < 0 ? q / 2.0 : o->cy, o->radius,
                                                           o->dx, o->dy);
      write_tensor(f.tensor(), o->output);
    };
  });
}

void add_gen_gt(CLI::App& app, std::function<void()>& action, std::ostream& err) {
  auto* cmd = app.add_subcommand("gen-gt", "Ground-truth heatmaps from viewpoint JSON lines");
  struct Opts {
    std::string traj, out;
    std::size_t p = 256, q = 0;
    double sigma = kGtSigmaDeg;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("trajectories", o->traj, "Viewpoint JSON lines")->required();
  cmd->add_option("output", o->out, "Output directory")->required();
  cmd->add_option("-p,--width", o->p, "Width p");
  cmd->add_option("-q,--height", o->q, "Height q (default p / 2)");
  cmd->add_option("--sigma", o->sigma, "Gaussian sigma in degrees");
  cmd->callback([&action, &err, o] {
    action = [&err, o] {
      const std::size_t q = o->q ? o->q : o->p / 2;
      if (o->p < 2 || q < 1) throw UsageError("heatmap raster too small");
      const std::vector<Viewpoint> vps = read_viewpoints(o->traj);
      if (vps.empty()) throw ArgumentError("trajectory file " + o->traj + " has no viewpoints");
      std::map<std::size_t, std::vector<Viewpoint>> by_frame;
      for (const Viewpoint& v : vps) by_frame[v.frame].push_back(v);
      fs::create_directories(o->out);
      for (const auto& [frame, list] : by_frame) {
        const EquirectMap h = gt_heatmap(list, o->p, q, o->sigma);
        const fs::path stem = fs::path(o->out) / frame_name(frame);
        write_tensor(h.tensor(), stem.string() + ".cpt");
        write_image(h, stem.string() + ".png");
      }
      err << "wrote " << by_frame.size() << " heatmaps to " << o->out << '\n';
    };
  });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cube Padding toolkit for 360-degree saliency", "cubepad"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1, 1024));
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  for (const char* opt : {"--seed", "--threads", "--format"}) app.get_option(opt)->configurable();
  app.fallthrough();

  std::function<void()> action;
  add_project(app, action, err);
  add_unproject(app, action);
  add_saliency(app, action, g, err);
  add_loss(app, action, out);
  add_eval(app, action, g, out);
  add_pilot(app, action, g, out);
  add_bench(app, action, g, out, err);
  add_gen_weights(app, action, g, err);
  add_gen_flow(app, action);
  add_gen_gt(app, action, err);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (action) action();
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace cubepad::cli
