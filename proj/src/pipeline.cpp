#include "nvs/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "nvs/errors.hpp"
#include "nvs/synthetic.hpp"

namespace fs = std::filesystem;

namespace nvs {

std::string_view to_string(DepthSource s) {
  return s == DepthSource::kTarget ? "target" : "source";
}

DepthSource parse_depth_source(std::string_view name) {
  if (name == "target") return DepthSource::kTarget;
  if (name == "source") return DepthSource::kSource;
  throw InvalidArgumentError("unknown depth source '" + std::string(name) +
                             "' (expected target or source)");
}

std::string_view to_string(EvalRegion r) {
  switch (r) {
    case EvalRegion::kFull:
      return "full";
    case EvalRegion::kSparseMask:
      return "sparse";
    case EvalRegion::kDenseMask:
      return "dense";
  }
  return "full";
}

EvalRegion parse_eval_region(std::string_view name) {
  if (name == "full") return EvalRegion::kFull;
  if (name == "sparse") return EvalRegion::kSparseMask;
  if (name == "dense") return EvalRegion::kDenseMask;
  throw InvalidArgumentError("unknown evaluation region '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  if (scenes.empty()) throw InvalidArgumentError("no input scenes given");
  for (const fs::path& s : scenes) {
    if (!fs::is_directory(s)) {
      throw InvalidArgumentError("scene directory does not exist: " + s.string());
    }
  }
  if (output.empty()) throw InvalidArgumentError("output directory is empty");
  if (densify_radius < 0 || densify_radius > 64) {
    throw InvalidArgumentError("densify radius must be in [0, 64]");
  }
  if (crop < 0) throw InvalidArgumentError("crop size must be >= 0");
  if (max_distance < 1) throw InvalidArgumentError("max distance must be >= 1");
  if (pixel_blur < 0) throw InvalidArgumentError("pixel blur radius must be >= 0");
  ssim.validate();
  if (pixel_dir && !fs::is_directory(*pixel_dir)) {
    throw InvalidArgumentError("pixel directory does not exist: " + pixel_dir->string());
  }
  if (mask_dir && !fs::is_directory(*mask_dir)) {
    throw InvalidArgumentError("mask directory does not exist: " + mask_dir->string());
  }
  if (fusion && !pixel_dir && pixel_blur == 0) {
    throw InvalidArgumentError("fusion needs a pixel directory or a pixel blur stand-in");
  }
  if (fusion == FusionRule::kPredictedMask && !mask_dir) {
    throw InvalidArgumentError("predicted-mask fusion needs a mask directory");
  }
}

std::size_t RunReport::hard_failures() const {
  std::size_t n = 0;
  for (const PairOutcome& p : pairs) n += (!p.ok && !p.skipped) ? 1 : 0;
  return n;
}

PairProducts run_pair(const FramePair& pair, DepthSource source, int densify_radius) {
  if (!pair.src.depth) throw IoError("source frame has no depth");
  DepthWarpResult fwd = forward_warp_depth(*pair.src.depth, pair.src_to_tgt(), pair.K);
  VisibilityMask dense = densify_mask(fwd.mask, densify_radius);
  const DepthMap* depth = &fwd.depth;
  if (source == DepthSource::kTarget) {
    if (!pair.tgt.depth) throw IoError("target frame has no depth");
    depth = &*pair.tgt.depth;
  }
  WarpResult inv = inverse_warp(pair.src.image, *depth, pair.tgt_to_src(), pair.K);
  return {std::move(inv.image), std::move(fwd.depth), std::move(fwd.mask),
          std::move(dense), std::move(inv.mask)};
}

namespace {

struct Job {
  const SceneIndex* scene;
  PairRef ref;
};

std::vector<SceneIndex> index_scenes(const RunConfig& config) {
  std::vector<SceneIndex> scenes;
  for (const fs::path& root : config.scenes) {
    scenes.push_back(load_scene(root, config.profile));
  }
  return scenes;
}

std::vector<Job> plan_jobs(const RunConfig& config, const std::vector<SceneIndex>& scenes) {
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const std::vector<PairRef> refs =
        config.pair_count == 0
            ? enumerate_pairs(scenes[i], config.max_distance)
            : sample_pairs(scenes[i], config.max_distance, config.pair_count,
                           config.seed + i);
    for (const PairRef& r : refs) jobs.push_back({&scenes[i], r});
  }
  return jobs;
}

PairOutcome outcome_for(const Job& job) {
  PairOutcome o;
  o.scene_id = job.scene->scene_id;
  o.src_index = job.ref.src_index;
  o.tgt_index = job.ref.tgt_index;
  o.src_name = job.scene->frames.at(job.ref.src_index).image.stem().string();
  o.tgt_name = job.scene->frames.at(job.ref.tgt_index).image.stem().string();
  o.frame_distance = job.ref.frame_distance;
  return o;
}

std::optional<int> crop_of(const RunConfig& c) {
  return c.crop > 0 ? std::optional<int>(c.crop) : std::nullopt;
}

// Pixel-branch image for a pair, or nullopt when fusion is off.
std::optional<Image> pixel_branch(const RunConfig& config, const FramePair& pair,
                                  const std::string& tgt_name) {
  if (!config.fusion) return std::nullopt;
  if (config.pixel_dir) {
    Image img = load_image(*config.pixel_dir / pair.scene_id / (tgt_name + ".png"));
    if (!img.same_shape(pair.tgt.image)) {
      throw ShapeError("pixel-branch image shape differs from the target");
    }
    return img;
  }
  return synth::blur_standin(pair.tgt.image, config.pixel_blur);
}

std::optional<Mask> fusion_mask(const RunConfig& config, const FramePair& pair,
                                const std::string& tgt_name,
                                const PairProducts& products) {
  if (!config.fusion) return std::nullopt;
  switch (*config.fusion) {
    case FusionRule::kAverage:
      return std::nullopt;
    case FusionRule::kVisibilityMask:
      return products.dense_mask;
    case FusionRule::kPredictedMask: {
      Mask m = load_mask_png(*config.mask_dir / pair.scene_id / (tgt_name + ".png"));
      if (!m.same_extent(pair.tgt.image)) {
        throw ShapeError("predicted mask extent differs from the target");
      }
      return m;
    }
  }
  return std::nullopt;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::ofstream open_csv(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

}  // namespace

RunReport cmd_warp(const RunConfig& config) {
  config.validate();
  const std::vector<SceneIndex> scenes = index_scenes(config);
  const std::vector<Job> jobs = plan_jobs(config, scenes);
  RunReport report;
  for (const Job& job : jobs) {
    PairOutcome o = outcome_for(job);
    try {
      const FramePair pair = load_pair(*job.scene, job.ref, crop_of(config));
      const PairProducts products =
          run_pair(pair, config.depth_source, config.densify_radius);
      const fs::path rel = fs::path(o.scene_id) / (o.src_name + "_" + o.tgt_name);
      const fs::path dir = config.output / rel;
      fs::create_directories(dir);
      save_image(products.warped, dir / "warped.png");
      save_mask_png(products.sparse_mask, dir / "mask_sparse.png");
      save_mask_png(products.dense_mask, dir / "mask_dense.png");
      save_depth_png(products.warped_depth, dir / "depth_warped.png", config.profile);
      o.warped_path = (rel / "warped.png").generic_string();
      o.sparse_mask_path = (rel / "mask_sparse.png").generic_string();
      o.dense_mask_path = (rel / "mask_dense.png").generic_string();
      o.depth_path = (rel / "depth_warped.png").generic_string();
      if (const auto pixel = pixel_branch(config, pair, o.tgt_name)) {
        const Image fused = fuse(*config.fusion, products.warped, *pixel,
                                 fusion_mask(config, pair, o.tgt_name, products));
        save_image(fused, dir / "fused.png");
        o.fused_path = (rel / "fused.png").generic_string();
      }
      o.sparse_count = products.sparse_mask.count_set();
      o.dense_count = products.dense_mask.count_set();
      o.ok = true;
    } catch (const std::exception& e) {
      o.message = e.what();
    }
    report.pairs.push_back(std::move(o));
  }

  std::ofstream manifest = open_csv(config.output / "manifest.csv");
  manifest << "scene,src,tgt,frame_distance,status,warped,mask_sparse,mask_dense,"
              "depth_warped,fused,sparse_pixels,dense_pixels,message\n";
  for (const PairOutcome& o : report.pairs) {
    manifest << csv_field(o.scene_id) << ',' << csv_field(o.src_name) << ','
             << csv_field(o.tgt_name) << ',' << o.frame_distance << ','
             << (o.ok ? "ok" : "error") << ',' << csv_field(o.warped_path) << ','
             << csv_field(o.sparse_mask_path) << ',' << csv_field(o.dense_mask_path)
             << ',' << csv_field(o.depth_path) << ',' << csv_field(o.fused_path) << ','
             << o.sparse_count << ',' << o.dense_count << ',' << csv_field(o.message)
             << '\n';
  }
  return report;
}

RunReport cmd_evaluate(const RunConfig& config) {
  config.validate();
  const std::vector<SceneIndex> scenes = index_scenes(config);
  const std::vector<Job> jobs = plan_jobs(config, scenes);
  RunReport report;
  for (const Job& job : jobs) {
    PairOutcome o = outcome_for(job);
    try {
      const FramePair pair = load_pair(*job.scene, job.ref, crop_of(config));
      if (config.depth_source == DepthSource::kTarget && !pair.tgt.depth) {
        o.skipped = true;
        o.message = "missing ground-truth target depth";
        report.pairs.push_back(std::move(o));
        continue;
      }
      const PairProducts products =
          run_pair(pair, config.depth_source, config.densify_radius);
      Image prediction = products.warped;
      if (const auto pixel = pixel_branch(config, pair, o.tgt_name)) {
        prediction = fuse(*config.fusion, products.warped, *pixel,
                          fusion_mask(config, pair, o.tgt_name, products));
      }
      std::optional<Mask> region;
      if (config.eval_region == EvalRegion::kSparseMask) region = products.sparse_mask;
      if (config.eval_region == EvalRegion::kDenseMask) region = products.dense_mask;
      if (region && region->sum() == 0.0) {
        o.skipped = true;
        o.message = "evaluation mask is empty";
        report.pairs.push_back(std::move(o));
        continue;
      }
      o.l1 = l1_error(prediction, pair.tgt.image, region);
      o.ssim = ssim(prediction, pair.tgt.image, config.ssim);
      o.sparse_count = products.sparse_mask.count_set();
      o.dense_count = products.dense_mask.count_set();
      o.ok = true;
    } catch (const std::exception& e) {
      o.message = e.what();
    }
    report.pairs.push_back(std::move(o));
  }

  std::ofstream metrics = open_csv(config.output / "metrics.csv");
  metrics << "scene,src,tgt,frame_distance,status,l1,ssim,sparse_pixels,"
             "dense_pixels,message\n";
  struct Acc {
    std::size_t n = 0;
    double l1 = 0.0;
    double ssim = 0.0;
  };
  Acc all;
  std::map<int, Acc> by_distance;
  for (const PairOutcome& o : report.pairs) {
    const char* status = o.ok ? "ok" : (o.skipped ? "skipped" : "error");
    metrics << csv_field(o.scene_id) << ',' << csv_field(o.src_name) << ','
            << csv_field(o.tgt_name) << ',' << o.frame_distance << ',' << status << ',';
    if (o.ok) {
      metrics << o.l1 << ',' << o.ssim << ',' << o.sparse_count << ','
              << o.dense_count;
      all.n += 1;
      all.l1 += o.l1;
      all.ssim += o.ssim;
      Acc& d = by_distance[o.frame_distance];
      d.n += 1;
      d.l1 += o.l1;
      d.ssim += o.ssim;
    } else {
      metrics << ",,,";
    }
    metrics << ',' << csv_field(o.message) << '\n';
  }

  std::ofstream summary = open_csv(config.output / "summary.csv");
  summary << "pairs,evaluated,skipped,errors,mean_l1,mean_ssim,l1_sum,ssim_sum,"
             "ssim_window,ssim_weighting,fusion,depth_source,eval_region\n";
  const std::size_t skipped = static_cast<std::size_t>(
      std::count_if(report.pairs.begin(), report.pairs.end(),
                    [](const PairOutcome& o) { return o.skipped; }));
  summary << report.pairs.size() << ',' << all.n << ',' << skipped << ','
          << report.hard_failures() << ',';
  if (all.n > 0) {
    summary << all.l1 / all.n << ',' << all.ssim / all.n;
  } else {
    summary << ',';
  }
  summary << ',' << all.l1 << ',' << all.ssim << ',' << config.ssim.window << ','
          << to_string(config.ssim.weighting) << ','
          << (config.fusion ? to_string(*config.fusion) : std::string_view("none"))
          << ',' << to_string(config.depth_source) << ','
          << to_string(config.eval_region) << '\n';

  std::ofstream curve = open_csv(config.output / "distance_curve.csv");
  curve << "frame_distance,pairs,mean_l1,mean_ssim\n";
  for (const auto& [d, acc] : by_distance) {
    curve << d << ',' << acc.n << ',' << acc.l1 / acc.n << ',' << acc.ssim / acc.n
          << '\n';
  }
  return report;
}

void cmd_synth(const fs::path& scene_config, const fs::path& output) {
  const synth::SceneConfig cfg = synth::load_scene_config(scene_config);
  const std::vector<Pose> poses = cfg.trajectory.poses();
  std::error_code ec;
  fs::create_directories(output / "left", ec);
  fs::create_directories(output / "depth", ec);
  if (ec || !fs::is_directory(output / "left")) {
    throw IoError("cannot create output directory " + output.string());
  }
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const synth::RenderResult r =
        synth::render(cfg.scene, poses[i], cfg.K, cfg.width, cfg.height);
    std::ostringstream name;
    name << std::setw(6) << std::setfill('0') << i << ".png";
    save_image(r.image, output / "left" / name.str());
    save_depth_png(r.depth, output / "depth" / name.str(), DatasetProfile::kPiv3cams);
  }
  save_pose_file(output / "pose.txt", poses, DatasetProfile::kPiv3cams);
  save_calib_file(output / "calib.txt", cfg.K);
}

void cmd_densify(const fs::path& in, const fs::path& out, int radius) {
  save_mask_png(densify_mask(load_mask_png(in), radius), out);
}

}  // namespace nvs
