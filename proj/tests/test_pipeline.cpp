#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "nvs/errors.hpp"
#include "nvs/pipeline.hpp"
#include "nvs/synthetic.hpp"
#include "scenes.hpp"

using namespace nvs;
namespace fs = std::filesystem;

namespace {

using Row = std::vector<std::string>;

// Minimal RFC 4180 reader: quoted fields with doubled quotes, no embedded newlines.
std::vector<Row> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<Row> rows;
  std::string line;
  while (std::getline(in, line)) {
    Row row;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          field += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        row.push_back(field);
        field.clear();
      } else {
        field += c;
      }
    }
    row.push_back(field);
    rows.push_back(row);
  }
  return rows;
}

std::size_t column(const Row& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  ADD_FAILURE() << "no column " << name;
  return 0;
}

const char* kSmallScene = R"({
  "width": 64, "height": 48,
  "intrinsics": {"fx": 64, "fy": 64, "cx": 31.5, "cy": 23.5},
  "objects": [{"type": "plane", "point": [0, 0, 2000], "normal": [0.2, 0, -1], "period": 300}],
  "trajectory": {"frames": 6, "step": {"rotation_deg": [0, 1, 0], "translation": [25, 0, 0]}}
})";

const char* kStaticScene = R"({
  "width": 48, "height": 40,
  "objects": [{"type": "plane", "point": [0, 0, 1500], "normal": [0, 0, -1], "period": 120}],
  "trajectory": {"frames": 3}
})";

fs::path synth_scene(const std::string& name, const char* json) {
  const fs::path dir = fixture::scratch_dir(name);
  std::ofstream(dir / "scene.json") << json;
  cmd_synth(dir / "scene.json", dir / "data");
  return dir / "data";
}

RunConfig config_for(const fs::path& scene, const fs::path& out) {
  RunConfig c;
  c.scenes = {scene};
  c.output = out;
  return c;
}

}  // namespace

TEST(Synth, LoadsWithoutWarningsAndExactDepth) {
  const fs::path root = synth_scene("synth_load", kSmallScene);
  const SceneIndex s = load_scene(root, DatasetProfile::kPiv3cams);
  EXPECT_TRUE(s.warnings.empty());
  EXPECT_EQ(s.size(), 6u);
  const synth::SceneConfig cfg = synth::parse_scene_config(kSmallScene);
  const auto poses = cfg.trajectory.poses();
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_LE((s.frames[i].pose.matrix() - poses[i].matrix()).cwiseAbs().maxCoeff(), 1e-9);
  }
  const DepthMap d = load_depth_png(s.frames[4].depth, DatasetProfile::kPiv3cams);
  for (const auto& [x, y] : {std::pair{5, 7}, std::pair{40, 30}, std::pair{63, 47}}) {
    const auto hit = cfg.scene.trace({double(x), double(y)}, poses[4], cfg.K);
    ASSERT_TRUE(hit.has_value());
    EXPECT_EQ(d.at(x, y), std::round(hit->depth));
  }
}

TEST(Synth, Deterministic) {
  const fs::path a = synth_scene("synth_det_a", kSmallScene);
  const fs::path b = synth_scene("synth_det_b", kSmallScene);
  EXPECT_EQ(fixture::snapshot(a), fixture::snapshot(b));
}

TEST(Synth, UnwritableOutput) {
  const fs::path dir = fixture::scratch_dir("synth_unwritable");
  std::ofstream(dir / "scene.json") << kStaticScene;
  std::ofstream(dir / "blocker") << "file in the way";
  EXPECT_THROW(cmd_synth(dir / "scene.json", dir / "blocker" / "sub"), IoError);
}

TEST(Warp, ThreePairsGiveThreeGroups) {
  const fs::path scene = synth_scene("warp_three", kSmallScene);
  RunConfig c = config_for(scene, fixture::scratch_dir("warp_three_out"));
  c.pair_count = 3;
  c.seed = 5;
  const RunReport r = cmd_warp(c);
  ASSERT_EQ(r.pairs.size(), 3u);
  EXPECT_EQ(r.hard_failures(), 0u);
  const auto rows = read_csv(c.output / "manifest.csv");
  ASSERT_EQ(rows.size(), 4u);
  const Row& h = rows[0];
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i][column(h, "status")], "ok");
    for (const char* col : {"warped", "mask_sparse", "mask_dense", "depth_warped"}) {
      EXPECT_TRUE(fs::exists(c.output / rows[i][column(h, col)])) << col;
    }
    EXPECT_GE(std::stoul(rows[i][column(h, "dense_pixels")]),
              std::stoul(rows[i][column(h, "sparse_pixels")]));
  }
}

TEST(Warp, IdentityPairReproducesSource) {
  const fs::path scene = synth_scene("warp_identity", kStaticScene);
  RunConfig c = config_for(scene, fixture::scratch_dir("warp_identity_out"));
  c.max_distance = 1;
  const RunReport r = cmd_warp(c);
  ASSERT_EQ(r.hard_failures(), 0u);
  const Image warped = load_image(c.output / r.pairs[0].warped_path);
  const Image src = load_image(scene / "left" / "000000.png");
  EXPECT_EQ(warped, src);
}

TEST(Warp, RerunIsByteIdentical) {
  const fs::path scene = synth_scene("warp_rerun", kSmallScene);
  RunConfig c = config_for(scene, fixture::scratch_dir("warp_rerun_a"));
  c.fusion = FusionRule::kVisibilityMask;
  c.pixel_blur = 2;
  c.crop = 40;
  cmd_warp(c);
  const auto first = fixture::snapshot(c.output);
  c.output = fixture::scratch_dir("warp_rerun_b");
  cmd_warp(c);
  EXPECT_EQ(fixture::snapshot(c.output), first);
  EXPECT_GT(first.size(), 20u);
}

TEST(Warp, PerPairFailuresDoNotStopTheRun) {
  const fs::path scene = synth_scene("warp_failure", kSmallScene);
  std::ofstream(scene / "left" / "000002.png") << "not a png";
  RunConfig c = config_for(scene, fixture::scratch_dir("warp_failure_out"));
  c.max_distance = 1;
  const RunReport r = cmd_warp(c);
  std::size_t ok = 0;
  for (const auto& p : r.pairs) ok += p.ok ? 1 : 0;
  EXPECT_GT(r.hard_failures(), 0u);
  EXPECT_GT(ok, 0u);
  EXPECT_EQ(read_csv(c.output / "manifest.csv").size(), r.pairs.size() + 1);
}

TEST(Warp, ConfigValidation) {
  RunConfig c;
  EXPECT_THROW(cmd_warp(c), InvalidArgumentError);
  c.scenes = {"/definitely/not/here"};
  EXPECT_THROW(c.validate(), InvalidArgumentError);
  const fs::path scene = synth_scene("warp_validate", kStaticScene);
  c = config_for(scene, fixture::scratch_dir("warp_validate_out"));
  c.fusion = FusionRule::kAverage;
  EXPECT_THROW(c.validate(), InvalidArgumentError);  // no pixel branch
  c.pixel_blur = 1;
  EXPECT_NO_THROW(c.validate());
  c.fusion = FusionRule::kPredictedMask;
  EXPECT_THROW(c.validate(), InvalidArgumentError);  // no mask dir
  c.fusion.reset();
  c.ssim.window = 4;
  EXPECT_THROW(c.validate(), InvalidArgumentError);
}

TEST(Evaluate, SelfTargetGivesPerfectScores) {
  const fs::path scene = synth_scene("eval_identity", kStaticScene);
  RunConfig c = config_for(scene, fixture::scratch_dir("eval_identity_out"));
  c.ssim.window = 7;
  const RunReport r = cmd_evaluate(c);
  ASSERT_FALSE(r.pairs.empty());
  for (const auto& p : r.pairs) {
    ASSERT_TRUE(p.ok) << p.message;
    EXPECT_NEAR(p.l1, 0.0, 1e-12);
    EXPECT_NEAR(p.ssim, 1.0, 1e-9);
  }
}

TEST(Evaluate, CsvSumsMatchSummary) {
  const fs::path scene = synth_scene("eval_sums", kSmallScene);
  RunConfig c = config_for(scene, fixture::scratch_dir("eval_sums_out"));
  c.fusion = FusionRule::kAverage;
  c.pixel_blur = 1;
  c.ssim.window = 7;
  const RunReport r = cmd_evaluate(c);
  EXPECT_EQ(r.hard_failures(), 0u);
  const auto rows = read_csv(c.output / "metrics.csv");
  const Row& h = rows[0];
  double l1 = 0.0, s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][column(h, "status")] != "ok") continue;
    l1 += std::stod(rows[i][column(h, "l1")]);
    s += std::stod(rows[i][column(h, "ssim")]);
    ++n;
  }
  const auto summary = read_csv(c.output / "summary.csv");
  ASSERT_EQ(summary.size(), 2u);
  const Row& sh = summary[0];
  EXPECT_EQ(std::stoul(summary[1][column(sh, "evaluated")]), n);
  EXPECT_NEAR(std::stod(summary[1][column(sh, "l1_sum")]), l1, 1e-9);
  EXPECT_NEAR(std::stod(summary[1][column(sh, "ssim_sum")]), s, 1e-9);
  EXPECT_NEAR(std::stod(summary[1][column(sh, "mean_l1")]), l1 / n, 1e-9);
  EXPECT_NEAR(std::stod(summary[1][column(sh, "mean_ssim")]), s / n, 1e-9);

  // Distance curve rows are weighted means of the per-pair rows.
  const auto curve = read_csv(c.output / "distance_curve.csv");
  double weighted = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const auto k = std::stoul(curve[i][1]);
    weighted += k * std::stod(curve[i][2]);
    counted += k;
  }
  EXPECT_EQ(counted, n);
  EXPECT_NEAR(weighted, l1, 1e-9);
}

TEST(Evaluate, MissingTargetDepthIsSkipped) {
  const fs::path scene = synth_scene("eval_skip", kSmallScene);
  fs::remove(scene / "depth" / "000003.png");
  RunConfig c = config_for(scene, fixture::scratch_dir("eval_skip_out"));
  c.max_distance = 1;
  c.ssim.window = 7;
  const RunReport r = cmd_evaluate(c);
  std::size_t skipped = 0;
  for (const auto& p : r.pairs) skipped += p.skipped ? 1 : 0;
  // Target 3 is reached from 2 and 4; pairs with source 3 fail hard.
  EXPECT_EQ(skipped, 2u);
  EXPECT_EQ(r.hard_failures(), 2u);
  const auto rows = read_csv(c.output / "metrics.csv");
  std::size_t skipped_rows = 0;
  for (const Row& row : rows) skipped_rows += row[4] == "skipped" ? 1 : 0;
  EXPECT_EQ(skipped_rows, 2u);
}

TEST(Evaluate, FrameDistanceTrend) {
  const fs::path scene = synth_scene("eval_trend", kSmallScene);
  RunConfig c = config_for(scene, fixture::scratch_dir("eval_trend_out"));
  c.ssim.window = 7;
  cmd_evaluate(c);
  const auto curve = read_csv(c.output / "distance_curve.csv");
  std::map<int, double> l1;
  for (std::size_t i = 1; i < curve.size(); ++i) l1[std::stoi(curve[i][0])] = std::stod(curve[i][2]);
  ASSERT_EQ(l1.size(), 6u);
  for (int sign : {-1, 1}) {
    EXPECT_LE(l1[sign * 1], l1[sign * 2]);
    EXPECT_LE(l1[sign * 2], l1[sign * 3]);
  }
}

TEST(Densify, CommandClosesMask) {
  const fs::path dir = fixture::scratch_dir("densify_cmd");
  std::vector<double> d(49, 1.0);
  d[24] = 0.0;
  save_mask_png(Mask(7, 7, d), dir / "in.png");
  cmd_densify(dir / "in.png", dir / "out.png", 1);
  EXPECT_EQ(load_mask_png(dir / "out.png").count_set(), 49u);
}

TEST(RunPair, SourceDepthModeUsesForwardWarp) {
  const synth::SceneConfig cfg = synth::parse_scene_config(kSmallScene);
  const auto poses = cfg.trajectory.poses();
  const FramePair pair =
      synth::make_pair(cfg.scene, poses[0], poses[2], cfg.K, cfg.width, cfg.height, 2);
  const PairProducts a = run_pair(pair, DepthSource::kSource, 1);
  const PairProducts b = run_pair(pair, DepthSource::kTarget, 1);
  EXPECT_EQ(a.sparse_mask, b.sparse_mask);
  EXPECT_GE(b.warp_mask.count_set(), a.warp_mask.count_set());
  EXPECT_GE(a.dense_mask.count_set(), a.sparse_mask.count_set());
}
