#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include <opencv2/imgcodecs.hpp>

#include "nvs/dataset.hpp"
#include "nvs/errors.hpp"
#include "oracles.hpp"
#include "scenes.hpp"

using namespace nvs;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

void write_u16(const fs::path& p, int w, int h, std::uint16_t value) {
  fs::create_directories(p.parent_path());
  cv::imwrite(p.string(), cv::Mat(h, w, CV_16UC1, cv::Scalar(value)));
}

// Scene with n frames of w x h, identity poses stepping 10 mm along x.
fs::path make_scene(const std::string& name, int n, DatasetProfile profile,
                    bool with_depth = true) {
  const fs::path root = fixture::scratch_dir(name);
  const bool kitti = profile == DatasetProfile::kKitti;
  std::ostringstream poses;
  for (int i = 0; i < n; ++i) {
    char stem[16];
    std::snprintf(stem, sizeof stem, "%06d", i);
    fs::create_directories(root / (kitti ? "image_2" : "left"));
    cv::imwrite((root / (kitti ? "image_2" : "left") / (std::string(stem) + ".png")).string(),
                cv::Mat(6, 8, CV_8UC3, cv::Scalar(10 * i, 20, 30)));
    if (with_depth) write_u16(root / "depth" / (std::string(stem) + ".png"), 8, 6, 1000);
    poses << "1 0 0 " << 10 * i << " 0 1 0 0 0 0 1 0\n";
  }
  write_text(root / (kitti ? "poses.txt" : "pose.txt"), poses.str());
  write_text(root / "calib.txt", kitti ? "P0: 1 0 0 0 0 1 0 0 0 0 1 0\nP2: 7 0 3.5 45 0 7 2.5 0 0 0 1 0\n"
                                       : "K: 7 7 3.5 2.5\n");
  return root;
}

}  // namespace

TEST(Profiles, Units) {
  EXPECT_EQ(depth_unit_mm(DatasetProfile::kPiv3cams), 1.0);
  EXPECT_EQ(depth_unit_mm(DatasetProfile::kKitti), 1000.0 / 256.0);
  EXPECT_EQ(translation_unit_mm(DatasetProfile::kKitti), 1000.0);
  EXPECT_EQ(parse_profile("kitti"), DatasetProfile::kKitti);
  EXPECT_EQ(parse_profile(to_string(DatasetProfile::kPiv3cams)), DatasetProfile::kPiv3cams);
  EXPECT_THROW(parse_profile("nyu"), InvalidArgumentError);
}

TEST(DepthPng, ProfileScaling) {
  const fs::path dir = fixture::scratch_dir("depth_scaling");
  write_u16(dir / "a.png", 2, 2, 1500);
  write_u16(dir / "b.png", 2, 2, 25600);
  write_u16(dir / "z.png", 2, 2, 0);
  EXPECT_EQ(load_depth_png(dir / "a.png", DatasetProfile::kPiv3cams).at(1, 1), 1500.0);
  EXPECT_EQ(load_depth_png(dir / "b.png", DatasetProfile::kKitti).at(0, 0), 100000.0);
  const DepthMap z = load_depth_png(dir / "z.png", DatasetProfile::kPiv3cams);
  EXPECT_FALSE(z.valid(0, 0));
}

TEST(DepthPng, RejectsWrongFormat) {
  const fs::path dir = fixture::scratch_dir("depth_format");
  cv::imwrite((dir / "rgb.png").string(), cv::Mat(2, 2, CV_8UC3, cv::Scalar(1, 2, 3)));
  cv::imwrite((dir / "gray8.png").string(), cv::Mat(2, 2, CV_8UC1, cv::Scalar(1)));
  cv::imwrite((dir / "rgb16.png").string(), cv::Mat(2, 2, CV_16UC3, cv::Scalar(1, 2, 3)));
  for (const char* f : {"rgb.png", "gray8.png", "rgb16.png"}) {
    EXPECT_THROW(load_depth_png(dir / f, DatasetProfile::kPiv3cams), FormatError) << f;
  }
  EXPECT_THROW(load_depth_png(dir / "missing.png", DatasetProfile::kPiv3cams), IoError);
}

TEST(DepthPng, RoundTripBitIdentical) {
  const fs::path dir = fixture::scratch_dir("depth_roundtrip");
  fixture::Rng rng(1);
  for (const DatasetProfile profile : {DatasetProfile::kPiv3cams, DatasetProfile::kKitti}) {
    std::uniform_int_distribution<int> raw(0, 65535);
    std::vector<double> d(37 * 23);
    for (double& v : d) v = raw(rng) * depth_unit_mm(profile);
    const DepthMap depth(37, 23, d);
    save_depth_png(depth, dir / "d.png", profile);
    const DepthMap back = load_depth_png(dir / "d.png", profile);
    EXPECT_EQ(back, depth);
    // And the file itself survives a load/save cycle byte for byte.
    const std::string bytes = fixture::read_bytes(dir / "d.png");
    save_depth_png(back, dir / "d2.png", profile);
    EXPECT_EQ(fixture::read_bytes(dir / "d2.png"), bytes);
  }
}

TEST(DepthPng, RejectsOverflow) {
  const fs::path dir = fixture::scratch_dir("depth_overflow");
  EXPECT_THROW(save_depth_png(DepthMap::Filled(2, 2, 70000.0), dir / "x.png",
                              DatasetProfile::kPiv3cams),
               FormatError);
}

TEST(Images, RoundTripAndColorOrder) {
  const fs::path dir = fixture::scratch_dir("images");
  cv::Mat bgr(1, 1, CV_8UC3, cv::Scalar(255, 0, 51));  // B=255, R=51
  cv::imwrite((dir / "c.png").string(), bgr);
  const Image img = load_image(dir / "c.png");
  ASSERT_EQ(img.channels(), 3);
  EXPECT_DOUBLE_EQ(img.at(0, 0, 0), 0.2);
  EXPECT_DOUBLE_EQ(img.at(0, 0, 2), 1.0);
  save_image(img, dir / "d.png");
  EXPECT_EQ(load_image(dir / "d.png"), img);

  const Mask m(3, 1, {0.0, 1.0, 1.0});
  save_mask_png(m, dir / "m.png");
  EXPECT_EQ(load_mask_png(dir / "m.png"), m);
}

TEST(Poses, ParseBasics) {
  std::istringstream in(
      "# comment\n"
      "1 0 0 0 0 1 0 0 0 0 1 0\n"
      "\n"
      "1 0 0 1.5 0 1 0 -2 0 0 1 3\n");
  const auto mm = parse_poses(in, DatasetProfile::kPiv3cams);
  ASSERT_EQ(mm.size(), 2u);
  EXPECT_EQ(mm[0].matrix(), Eigen::Matrix4d::Identity());
  EXPECT_EQ(mm[1].rotation(), Eigen::Matrix3d::Identity());
  EXPECT_EQ(mm[1].translation(), Eigen::Vector3d(1.5, -2, 3));

  std::istringstream in2("1 0 0 1.5 0 1 0 -2 0 0 1 3\n");
  const auto m = parse_poses(in2, DatasetProfile::kKitti);
  EXPECT_EQ(m[0].translation(), Eigen::Vector3d(1500, -2000, 3000));
}

TEST(Poses, Malformed) {
  std::istringstream short_line("1 0 0 0 0 1 0 0 0 0 1\n");
  EXPECT_THROW(parse_poses(short_line, DatasetProfile::kPiv3cams), FormatError);
  std::istringstream junk("1 0 0 0 0 1 0 0 0 0 1 x\n");
  EXPECT_THROW(parse_poses(junk, DatasetProfile::kPiv3cams), FormatError);
  std::istringstream skewed("1 0.01 0 0 0 1 0 0 0 0 1 0\n");
  EXPECT_THROW(parse_poses(skewed, DatasetProfile::kPiv3cams), FormatError);
}

TEST(Poses, NearRotationIsRepairedWithWarning) {
  std::istringstream in("1 0.0000001 0 0 0 1 0 0 0 0 1 0\n");
  std::vector<std::string> warnings;
  const auto poses = parse_poses(in, DatasetProfile::kPiv3cams, &warnings);
  ASSERT_EQ(poses.size(), 1u);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_LE(Pose::OrthonormalityError(poses[0].rotation()), 1e-12);
}

TEST(Poses, SerializeParseRoundTrip) {
  fixture::Rng rng(2);
  for (const DatasetProfile profile : {DatasetProfile::kPiv3cams, DatasetProfile::kKitti}) {
    std::vector<Pose> poses;
    std::string text;
    for (int i = 0; i < 100; ++i) {
      poses.push_back(fixture::random_pose(rng, 3.0, 50000));
      text += format_pose_line(poses.back(), profile) + "\n";
    }
    std::istringstream in(text);
    std::vector<std::string> warnings;
    const auto back = parse_poses(in, profile, &warnings);
    ASSERT_EQ(back.size(), poses.size());
    EXPECT_TRUE(warnings.empty());
    for (std::size_t i = 0; i < poses.size(); ++i) {
      EXPECT_LE((back[i].matrix() - poses[i].matrix()).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(Calib, Variants) {
  std::istringstream four("K: 700 710 320 240\n");
  EXPECT_EQ(parse_calib(four, DatasetProfile::kPiv3cams), Intrinsics(700, 710, 320, 240));
  std::istringstream nine("foo: bar\nK: 700 0 320 0 710 240 0 0 1\n");
  EXPECT_EQ(parse_calib(nine, DatasetProfile::kPiv3cams), Intrinsics(700, 710, 320, 240));
  std::istringstream skew("K: 700 1 320 0 710 240 0 0 1\n");
  EXPECT_THROW(parse_calib(skew, DatasetProfile::kPiv3cams), FormatError);
  std::istringstream p2("P2: 721.5 0 609.6 44.9 0 721.5 172.9 0.2 0 0 1 0.003\n");
  EXPECT_EQ(parse_calib(p2, DatasetProfile::kKitti), Intrinsics(721.5, 721.5, 609.6, 172.9));
  std::istringstream p2_piv("P2: 721.5 0 609.6 44.9 0 721.5 172.9 0.2 0 0 1 0.003\n");
  EXPECT_THROW(parse_calib(p2_piv, DatasetProfile::kPiv3cams), FormatError);
  std::istringstream none("");
  EXPECT_THROW(parse_calib(none, DatasetProfile::kPiv3cams), FormatError);
}

TEST(Calib, SaveLoad) {
  const fs::path dir = fixture::scratch_dir("calib");
  const Intrinsics K(256.25, 255.5, 127.5, 120.125);
  save_calib_file(dir / "calib.txt", K);
  EXPECT_EQ(load_calib_file(dir / "calib.txt", DatasetProfile::kPiv3cams), K);
}

TEST(Crop, KittiOffsetsAndIntrinsics) {
  const Intrinsics K(721.5, 721.5, 609.6, 172.9);
  const auto c = center_crop(Image::Filled(1242, 375, 3, 0.5), 256, K);
  EXPECT_EQ(c.window.x0, 493);
  EXPECT_EQ(c.window.y0, 59);
  EXPECT_DOUBLE_EQ(c.K.cx(), 609.6 - 493);
  EXPECT_DOUBLE_EQ(c.K.cy(), 172.9 - 59);
  EXPECT_EQ(c.grid.width(), 256);
}

TEST(Crop, OwnSizeAndSmallerSource) {
  const Intrinsics K(10, 10, 5, 5);
  const Image img = Image::Filled(16, 16, 1, 0.25);
  const auto c = center_crop(img, 16, K);
  EXPECT_EQ(c.grid, img);
  EXPECT_EQ(c.K, K);
  EXPECT_EQ(center_crop(Image::Filled(257, 257, 1, 0), 256, K).window.x0, 0);
  EXPECT_THROW(center_crop(img, 17, K), ShapeError);
}

TEST(Crop, BackprojectionIsConsistent) {
  fixture::Rng rng(3);
  const Intrinsics K(721.5, 718.0, 609.6, 172.9);
  const auto c = center_crop(DepthMap::Filled(1242, 375, 1000), 256, K);
  for (int i = 0; i < 100; ++i) {
    const double u = fixture::uniform(rng, 0, 255), v = fixture::uniform(rng, 0, 255);
    const double d = fixture::uniform(rng, 100, 9000);
    const Point3 a = backproject({u, v}, d, c.K);
    const Point3 b = backproject({u + c.window.x0, v + c.window.y0}, d, K);
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Scene, LoadsPivLayout) {
  const fs::path root = make_scene("scene_piv", 5, DatasetProfile::kPiv3cams);
  const SceneIndex s = load_scene(root, DatasetProfile::kPiv3cams);
  EXPECT_EQ(s.scene_id, "scene_piv");
  EXPECT_EQ(s.size(), 5u);
  EXPECT_TRUE(s.warnings.empty());
  EXPECT_EQ(s.K, Intrinsics(7, 7, 3.5, 2.5));
  EXPECT_EQ(s.frames[3].pose.translation(), Eigen::Vector3d(30, 0, 0));
  EXPECT_EQ(s.frames[0].image.filename(), "000000.png");
}

TEST(Scene, LoadsKittiLayout) {
  const fs::path root = make_scene("scene_kitti", 4, DatasetProfile::kKitti);
  const SceneIndex s = load_scene(root, DatasetProfile::kKitti);
  EXPECT_EQ(s.size(), 4u);
  EXPECT_EQ(s.K, Intrinsics(7, 7, 3.5, 2.5));
  EXPECT_EQ(s.frames[2].pose.translation(), Eigen::Vector3d(20000, 0, 0));
  const FramePair p = load_pair(s, {0, 1, 1});
  EXPECT_EQ(p.src.depth->at(0, 0), 1000 * 1000.0 / 256.0);
}

TEST(Scene, CountMismatchAndMissingDepth) {
  fs::path root = make_scene("scene_mismatch", 3, DatasetProfile::kPiv3cams);
  write_text(root / "pose.txt", "1 0 0 0 0 1 0 0 0 0 1 0\n");
  EXPECT_THROW(load_scene(root, DatasetProfile::kPiv3cams), FormatError);

  root = make_scene("scene_nodepth", 3, DatasetProfile::kPiv3cams, false);
  const SceneIndex s = load_scene(root, DatasetProfile::kPiv3cams);
  EXPECT_EQ(s.warnings.size(), 3u);
  EXPECT_THROW(load_pair(s, {0, 1, 1}), IoError);
  EXPECT_THROW(load_scene(root / "nope", DatasetProfile::kPiv3cams), IoError);
}

TEST(Scene, TargetDepthMayBeMissing) {
  const fs::path root = make_scene("scene_tgt_nodepth", 3, DatasetProfile::kPiv3cams);
  fs::remove(root / "depth" / "000002.png");
  const SceneIndex s = load_scene(root, DatasetProfile::kPiv3cams);
  const FramePair p = load_pair(s, {1, 2, 1});
  EXPECT_TRUE(p.src.depth.has_value());
  EXPECT_FALSE(p.tgt.depth.has_value());
}

TEST(Pairs, RelativePoseReproducesTarget) {
  fixture::Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Pose src = fixture::random_pose(rng, 3.0, 20000);
    const Pose tgt = fixture::random_pose(rng, 3.0, 20000);
    const Pose rel = relative_pose(src, tgt);
    const Pose again = compose(src, rel);
    EXPECT_LE((again.translation() - tgt.translation()).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((again.rotation() - tgt.rotation()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Pairs, TwoFrameScene) {
  SceneIndex s;
  s.frames.resize(2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const PairRef& r : sample_pairs(s, 1, 10, seed)) {
      EXPECT_TRUE((r == PairRef{0, 1, 1}) || (r == PairRef{1, 0, -1}));
    }
  }
  EXPECT_THROW(sample_pairs(s, 2, 1, 0), InvalidArgumentError);
  EXPECT_EQ(enumerate_pairs(s, 3).size(), 2u);
}

TEST(Pairs, DeterministicForSeed) {
  SceneIndex s;
  s.frames.resize(30);
  EXPECT_EQ(sample_pairs(s, 3, 200, 42), sample_pairs(s, 3, 200, 42));
  EXPECT_NE(sample_pairs(s, 3, 200, 42), sample_pairs(s, 3, 200, 43));
}

TEST(Pairs, DistanceDistributionIsUniform) {
  SceneIndex s;
  s.frames.resize(20);
  std::map<int, int> counts;
  for (const PairRef& r : sample_pairs(s, 3, 10000, 7)) {
    EXPECT_EQ(static_cast<long>(r.tgt_index) - static_cast<long>(r.src_index), r.frame_distance);
    EXPECT_LT(r.tgt_index, 20u);
    ++counts[r.frame_distance];
  }
  ASSERT_EQ(counts.size(), 6u);
  for (const auto& [d, c] : counts) {
    EXPECT_NE(d, 0);
    EXPECT_LE(std::abs(d), 3);
    EXPECT_NEAR(c / 10000.0, 1.0 / 6.0, 0.05 / 6.0) << "distance " << d;
  }
}

TEST(Pairs, EnumerateOrder) {
  SceneIndex s;
  s.frames.resize(4);
  const auto pairs = enumerate_pairs(s, 2);
  const std::vector<PairRef> want = {{0, 1, 1}, {0, 2, 2}, {1, 0, -1}, {1, 2, 1}, {1, 3, 2},
                                     {2, 0, -2}, {2, 1, -1}, {2, 3, 1}, {3, 1, -2}, {3, 2, -1}};
  EXPECT_EQ(pairs, want);
}
