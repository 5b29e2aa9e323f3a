#include "nvs/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "nvs/errors.hpp"

namespace fs = std::filesystem;

namespace nvs {

std::string_view to_string(DatasetProfile profile) {
  return profile == DatasetProfile::kPiv3cams ? "piv3cams" : "kitti";
}

DatasetProfile parse_profile(std::string_view name) {
  if (name == "piv3cams") return DatasetProfile::kPiv3cams;
  if (name == "kitti") return DatasetProfile::kKitti;
  throw InvalidArgumentError("unknown dataset profile '" + std::string(name) +
                             "' (expected piv3cams or kitti)");
}

double depth_unit_mm(DatasetProfile profile) {
  return profile == DatasetProfile::kPiv3cams ? 1.0 : 1000.0 / 256.0;
}

double translation_unit_mm(DatasetProfile profile) {
  return profile == DatasetProfile::kPiv3cams ? 1.0 : 1000.0;
}

namespace {

cv::Mat read_png(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("no such file: " + path.string());
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (m.empty()) throw FormatError("cannot decode image: " + path.string());
  return m;
}

void write_png(const fs::path& path, const cv::Mat& m) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), m);
  } catch (const cv::Exception& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw IoError("cannot write " + path.string());
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Parses all whitespace-separated doubles; throws FormatError on junk.
std::vector<double> parse_numbers(const std::string& text, const std::string& where) {
  std::istringstream in(text);
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || !std::isfinite(v)) {
      throw FormatError(where + ": not a finite number '" + token + "'");
    }
    values.push_back(v);
  }
  return values;
}

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

DepthMap load_depth_png(const fs::path& path, DatasetProfile profile) {
  const cv::Mat m = read_png(path);
  if (m.depth() != CV_16U || m.channels() != 1) {
    throw FormatError(path.string() + ": depth must be a 16-bit single-channel PNG");
  }
  const double unit = depth_unit_mm(profile);
  std::vector<double> data(static_cast<std::size_t>(m.rows) * m.cols);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<std::uint16_t>(y);
    for (int x = 0; x < m.cols; ++x) {
      data[static_cast<std::size_t>(y) * m.cols + x] = row[x] * unit;
    }
  }
  return DepthMap(m.cols, m.rows, std::move(data));
}

void save_depth_png(const DepthMap& depth, const fs::path& path, DatasetProfile profile) {
  const double unit = depth_unit_mm(profile);
  cv::Mat m(depth.height(), depth.width(), CV_16UC1);
  for (int y = 0; y < depth.height(); ++y) {
    auto* row = m.ptr<std::uint16_t>(y);
    for (int x = 0; x < depth.width(); ++x) {
      const long q = std::lround(depth.depth(x, y) / unit);
      if (q > 65535) {
        std::ostringstream msg;
        msg << path.string() << ": depth " << depth.depth(x, y)
            << " mm exceeds the 16-bit range";
        throw FormatError(msg.str());
      }
      row[x] = static_cast<std::uint16_t>(q);
    }
  }
  write_png(path, m);
}

Image load_image(const fs::path& path) {
  cv::Mat m = read_png(path);
  double scale = 0.0;
  if (m.depth() == CV_8U) {
    scale = 1.0 / 255.0;
  } else if (m.depth() == CV_16U) {
    scale = 1.0 / 65535.0;
  } else {
    throw FormatError(path.string() + ": unsupported image bit depth");
  }
  cv::Mat rgb;
  switch (m.channels()) {
    case 1:
      rgb = m;
      break;
    case 3:
      cv::cvtColor(m, rgb, cv::COLOR_BGR2RGB);
      break;
    case 4:
      cv::cvtColor(m, rgb, cv::COLOR_BGRA2RGB);
      break;
    default:
      throw FormatError(path.string() + ": unsupported channel count");
  }
  cv::Mat f;
  rgb.convertTo(f, CV_64F, scale);
  const int channels = f.channels();
  std::vector<double> data(static_cast<std::size_t>(f.rows) * f.cols * channels);
  for (int y = 0; y < f.rows; ++y) {
    const auto* row = f.ptr<double>(y);
    std::copy(row, row + static_cast<std::size_t>(f.cols) * channels,
              data.begin() + static_cast<std::ptrdiff_t>(y) * f.cols * channels);
  }
  return Image(f.cols, f.rows, channels, std::move(data));
}

void save_image(const Image& img, const fs::path& path) {
  const int channels = img.channels();
  cv::Mat m(img.height(), img.width(), channels == 3 ? CV_8UC3 : CV_8UC1);
  for (int y = 0; y < img.height(); ++y) {
    auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < img.width(); ++x) {
      if (channels == 3) {
        // OpenCV stores BGR.
        row[3 * x + 0] = to_byte(img.at(x, y, 2));
        row[3 * x + 1] = to_byte(img.at(x, y, 1));
        row[3 * x + 2] = to_byte(img.at(x, y, 0));
      } else {
        row[x] = to_byte(img.at(x, y, 0));
      }
    }
  }
  write_png(path, m);
}

Mask load_mask_png(const fs::path& path) {
  const cv::Mat m = read_png(path);
  if (m.depth() != CV_8U || m.channels() != 1) {
    throw FormatError(path.string() + ": mask must be an 8-bit gray PNG");
  }
  std::vector<double> data(static_cast<std::size_t>(m.rows) * m.cols);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.cols; ++x) {
      data[static_cast<std::size_t>(y) * m.cols + x] = row[x] / 255.0;
    }
  }
  return Mask(m.cols, m.rows, std::move(data));
}

void save_mask_png(const Mask& mask, const fs::path& path) {
  cv::Mat m(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y) {
    auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < mask.width(); ++x) row[x] = to_byte(mask.at(x, y));
  }
  write_png(path, m);
}

std::vector<Pose> parse_poses(std::istream& in, DatasetProfile profile,
                              std::vector<std::string>* warnings) {
  const double unit = translation_unit_mm(profile);
  std::vector<Pose> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const std::string where = "pose line " + std::to_string(line_no);
    const std::vector<double> v = parse_numbers(body, where);
    if (v.size() != 12) {
      throw FormatError(where + ": expected 12 values, got " +
                        std::to_string(v.size()));
    }
    Eigen::Matrix3d R;
    Eigen::Vector3d t;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) R(r, c) = v[4 * r + c];
      t(r) = v[4 * r + 3] * unit;
    }
    bool repaired = false;
    try {
      poses.push_back(Pose::FromApproximate(R, t, &repaired));
    } catch (const FormatError& e) {
      throw FormatError(where + ": " + e.what());
    }
    if (repaired && warnings != nullptr) {
      warnings->push_back(where + ": rotation re-orthonormalized");
    }
  }
  return poses;
}

std::vector<Pose> load_pose_file(const fs::path& path, DatasetProfile profile,
                                 std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pose file " + path.string());
  try {
    return parse_poses(in, profile, warnings);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string format_pose_line(const Pose& pose, DatasetProfile profile) {
  const double unit = translation_unit_mm(profile);
  std::ostringstream out;
  out << std::setprecision(17);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out << pose.rotation()(r, c) << ' ';
    out << pose.translation()(r) / unit << (r < 2 ? " " : "");
  }
  return out.str();
}

void save_pose_file(const fs::path& path, const std::vector<Pose>& poses,
                    DatasetProfile profile) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write pose file " + path.string());
  for (const Pose& p : poses) out << format_pose_line(p, profile) << '\n';
}

Intrinsics parse_calib(std::istream& in, DatasetProfile profile) {
  std::string line;
  std::optional<Intrinsics> from_k;
  std::optional<Intrinsics> from_p2;
  while (std::getline(in, line)) {
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto colon = body.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = trim(body.substr(0, colon));
    if (key != "K" && key != "P2") continue;
    const std::vector<double> v = parse_numbers(body.substr(colon + 1), "calib " + key);
    try {
      if (key == "K" && v.size() == 4) {
        from_k = Intrinsics(v[0], v[1], v[2], v[3]);
      } else if (key == "K" && v.size() == 9) {
        if (v[1] != 0.0) throw FormatError("calib K: nonzero skew is unsupported");
        if (v[3] != 0.0 || v[6] != 0.0 || v[7] != 0.0 || v[8] != 1.0) {
          throw FormatError("calib K: not an upper-triangular camera matrix");
        }
        from_k = Intrinsics(v[0], v[4], v[2], v[5]);
      } else if (key == "K") {
        throw FormatError("calib K: expected 4 or 9 values");
      } else if (profile == DatasetProfile::kKitti) {
        if (v.size() != 12) throw FormatError("calib P2: expected 12 values");
        if (v[1] != 0.0) throw FormatError("calib P2: nonzero skew is unsupported");
        from_p2 = Intrinsics(v[0], v[5], v[2], v[6]);
      }
    } catch (const InvalidArgumentError& e) {
      throw FormatError(std::string("calib ") + key + ": " + e.what());
    }
  }
  if (from_k) return *from_k;
  if (from_p2) return *from_p2;
  throw FormatError("calib: no K line found");
}

Intrinsics load_calib_file(const fs::path& path, DatasetProfile profile) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open calib file " + path.string());
  try {
    return parse_calib(in, profile);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_calib_file(const fs::path& path, const Intrinsics& K) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write calib file " + path.string());
  out << std::setprecision(17) << "K: " << K.fx() << ' ' << K.fy() << ' ' << K.cx()
      << ' ' << K.cy() << '\n';
}

namespace {

struct Layout {
  const char* images;
  const char* depth;
  std::vector<const char*> pose_names;
};

Layout layout_for(DatasetProfile profile) {
  if (profile == DatasetProfile::kPiv3cams) return {"left", "depth", {"pose.txt"}};
  return {"image_2", "depth", {"poses.txt", "pose.txt"}};
}

}  // namespace

SceneIndex load_scene(const fs::path& root, DatasetProfile profile) {
  if (!fs::is_directory(root)) throw IoError("not a directory: " + root.string());
  const Layout layout = layout_for(profile);
  SceneIndex scene;
  scene.root = root;
  scene.profile = profile;
  scene.scene_id = fs::absolute(root).lexically_normal().filename().string();
  if (scene.scene_id.empty()) {
    scene.scene_id = fs::absolute(root).lexically_normal().parent_path().filename().string();
  }

  const fs::path image_dir = root / layout.images;
  if (!fs::is_directory(image_dir)) {
    throw IoError("missing image directory " + image_dir.string());
  }
  std::vector<fs::path> images;
  for (const auto& entry : fs::directory_iterator(image_dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) {
      images.push_back(entry.path());
    }
  }
  std::sort(images.begin(), images.end());
  if (images.empty()) throw FormatError("no frames in " + image_dir.string());

  fs::path pose_path;
  for (const char* name : layout.pose_names) {
    if (fs::exists(root / name)) {
      pose_path = root / name;
      break;
    }
  }
  if (pose_path.empty()) throw IoError("missing pose file in " + root.string());
  const std::vector<Pose> poses = load_pose_file(pose_path, profile, &scene.warnings);
  if (poses.size() != images.size()) {
    throw FormatError(root.string() + ": " + std::to_string(images.size()) +
                      " frames but " + std::to_string(poses.size()) + " poses");
  }
  scene.K = load_calib_file(root / "calib.txt", profile);

  const fs::path depth_dir = root / layout.depth;
  for (std::size_t i = 0; i < images.size(); ++i) {
    fs::path depth = depth_dir / images[i].filename().replace_extension(".png");
    if (!fs::exists(depth)) {
      scene.warnings.push_back("frame " + images[i].filename().string() +
                               ": no depth file");
      depth.clear();
    }
    scene.frames.push_back({images[i], depth, poses[i]});
  }
  return scene;
}

Cropped<Image> center_crop(const Image& img, int side, const Intrinsics& K) {
  const CropWindow w = center_crop_window(img.width(), img.height(), side);
  return {crop(img, w), K.shifted(w.x0, w.y0), w};
}

Cropped<DepthMap> center_crop(const DepthMap& depth, int side, const Intrinsics& K) {
  const CropWindow w = center_crop_window(depth.width(), depth.height(), side);
  return {crop(depth, w), K.shifted(w.x0, w.y0), w};
}

std::vector<PairRef> sample_pairs(const SceneIndex& scene, int max_distance,
                                  std::size_t count, std::uint64_t seed) {
  if (max_distance < 1) throw InvalidArgumentError("max_distance must be >= 1");
  const auto n = static_cast<long>(scene.size());
  if (n <= max_distance) {
    throw InvalidArgumentError("scene has " + std::to_string(n) +
                               " frames; need more than max_distance = " +
                               std::to_string(max_distance));
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_distance(0, 2 * max_distance - 1);
  std::vector<PairRef> pairs;
  pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int k = pick_distance(rng);
    const int d = k < max_distance ? k - max_distance : k - max_distance + 1;
    const long lo = std::max(0L, -static_cast<long>(d));
    const long hi = n - 1 - std::max(0L, static_cast<long>(d));
    std::uniform_int_distribution<long> pick_src(lo, hi);
    const long src = pick_src(rng);
    pairs.push_back({static_cast<std::size_t>(src), static_cast<std::size_t>(src + d), d});
  }
  return pairs;
}

std::vector<PairRef> enumerate_pairs(const SceneIndex& scene, int max_distance) {
  if (max_distance < 1) throw InvalidArgumentError("max_distance must be >= 1");
  const auto n = static_cast<long>(scene.size());
  std::vector<PairRef> pairs;
  for (long src = 0; src < n; ++src) {
    for (int d = -max_distance; d <= max_distance; ++d) {
      if (d == 0 || src + d < 0 || src + d >= n) continue;
      pairs.push_back({static_cast<std::size_t>(src), static_cast<std::size_t>(src + d), d});
    }
  }
  return pairs;
}

Pose relative_pose(const Pose& world_from_src, const Pose& world_from_tgt) {
  return compose(invert(world_from_src), world_from_tgt);
}

namespace {

FrameView load_view(const SceneIndex& scene, std::size_t index, bool need_depth,
                    std::optional<int> crop_side, Intrinsics* K) {
  const FrameRecord& rec = scene.frames.at(index);
  Image image = load_image(rec.image);
  std::optional<DepthMap> depth;
  if (!rec.depth.empty()) {
    depth = load_depth_png(rec.depth, scene.profile);
  } else if (need_depth) {
    throw IoError("frame " + rec.image.filename().string() + " has no depth file");
  }
  if (depth && !image.same_extent(*depth)) {
    throw ShapeError("frame " + rec.image.filename().string() +
                     ": image and depth sizes differ");
  }
  Intrinsics k = scene.K;
  if (crop_side) {
    auto ci = center_crop(image, *crop_side, scene.K);
    image = std::move(ci.grid);
    k = ci.K;
    if (depth) depth = center_crop(*depth, *crop_side, scene.K).grid;
  }
  if (K != nullptr) *K = k;
  return {std::move(image), std::move(depth), rec.pose};
}

}  // namespace

FramePair load_pair(const SceneIndex& scene, const PairRef& ref,
                    std::optional<int> crop_side) {
  Intrinsics K = scene.K;
  FrameView src = load_view(scene, ref.src_index, true, crop_side, &K);
  FrameView tgt = load_view(scene, ref.tgt_index, false, crop_side, nullptr);
  if (!src.image.same_shape(tgt.image)) {
    throw ShapeError("source and target frames differ in shape");
  }
  Pose rel = relative_pose(src.pose, tgt.pose);
  return {std::move(src), std::move(tgt), rel, ref.frame_distance, K,
          scene.scene_id, ref.src_index, ref.tgt_index};
}

}  // namespace nvs
