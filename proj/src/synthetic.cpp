#include "nvs/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nvs/errors.hpp"

namespace nvs::synth {

namespace {

void validate_checker(const Checker& c) {
  if (!(c.period > 0.0) || !std::isfinite(c.period)) {
    throw InvalidArgumentError("checker period must be positive");
  }
  for (const auto* color : {&c.color_a, &c.color_b}) {
    if (!((color->array() >= 0.0).all() && (color->array() <= 1.0).all())) {
      throw InvalidArgumentError("checker colors must lie in [0,1]");
    }
  }
}

const Eigen::Vector3d& checker_color(const Checker& c, double a, double b) {
  const auto ia = static_cast<long long>(std::floor(a / c.period));
  const auto ib = static_cast<long long>(std::floor(b / c.period));
  return ((ia + ib) & 1LL) == 0 ? c.color_a : c.color_b;
}

// In-plane orthonormal basis for the texture coordinates.
std::pair<Eigen::Vector3d, Eigen::Vector3d> plane_basis(const Eigen::Vector3d& n) {
  const Eigen::Vector3d helper = std::abs(n.y()) < 0.9 ? Eigen::Vector3d::UnitY()
                                                       : Eigen::Vector3d::UnitX();
  const Eigen::Vector3d e1 = helper.cross(n).normalized();
  return {e1, n.cross(e1)};
}

struct RayHit {
  double s;
  Eigen::Vector3d color;
};

std::optional<RayHit> intersect(const Plane& plane, const Eigen::Vector3d& origin,
                                const Eigen::Vector3d& dir) {
  const Eigen::Vector3d n = plane.normal.normalized();
  const double denom = n.dot(dir);
  if (denom == 0.0) return std::nullopt;
  const double s = n.dot(plane.point - origin) / denom;
  if (!(s > 0.0)) return std::nullopt;
  const Eigen::Vector3d rel = origin + s * dir - plane.point;
  const auto [e1, e2] = plane_basis(n);
  return RayHit{s, checker_color(plane.texture, rel.dot(e1), rel.dot(e2))};
}

std::optional<RayHit> intersect(const Sphere& sphere, const Eigen::Vector3d& origin,
                                const Eigen::Vector3d& dir) {
  const Eigen::Vector3d oc = origin - sphere.center;
  const double a = dir.squaredNorm();
  const double b = 2.0 * dir.dot(oc);
  const double c = oc.squaredNorm() - sphere.radius * sphere.radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  double s = (-b - root) / (2.0 * a);
  if (!(s > 0.0)) s = (-b + root) / (2.0 * a);
  if (!(s > 0.0)) return std::nullopt;
  const Eigen::Vector3d rel = origin + s * dir - sphere.center;
  // Arc-length longitude/latitude coordinates.
  const double lon = sphere.radius * std::atan2(rel.x(), rel.z());
  const double lat =
      sphere.radius * std::asin(std::clamp(rel.y() / sphere.radius, -1.0, 1.0));
  return RayHit{s, checker_color(sphere.texture, lon, lat)};
}

}  // namespace

AnalyticScene::AnalyticScene(std::vector<Primitive> objects, double far_mm)
    : objects_(std::move(objects)), far_mm_(far_mm) {
  if (objects_.empty()) throw InvalidArgumentError("scene needs at least one object");
  if (!(far_mm_ > 0.0)) throw InvalidArgumentError("far clip must be positive");
  for (const Primitive& obj : objects_) {
    std::visit(
        [](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, Plane>) {
            if (!(o.normal.norm() > 0.0)) {
              throw InvalidArgumentError("plane normal must be nonzero");
            }
          } else {
            if (!(o.radius > 0.0)) {
              throw InvalidArgumentError("sphere radius must be positive");
            }
          }
          validate_checker(o.texture);
        },
        obj);
  }
}

std::optional<AnalyticScene::Hit> AnalyticScene::trace(
    const PixelCoord& p, const Pose& world_from_camera, const Intrinsics& K) const {
  // Camera-frame direction with unit z, so the ray parameter equals depth.
  const Eigen::Vector3d dir_cam((p.u - K.cx()) / K.fx(), (p.v - K.cy()) / K.fy(), 1.0);
  const Eigen::Vector3d dir = world_from_camera.rotation() * dir_cam;
  const Eigen::Vector3d& origin = world_from_camera.translation();
  std::optional<RayHit> best;
  for (const Primitive& obj : objects_) {
    const auto hit =
        std::visit([&](const auto& o) { return intersect(o, origin, dir); }, obj);
    if (hit && (!best || hit->s < best->s)) best = hit;
  }
  if (!best || best->s > far_mm_) return std::nullopt;
  return Hit{best->s, best->color};
}

RenderResult render(const AnalyticScene& scene, const Pose& world_from_camera,
                    const Intrinsics& K, int width, int height) {
  if (width <= 0 || height <= 0) throw ShapeError("render size must be positive");
  const auto n = static_cast<std::size_t>(width) * height;
  std::vector<double> color(n * 3, 0.0);
  std::vector<double> depth(n, 0.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const auto hit = scene.trace({static_cast<double>(x), static_cast<double>(y)},
                                   world_from_camera, K);
      if (!hit) continue;
      const std::size_t p = static_cast<std::size_t>(y) * width + x;
      depth[p] = hit->depth;
      for (int c = 0; c < 3; ++c) color[p * 3 + c] = hit->color(c);
    }
  }
  return {Image(width, height, 3, std::move(color)),
          DepthMap(width, height, std::move(depth))};
}

FramePair make_pair(const AnalyticScene& scene, const Pose& pose_src,
                    const Pose& pose_tgt, const Intrinsics& K, int width, int height,
                    int frame_distance) {
  RenderResult src = render(scene, pose_src, K, width, height);
  RenderResult tgt = render(scene, pose_tgt, K, width, height);
  return {{std::move(src.image), std::move(src.depth), pose_src},
          {std::move(tgt.image), std::move(tgt.depth), pose_tgt},
          relative_pose(pose_src, pose_tgt),
          frame_distance,
          K,
          "synthetic",
          0,
          static_cast<std::size_t>(std::max(frame_distance, 0))};
}

std::vector<Pose> Trajectory::poses() const {
  if (frames < 1) throw InvalidArgumentError("trajectory needs at least one frame");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-jitter_mm, jitter_mm);
  std::vector<Pose> out;
  Pose current = start;
  for (int i = 0; i < frames; ++i) {
    if (jitter_mm > 0.0) {
      const Eigen::Vector3d offset(jitter(rng), jitter(rng), jitter(rng));
      out.emplace_back(current.rotation(), current.translation() + offset);
    } else {
      out.push_back(current);
    }
    current = compose(current, step);
  }
  return out;
}

Eigen::Matrix3d rotation_from_euler_deg(const Eigen::Vector3d& xyz_deg) {
  const Eigen::Vector3d r = xyz_deg * (std::numbers::pi / 180.0);
  return (Eigen::AngleAxisd(r.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(r.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(r.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

namespace {

using nlohmann::json;

Eigen::Vector3d vec3(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 3) {
    throw FormatError(std::string("scene config: '") + key + "' must be a 3-array");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

Checker parse_checker(const json& j) {
  Checker c;
  c.period = j.value("period", c.period);
  if (j.contains("colors")) {
    const json& colors = j.at("colors");
    if (!colors.is_array() || colors.size() != 2) {
      throw FormatError("scene config: 'colors' must hold two RGB triples");
    }
    for (int k = 0; k < 2; ++k) {
      const json& rgb = colors[k];
      if (!rgb.is_array() || rgb.size() != 3) {
        throw FormatError("scene config: each color must be an RGB triple");
      }
      (k == 0 ? c.color_a : c.color_b) = {rgb[0].get<double>(), rgb[1].get<double>(),
                                          rgb[2].get<double>()};
    }
  }
  return c;
}

Pose parse_pose(const json& j) {
  const Eigen::Vector3d euler =
      j.contains("rotation_deg") ? vec3(j, "rotation_deg") : Eigen::Vector3d::Zero();
  const Eigen::Vector3d t =
      j.contains("translation") ? vec3(j, "translation") : Eigen::Vector3d::Zero();
  return Pose(rotation_from_euler_deg(euler), t);
}

}  // namespace

SceneConfig parse_scene_config(const std::string& json_text) {
  try {
    const json j = json::parse(json_text);
    SceneConfig cfg;
    cfg.width = j.value("width", cfg.width);
    cfg.height = j.value("height", cfg.height);
    if (cfg.width <= 0 || cfg.height <= 0) {
      throw FormatError("scene config: width and height must be positive");
    }
    if (j.contains("intrinsics")) {
      const json& k = j.at("intrinsics");
      cfg.K = Intrinsics(k.at("fx").get<double>(), k.at("fy").get<double>(),
                         k.at("cx").get<double>(), k.at("cy").get<double>());
    } else {
      cfg.K = Intrinsics(cfg.width, cfg.width, (cfg.width - 1) / 2.0,
                         (cfg.height - 1) / 2.0);
    }
    std::vector<Primitive> objects;
    for (const json& o : j.at("objects")) {
      const std::string type = o.at("type").get<std::string>();
      if (type == "plane") {
        objects.emplace_back(Plane{vec3(o, "point"), vec3(o, "normal"), parse_checker(o)});
      } else if (type == "sphere") {
        objects.emplace_back(
            Sphere{vec3(o, "center"), o.at("radius").get<double>(), parse_checker(o)});
      } else {
        throw FormatError("scene config: unknown object type '" + type + "'");
      }
    }
    cfg.scene = AnalyticScene(std::move(objects), j.value("far_mm", 60000.0));
    if (j.contains("trajectory")) {
      const json& t = j.at("trajectory");
      cfg.trajectory.frames = t.value("frames", cfg.trajectory.frames);
      if (t.contains("start")) cfg.trajectory.start = parse_pose(t.at("start"));
      if (t.contains("step")) cfg.trajectory.step = parse_pose(t.at("step"));
      cfg.trajectory.jitter_mm = t.value("jitter_mm", 0.0);
      cfg.trajectory.seed = t.value("seed", std::uint64_t{0});
      if (cfg.trajectory.frames < 1 || cfg.trajectory.jitter_mm < 0.0) {
        throw FormatError("scene config: invalid trajectory");
      }
    }
    return cfg;
  } catch (const json::exception& e) {
    throw FormatError(std::string("scene config: ") + e.what());
  } catch (const InvalidArgumentError& e) {
    throw FormatError(std::string("scene config: ") + e.what());
  }
}

SceneConfig load_scene_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scene_config(text.str());
}

Image blur_standin(const Image& img, int radius) {
  if (radius < 0) throw InvalidArgumentError("blur radius must be >= 0");
  const int w = img.width();
  const int h = img.height();
  const int channels = img.channels();
  std::vector<double> out(img.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        double sum = 0.0;
        int count = 0;
        for (int yy = std::max(0, y - radius); yy <= std::min(h - 1, y + radius); ++yy) {
          for (int xx = std::max(0, x - radius); xx <= std::min(w - 1, x + radius); ++xx) {
            sum += img.at(xx, yy, c);
            ++count;
          }
        }
        out[(static_cast<std::size_t>(y) * w + x) * channels + c] =
            std::clamp(sum / count, 0.0, 1.0);
      }
    }
  }
  return Image(w, h, channels, std::move(out));
}

}  // namespace nvs::synth
