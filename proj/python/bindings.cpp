#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nvs/camera.hpp"
#include "nvs/dataset.hpp"
#include "nvs/errors.hpp"
#include "nvs/fusion.hpp"
#include "nvs/metrics.hpp"
#include "nvs/synthetic.hpp"
#include "nvs/warping.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> flat(const Array& a) {
  return std::vector<double>(a.data(), a.data() + a.size());
}

// (H, W) or (H, W, C) -> Image.
nvs::Image to_image(const Array& a) {
  if (a.ndim() == 2) {
    return nvs::Image(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), 1,
                      flat(a));
  }
  if (a.ndim() == 3) {
    return nvs::Image(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)),
                      static_cast<int>(a.shape(2)), flat(a));
  }
  throw nvs::ShapeError("image arrays must be (H, W) or (H, W, C)");
}

void require_2d(const Array& a, const char* what) {
  if (a.ndim() != 2) throw nvs::ShapeError(std::string(what) + " arrays must be (H, W)");
}

nvs::DepthMap to_depth(const Array& a) {
  require_2d(a, "depth");
  return nvs::DepthMap(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)),
                       flat(a));
}

nvs::Mask to_mask(const Array& a) {
  require_2d(a, "mask");
  return nvs::Mask(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), flat(a));
}

Array to_array(const nvs::Image& img) {
  Array out({img.height(), img.width(), img.channels()});
  std::copy(img.data().begin(), img.data().end(), out.mutable_data());
  return out;
}

Array to_array_2d(const nvs::Raster& r) {
  Array out({r.height(), r.width()});
  std::copy(r.data().begin(), r.data().end(), out.mutable_data());
  return out;
}

nvs::SsimParams ssim_params(int window, double c1, double c2,
                            const std::string& weighting, double sigma) {
  nvs::SsimParams p;
  p.window = window;
  p.c1 = c1;
  p.c2 = c2;
  p.weighting = nvs::parse_ssim_weighting(weighting);
  p.sigma = sigma;
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Depth-based view warping, fusion and image metrics";

  py::register_exception<nvs::Error>(m, "NvsError", PyExc_ValueError);

  py::class_<nvs::Intrinsics>(m, "Intrinsics")
      .def(py::init<double, double, double, double>(), py::arg("fx"), py::arg("fy"),
           py::arg("cx"), py::arg("cy"))
      .def_property_readonly("fx", &nvs::Intrinsics::fx)
      .def_property_readonly("fy", &nvs::Intrinsics::fy)
      .def_property_readonly("cx", &nvs::Intrinsics::cx)
      .def_property_readonly("cy", &nvs::Intrinsics::cy)
      .def("matrix", &nvs::Intrinsics::matrix)
      .def("__repr__", [](const nvs::Intrinsics& k) {
        return "Intrinsics(fx=" + std::to_string(k.fx()) + ", fy=" + std::to_string(k.fy()) +
               ", cx=" + std::to_string(k.cx()) + ", cy=" + std::to_string(k.cy()) + ")";
      });

  py::class_<nvs::Pose>(m, "Pose")
      .def(py::init<>())
      .def(py::init<const Eigen::Matrix3d&, const Eigen::Vector3d&>(), py::arg("rotation"),
           py::arg("translation"))
      .def_property_readonly("rotation", &nvs::Pose::rotation)
      .def_property_readonly("translation", &nvs::Pose::translation)
      .def("matrix", &nvs::Pose::matrix)
      .def_static("about_axis", &nvs::rotation_about, py::arg("axis"), py::arg("radians"),
                  py::arg("translation") = Eigen::Vector3d::Zero());

  m.def(
      "backproject",
      [](double u, double v, double depth, const nvs::Intrinsics& K) {
        return nvs::backproject({u, v}, depth, K);
      },
      py::arg("u"), py::arg("v"), py::arg("depth"), py::arg("K"));
  m.def(
      "project",
      [](const Eigen::Vector3d& P, const nvs::Intrinsics& K) {
        const nvs::PixelCoord p = nvs::project(P, K);
        return py::make_tuple(p.u, p.v);
      },
      py::arg("point"), py::arg("K"));
  m.def("transform_point", &nvs::transform_point, py::arg("point"), py::arg("pose"));
  m.def("compose", &nvs::compose, py::arg("a"), py::arg("b"));
  m.def("invert", &nvs::invert, py::arg("pose"));
  m.def("transform_latent", &nvs::transform_latent, py::arg("points"), py::arg("pose"));

  m.def(
      "bilinear_sample",
      [](const Array& img, double u, double v) {
        return nvs::bilinear_sample(to_image(img), {u, v});
      },
      py::arg("image"), py::arg("u"), py::arg("v"));
  m.def(
      "inverse_warp",
      [](const Array& src, const Array& tgt_depth, const nvs::Pose& tgt_to_src,
         const nvs::Intrinsics& K) {
        const auto r = nvs::inverse_warp(to_image(src), to_depth(tgt_depth), tgt_to_src, K);
        return py::make_tuple(to_array(r.image), to_array_2d(r.mask));
      },
      py::arg("src"), py::arg("tgt_depth"), py::arg("tgt_to_src"), py::arg("K"));
  m.def(
      "forward_warp_depth",
      [](const Array& src_depth, const nvs::Pose& src_to_tgt, const nvs::Intrinsics& K) {
        const auto r = nvs::forward_warp_depth(to_depth(src_depth), src_to_tgt, K);
        return py::make_tuple(to_array_2d(r.depth), to_array_2d(r.mask));
      },
      py::arg("src_depth"), py::arg("src_to_tgt"), py::arg("K"));
  m.def(
      "warp_from_source_depth",
      [](const Array& src, const Array& src_depth, const nvs::Pose& src_to_tgt,
         const nvs::Intrinsics& K) {
        const auto r = nvs::warp_from_source_depth(to_image(src), to_depth(src_depth),
                                                   src_to_tgt, K);
        return py::make_tuple(to_array(r.image), to_array_2d(r.depth),
                              to_array_2d(r.mask));
      },
      py::arg("src"), py::arg("src_depth"), py::arg("src_to_tgt"), py::arg("K"));
  m.def(
      "densify_mask",
      [](const Array& mask, int radius) {
        return to_array_2d(nvs::densify_mask(to_mask(mask), radius));
      },
      py::arg("mask"), py::arg("radius") = 1);

  m.def(
      "fuse_predicted_mask",
      [](const Array& warped, const Array& pixel, const Array& mask) {
        return to_array(nvs::fuse_predicted_mask(to_image(warped), to_image(pixel),
                                                 to_mask(mask)));
      },
      py::arg("warped"), py::arg("pixel"), py::arg("mask"));
  m.def(
      "fuse_average",
      [](const Array& warped, const Array& pixel) {
        return to_array(nvs::fuse_average(to_image(warped), to_image(pixel)));
      },
      py::arg("warped"), py::arg("pixel"));
  m.def(
      "fuse_visibility",
      [](const Array& warped, const Array& pixel, const Array& vis) {
        return to_array(
            nvs::fuse_visibility(to_image(warped), to_image(pixel), to_mask(vis)));
      },
      py::arg("warped"), py::arg("pixel"), py::arg("vis"));

  m.def(
      "l1_error",
      [](const Array& x, const Array& y, std::optional<Array> mask) {
        std::optional<nvs::Mask> m;
        if (mask) m = to_mask(*mask);
        return nvs::l1_error(to_image(x), to_image(y), m);
      },
      py::arg("x"), py::arg("y"), py::arg("mask") = py::none());
  m.def(
      "ssim",
      [](const Array& x, const Array& y, int window, double c1, double c2,
         const std::string& weighting, double sigma) {
        return nvs::ssim(to_image(x), to_image(y),
                         ssim_params(window, c1, c2, weighting, sigma));
      },
      py::arg("x"), py::arg("y"), py::arg("window") = 11, py::arg("c1") = 0.01 * 0.01,
      py::arg("c2") = 0.03 * 0.03, py::arg("weighting") = "uniform",
      py::arg("sigma") = 1.5);
  m.def(
      "recon_loss",
      [](const Array& pred, const Array& warped, const Array& pixel, const Array& tgt) {
        return nvs::recon_loss(to_image(pred), to_image(warped), to_image(pixel),
                               to_image(tgt));
      },
      py::arg("pred"), py::arg("warped"), py::arg("pixel"), py::arg("tgt"));
  m.def("lsgan_loss", &nvs::lsgan_loss, py::arg("score"));
  m.def(
      "perceptual_loss",
      [](const Array& a, const Array& b) {
        return nvs::perceptual_loss(std::span<const double>(a.data(), a.size()),
                                    std::span<const double>(b.data(), b.size()));
      },
      py::arg("f_tgt"), py::arg("f_pixel"));
  m.def(
      "total_loss",
      [](double recon, double lsgan, double vgg, double l1_w, double gan_w, double vgg_w) {
        return nvs::total_loss(recon, lsgan, vgg, {l1_w, gan_w, vgg_w});
      },
      py::arg("recon"), py::arg("lsgan"), py::arg("vgg"), py::arg("lambda_l1") = 10.0,
      py::arg("lambda_gan") = 2.0, py::arg("lambda_vgg") = 0.5);

  m.def(
      "load_depth_png",
      [](const std::filesystem::path& path, const std::string& profile) {
        return to_array_2d(nvs::load_depth_png(path, nvs::parse_profile(profile)));
      },
      py::arg("path"), py::arg("profile") = "piv3cams");
  m.def(
      "save_depth_png",
      [](const Array& depth, const std::filesystem::path& path, const std::string& profile) {
        nvs::save_depth_png(to_depth(depth), path, nvs::parse_profile(profile));
      },
      py::arg("depth"), py::arg("path"), py::arg("profile") = "piv3cams");
  m.def(
      "load_pose_file",
      [](const std::filesystem::path& path, const std::string& profile) {
        return nvs::load_pose_file(path, nvs::parse_profile(profile));
      },
      py::arg("path"), py::arg("profile") = "piv3cams");
  m.def(
      "center_crop",
      [](const Array& img, int side, const nvs::Intrinsics& K) {
        const auto c = nvs::center_crop(to_image(img), side, K);
        return py::make_tuple(to_array(c.grid), c.K);
      },
      py::arg("image"), py::arg("side"), py::arg("K"));

  py::class_<nvs::synth::SceneConfig>(m, "SceneConfig")
      .def_static("from_json", &nvs::synth::parse_scene_config, py::arg("text"))
      .def_readonly("width", &nvs::synth::SceneConfig::width)
      .def_readonly("height", &nvs::synth::SceneConfig::height)
      .def_readonly("K", &nvs::synth::SceneConfig::K)
      .def("poses",
           [](const nvs::synth::SceneConfig& c) { return c.trajectory.poses(); })
      .def(
          "render",
          [](const nvs::synth::SceneConfig& c, const nvs::Pose& world_from_camera) {
            const auto r = nvs::synth::render(c.scene, world_from_camera, c.K, c.width,
                                              c.height);
            return py::make_tuple(to_array(r.image), to_array_2d(r.depth));
          },
          py::arg("world_from_camera"));
}
