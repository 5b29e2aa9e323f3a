// nvs: batch front-end for depth-based view warping and evaluation.
//
//   nvs synth    --scene-config scene.json --out DIR
//   nvs warp     --scene DIR [--scene DIR ...] --out DIR [options]
//   nvs evaluate --scene DIR [--scene DIR ...] --out DIR [options]
//   nvs densify  --in mask.png --out dense.png [--radius 1]
//
// Options may also come from a TOML/INI file passed with --config. The
// NVS_OUTPUT_ROOT environment variable supplies --out when it is not given.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nvs/pipeline.hpp"

namespace {

constexpr const char* kOutputEnv = "NVS_OUTPUT_ROOT";

struct RunOptions {
  std::string profile = "piv3cams";
  std::vector<std::string> scenes;
  std::string output;
  std::string depth_source = "target";
  std::string fusion = "none";
  int radius = 1;
  int crop = 0;
  std::uint64_t seed = 0;
  int max_distance = 3;
  std::size_t pairs = 0;
  int ssim_window = 11;
  std::string ssim_weighting = "uniform";
  double ssim_sigma = 1.5;
  std::string eval_region = "full";
  std::string pixel_dir;
  std::string mask_dir;
  int pixel_blur = 0;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--profile", o.profile, "Dataset profile")
      ->check(CLI::IsMember({"piv3cams", "kitti"}))
      ->capture_default_str();
  cmd->add_option("--scene", o.scenes, "Scene directory (repeatable)")->required();
  cmd->add_option("--out", o.output, "Output directory")->envname(kOutputEnv)->required();
  cmd->add_option("--depth-source", o.depth_source,
                  "Depth used for inverse warping: target (ground truth) or source "
                  "(forward-warped)")
      ->check(CLI::IsMember({"target", "source"}))
      ->capture_default_str();
  cmd->add_option("--fusion", o.fusion, "Fusion rule")
      ->check(CLI::IsMember({"none", "predicted-mask", "average", "visibility-mask"}))
      ->capture_default_str();
  cmd->add_option("--radius", o.radius, "Mask closing radius (square side 2r+1)")
      ->check(CLI::Range(0, 64))
      ->capture_default_str();
  cmd->add_option("--crop", o.crop, "Center-crop side in pixels (0 = no crop)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "Pair sampling seed")->capture_default_str();
  cmd->add_option("--max-distance", o.max_distance, "Largest |frame distance|")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--pairs", o.pairs,
                  "Sampled pairs per scene (0 = every pair within max distance)")
      ->capture_default_str();
  cmd->add_option("--ssim-window", o.ssim_window, "SSIM window side (odd)")
      ->capture_default_str();
  cmd->add_option("--ssim-weighting", o.ssim_weighting, "SSIM window weighting")
      ->check(CLI::IsMember({"uniform", "gaussian"}))
      ->capture_default_str();
  cmd->add_option("--ssim-sigma", o.ssim_sigma, "Gaussian SSIM sigma")
      ->capture_default_str();
  cmd->add_option("--eval-region", o.eval_region, "L1 region: full, sparse, dense")
      ->check(CLI::IsMember({"full", "sparse", "dense"}))
      ->capture_default_str();
  cmd->add_option("--pixel-dir", o.pixel_dir, "Pixel-branch predictions root");
  cmd->add_option("--mask-dir", o.mask_dir, "Predicted fusion masks root");
  cmd->add_option("--pixel-blur", o.pixel_blur,
                  "Box-blur radius of the target used as pixel-branch stand-in")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

nvs::RunConfig to_config(const RunOptions& o) {
  nvs::RunConfig c;
  c.profile = nvs::parse_profile(o.profile);
  for (const auto& s : o.scenes) c.scenes.emplace_back(s);
  c.output = o.output;
  c.depth_source = nvs::parse_depth_source(o.depth_source);
  if (o.fusion != "none") c.fusion = nvs::parse_fusion_rule(o.fusion);
  c.densify_radius = o.radius;
  c.crop = o.crop;
  c.seed = o.seed;
  c.max_distance = o.max_distance;
  c.pair_count = o.pairs;
  c.ssim.window = o.ssim_window;
  c.ssim.weighting = nvs::parse_ssim_weighting(o.ssim_weighting);
  c.ssim.sigma = o.ssim_sigma;
  c.eval_region = nvs::parse_eval_region(o.eval_region);
  if (!o.pixel_dir.empty()) c.pixel_dir = o.pixel_dir;
  if (!o.mask_dir.empty()) c.mask_dir = o.mask_dir;
  c.pixel_blur = o.pixel_blur;
  return c;
}

int report_exit(const nvs::RunReport& report, const char* verb) {
  std::size_t ok = 0;
  std::size_t skipped = 0;
  for (const auto& p : report.pairs) {
    ok += p.ok ? 1 : 0;
    skipped += p.skipped ? 1 : 0;
  }
  std::cout << verb << ": " << ok << " ok, " << skipped << " skipped, "
            << report.hard_failures() << " failed\n";
  for (const auto& p : report.pairs) {
    if (p.skipped) {
      std::cerr << "warning: " << p.scene_id << " " << p.src_name << "->" << p.tgt_name
                << ": " << p.message << "\n";
    } else if (!p.ok) {
      std::cerr << "error: " << p.scene_id << " " << p.src_name << "->" << p.tgt_name
                << ": " << p.message << "\n";
    }
  }
  return report.hard_failures() == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Depth-based view warping, fusion and evaluation"};
  app.set_config("--config", "", "Read options from a TOML/INI file");
  app.require_subcommand(1);

  RunOptions warp_opts;
  auto* warp = app.add_subcommand("warp", "Warp frame pairs and write images, masks, depth");
  add_run_options(warp, warp_opts);

  RunOptions eval_opts;
  auto* evaluate =
      app.add_subcommand("evaluate", "Compute L1/SSIM per pair and per frame distance");
  add_run_options(evaluate, eval_opts);

  std::string scene_config;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Render a synthetic RGB-D sequence");
  synth->add_option("--scene-config", scene_config, "Scene JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "Output scene directory")
      ->envname(kOutputEnv)
      ->required();

  std::string densify_in;
  std::string densify_out;
  int densify_radius = 1;
  auto* densify = app.add_subcommand("densify", "Morphologically close a mask PNG");
  densify->add_option("--in", densify_in, "Input mask PNG")
      ->required()
      ->check(CLI::ExistingFile);
  densify->add_option("--out", densify_out, "Output mask PNG")->required();
  densify->add_option("--radius", densify_radius, "Closing radius")
      ->check(CLI::Range(0, 64))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*warp) return report_exit(nvs::cmd_warp(to_config(warp_opts)), "warp");
    if (*evaluate) {
      return report_exit(nvs::cmd_evaluate(to_config(eval_opts)), "evaluate");
    }
    if (*synth) {
      nvs::cmd_synth(scene_config, synth_out);
      std::cout << "synth: wrote " << synth_out << "\n";
      return EXIT_SUCCESS;
    }
    if (*densify) {
      nvs::cmd_densify(densify_in, densify_out, densify_radius);
      return EXIT_SUCCESS;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return EXIT_FAILURE;
}
