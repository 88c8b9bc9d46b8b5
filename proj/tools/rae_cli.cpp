// rae: submap uncertainty tool.
//
//   rae simulate-wall      --config cfg.json --out dir
//   rae simulate-pushbroom --config cfg.json --out dir
//   rae build-submap       --config cfg.json --out dir
//   rae montecarlo         --config cfg.json --out dir
//   rae envelope           --config cfg.json --points points.csv --out dir
//
// Exit status: 0 ok, 2 invalid configuration or input, 3 consistency check
// failed, 1 anything else.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rae/errors.hpp"
#include "rae/io/config.hpp"
#include "rae/pipeline.hpp"

namespace {

constexpr int kExitValidation = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Range-azimuth-elevation measurement uncertainty on Lie groups"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string slot_order;
  std::string points_path;

  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "random seed (overrides the config)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--slot-order", slot_order, "sensor covariance slot order")
      ->check(CLI::IsMember({"paper-literal", "perp-axes"}));

  auto* wall = app.add_subcommand("simulate-wall", "planar wall scenario with envelopes and SVG");
  auto* push = app.add_subcommand("simulate-pushbroom", "3D push-broom survey and submap");
  auto* submap = app.add_subcommand("build-submap", "submap covariances from trajectory, scan, extrinsic files");
  auto* mc = app.add_subcommand("montecarlo", "sampling consistency checks");
  auto* env = app.add_subcommand("envelope", "envelope geometry for a points file");
  env->add_option("--points", points_path, "CSV of mean poses and covariances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    rae::io::RunConfig cfg = config_path.empty() ? rae::io::default_config() : rae::io::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (!slot_order.empty()) cfg.slot_order = rae::io::parse_slot_order(slot_order);
    cfg.resolve();
    cfg.validate();

    rae::io::CommandResult result;
    if (wall->parsed()) {
      result = rae::io::cmd_simulate_wall(cfg, out_dir);
    } else if (push->parsed()) {
      result = rae::io::cmd_simulate_pushbroom(cfg, out_dir);
    } else if (submap->parsed()) {
      result = rae::io::cmd_build_submap(cfg, out_dir);
    } else if (mc->parsed()) {
      result = rae::io::cmd_montecarlo(cfg, out_dir);
    } else if (env->parsed()) {
      result = rae::io::cmd_envelope(cfg, points_path, out_dir);
    }
    for (const auto& f : result.files) std::cout << out_dir << "/" << f << "\n";
    if (result.exit_code == 3) std::cerr << "consistency check failed; see montecarlo_report.json\n";
    return result.exit_code;
  } catch (const rae::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const rae::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const rae::TimestampOutOfRange& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
