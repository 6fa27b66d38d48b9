#include <iostream>

#include <omp.h>

#include "CLI11.hpp"
#include "mflab/config.hpp"
#include "mflab/errors.hpp"
#include "mflab/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mean-field particle systems with measure-valued labels"};
  app.set_version_flag("--version", mflab::kVersion);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool emit_svg = false;
  app.add_option("config", config_path, "run configuration file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "override [run] seed");
  auto* out_opt = app.add_option("--out", out_dir, "override [run] out directory");
  app.add_flag("--emit-svg", emit_svg, "write SVG plots");
  app.add_option("--threads", threads, "OpenMP thread count (results do not depend on it)")->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    mflab::RunConfig cfg = mflab::parse_config(config_path);
    if (*seed_opt) cfg.seed = cfg.sim.seed = seed;
    if (*out_opt) cfg.out_dir = out_dir;
    if (emit_svg) cfg.emit_svg = true;
    if (threads > 0) omp_set_num_threads(threads);
    const mflab::RunOutcome outcome = mflab::run(cfg, std::cout);
    std::cout << (outcome.passed() ? "all checks passed" : "some checks FAILED") << "; artifacts in " << cfg.out_dir
              << "\n";
    return outcome.passed() ? 0 : 1;
  } catch (const mflab::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const mflab::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
