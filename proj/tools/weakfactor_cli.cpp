#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <CLI11.hpp>

#include "weakfactor/report.hpp"

namespace fs = std::filesystem;
using namespace weakfactor;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAcceptance = 2;
constexpr int kExitRuntime = 3;

int resolve_threads(const std::string& threads_arg) {
  if (threads_arg == "auto") {
    return std::max(1u, std::thread::hardware_concurrency());
  }
  try {
    const int threads = std::stoi(threads_arg);
    if (threads < 1) throw ParseError("--threads must be positive");
    return threads;
  } catch (const std::logic_error&) {
    throw ParseError("--threads must be a positive integer or 'auto'");
  }
}

void prepare_output_dir(const fs::path& dir, bool overwrite) {
  if (fs::exists(dir) && !fs::is_directory(dir)) {
    throw IoError(dir.string() + " exists and is not a directory");
  }
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!overwrite) {
      throw IoError("output directory " + dir.string() +
                    " is not empty; pass --overwrite to replace its contents");
    }
  }
  fs::create_directories(dir);
}

int execute_run(const ParsedConfig& parsed, const fs::path& output_dir,
                int threads, bool overwrite, bool render_plots) {
  prepare_output_dir(output_dir, overwrite);

  const auto started = std::chrono::steady_clock::now();
  const auto& cfg = parsed.experiment;
  auto progress = [&](int grid_id, double seconds) {
    const auto& desc = cfg.dgp_grid[static_cast<size_t>(grid_id)];
    std::printf("grid %d/%zu  n=%d t=%d r=%d  %d reps  %.1fs\n", grid_id + 1,
                cfg.dgp_grid.size(), desc.n, desc.t, desc.r, cfg.replications,
                seconds);
    std::fflush(stdout);
  };
  const auto records = run_experiment(cfg, threads, progress);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();

  write_records_csv(output_dir / "records.csv", cfg, records);
  write_plot_data(output_dir / "plots", cfg, records, render_plots);
  const RunSummary summary = summarize(parsed, records, wall, threads);
  write_summary_json(output_dir / "summary.json", summary);

  if (!parsed.acceptance.empty() && !summary.acceptance_passed) {
    std::fprintf(stderr, "acceptance thresholds failed (see summary.json)\n");
    return kExitAcceptance;
  }
  return kExitOk;
}

int run_identities(std::uint64_t seed) {
  const auto grid = identity_suite_grid(seed);
  IdentityGaps worst;
  double max_gap = 0.0;
  for (const auto& desc : grid) {
    const PanelInstance instance = assemble_panel(desc);
    const InstanceDiagnostics diag = run_identity_suite(instance, desc.r);
    const IdentityGaps& g = diag.gaps;
    worst.rotation_loading = std::max(worst.rotation_loading, g.rotation_loading);
    worst.rotation_factor = std::max(worst.rotation_factor, g.rotation_factor);
    worst.matching_loading = std::max(worst.matching_loading, g.matching_loading);
    worst.matching_factor = std::max(worst.matching_factor, g.matching_factor);
    worst.claim_symmetric = std::max(worst.claim_symmetric, g.claim_symmetric);
    worst.balanced_truth = std::max(worst.balanced_truth, g.balanced_truth);
    worst.balanced_fit = std::max(worst.balanced_fit, g.balanced_fit);
    worst.ydecomposition = std::max(worst.ydecomposition, g.ydecomposition);
    worst.decomp_r1 = std::max(worst.decomp_r1, g.decomp_r1);
    worst.hbn = std::max(worst.hbn, g.hbn);
    max_gap = std::max(max_gap, g.max_gap());
  }
  std::printf("max identity gaps over %zu instances (seed %llu):\n",
              grid.size(), static_cast<unsigned long long>(seed));
  std::printf("  rotation (loading side)   %.3e\n", worst.rotation_loading);
  std::printf("  rotation (factor side)    %.3e\n", worst.rotation_factor);
  std::printf("  matching (loading side)   %.3e\n", worst.matching_loading);
  std::printf("  matching (factor side)    %.3e\n", worst.matching_factor);
  std::printf("  claim symmetric           %.3e\n", worst.claim_symmetric);
  std::printf("  balanced gram (truth)     %.3e\n", worst.balanced_truth);
  std::printf("  balanced gram (fit)       %.3e\n", worst.balanced_fit);
  std::printf("  Y decomposition           %.3e\n", worst.ydecomposition);
  std::printf("  leave-one-out r1 row      %.3e\n", worst.decomp_r1);
  std::printf("  H_BN decomposition        %.3e\n", worst.hbn);
  std::printf("%s (max %.3e, bound 1e-8)\n",
              max_gap < 1e-8 ? "all identities hold" : "IDENTITY FAILURE",
              max_gap);
  return max_gap < 1e-8 ? kExitOk : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo harness for PC estimation of weak-factor panels"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::string threads_arg = "auto";
  std::vector<std::string> overrides;
  bool overwrite = false;
  bool render_plots = false;
  std::uint64_t identities_seed = 7;

  auto* run_cmd = app.add_subcommand("run", "run an experiment config");
  run_cmd->add_option("-c,--config", config_path, "config file (JSON)")
      ->required();
  run_cmd->add_option("-o,--output", output_dir, "output directory")
      ->required();
  run_cmd->add_option("--threads", threads_arg, "worker threads or 'auto'");
  run_cmd->add_option("--set", overrides, "config override key=value");
  run_cmd->add_flag("--overwrite", overwrite, "replace non-empty output dir");
  run_cmd->add_flag("--render-plots", render_plots,
                    "write SVG line charts next to plot data");

  auto* validate_cmd =
      app.add_subcommand("validate", "check a config without running it");
  validate_cmd->add_option("-c,--config", config_path, "config file (JSON)")
      ->required();

  auto* demo_cmd =
      app.add_subcommand("demo", "run the built-in tiny configuration");
  demo_cmd->add_option("-o,--output", output_dir, "output directory")
      ->required();
  demo_cmd->add_option("--threads", threads_arg, "worker threads or 'auto'");
  demo_cmd->add_flag("--overwrite", overwrite, "replace non-empty output dir");

  auto* identities_cmd = app.add_subcommand(
      "identities", "run the exact-identity suite on 20 random instances");
  identities_cmd->add_option("--seed", identities_seed, "base seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      ParsedConfig parsed;
      try {
        parsed = load_config(config_path, overrides);
      } catch (const Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitUsage;
      }
      return execute_run(parsed, output_dir, resolve_threads(threads_arg),
                         overwrite, render_plots);
    }
    if (validate_cmd->parsed()) {
      std::ifstream is(config_path);
      if (!is) {
        std::fprintf(stderr, "cannot open config: %s\n", config_path.c_str());
        return kExitUsage;
      }
      auto doc = nlohmann::json::parse(is, nullptr, false);
      if (doc.is_discarded()) {
        std::fprintf(stderr, "config is not valid JSON\n");
        return kExitUsage;
      }
      const auto diagnostics = validate_config(doc);
      bool clean = true;
      for (const auto& line : diagnostics) {
        std::printf("%s\n", line.c_str());
        clean &= line.rfind("warning:", 0) == 0;
      }
      if (clean && diagnostics.empty()) std::printf("config is clean\n");
      return clean ? kExitOk : kExitUsage;
    }
    if (demo_cmd->parsed()) {
      const ParsedConfig parsed = parse_config(demo_config());
      return execute_run(parsed, output_dir, resolve_threads(threads_arg),
                         overwrite, /*render_plots=*/false);
    }
    if (identities_cmd->parsed()) {
      return run_identities(identities_seed);
    }
  } catch (const ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitUsage;
  } catch (const ConfigInvalid& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
