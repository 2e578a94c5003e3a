#pragma once

#include <filesystem>

#include "weakfactor/config.hpp"

namespace weakfactor {

/// Stable column order; documented in configs/schema.md. Timing is kept
/// out so identical seeds give byte-identical files regardless of thread
/// count.
void write_records_csv(const std::filesystem::path& path,
                       const ExperimentConfig& cfg,
                       const std::vector<ReplicationRecord>& records);

struct RunSummary {
  nlohmann::json document;
  bool acceptance_passed = true;
};

/// Aggregates coverage / rate / normality per target, echoes the resolved
/// config, and evaluates any embedded acceptance thresholds.
RunSummary summarize(const ParsedConfig& parsed,
                     const std::vector<ReplicationRecord>& records,
                     double wall_seconds, int threads);

void write_summary_json(const std::filesystem::path& path,
                        const RunSummary& summary);

/// plots/err_vs_n_target<k>.csv : per-grid median error curves (xy data);
/// when render is set, a minimal SVG line chart is written next to each.
void write_plot_data(const std::filesystem::path& plots_dir,
                     const ExperimentConfig& cfg,
                     const std::vector<ReplicationRecord>& records,
                     bool render_svg);

}  // namespace weakfactor
