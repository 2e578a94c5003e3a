#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "weakfactor/diagnostics.hpp"
#include "weakfactor/inference.hpp"
#include "weakfactor/stats.hpp"

namespace weakfactor {

struct TargetSpec {
  enum class Kind { kLoading, kFactor, kCommon };
  Kind kind = Kind::kFactor;
  int unit = -1;    // -1 resolves to floor(N/2)
  int period = -1;  // -1 resolves to floor(T/2)
};

enum class VarianceMode { kOracle, kPlugIn };

struct DiagnosticsConfig {
  bool identities = true;
  bool leaveout = false;  // record leave-out Delta norms alongside identities
  int delta = -1;         // -1: q for MA(q), ceil(ln N) for AR, 0 otherwise
};

struct ExperimentConfig {
  std::vector<DgpDescriptor> dgp_grid;  // per-replication seeds derived from base_seed
  int replications = 100;
  std::vector<TargetSpec> targets;
  double ci_level = 0.95;
  VarianceMode variance_mode = VarianceMode::kOracle;
  int bandwidth = -1;  // plug-in HAC; -1: ceil(T^{1/3}) for dependent noise, else 0
  DiagnosticsConfig diagnostics;
  std::uint64_t base_seed = 0;

  void validate() const;
  int resolve_bandwidth(const DgpDescriptor& desc) const;
  int resolve_delta(const DgpDescriptor& desc) const;
};

struct TargetResult {
  TargetSpec::Kind kind = TargetSpec::Kind::kFactor;
  int unit = -1;
  int period = -1;
  double err = 0.0;     // rotated error norm
  double bn_err = 0.0;  // loading targets only; 0 otherwise
  int dim = 0;
  int hits = 0;  // per-coordinate CI hits out of dim
  VectorXd studentized;
  std::string variance_mode_effective;  // "oracle" or "plugin"
};

struct ReplicationRecord {
  int grid_id = 0;
  int rep_id = 0;
  std::uint64_t seed = 0;
  bool valid = true;
  std::string flag;  // error type when invalid
  std::vector<TargetResult> targets;
  bool has_diagnostics = false;
  InstanceDiagnostics diagnostics;
  int loo_unit = -1;  // unit excluded by the diagnostics leave-one-out
  // leave-neighbor-out diagnostic (diagnostics.leaveout)
  bool has_neighbor_diag = false;
  int nbr_period = -1;
  int nbr_delta = 0;
  double nbr_delta1_norm = 0.0;
  double seconds = 0.0;  // wall clock; never serialized into records.csv
};

ReplicationRecord run_single_replication(const ExperimentConfig& cfg,
                                         int grid_id, int rep_id);

using GridProgressFn = std::function<void(int grid_id, double seconds)>;

/// Runs the whole grid on a worker pool, one grid point at a time. Output
/// order (grid-major, replication-minor) and content are independent of
/// thread count; every failure is recorded as a flagged row, never
/// dropped.
std::vector<ReplicationRecord> run_experiment(
    const ExperimentConfig& cfg, int threads = 1,
    const GridProgressFn& on_grid_done = {});

struct CoverageStats {
  double coverage = 0.0;
  double se = 0.0;
  int n = 0;
};

/// Proportion of per-coordinate CI hits for one target across valid
/// records (optionally restricted to one grid point); binomial standard
/// error. Throws TooFewRecords below 30 valid records.
CoverageStats coverage_stats(const std::vector<ReplicationRecord>& records,
                             int target_index,
                             std::optional<int> grid_id = std::nullopt);

enum class RateStatistic { kError, kBnError, kStudentizedNorm };

struct RateResult {
  LineFit fit;
  std::vector<double> log_n;
  std::vector<double> log_median;
};

/// Log-log regression of the per-grid median statistic on N. Throws
/// TooFewGridPoints unless there are >= 3 grid points with >= 30 valid
/// records each.
RateResult rate_regression(const std::vector<ReplicationRecord>& records,
                           const ExperimentConfig& cfg, int target_index,
                           RateStatistic stat = RateStatistic::kError);

struct NormalityReport {
  double ks_stat = 0.0;
  double skew = 0.0;
  double excess_kurtosis = 0.0;
  int n = 0;
};

/// KS statistic against the standard normal plus third/fourth moments of
/// pooled studentized draws. Throws TooFewDraws below 500 draws.
NormalityReport normality_check(const std::vector<double>& draws);

/// Pools studentized coordinates for one target across valid records.
std::vector<double> pooled_studentized(
    const std::vector<ReplicationRecord>& records, int target_index,
    std::optional<int> grid_id = std::nullopt);

struct BoundaryDemoResult {
  LineFit flat;    // Lambda'Lambda = O(1) analogue of alpha = 0
  LineFit weak;    // alpha = 0.3
  LineFit strong;  // alpha = 1
};

/// Runs the factor-error rate comparison demonstrating inconsistency at
/// the alpha = 0 boundary against decaying errors for alpha > 0.
BoundaryDemoResult boundary_demo(const std::vector<int>& grid_sizes,
                                 int replications, std::uint64_t base_seed,
                                 int threads = 1);

}  // namespace weakfactor
