#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "weakfactor/report.hpp"

using namespace weakfactor;

namespace {

DgpDescriptor descriptor(int n, int t, int r, double alpha, double sd) {
  DgpDescriptor desc;
  desc.n = n;
  desc.t = t;
  desc.r = r;
  desc.loading_scheme.kind = LoadingKind::kHomogeneous;
  desc.loading_scheme.alpha = alpha;
  desc.loading_scheme.sigma_lambda = MatrixXd::Identity(r, r);
  desc.factor_cov = MatrixXd::Identity(r, r);
  desc.noise.base_sd = sd;
  return desc;
}

ExperimentConfig small_config(double sd, int reps) {
  ExperimentConfig cfg;
  cfg.dgp_grid = {descriptor(40, 50, 1, 0.7, sd)};
  cfg.replications = reps;
  cfg.targets = {TargetSpec{TargetSpec::Kind::kFactor, -1, -1},
                 TargetSpec{TargetSpec::Kind::kLoading, -1, -1},
                 TargetSpec{TargetSpec::Kind::kCommon, -1, -1}};
  cfg.base_seed = 777;
  return cfg;
}

std::string file_bytes(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("zero noise gives exact recovery and full coverage") {
  const ExperimentConfig cfg = small_config(0.0, 1);
  const auto records = run_experiment(cfg, 1);
  REQUIRE(records.size() == 1);
  REQUIRE(records[0].valid);
  for (const auto& target : records[0].targets) {
    CHECK(target.err < 1e-8);
    CHECK(target.hits == target.dim);
  }
  CHECK(records[0].diagnostics.gaps.max_gap() < 1e-8);
}

TEST_CASE("runs are deterministic across repetition and thread count") {
  const ExperimentConfig cfg = small_config(1.0, 6);
  const auto a = run_experiment(cfg, 1);
  const auto b = run_experiment(cfg, 3);
  REQUIRE(a.size() == b.size());
  for (size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].seed == b[k].seed);
    REQUIRE(a[k].targets.size() == b[k].targets.size());
    for (size_t j = 0; j < a[k].targets.size(); ++j) {
      CHECK(a[k].targets[j].err == b[k].targets[j].err);
      CHECK(a[k].targets[j].hits == b[k].targets[j].hits);
      CHECK((a[k].targets[j].studentized - b[k].targets[j].studentized)
                .norm() == 0.0);
    }
  }

  const auto dir = std::filesystem::temp_directory_path() / "wf_mc_test";
  std::filesystem::create_directories(dir);
  write_records_csv(dir / "a.csv", cfg, a);
  write_records_csv(dir / "b.csv", cfg, b);
  CHECK(file_bytes(dir / "a.csv") == file_bytes(dir / "b.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("factor coverage lands in the binomial band") {
  ExperimentConfig cfg;
  cfg.dgp_grid = {descriptor(200, 200, 1, 0.6, 1.0)};
  cfg.replications = 100;
  cfg.targets = {TargetSpec{TargetSpec::Kind::kFactor, -1, -1}};
  cfg.base_seed = 20240229;
  cfg.diagnostics.identities = false;
  const auto records = run_experiment(cfg, 1);
  const CoverageStats stats = coverage_stats(records, 0);
  CHECK(stats.coverage > 0.88);
  CHECK(stats.coverage < 0.995);
  CHECK(stats.n == 100);
}

TEST_CASE("coverage arithmetic") {
  std::vector<ReplicationRecord> records;
  for (int k = 0; k < 100; ++k) {
    ReplicationRecord record;
    record.valid = true;
    TargetResult target;
    target.dim = 1;
    target.hits = k % 2;
    target.studentized = VectorXd::Zero(1);
    record.targets.push_back(target);
    records.push_back(record);
  }
  const CoverageStats stats = coverage_stats(records, 0);
  CHECK(stats.coverage == doctest::Approx(0.5));
  CHECK(stats.se == doctest::Approx(0.05));
  CHECK(stats.n == 100);

  records.resize(10);
  CHECK_THROWS_AS(coverage_stats(records, 0), TooFewRecords);
}

TEST_CASE("rate regression recovers a planted power law") {
  ExperimentConfig cfg;
  cfg.dgp_grid = {descriptor(100, 100, 1, 0.5, 1.0),
                  descriptor(200, 200, 1, 0.5, 1.0),
                  descriptor(400, 400, 1, 0.5, 1.0)};
  cfg.replications = 40;
  cfg.targets = {TargetSpec{TargetSpec::Kind::kFactor, -1, -1}};
  cfg.base_seed = 1;

  std::vector<ReplicationRecord> records;
  for (int g = 0; g < 3; ++g) {
    for (int rep = 0; rep < 40; ++rep) {
      ReplicationRecord record;
      record.grid_id = g;
      record.rep_id = rep;
      record.valid = true;
      TargetResult target;
      target.dim = 1;
      target.err =
          2.5 / std::sqrt(static_cast<double>(cfg.dgp_grid[g].n));
      target.studentized = VectorXd::Zero(1);
      record.targets.push_back(target);
      records.push_back(record);
    }
  }
  const RateResult rate = rate_regression(records, cfg, 0);
  CHECK(rate.fit.slope == doctest::Approx(-0.5).epsilon(1e-12));

  cfg.dgp_grid.resize(2);
  CHECK_THROWS_AS(rate_regression(records, cfg, 0), TooFewGridPoints);
}

TEST_CASE("normality check behaviour") {
  SUBCASE("reference normal draws pass at the 1% level") {
    int passes = 0;
    const int meta = 20, n = 5000;
    for (int m = 0; m < meta; ++m) {
      RngStream rng(4000 + m);
      std::vector<double> draws(n);
      for (auto& d : draws) d = rng.gaussian();
      const NormalityReport report = normality_check(draws);
      passes += report.ks_stat < 1.63 / std::sqrt(n) ? 1 : 0;
      CHECK(std::abs(report.skew) < 0.2);
      CHECK(std::abs(report.excess_kurtosis) < 0.4);
    }
    CHECK(passes >= 18);
  }
  SUBCASE("constant draws are flagged") {
    const std::vector<double> draws(600, 0.0);
    const NormalityReport report = normality_check(draws);
    CHECK(report.ks_stat >= 0.5);
  }
  SUBCASE("too few draws") {
    const std::vector<double> draws(100, 0.0);
    CHECK_THROWS_AS(normality_check(draws), TooFewDraws);
  }
}

TEST_CASE("flagged records are kept, never dropped") {
  // a target period out of range at validation level is ConfigInvalid;
  // trigger a per-replication failure instead through a degenerate
  // variance: sparse loadings leave the default unit with a zero row
  ExperimentConfig cfg;
  DgpDescriptor desc = descriptor(50, 50, 1, 0.3, 1.0);
  desc.loading_scheme.kind = LoadingKind::kSparseStrong;
  cfg.dgp_grid = {desc};
  cfg.replications = 3;
  // ceil(50^0.3) = 4 strong units; unit 25 has a zero loading row
  cfg.targets = {TargetSpec{TargetSpec::Kind::kCommon, 25, 25}};
  cfg.base_seed = 99;
  cfg.diagnostics.identities = false;
  const auto records = run_experiment(cfg, 1);
  REQUIRE(records.size() == 3);
  for (const auto& record : records) {
    CHECK(!record.valid);
    CHECK(record.flag == "DegenerateVariance");
  }
  // flagged rows still serialize
  const auto dir = std::filesystem::temp_directory_path() / "wf_flag_test";
  std::filesystem::create_directories(dir);
  write_records_csv(dir / "records.csv", cfg, records);
  std::ifstream is(dir / "records.csv");
  int lines = 0;
  std::string line;
  while (std::getline(is, line)) ++lines;
  CHECK(lines == 4);  // header + 3 flagged rows
  std::filesystem::remove_all(dir);
}

TEST_CASE("boundary demo produces ordered slopes") {
  const BoundaryDemoResult result =
      boundary_demo({60, 90, 130}, 30, 31415, 1);
  CHECK(std::isfinite(result.flat.slope));
  CHECK(std::isfinite(result.weak.slope));
  CHECK(std::isfinite(result.strong.slope));
  // the strong-factor error decays, the boundary analogue does not
  CHECK(result.strong.slope < result.flat.slope);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg = small_config(1.0, 5);
  CHECK_NOTHROW(cfg.validate());
  cfg.targets[0].period = 200;  // beyond t = 50
  CHECK_THROWS_AS(cfg.validate(), ConfigInvalid);
  cfg = small_config(1.0, 0);
  CHECK_THROWS_AS(cfg.validate(), ConfigInvalid);
  cfg = small_config(1.0, 5);
  cfg.targets.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigInvalid);
}

TEST_CASE("plug-in variances studentize loading errors under AR noise") {
  ExperimentConfig cfg;
  DgpDescriptor desc = descriptor(150, 150, 1, 0.8, 1.0);
  desc.noise.temporal = TemporalKind::kAr;
  desc.noise.coeffs = VectorXd::Constant(1, 0.5);
  desc.noise.innovation_sd = std::sqrt(0.75);
  cfg.dgp_grid = {desc};
  cfg.replications = 300;
  cfg.targets = {TargetSpec{TargetSpec::Kind::kLoading, -1, -1}};
  cfg.base_seed = 606;
  cfg.variance_mode = VarianceMode::kPlugIn;  // bandwidth auto = ceil(T^{1/3})
  cfg.diagnostics.identities = false;
  const auto records = run_experiment(cfg, 1);
  for (const auto& record : records) {
    REQUIRE(record.valid);
    CHECK(record.targets[0].variance_mode_effective == "plugin");
  }
  const auto draws = pooled_studentized(records, 0);
  REQUIRE(draws.size() == 300);
  // KS below the asymptotic 1% critical value
  CHECK(ks_statistic_normal(draws) <
        1.628 / std::sqrt(static_cast<double>(draws.size())));
}

TEST_CASE("neighbor leave-out diagnostic is recorded when enabled") {
  ExperimentConfig cfg = small_config(1.0, 3);
  cfg.diagnostics.leaveout = true;
  cfg.dgp_grid[0].noise.temporal = TemporalKind::kMa;
  cfg.dgp_grid[0].noise.coeffs = VectorXd::Constant(2, 0.4);
  const auto records = run_experiment(cfg, 1);
  for (const auto& record : records) {
    REQUIRE(record.valid);
    CHECK(record.has_neighbor_diag);
    CHECK(record.nbr_period == 25);
    CHECK(record.nbr_delta == 2);  // q for MA(q)
    CHECK(record.nbr_delta1_norm > 0.0);
  }
}

TEST_CASE("disjoint seed blocks give compatible coverage estimates") {
  auto coverage_for_seed = [](std::uint64_t base_seed) {
    ExperimentConfig cfg;
    cfg.dgp_grid = {descriptor(200, 200, 1, 0.6, 1.0)};
    cfg.replications = 100;
    cfg.targets = {TargetSpec{TargetSpec::Kind::kFactor, -1, -1}};
    cfg.base_seed = base_seed;
    cfg.diagnostics.identities = false;
    return coverage_stats(run_experiment(cfg, 1), 0);
  };
  const CoverageStats a = coverage_for_seed(111);
  const CoverageStats b = coverage_for_seed(999);
  const double combined = std::sqrt(a.se * a.se + b.se * b.se);
  CHECK(std::abs(a.coverage - b.coverage) <= 3.0 * combined);
}

TEST_CASE("temporal dependence degrades factor coverage at alpha below 1/3") {
  // directional comparison only: same size, same strength, iid vs AR(1)
  auto coverage_for = [](bool ar) {
    ExperimentConfig cfg;
    DgpDescriptor desc = descriptor(400, 400, 1, 0.25, 1.0);
    if (ar) {
      desc.noise.temporal = TemporalKind::kAr;
      desc.noise.coeffs = VectorXd::Constant(1, 0.5);
      desc.noise.innovation_sd = std::sqrt(0.75);
    }
    cfg.dgp_grid = {desc};
    cfg.replications = 200;
    cfg.targets = {TargetSpec{TargetSpec::Kind::kFactor, -1, -1}};
    cfg.base_seed = 5150;
    cfg.diagnostics.identities = false;
    return coverage_stats(run_experiment(cfg, 1), 0).coverage;
  };
  const double iid = coverage_for(false);
  const double ar = coverage_for(true);
  CHECK(iid >= 0.92);
  CHECK(iid <= 0.985);
  CHECK(ar < iid - 0.02);
}

TEST_CASE("bandwidth and delta defaults") {
  ExperimentConfig cfg = small_config(1.0, 5);
  DgpDescriptor iid = cfg.dgp_grid[0];
  CHECK(cfg.resolve_bandwidth(iid) == 0);
  CHECK(cfg.resolve_delta(iid) == 0);

  DgpDescriptor ar = iid;
  ar.noise.temporal = TemporalKind::kAr;
  ar.noise.coeffs = VectorXd::Constant(1, 0.5);
  CHECK(cfg.resolve_bandwidth(ar) ==
        static_cast<int>(std::ceil(std::cbrt(50.0) - 1e-9)));
  CHECK(cfg.resolve_delta(ar) == static_cast<int>(std::ceil(std::log(40.0))));

  DgpDescriptor ma = iid;
  ma.noise.temporal = TemporalKind::kMa;
  ma.noise.coeffs = VectorXd::Constant(3, 0.4);
  CHECK(cfg.resolve_delta(ma) == 3);

  cfg.bandwidth = 7;
  CHECK(cfg.resolve_bandwidth(ar) == 7);
  cfg.diagnostics.delta = 2;
  CHECK(cfg.resolve_delta(ar) == 2);
}
