#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "weakfactor/dgp.hpp"
#include "weakfactor/stats.hpp"

using namespace weakfactor;

namespace {

LoadingScheme homogeneous(double alpha, int r) {
  LoadingScheme scheme;
  scheme.kind = LoadingKind::kHomogeneous;
  scheme.alpha = alpha;
  scheme.sigma_lambda = MatrixXd::Identity(r, r);
  return scheme;
}

DgpDescriptor basic_descriptor(int n, int t, int r, double alpha,
                               std::uint64_t seed) {
  DgpDescriptor desc;
  desc.n = n;
  desc.t = t;
  desc.r = r;
  desc.seed = seed;
  desc.loading_scheme = homogeneous(alpha, r);
  desc.factor_cov = MatrixXd::Identity(r, r);
  return desc;
}

}  // namespace

TEST_CASE("homogeneous loadings satisfy the strong-factor LLN") {
  RngStream rng(1);
  auto [loadings, alpha_units] = gen_loadings(homogeneous(1.0, 1), 10000, 1, rng);
  const double mean_sq = loadings.squaredNorm() / 10000.0;
  CHECK(mean_sq > 0.95);
  CHECK(mean_sq < 1.05);
  CHECK(alpha_units.minCoeff() == 1.0);
  CHECK(alpha_units.maxCoeff() == 1.0);
}

TEST_CASE("sparse strong scheme populates exactly ceil(N^alpha) rows") {
  LoadingScheme scheme = homogeneous(0.5, 1);
  scheme.kind = LoadingKind::kSparseStrong;
  RngStream rng(2);
  auto [loadings, alpha_units] = gen_loadings(scheme, 100, 1, rng);
  int nonzero = 0;
  for (int i = 0; i < 100; ++i) nonzero += loadings.row(i).norm() > 0 ? 1 : 0;
  CHECK(nonzero == 10);
  CHECK(alpha_units(0) == 1.0);
  CHECK(alpha_units(99) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("loading norms scale like N^((alpha-1)/2)") {
  auto median_norm = [](int n) {
    RngStream rng(3);
    auto [loadings, ignored] = gen_loadings(homogeneous(0.5, 1), n, 1, rng);
    std::vector<double> norms;
    for (int i = 0; i < n; ++i) norms.push_back(loadings.row(i).norm());
    return median(std::move(norms));
  };
  const double ratio = median_norm(400) / median_norm(100);
  CHECK(ratio == doctest::Approx(std::pow(4.0, -0.25)).epsilon(0.10));
}

TEST_CASE("homogeneous gram converges to sigma_lambda") {
  // seed-averaged Frobenius distance at N = 1e4, r = 2
  MatrixXd sigma(2, 2);
  sigma << 1.0, 0.4, 0.4, 2.0;
  LoadingScheme scheme;
  scheme.kind = LoadingKind::kHomogeneous;
  scheme.alpha = 0.6;
  scheme.sigma_lambda = sigma;
  double acc = 0.0;
  const int n_seeds = 20;
  for (int s = 0; s < n_seeds; ++s) {
    RngStream rng(100 + s);
    auto [loadings, ignored] = gen_loadings(scheme, 10000, 2, rng);
    const double n_alpha = std::pow(10000.0, 0.6);
    acc += (loadings.transpose() * loadings / n_alpha - sigma).norm();
  }
  CHECK(acc / n_seeds < 0.1);
}

TEST_CASE("heterogeneous exponents keep the trace calibrated") {
  LoadingScheme scheme;
  scheme.kind = LoadingKind::kHeterogeneousExponents;
  scheme.alpha = 0.6;
  scheme.exponent_spread = 0.2;
  scheme.sigma_lambda = MatrixXd::Identity(2, 2);
  double acc = 0.0;
  const int n_seeds = 40;
  const int n = 4000;
  for (int s = 0; s < n_seeds; ++s) {
    RngStream rng(500 + s);
    auto [loadings, alpha_units] = gen_loadings(scheme, n, 2, rng);
    acc += (loadings.transpose() * loadings).trace() / std::pow(n, 0.6);
    CHECK(alpha_units.maxCoeff() <= 1.0);
  }
  // target trace(Sigma_Lambda) = 2
  CHECK(acc / n_seeds == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("invalid schemes are rejected") {
  LoadingScheme scheme = homogeneous(1.5, 1);
  RngStream rng(4);
  CHECK_THROWS_AS(gen_loadings(scheme, 10, 1, rng), InvalidScheme);
  scheme = homogeneous(0.5, 1);
  scheme.sigma_lambda = MatrixXd::Constant(1, 1, -1.0);
  CHECK_THROWS_AS(gen_loadings(scheme, 10, 1, rng), NotSpd);
  scheme = homogeneous(0.0, 1);
  CHECK_THROWS_AS(gen_loadings(scheme, 10, 1, rng), InvalidScheme);
}

TEST_CASE("factor draws satisfy the LLN shape") {
  RngStream rng(5);
  const MatrixXd factors = gen_factors(10000, 2, MatrixXd::Identity(2, 2), rng);
  const MatrixXd gram = factors.transpose() * factors / 10000.0;
  CHECK(std::abs(gram(0, 1)) < 0.05);
  CHECK(gram(0, 0) == doctest::Approx(1.0).epsilon(0.05));

  MatrixXd sigma = MatrixXd::Zero(2, 2);
  sigma(0, 0) = 2.0;
  sigma(1, 1) = 1.0;
  RngStream rng2(6);
  const MatrixXd f2 = gen_factors(10000, 2, sigma, rng2);
  const MatrixXd gram2 = f2.transpose() * f2 / 10000.0;
  CHECK(gram2(0, 0) > 1.9);
  CHECK(gram2(0, 0) < 2.1);
  CHECK(gram2(1, 1) > 0.95);
  CHECK(gram2(1, 1) < 1.05);

  RngStream rng3(7);
  const MatrixXd tiny = gen_factors(2, 2, MatrixXd::Identity(2, 2), rng3);
  CHECK(tiny.rows() == 2);
  CHECK(tiny.allFinite());

  RngStream rng4(8);
  CHECK_THROWS_AS(
      gen_factors(10, 2, MatrixXd::Constant(2, 2, 1.0), rng4), NotSpd);
}

TEST_CASE("iid noise variance") {
  NoiseSpec spec;
  RngStream rng(9);
  const MatrixXd eps = gen_noise(spec, 200, 200, rng);
  const double var = eps.squaredNorm() / (200.0 * 200.0);
  CHECK(var > 0.93);
  CHECK(var < 1.07);
}

TEST_CASE("AR(1) rows show the right lag-one autocorrelation") {
  NoiseSpec spec;
  spec.temporal = TemporalKind::kAr;
  spec.coeffs = VectorXd::Constant(1, 0.5);
  spec.innovation_sd = std::sqrt(0.75);  // unit marginal variance
  RngStream rng(10);
  const int n = 60, t = 400;
  const MatrixXd eps = gen_noise(spec, n, t, rng);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s + 1 < t; ++s) {
      num += eps(i, s) * eps(i, s + 1);
      den += eps(i, s) * eps(i, s);
    }
  }
  const double rho1 = num / den;
  CHECK(rho1 > 0.45);
  CHECK(rho1 < 0.55);
  // marginal variance calibrated to one
  CHECK(spec.marginal_variance() == doctest::Approx(1.0));
  CHECK(eps.squaredNorm() / (n * t) == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("MA(0) equals temporal independence in distribution") {
  NoiseSpec iid;
  NoiseSpec ma0;
  ma0.temporal = TemporalKind::kMa;
  ma0.coeffs = VectorXd(0);
  ma0.innovation_sd = 1.0;
  RngStream rng_a(11), rng_b(11);
  const MatrixXd a = gen_noise(iid, 200, 200, rng_a);
  const MatrixXd b = gen_noise(ma0, 200, 200, rng_b);
  // same stream, same structure: the draws agree exactly
  CHECK((a - b).norm() == 0.0);
  // and the two-sample KS statistic over pooled draws from different
  // streams stays small
  RngStream rng_c(12);
  const MatrixXd c = gen_noise(ma0, 200, 200, rng_c);
  std::vector<double> xs(a.data(), a.data() + a.size());
  std::vector<double> ys(c.data(), c.data() + c.size());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double d = 0.0;
  size_t j = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    while (j < ys.size() && ys[j] <= xs[i]) ++j;
    d = std::max(d, std::abs(static_cast<double>(i + 1) / xs.size() -
                             static_cast<double>(j) / ys.size()));
  }
  CHECK(d < 0.02);
}

TEST_CASE("MA(q) noise decorrelates beyond lag q") {
  NoiseSpec spec;
  spec.temporal = TemporalKind::kMa;
  spec.coeffs = VectorXd::Constant(2, 0.6);
  RngStream rng(13);
  const int n = 50, t = 500;
  const MatrixXd eps = gen_noise(spec, n, t, rng);
  const int lag = 3;  // beyond q = 2
  double num = 0.0, den = 0.0;
  int count = 0;
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s + lag < t; ++s) {
      num += eps(i, s) * eps(i, s + lag);
      den += eps(i, s) * eps(i, s);
      ++count;
    }
  }
  CHECK(std::abs(num / den) < 3.0 / std::sqrt(static_cast<double>(count)));
  // autocovariance helper agrees
  const VectorXd gamma = spec.autocovariances(4);
  CHECK(gamma(3) == 0.0);
  CHECK(gamma(0) == doctest::Approx(1.0 + 0.36 + 0.36));
  CHECK(gamma(1) == doctest::Approx(0.6 + 0.36));
}

TEST_CASE("temporal dependence satisfies the absolute-covariance bound") {
  // pooled empirical sum_{|s-t|<=50} |Cov| stays below twice the
  // theoretical sum at T = 2000
  NoiseSpec spec;
  spec.temporal = TemporalKind::kAr;
  spec.coeffs = VectorXd::Constant(1, 0.6);
  spec.innovation_sd = 1.0;
  RngStream rng(14);
  const int n = 40, t = 2000;
  const MatrixXd eps = gen_noise(spec, n, t, rng);
  const VectorXd gamma = spec.autocovariances(50);
  double theoretical = gamma(0);
  for (int h = 1; h <= 50; ++h) theoretical += 2.0 * std::abs(gamma(h));
  double empirical = 0.0;
  for (int h = 0; h <= 50; ++h) {
    double acc = 0.0;
    int count = 0;
    for (int i = 0; i < n; ++i) {
      for (int s = 0; s + h < t; ++s) {
        acc += eps(i, s) * eps(i, s + h);
        ++count;
      }
    }
    empirical += (h == 0 ? 1.0 : 2.0) * std::abs(acc / count);
  }
  CHECK(empirical < 2.0 * theoretical);
}

TEST_CASE("block noise is equicorrelated within blocks only") {
  NoiseSpec spec;
  spec.cross = CrossKind::kBlockNeighbors;
  spec.block_size = 4;
  spec.rho = 0.5;
  RngStream rng(15);
  const int n = 40, t = 4000;
  const MatrixXd eps = gen_noise(spec, n, t, rng);
  auto corr = [&](int i, int j) {
    double num = 0.0, di = 0.0, dj = 0.0;
    for (int s = 0; s < t; ++s) {
      num += eps(i, s) * eps(j, s);
      di += eps(i, s) * eps(i, s);
      dj += eps(j, s) * eps(j, s);
    }
    return num / std::sqrt(di * dj);
  };
  CHECK(corr(0, 1) == doctest::Approx(0.5).epsilon(0.12));
  CHECK(corr(4, 6) == doctest::Approx(0.5).epsilon(0.12));
  CHECK(std::abs(corr(0, 4)) < 0.06);
  CHECK(spec.same_block_covariance() == doctest::Approx(0.5));
  CHECK(spec.neighbor_set(5, n) == std::vector<int>({4, 5, 6, 7}));
  NoiseSpec iid;
  CHECK(iid.neighbor_set(5, n) == std::vector<int>({5}));
}

TEST_CASE("noise guards") {
  NoiseSpec spec;
  spec.temporal = TemporalKind::kAr;
  spec.coeffs = VectorXd::Constant(1, 1.2);
  RngStream rng(16);
  CHECK_THROWS_AS(gen_noise(spec, 10, 10, rng), NonStationary);
  NoiseSpec block;
  block.cross = CrossKind::kBlockNeighbors;
  block.block_size = 20;
  CHECK_THROWS_AS(gen_noise(block, 10, 10, rng), InvalidBlock);
  block.block_size = 5;
  block.rho = -0.5;  // infeasible equicorrelation at block size 5
  CHECK_THROWS_AS(gen_noise(block, 10, 10, rng), NotSpd);
}

TEST_CASE("loading rows respect the recorded bound") {
  for (auto kind : {LoadingKind::kHomogeneous, LoadingKind::kSparseStrong,
                    LoadingKind::kHeterogeneousExponents}) {
    DgpDescriptor desc = basic_descriptor(200, 50, 2, 0.6, 77);
    desc.loading_scheme.kind = kind;
    if (kind == LoadingKind::kHeterogeneousExponents) {
      desc.loading_scheme.exponent_spread = 0.2;
    }
    const PanelInstance inst = assemble_panel(desc);
    for (int i = 0; i < 200; ++i) {
      const double alpha_i = inst.truth.alpha_units(i);
      if (std::isinf(alpha_i)) {
        CHECK(inst.truth.loadings.row(i).norm() == 0.0);
        continue;
      }
      const double cap = inst.truth.loading_bound *
                         std::pow(200.0, (alpha_i - 1.0) / 2.0);
      CHECK(inst.truth.loadings.row(i).norm() <= cap + 1e-12);
    }
  }
}

TEST_CASE("assembled panels are deterministic and exact") {
  DgpDescriptor desc = basic_descriptor(40, 30, 2, 0.7, 99);
  SUBCASE("zero noise gives the common component exactly") {
    desc.noise.base_sd = 0.0;
    const PanelInstance inst = assemble_panel(desc);
    CHECK((inst.panel.values - inst.truth.common).norm() == 0.0);
    CHECK(inst.noise.norm() == 0.0);
  }
  SUBCASE("same seed, bit-identical output") {
    const PanelInstance a = assemble_panel(desc);
    const PanelInstance b = assemble_panel(desc);
    CHECK((a.panel.values - b.panel.values).norm() == 0.0);
    CHECK((a.truth.loadings - b.truth.loadings).norm() == 0.0);
    CHECK((a.noise - b.noise).norm() == 0.0);
  }
  SUBCASE("different seeds differ") {
    const PanelInstance a = assemble_panel(desc);
    desc.seed = 100;
    const PanelInstance b = assemble_panel(desc);
    CHECK((a.panel.values - b.panel.values).norm() > 0.0);
  }
}

TEST_CASE("top singular value matches the spectral limit") {
  // r = 1, alpha = 1: sigma_1(X) / sqrt(NT) converges to
  // sqrt(Sigma_Lambda Sigma_F)
  const DgpDescriptor desc = basic_descriptor(300, 300, 1, 1.0, 4242);
  const PanelInstance inst = assemble_panel(desc);
  Eigen::BDCSVD<MatrixXd> svd(inst.panel.values);
  const double scaled = svd.singularValues()(0) / 300.0;  // sqrt(300*300)
  CHECK(scaled > 0.9);
  CHECK(scaled < 1.1);
}

TEST_CASE("AR(1) conditional mean closed form") {
  CHECK(ar1_conditional_mean(0.0, 3, 1.7, -2.5) == 0.0);
  CHECK(ar1_conditional_mean(0.5, 1, 1.0, 1.0) ==
        doctest::Approx(0.25 / 1.0625 * 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(ar1_conditional_mean(1.0, 1, 0.0, 0.0), NonStationary);

  // geometric decay of the coefficient
  const double c40 = ar1_conditional_mean(0.9, 40, 1.0, 0.0);
  const double c41 = ar1_conditional_mean(0.9, 41, 1.0, 0.0);
  CHECK(c40 < 0.1);
  CHECK(c40 < std::pow(0.9, 40));
  CHECK(c41 / c40 == doctest::Approx(0.9).epsilon(1e-3));
}

TEST_CASE("gaussian conditional oracle basics") {
  CHECK(gaussian_conditional_oracle(MatrixXd::Identity(3, 3), {0, 2},
                                    VectorXd::Constant(2, 5.0), 1) == 0.0);
  MatrixXd cov(2, 2);
  cov << 1.0, 0.3, 0.3, 1.0;
  CHECK(gaussian_conditional_oracle(cov, {1}, VectorXd::Constant(1, 2.0), 0) ==
        doctest::Approx(0.6).epsilon(1e-12));
  CHECK_THROWS_AS(gaussian_conditional_oracle(MatrixXd::Constant(2, 2, 1.0),
                                              {1}, VectorXd::Constant(1, 1.0),
                                              0),
                  NotSpd);
  CHECK_THROWS_AS(gaussian_conditional_oracle(cov, {0}, VectorXd::Zero(1), 0),
                  IndexOutOfRange);
}

TEST_CASE("AR(1) closed form agrees with the Gaussian oracle") {
  // the two implementations are mutual oracles at 1e-12
  for (double phi : {-0.9, -0.5, -0.2, 0.2, 0.5, 0.9}) {
    for (int delta : {1, 3, 10}) {
      const int dim = 2 * delta + 3;
      MatrixXd cov(dim, dim);
      const double gamma0 = 1.0 / (1.0 - phi * phi);
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b)
          cov(a, b) = gamma0 * std::pow(phi, std::abs(a - b));
      const int target = delta + 1;
      const std::vector<int> observed = {0, 2 * delta + 2};
      VectorXd vals(2);
      vals << 0.7, -1.3;
      const double direct =
          ar1_conditional_mean(phi, delta, vals(0), vals(1));
      const double oracle =
          gaussian_conditional_oracle(cov, observed, vals, target);
      CHECK(std::abs(direct - oracle) < 1e-12);
    }
  }
}

TEST_CASE("descriptor validation catches bad grids") {
  DgpDescriptor desc = basic_descriptor(4, 4, 5, 0.5, 1);
  CHECK_THROWS_AS(desc.validate(), RankTooLarge);
  desc = basic_descriptor(10, 10, 2, 0.5, 1);
  desc.factor_cov = MatrixXd::Constant(2, 2, 1.0);
  CHECK_THROWS_AS(desc.validate(), NotSpd);
}
