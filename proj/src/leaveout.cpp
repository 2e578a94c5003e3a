#include "weakfactor/leaveout.hpp"

#include <algorithm>
#include <cmath>

namespace weakfactor {

namespace {

constexpr double kGramConditionGuard = 1e12;

LeaveOutPanel finish(MatrixXd panel, Exclusion excluded,
                     const FactorStructure& truth, int r,
                     const TruthOracle& oracle) {
  LeaveOutPanel out;
  out.fit = pc_fit(panel, r);
  out.alignment = align(out.fit, truth, oracle);
  out.panel = std::move(panel);
  out.excluded = std::move(excluded);
  return out;
}

/// Z (Z'Z)^{-1} with a condition-number guard on the Gram matrix.
MatrixXd gram_normalized(const MatrixXd& z, const char* label) {
  const MatrixXd gram = z.transpose() * z;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0 || hi / lo > kGramConditionGuard) {
    throw SingularGram(std::string(label) +
                       " Gram matrix condition number exceeds 1e12");
  }
  return z * gram.ldlt().solve(MatrixXd::Identity(z.cols(), z.cols()));
}

}  // namespace

LeaveOutPanel leave_one_out(const MatrixXd& x, const FactorStructure& truth,
                            int i, int r) {
  return leave_one_out(x, truth, i, r, TruthOracle::from(truth));
}

LeaveOutPanel leave_one_out(const MatrixXd& x, const FactorStructure& truth,
                            int i, int r, const TruthOracle& oracle) {
  if (i < 0 || i >= x.rows()) {
    throw IndexOutOfRange("unit index " + std::to_string(i));
  }
  MatrixXd panel = x;
  panel.row(i) = truth.common.row(i);
  Exclusion excluded;
  excluded.kind = ExclusionKind::kUnit;
  excluded.index = i;
  excluded.members = {i};
  return finish(std::move(panel), std::move(excluded), truth, r, oracle);
}

LeaveOutPanel leave_neighbor_out(const MatrixXd& x,
                                 const FactorStructure& truth, int t,
                                 int delta, int r) {
  return leave_neighbor_out(x, truth, t, delta, r, TruthOracle::from(truth));
}

LeaveOutPanel leave_neighbor_out(const MatrixXd& x,
                                 const FactorStructure& truth, int t,
                                 int delta, int r, const TruthOracle& oracle) {
  const int n_periods = static_cast<int>(x.cols());
  if (t < 0 || t >= n_periods) {
    throw IndexOutOfRange("period index " + std::to_string(t));
  }
  if (delta < 0) throw IndexOutOfRange("delta must be nonnegative");
  const int lo = std::max(0, t - delta);
  const int hi = std::min(n_periods - 1, t + delta);
  MatrixXd panel = x;
  Exclusion excluded;
  excluded.kind = ExclusionKind::kPeriodNeighborhood;
  excluded.index = t;
  excluded.delta = delta;
  excluded.clipped = (lo > t - delta) || (hi < t + delta);
  for (int s = lo; s <= hi; ++s) {
    panel.col(s) = truth.common.col(s);
    excluded.members.push_back(s);
  }
  return finish(std::move(panel), std::move(excluded), truth, r, oracle);
}

LeaveOutPanel leave_unit_neighbor_out(const MatrixXd& x,
                                      const FactorStructure& truth, int i,
                                      const std::vector<int>& neighbor_set,
                                      int r) {
  return leave_unit_neighbor_out(x, truth, i, neighbor_set, r,
                                 TruthOracle::from(truth));
}

LeaveOutPanel leave_unit_neighbor_out(const MatrixXd& x,
                                      const FactorStructure& truth, int i,
                                      const std::vector<int>& neighbor_set,
                                      int r, const TruthOracle& oracle) {
  if (std::find(neighbor_set.begin(), neighbor_set.end(), i) ==
      neighbor_set.end()) {
    throw IndexOutOfRange("unit " + std::to_string(i) +
                          " must belong to its neighbor set");
  }
  MatrixXd panel = x;
  Exclusion excluded;
  excluded.kind = ExclusionKind::kUnitNeighborhood;
  excluded.index = i;
  for (int j : neighbor_set) {
    if (j < 0 || j >= x.rows()) {
      throw IndexOutOfRange("neighbor index " + std::to_string(j));
    }
    panel.row(j) = truth.common.row(j);
    excluded.members.push_back(j);
  }
  return finish(std::move(panel), std::move(excluded), truth, r, oracle);
}

DecompositionResiduals decomposition_residuals(const PcFit& fit,
                                               const TruthOracle& oracle,
                                               const Alignment& al,
                                               const MatrixXd& noise) {
  const MatrixXd z_tilde = fit.balanced.z * al.o;
  const MatrixXd z0_norm = gram_normalized(oracle.balanced.z, "Z0");
  const MatrixXd zt_norm = gram_normalized(z_tilde, "Z-tilde");

  DecompositionResiduals out;
  out.first_order = noise * z0_norm;
  out.r1 = noise * (zt_norm - z0_norm);
  out.r2 = oracle.balanced.y *
           (oracle.balanced.z.transpose() * zt_norm -
            MatrixXd::Identity(fit.svd.rank(), fit.svd.rank()));
  const MatrixXd lhs = fit.balanced.y * al.o - oracle.balanced.y;
  out.identity_gap = (lhs - out.first_order - out.r1 - out.r2).norm();
  return out;
}

DeltaMatrices delta_matrices(const PcFit& full_fit, const Alignment& full_al,
                             const LeaveOutPanel& loo,
                             const TruthOracle& oracle) {
  if (loo.excluded.kind != ExclusionKind::kUnit) {
    throw IndexOutOfRange("delta matrices need a Unit(i) exclusion");
  }
  const MatrixXd z_tilde = full_fit.balanced.z * full_al.o;
  const MatrixXd z_tilde_loo = loo.fit.balanced.z * loo.alignment.o;
  const MatrixXd z0_norm = gram_normalized(oracle.balanced.z, "Z0");
  const MatrixXd zt_norm = gram_normalized(z_tilde, "Z-tilde");
  const MatrixXd zt_loo_norm = gram_normalized(z_tilde_loo, "leave-out Z-tilde");

  DeltaMatrices out;
  out.delta1 = zt_loo_norm - z0_norm;
  out.delta2 = zt_norm - zt_loo_norm;
  return out;
}

MatrixXd period_delta1(const LeaveOutPanel& loo, const TruthOracle& oracle) {
  if (loo.excluded.kind != ExclusionKind::kPeriodNeighborhood) {
    throw IndexOutOfRange("period delta needs a PeriodNeighborhood exclusion");
  }
  const MatrixXd y_tilde = loo.fit.balanced.y * loo.alignment.o;
  const MatrixXd y0_norm = gram_normalized(oracle.balanced.y, "Y0");
  const MatrixXd yt_norm = gram_normalized(y_tilde, "leave-out Y-tilde");
  return yt_norm - y0_norm;
}

double claim_symmetric_gap(const PcFit& fit, const TruthOracle& oracle,
                           const Alignment& al) {
  const MatrixXd dy = fit.balanced.y * al.o - oracle.balanced.y;
  const MatrixXd dz = fit.balanced.z * al.o - oracle.balanced.z;
  const MatrixXd lhs = dz.transpose() * oracle.balanced.z -
                       oracle.balanced.y.transpose() * dy;
  const MatrixXd rhs =
      0.5 * (dy.transpose() * dy - dz.transpose() * dz);
  return (lhs - rhs).norm();
}

}  // namespace weakfactor
