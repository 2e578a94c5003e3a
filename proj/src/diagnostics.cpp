#include "weakfactor/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace weakfactor {

double IdentityGaps::max_gap() const {
  return std::max({rotation_loading, rotation_factor, matching_loading,
                   matching_factor, claim_symmetric, balanced_truth,
                   balanced_fit, ydecomposition, decomp_r1, hbn});
}

InstanceDiagnostics run_identity_suite(const PanelInstance& instance, int r,
                                       int leave_out_unit) {
  const PcFit fit = pc_fit(instance.panel.values, r);
  const TruthOracle oracle = TruthOracle::from(instance.truth);
  const Alignment al = align(fit, instance.truth, oracle);
  return run_identity_suite(instance, fit, oracle, al, leave_out_unit);
}

InstanceDiagnostics run_identity_suite(const PanelInstance& instance,
                                       const PcFit& fit,
                                       const TruthOracle& oracle,
                                       const Alignment& al,
                                       int leave_out_unit) {
  const MatrixXd& x = instance.panel.values;
  const FactorStructure& truth = instance.truth;
  const Index n = x.rows();
  const Index t = x.cols();
  const int r = truth.rank;
  const double sqrt_t = std::sqrt(static_cast<double>(t));
  if (leave_out_unit < 0) leave_out_unit = static_cast<int>(n / 2);

  const MatrixXd noise = x - truth.common;

  InstanceDiagnostics diag;
  IdentityGaps& gaps = diag.gaps;

  // Lemma `rotation`: the truth factors through (Y0, Z0, h0) exactly.
  gaps.rotation_loading =
      (truth.loadings -
       oracle.balanced.y * al.h0.partialPivLu().inverse().transpose() / sqrt_t)
          .norm();
  gaps.rotation_factor =
      (truth.factors - sqrt_t * oracle.balanced.z * al.h0).norm();

  // The two displays translating estimation error to the balanced scale.
  const VectorXd sqrt_d = fit.svd.singular.cwiseSqrt();
  const MatrixXd dy = fit.balanced.y * al.o - oracle.balanced.y;
  const MatrixXd dz = fit.balanced.z * al.o - oracle.balanced.z;
  gaps.matching_loading =
      ((fit.loadings_hat - truth.loadings * al.h_inv.transpose()) -
       dy * al.o.transpose() * sqrt_d.asDiagonal() / sqrt_t)
          .norm();
  gaps.matching_factor =
      ((fit.factors_hat - truth.factors * al.h) -
       sqrt_t * dz * al.o.transpose() * sqrt_d.cwiseInverse().asDiagonal())
          .norm();

  gaps.claim_symmetric = claim_symmetric_gap(fit, oracle, al);
  gaps.balanced_truth = (oracle.balanced.y.transpose() * oracle.balanced.y -
                         oracle.balanced.z.transpose() * oracle.balanced.z)
                            .norm();
  gaps.balanced_fit = (fit.balanced.y.transpose() * fit.balanced.y -
                       fit.balanced.z.transpose() * fit.balanced.z)
                          .norm();

  const DecompositionResiduals resid =
      decomposition_residuals(fit, oracle, al, noise);
  gaps.ydecomposition = resid.identity_gap;
  diag.first_order_norm = resid.first_order.norm();
  diag.r1_norm = resid.r1.norm();
  diag.r2_norm = resid.r2.norm();

  // Leave-one-out reconstruction of row i of r1.
  const LeaveOutPanel loo = leave_one_out(x, truth, leave_out_unit, r, oracle);
  const DeltaMatrices deltas = delta_matrices(fit, al, loo, oracle);
  const VectorXd eps_i = noise.row(leave_out_unit).transpose();
  const VectorXd reconstructed =
      (deltas.delta1 + deltas.delta2).transpose() * eps_i;
  gaps.decomp_r1 =
      (resid.r1.row(leave_out_unit).transpose() - reconstructed).norm();
  diag.delta1_norm = deltas.delta1.norm();
  diag.delta2_norm = deltas.delta2.norm();

  // Bai-Ng style decomposition of the loading error.
  const MatrixXd lhs = fit.loadings_hat - truth.loadings * al.h_bn1_inv;
  const MatrixXd rhs =
      noise * truth.factors * al.h_bn0 / static_cast<double>(t) +
      noise * (fit.factors_hat - truth.factors * al.h_bn0) /
          static_cast<double>(t);
  gaps.hbn = (lhs - rhs).norm();

  return diag;
}

std::vector<DgpDescriptor> identity_suite_grid(std::uint64_t seed) {
  std::vector<DgpDescriptor> grid;
  for (int k = 0; k < 20; ++k) {
    DgpDescriptor desc;
    desc.n = 60;
    desc.t = 80;
    desc.r = 2;
    desc.seed = RngStream::derive_seed(seed, 97, static_cast<std::uint64_t>(k));
    desc.loading_scheme.kind = LoadingKind::kHomogeneous;
    desc.loading_scheme.alpha = 0.4 + 0.03 * k;
    MatrixXd sigma_l(2, 2);
    sigma_l << 2.0, 0.3, 0.3, 1.0;
    desc.loading_scheme.sigma_lambda = sigma_l;
    MatrixXd sigma_f(2, 2);
    sigma_f << 1.5, -0.2, -0.2, 1.0;
    desc.factor_cov = sigma_f;
    desc.noise.base_sd = 0.8;
    switch (k % 4) {
      case 0:
        break;  // independent x independent
      case 1:
        desc.noise.temporal = TemporalKind::kAr;
        desc.noise.coeffs = VectorXd::Constant(1, 0.5);
        desc.noise.innovation_sd = std::sqrt(1.0 - 0.25);
        break;
      case 2:
        desc.noise.cross = CrossKind::kBlockNeighbors;
        desc.noise.block_size = 5;
        desc.noise.rho = 0.4;
        break;
      case 3:
        desc.noise.cross = CrossKind::kBlockNeighbors;
        desc.noise.block_size = 4;
        desc.noise.rho = 0.3;
        desc.noise.temporal = TemporalKind::kMa;
        desc.noise.coeffs = VectorXd::Constant(2, 0.4);
        break;
    }
    grid.push_back(std::move(desc));
  }
  return grid;
}

}  // namespace weakfactor
