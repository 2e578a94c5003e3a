#include "weakfactor/estimator.hpp"

#include <cmath>

#include "weakfactor/core.hpp"

namespace weakfactor {

namespace {

constexpr double kRankGuard = 1e-8;
constexpr double kThetaGapGuard = 1e-8;
constexpr double kCrossProductGuard = 1e-12;

MatrixXd symmetric_sqrt(const MatrixXd& spd) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(spd);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
    throw NotSpd("symmetric square root needs a positive definite input");
  }
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

PcFit pc_fit(const MatrixXd& x, int r) {
  PcFit fit;
  fit.svd = truncated_svd(x, r);
  const double sqrt_t = std::sqrt(static_cast<double>(x.cols()));
  fit.loadings_hat = fit.svd.left * fit.svd.singular.asDiagonal() / sqrt_t;
  fit.factors_hat = sqrt_t * fit.svd.right;
  fit.balanced = balanced_vectors(fit.svd);
  return fit;
}

std::pair<TruncatedSvd, BalancedFactors> oracle_svd_of_truth(
    const FactorStructure& truth) {
  const int r = truth.rank;
  // M0 = Q_L R_L R_F' Q_F'; the SVD of the r x r middle factor lifts to the
  // reduced SVD of M0.
  Eigen::HouseholderQR<MatrixXd> qr_l(truth.loadings);
  Eigen::HouseholderQR<MatrixXd> qr_f(truth.factors);
  const MatrixXd q_l =
      qr_l.householderQ() * MatrixXd::Identity(truth.loadings.rows(), r);
  const MatrixXd q_f =
      qr_f.householderQ() * MatrixXd::Identity(truth.factors.rows(), r);
  const MatrixXd r_l =
      qr_l.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  const MatrixXd r_f =
      qr_f.matrixQR().topRows(r).triangularView<Eigen::Upper>();

  Eigen::JacobiSVD<MatrixXd> mid(r_l * r_f.transpose(),
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd& sigma = mid.singularValues();
  if (sigma(0) <= 0.0 || sigma(r - 1) / sigma(0) <= kRankGuard) {
    throw RankDeficientTruth("common component is (numerically) rank deficient:"
                             " sigma_r / sigma_1 = " +
                             std::to_string(sigma(r - 1) / sigma(0)));
  }

  TruncatedSvd svd;
  svd.left = q_l * mid.matrixU();
  svd.singular = sigma;
  svd.right = q_f * mid.matrixV();
  apply_sign_convention(svd.left, svd.right);
  return {svd, balanced_vectors(svd)};
}

MatrixXd oracle_rotation_h0(const FactorStructure& truth,
                            const TruncatedSvd& truth_svd) {
  const int r = truth.rank;
  const double t = static_cast<double>(truth.n_periods());
  const MatrixXd gram_l = truth.loadings.transpose() * truth.loadings;
  const MatrixXd gram_f = truth.factors.transpose() * truth.factors / t;
  const MatrixXd sqrt_gram_l = symmetric_sqrt(gram_l);

  // Theta without the N^alpha normalization: eigenvectors are invariant to
  // a positive rescaling, so the estimator never needs alpha.
  const MatrixXd theta = sqrt_gram_l * gram_f * sqrt_gram_l;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(theta);
  if (es.info() != Eigen::Success) {
    throw DegenerateTheta("eigendecomposition of Theta failed");
  }
  // descending order
  MatrixXd g(r, r);
  VectorXd evals(r);
  for (int k = 0; k < r; ++k) {
    g.col(k) = es.eigenvectors().col(r - 1 - k);
    evals(k) = es.eigenvalues()(r - 1 - k);
  }
  for (int k = 0; k + 1 < r; ++k) {
    if ((evals(k) - evals(k + 1)) / evals(0) < kThetaGapGuard) {
      throw DegenerateTheta("Theta eigenvalues nearly tied at position " +
                            std::to_string(k));
    }
  }

  // Fix G's column signs through the executable identity: the candidate
  // left singular vectors Lambda0 (Lambda0'Lambda0)^{-1/2} G must match the
  // sign-fixed U0.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es_gram(gram_l);
  if (es_gram.info() != Eigen::Success ||
      es_gram.eigenvalues().minCoeff() <= 0.0) {
    throw RankDeficientTruth("Lambda0'Lambda0 is not positive definite");
  }
  const MatrixXd inv_sqrt_gram_l =
      es_gram.eigenvectors() *
      es_gram.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
      es_gram.eigenvectors().transpose();
  const MatrixXd u_candidate = truth.loadings * inv_sqrt_gram_l * g;
  for (int k = 0; k < r; ++k) {
    if (u_candidate.col(k).dot(truth_svd.left.col(k)) < 0.0) g.col(k) = -g.col(k);
  }

  // h0 = T^{-1/2} ((Lambda0'Lambda0)^{1/2} G (D0)^{-1/2})^{-1}
  //    = T^{-1/2} (D0)^{1/2} G' (Lambda0'Lambda0)^{-1/2}
  return truth_svd.singular.cwiseSqrt().asDiagonal() * g.transpose() *
         inv_sqrt_gram_l / std::sqrt(t);
}

MatrixXd oracle_rotation_h0(const FactorStructure& truth) {
  return oracle_rotation_h0(truth, oracle_svd_of_truth(truth).first);
}

TruthOracle TruthOracle::from(const FactorStructure& truth) {
  TruthOracle oracle;
  auto [svd, balanced] = oracle_svd_of_truth(truth);
  oracle.h0 = oracle_rotation_h0(truth, svd);
  oracle.svd = std::move(svd);
  oracle.balanced = std::move(balanced);
  oracle.psi_max = oracle.svd.singular(0);
  oracle.psi_min = oracle.svd.singular(truth.rank - 1);
  oracle.kappa = oracle.psi_max / oracle.psi_min;
  return oracle;
}

MatrixXd procrustes(const MatrixXd& a, const MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch("procrustes inputs must have equal shape");
  }
  const MatrixXd cross = a.transpose() * b;
  Eigen::JacobiSVD<MatrixXd> svd(cross,
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd& sigma = svd.singularValues();
  if (sigma(0) <= 0.0 ||
      sigma(sigma.size() - 1) < kCrossProductGuard * sigma(0)) {
    throw DegenerateCrossProduct("a'b is numerically singular");
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

Alignment align(const PcFit& fit, const FactorStructure& truth) {
  return align(fit, truth, TruthOracle::from(truth));
}

Alignment align(const PcFit& fit, const FactorStructure& truth,
                const TruthOracle& oracle) {
  const int r = fit.svd.rank();
  if (truth.rank != r || truth.n_units() != fit.svd.left.rows() ||
      truth.n_periods() != fit.svd.right.rows()) {
    throw ShapeMismatch("fit and truth dimensions disagree");
  }
  const Index n = fit.svd.left.rows();
  const Index t = fit.svd.right.rows();

  MatrixXd stacked_fit(n + t, r);
  stacked_fit << fit.balanced.y, fit.balanced.z;
  MatrixXd stacked_truth(n + t, r);
  stacked_truth << oracle.balanced.y, oracle.balanced.z;

  Alignment al;
  al.o = procrustes(stacked_fit, stacked_truth);
  al.h0 = oracle.h0;
  al.h_inv = fit.svd.singular.cwiseSqrt().asDiagonal() * al.o * al.h0;
  al.h = al.h_inv.partialPivLu().inverse();
  const MatrixXd f0t_fhat = truth.factors.transpose() * fit.factors_hat;
  al.h_bn0 = truth.loadings.transpose() * truth.loadings * f0t_fhat *
             fit.svd.singular.array().square().inverse().matrix().asDiagonal();
  al.h_bn1_inv = f0t_fhat / static_cast<double>(t);
  al.h_bn1 = al.h_bn1_inv.partialPivLu().inverse();
  VectorXd signs(r);
  for (int k = 0; k < r; ++k) signs(k) = al.o(k, k) < 0.0 ? -1.0 : 1.0;
  al.sign_estimate = signs.asDiagonal();
  return al;
}

ErrorReport rotated_errors(const PcFit& fit, const FactorStructure& truth,
                           const Alignment& al) {
  ErrorReport report;
  const MatrixXd loading_err =
      fit.loadings_hat - truth.loadings * al.h_inv.transpose();
  report.per_unit_loading = loading_err.rowwise().norm();
  const MatrixXd factor_err = fit.factors_hat - truth.factors * al.h;
  report.per_period_factor = factor_err.rowwise().norm();
  report.common_abs =
      (fit.loadings_hat * fit.factors_hat.transpose() - truth.common)
          .cwiseAbs();
  const MatrixXd bn_err =
      fit.loadings_hat - truth.loadings * al.h_bn1_inv;
  report.bn_loading = bn_err.rowwise().norm();
  return report;
}

}  // namespace weakfactor
