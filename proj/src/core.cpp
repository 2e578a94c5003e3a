#include "weakfactor/core.hpp"

#include <cmath>

namespace weakfactor {

namespace {
constexpr double kSpectrumGapTol = 1e-10;
}

void apply_sign_convention(MatrixXd& left, MatrixXd& right) {
  for (Index k = 0; k < left.cols(); ++k) {
    Index row = 0;
    left.col(k).cwiseAbs().maxCoeff(&row);
    if (left(row, k) < 0.0) {
      left.col(k) = -left.col(k);
      right.col(k) = -right.col(k);
    }
  }
}

TruncatedSvd truncated_svd(const MatrixXd& x, int r) {
  if (r < 1) throw RankTooLarge("rank must be positive, got " + std::to_string(r));
  const Index min_dim = std::min(x.rows(), x.cols());
  if (r > min_dim) {
    throw RankTooLarge("rank " + std::to_string(r) + " exceeds min(N,T) = " +
                       std::to_string(min_dim));
  }
  if (!x.allFinite()) throw ShapeMismatch("panel contains non-finite entries");

  Eigen::BDCSVD<MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sigma = svd.singularValues();

  const double top = sigma(0);
  const double boundary = (r < min_dim) ? sigma(r) : 0.0;
  if (top <= 0.0 || (sigma(r - 1) - boundary) / top < kSpectrumGapTol) {
    throw DegenerateSpectrum(
        "near-repeated boundary singular value: relative gap at r = " +
        std::to_string(r) + " is below 1e-10");
  }

  TruncatedSvd out;
  out.left = svd.matrixU().leftCols(r);
  out.singular = sigma.head(r);
  out.right = svd.matrixV().leftCols(r);
  apply_sign_convention(out.left, out.right);
  return out;
}

BalancedFactors balanced_vectors(const TruncatedSvd& svd) {
  const VectorXd scale = svd.singular.cwiseSqrt();
  return BalancedFactors{svd.left * scale.asDiagonal(),
                         svd.right * scale.asDiagonal()};
}

MatrixXd reconstruct_common(const MatrixXd& loadings_hat,
                            const MatrixXd& factors_hat) {
  if (loadings_hat.cols() != factors_hat.cols()) {
    throw ShapeMismatch("loadings and factors disagree on rank: " +
                        std::to_string(loadings_hat.cols()) + " vs " +
                        std::to_string(factors_hat.cols()));
  }
  return loadings_hat * factors_hat.transpose();
}

PanelMatrix::PanelMatrix(MatrixXd v) : values(std::move(v)) {
  if (values.rows() < 2 || values.cols() < 2) {
    throw ShapeMismatch("panel must be at least 2 x 2, got " +
                        std::to_string(values.rows()) + " x " +
                        std::to_string(values.cols()));
  }
  if (!values.allFinite()) {
    throw ShapeMismatch("panel contains non-finite entries");
  }
}

}  // namespace weakfactor
