#include "weakfactor/inference.hpp"

#include <cmath>

#include "weakfactor/stats.hpp"

namespace weakfactor {

namespace {

constexpr double kVarGuard = 1e-12;
constexpr double kCovGuard = 1e-14;

MatrixXd symmetric_inverse_sqrt(const MatrixXd& spd, double guard,
                                const char* label) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(spd);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < guard) {
    throw SingularCovariance(std::string(label) + " is numerically singular");
  }
  return es.eigenvectors() *
         es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

AsymptoticObjects oracle_objects(const DgpDescriptor& desc,
                                 const FactorStructure& truth, int unit,
                                 int period) {
  if (desc.r < 1 || desc.factor_cov.size() == 0 ||
      desc.loading_scheme.sigma_lambda.size() == 0) {
    throw UnknownDgp("oracle objects need a fully specified descriptor");
  }
  (void)period;  // noise is stationary, Phi_Lambda is period-invariant
  const int r = desc.r;
  const int n = desc.n;

  AsymptoticObjects obj;
  obj.sigma_lambda = desc.loading_scheme.sigma_lambda;
  obj.sigma_f = desc.factor_cov;

  Eigen::SelfAdjointEigenSolver<MatrixXd> es_l(obj.sigma_lambda);
  if (es_l.info() != Eigen::Success || es_l.eigenvalues().minCoeff() <= 0.0) {
    throw NotSpd("sigma_lambda is not SPD");
  }
  const MatrixXd sqrt_l = es_l.eigenvectors() *
                          es_l.eigenvalues().cwiseSqrt().asDiagonal() *
                          es_l.eigenvectors().transpose();
  const MatrixXd inv_sqrt_l =
      es_l.eigenvectors() *
      es_l.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
      es_l.eigenvectors().transpose();

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sqrt_l * obj.sigma_f * sqrt_l);
  if (es.info() != Eigen::Success) throw NotSpd("eigendecomposition failed");
  obj.d_cal.resize(r);
  obj.g_cal.resize(r, r);
  for (int k = 0; k < r; ++k) {
    obj.d_cal(k) = std::sqrt(es.eigenvalues()(r - 1 - k));
    obj.g_cal.col(k) = es.eigenvectors().col(r - 1 - k);
  }
  // canonical column signs (largest-magnitude entry positive); every
  // derived covariance is invariant to this choice up to off-diagonal
  // signs
  for (int k = 0; k < r; ++k) {
    Index row = 0;
    obj.g_cal.col(k).cwiseAbs().maxCoeff(&row);
    if (obj.g_cal(row, k) < 0.0) obj.g_cal.col(k) = -obj.g_cal.col(k);
  }
  obj.q_cal = obj.d_cal.asDiagonal() * obj.g_cal.transpose() * inv_sqrt_l;

  // Phi_{Lambda,t} from realized loadings and known noise moments
  const double n_alpha = std::pow(static_cast<double>(n), truth.alpha);
  const double var_eps = desc.noise.marginal_variance();
  MatrixXd phi_l = MatrixXd::Zero(r, r);
  phi_l = var_eps * (truth.loadings.transpose() * truth.loadings);
  const double cross_cov = desc.noise.same_block_covariance();
  if (cross_cov != 0.0) {
    for (int i = 0; i < n; ++i) {
      for (int j : desc.noise.neighbor_set(i, n)) {
        if (j == i) continue;
        phi_l += cross_cov * truth.loadings.row(i).transpose() *
                 truth.loadings.row(j);
      }
    }
  }
  obj.phi_lambda_t = phi_l / n_alpha;

  // factors are iid and independent of the noise, so the long-run form
  // collapses to gamma_0 Sigma_F for every dependence regime
  obj.phi_f_i = var_eps * obj.sigma_f;
  (void)unit;
  return obj;
}

MatrixXd avar_loading(const AsymptoticObjects& obj) {
  const int r = static_cast<int>(obj.d_cal.size());
  if (obj.d_cal.minCoeff() <= 0.0) {
    throw SingularQ("Q is singular: D has a zero diagonal entry");
  }
  // Q^{-1} = Sigma_L^{1/2} G D^{-1}
  const MatrixXd q_inv =
      obj.q_cal.partialPivLu().solve(MatrixXd::Identity(r, r));
  return q_inv.transpose() * obj.phi_f_i * q_inv;
}

MatrixXd avar_factor(const AsymptoticObjects& obj) {
  if (obj.d_cal.minCoeff() <= 0.0) {
    throw SingularQ("D is singular");
  }
  const VectorXd d_inv2 = obj.d_cal.array().square().inverse();
  return d_inv2.asDiagonal() * obj.q_cal * obj.phi_lambda_t *
         obj.q_cal.transpose() * d_inv2.asDiagonal();
}

double var_common(const FactorStructure& truth, const AsymptoticObjects& obj,
                  int unit, int period) {
  if (unit < 0 || unit >= truth.n_units() || period < 0 ||
      period >= truth.n_periods()) {
    throw IndexOutOfRange("var_common target out of range");
  }
  const VectorXd lambda = truth.loadings.row(unit).transpose();
  const VectorXd f = truth.factors.row(period).transpose();
  if (lambda.norm() < kVarGuard || f.norm() < kVarGuard) {
    throw DegenerateVariance("zero loading or factor at the target");
  }
  const double n_alpha =
      std::pow(static_cast<double>(truth.n_units()), truth.alpha);
  const double t = static_cast<double>(truth.n_periods());
  const VectorXd sl_lambda = obj.sigma_lambda.ldlt().solve(lambda);
  const VectorXd sf_f = obj.sigma_f.ldlt().solve(f);
  return sl_lambda.dot(obj.phi_lambda_t * sl_lambda) / n_alpha +
         sf_f.dot(obj.phi_f_i * sf_f) / t;
}

MatrixXd plugin_avar_loading(const PcFit& fit, const MatrixXd& x, int unit,
                             int bandwidth) {
  if (unit < 0 || unit >= x.rows()) {
    throw IndexOutOfRange("unit index " + std::to_string(unit));
  }
  if (bandwidth < 0) throw IndexOutOfRange("bandwidth must be nonnegative");
  const Index t = x.cols();
  const int r = fit.svd.rank();
  const VectorXd resid =
      (x.row(unit) - fit.loadings_hat.row(unit) * fit.factors_hat.transpose())
          .transpose();

  MatrixXd avar = MatrixXd::Zero(r, r);
  for (Index s = 0; s < t; ++s) {
    avar += resid(s) * resid(s) * fit.factors_hat.row(s).transpose() *
            fit.factors_hat.row(s);
  }
  for (int h = 1; h <= bandwidth; ++h) {
    const double w = 1.0 - static_cast<double>(h) / (bandwidth + 1.0);
    MatrixXd acc = MatrixXd::Zero(r, r);
    for (Index s = 0; s + h < t; ++s) {
      acc += resid(s) * resid(s + h) * fit.factors_hat.row(s).transpose() *
             fit.factors_hat.row(s + h);
    }
    avar += w * (acc + acc.transpose());
  }
  return avar / static_cast<double>(t);
}

std::vector<bool> wald_interval_hits(const VectorXd& center,
                                     const MatrixXd& covariance,
                                     const VectorXd& truth_value,
                                     double level) {
  const double z = normal_quantile(0.5 * (1.0 + level));
  std::vector<bool> hits(static_cast<size_t>(center.size()));
  for (Index k = 0; k < center.size(); ++k) {
    const double half_width = z * std::sqrt(std::max(0.0, covariance(k, k)));
    hits[static_cast<size_t>(k)] =
        std::abs(center(k) - truth_value(k)) <= half_width + 1e-10;
  }
  return hits;
}

ConfidenceReport confidence_interval(const VectorXd& center,
                                     const MatrixXd& covariance,
                                     const VectorXd& truth_value,
                                     double level) {
  const Index r = center.size();
  if (covariance.rows() != r || covariance.cols() != r ||
      truth_value.size() != r) {
    throw ShapeMismatch("confidence_interval inputs disagree in dimension");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("level must lie in (0,1)");
  }
  ConfidenceReport report;
  report.center = center;
  report.covariance = covariance;
  report.level = level;
  report.interval_hits = wald_interval_hits(center, covariance, truth_value, level);
  const MatrixXd inv_sqrt =
      symmetric_inverse_sqrt(covariance, kCovGuard, "covariance");
  report.studentized = inv_sqrt * (center - truth_value);
  return report;
}

}  // namespace weakfactor
