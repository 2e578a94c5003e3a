#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "weakfactor/core.hpp"
#include "weakfactor/diagnostics.hpp"
#include "weakfactor/inference.hpp"
#include "weakfactor/stats.hpp"

namespace py = pybind11;
using namespace weakfactor;

namespace {

LoadingKind loading_kind_from(const std::string& name) {
  if (name == "homogeneous") return LoadingKind::kHomogeneous;
  if (name == "sparse_strong") return LoadingKind::kSparseStrong;
  if (name == "heterogeneous_exponents")
    return LoadingKind::kHeterogeneousExponents;
  throw InvalidScheme("unknown loading kind: " + name);
}

DgpDescriptor descriptor_from_args(int n, int t, int r, double alpha,
                                   std::uint64_t seed,
                                   const std::string& loading_kind,
                                   py::object sigma_lambda,
                                   py::object factor_cov,
                                   double exponent_spread,
                                   const std::string& cross, int block_size,
                                   double rho, const std::string& temporal,
                                   const std::vector<double>& coeffs,
                                   double innovation_sd, double base_sd) {
  DgpDescriptor desc;
  desc.n = n;
  desc.t = t;
  desc.r = r;
  desc.seed = seed;
  desc.loading_scheme.kind = loading_kind_from(loading_kind);
  desc.loading_scheme.alpha = alpha;
  desc.loading_scheme.exponent_spread = exponent_spread;
  desc.loading_scheme.sigma_lambda =
      sigma_lambda.is_none() ? MatrixXd::Identity(r, r)
                             : sigma_lambda.cast<MatrixXd>();
  desc.factor_cov = factor_cov.is_none() ? MatrixXd::Identity(r, r)
                                         : factor_cov.cast<MatrixXd>();
  if (cross == "independent") {
    desc.noise.cross = CrossKind::kIndependent;
  } else if (cross == "block") {
    desc.noise.cross = CrossKind::kBlockNeighbors;
    desc.noise.block_size = block_size;
    desc.noise.rho = rho;
  } else {
    throw InvalidScheme("unknown cross kind: " + cross);
  }
  if (temporal == "independent") {
    desc.noise.temporal = TemporalKind::kIndependent;
  } else if (temporal == "ar" || temporal == "ma") {
    desc.noise.temporal =
        temporal == "ar" ? TemporalKind::kAr : TemporalKind::kMa;
    desc.noise.coeffs =
        Eigen::Map<const VectorXd>(coeffs.data(),
                                   static_cast<Index>(coeffs.size()));
    desc.noise.innovation_sd = innovation_sd;
  } else {
    throw InvalidScheme("unknown temporal kind: " + temporal);
  }
  desc.noise.base_sd = base_sd;
  return desc;
}

FactorStructure truth_from(const MatrixXd& loadings, const MatrixXd& factors,
                           double alpha) {
  FactorStructure truth;
  truth.loadings = loadings;
  truth.factors = factors;
  truth.common = loadings * factors.transpose();
  truth.rank = static_cast<int>(loadings.cols());
  truth.alpha = alpha;
  truth.alpha_units = VectorXd::Constant(loadings.rows(), alpha);
  return truth;
}

py::dict alignment_dict(const Alignment& al) {
  py::dict out;
  out["o"] = al.o;
  out["h0"] = al.h0;
  out["h"] = al.h;
  out["h_bn0"] = al.h_bn0;
  out["h_bn1"] = al.h_bn1;
  out["sign_estimate"] = MatrixXd(al.sign_estimate);
  return out;
}

}  // namespace

PYBIND11_MODULE(_weakfactor, m) {
  m.doc() = "PC estimation for approximate factor models with weak factors";

  py::register_exception<Error>(m, "WeakFactorError");

  py::class_<PcFit>(m, "PcFit")
      .def_property_readonly(
          "loadings_hat", [](const PcFit& fit) { return fit.loadings_hat; })
      .def_property_readonly(
          "factors_hat", [](const PcFit& fit) { return fit.factors_hat; })
      .def_property_readonly("left",
                             [](const PcFit& fit) { return fit.svd.left; })
      .def_property_readonly("singular",
                             [](const PcFit& fit) { return fit.svd.singular; })
      .def_property_readonly("right",
                             [](const PcFit& fit) { return fit.svd.right; })
      .def_property_readonly("y",
                             [](const PcFit& fit) { return fit.balanced.y; })
      .def_property_readonly("z",
                             [](const PcFit& fit) { return fit.balanced.z; });

  m.def(
      "truncated_svd",
      [](const MatrixXd& x, int r) {
        const TruncatedSvd svd = truncated_svd(x, r);
        return py::make_tuple(svd.left, svd.singular, svd.right);
      },
      py::arg("x"), py::arg("r"),
      "Top-r SVD with the deterministic sign convention; returns (U, s, V).");

  m.def("pc_fit", &pc_fit, py::arg("x"), py::arg("r"),
        "PC estimates from the top-r SVD of the panel.");

  m.def("reconstruct_common", &reconstruct_common, py::arg("loadings_hat"),
        py::arg("factors_hat"));

  m.def("procrustes", &procrustes, py::arg("a"), py::arg("b"),
        "Orthogonal Procrustes minimizer of |aR - b|_F (reflections allowed).");

  m.def(
      "simulate_panel",
      [](int n, int t, int r, double alpha, std::uint64_t seed,
         const std::string& loading_kind, py::object sigma_lambda,
         py::object factor_cov, double exponent_spread,
         const std::string& cross, int block_size, double rho,
         const std::string& temporal, const std::vector<double>& coeffs,
         double innovation_sd, double base_sd) {
        const DgpDescriptor desc = descriptor_from_args(
            n, t, r, alpha, seed, loading_kind, sigma_lambda, factor_cov,
            exponent_spread, cross, block_size, rho, temporal, coeffs,
            innovation_sd, base_sd);
        const PanelInstance inst = assemble_panel(desc);
        py::dict out;
        out["panel"] = inst.panel.values;
        out["loadings"] = inst.truth.loadings;
        out["factors"] = inst.truth.factors;
        out["common"] = inst.truth.common;
        out["noise"] = inst.noise;
        out["alpha_units"] = inst.truth.alpha_units;
        return out;
      },
      py::arg("n"), py::arg("t"), py::arg("r"), py::arg("alpha"),
      py::arg("seed"), py::arg("loading_kind") = "homogeneous",
      py::arg("sigma_lambda") = py::none(), py::arg("factor_cov") = py::none(),
      py::arg("exponent_spread") = 0.0, py::arg("cross") = "independent",
      py::arg("block_size") = 1, py::arg("rho") = 0.0,
      py::arg("temporal") = "independent",
      py::arg("coeffs") = std::vector<double>{},
      py::arg("innovation_sd") = 1.0, py::arg("base_sd") = 1.0,
      "Simulate a weak-factor panel; returns panel, truth and noise.");

  m.def(
      "align_to_truth",
      [](const PcFit& fit, const MatrixXd& loadings, const MatrixXd& factors,
         double alpha) {
        const FactorStructure truth = truth_from(loadings, factors, alpha);
        const Alignment al = align(fit, truth);
        const ErrorReport errs = rotated_errors(fit, truth, al);
        py::dict out = alignment_dict(al);
        out["per_unit_loading"] = errs.per_unit_loading;
        out["per_period_factor"] = errs.per_period_factor;
        out["common_abs"] = errs.common_abs;
        out["bn_loading"] = errs.bn_loading;
        return out;
      },
      py::arg("fit"), py::arg("loadings"), py::arg("factors"),
      py::arg("alpha") = 1.0,
      "Matching matrices and rotated errors against a known truth.");

  m.def(
      "leave_one_out",
      [](const MatrixXd& x, const MatrixXd& loadings, const MatrixXd& factors,
         int i, int r) {
        const FactorStructure truth = truth_from(loadings, factors, 1.0);
        const LeaveOutPanel loo = leave_one_out(x, truth, i, r);
        py::dict out;
        out["panel"] = loo.panel;
        out["o"] = loo.alignment.o;
        out["y"] = loo.fit.balanced.y;
        out["z"] = loo.fit.balanced.z;
        return out;
      },
      py::arg("x"), py::arg("loadings"), py::arg("factors"), py::arg("i"),
      py::arg("r"));

  m.def(
      "leave_neighbor_out",
      [](const MatrixXd& x, const MatrixXd& loadings, const MatrixXd& factors,
         int t, int delta, int r) {
        const FactorStructure truth = truth_from(loadings, factors, 1.0);
        const LeaveOutPanel loo = leave_neighbor_out(x, truth, t, delta, r);
        py::dict out;
        out["panel"] = loo.panel;
        out["o"] = loo.alignment.o;
        out["members"] = loo.excluded.members;
        return out;
      },
      py::arg("x"), py::arg("loadings"), py::arg("factors"), py::arg("t"),
      py::arg("delta"), py::arg("r"));

  m.def(
      "identity_gaps",
      [](int n, int t, int r, double alpha, std::uint64_t seed,
         double base_sd) {
        DgpDescriptor desc;
        desc.n = n;
        desc.t = t;
        desc.r = r;
        desc.seed = seed;
        desc.loading_scheme.alpha = alpha;
        desc.loading_scheme.sigma_lambda = MatrixXd::Identity(r, r);
        desc.factor_cov = MatrixXd::Identity(r, r);
        desc.noise.base_sd = base_sd;
        const InstanceDiagnostics diag =
            run_identity_suite(assemble_panel(desc), r);
        py::dict out;
        out["rotation_loading"] = diag.gaps.rotation_loading;
        out["rotation_factor"] = diag.gaps.rotation_factor;
        out["claim_symmetric"] = diag.gaps.claim_symmetric;
        out["ydecomposition"] = diag.gaps.ydecomposition;
        out["decomp_r1"] = diag.gaps.decomp_r1;
        out["hbn"] = diag.gaps.hbn;
        out["max_gap"] = diag.gaps.max_gap();
        return out;
      },
      py::arg("n"), py::arg("t"), py::arg("r"), py::arg("alpha"),
      py::arg("seed"), py::arg("base_sd") = 1.0,
      "Exact-identity gaps on one simulated instance.");

  m.def("ar1_conditional_mean", &ar1_conditional_mean, py::arg("phi"),
        py::arg("delta"), py::arg("eps_left"), py::arg("eps_right"));

  m.def("gaussian_conditional_oracle", &gaussian_conditional_oracle,
        py::arg("cov"), py::arg("observed_idx"), py::arg("observed_vals"),
        py::arg("target_idx"));

  m.def("normal_quantile", &normal_quantile, py::arg("p"));

  m.attr("__version__") = "1.0.0";
}
