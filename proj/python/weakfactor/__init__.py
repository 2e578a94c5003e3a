"""PC estimation for approximate factor models with weak factors."""

try:
    from ._weakfactor import (  # noqa: F401
        PcFit,
        WeakFactorError,
        align_to_truth,
        ar1_conditional_mean,
        gaussian_conditional_oracle,
        identity_gaps,
        leave_neighbor_out,
        leave_one_out,
        normal_quantile,
        pc_fit,
        procrustes,
        reconstruct_common,
        simulate_panel,
        truncated_svd,
    )
except ImportError:  # running against a plain CMake build directory
    from _weakfactor import (  # noqa: F401
        PcFit,
        WeakFactorError,
        align_to_truth,
        ar1_conditional_mean,
        gaussian_conditional_oracle,
        identity_gaps,
        leave_neighbor_out,
        leave_one_out,
        normal_quantile,
        pc_fit,
        procrustes,
        reconstruct_common,
        simulate_panel,
        truncated_svd,
    )

__version__ = "1.0.0"
