from ..profiling import TimerRegistry, activate, scope
from .capacity import (
    DEFAULT_MEM_LIMIT_MB,
    check_capacity,
    estimate_forward_bytes,
    estimate_training_bytes,
)
from .flops import FlopEstimate, estimate_flops
from .profile_ops import ProfileResult, profile_operators
from .report import (
    format_curve_csv,
    format_kv_section,
    format_scope_table_csv,
    format_scope_table_text,
)
from .scaling import ScalingReport, fit_loglog_slope, scaling_config, scaling_curve
from .throughput import (
    QpsReport,
    ThroughputReport,
    measure_inference_qps,
    measure_training_throughput,
)

__all__ = [
    "DEFAULT_MEM_LIMIT_MB",
    "FlopEstimate",
    "ProfileResult",
    "QpsReport",
    "ScalingReport",
    "ThroughputReport",
    "TimerRegistry",
    "activate",
    "check_capacity",
    "estimate_flops",
    "estimate_forward_bytes",
    "estimate_training_bytes",
    "fit_loglog_slope",
    "format_curve_csv",
    "format_kv_section",
    "format_scope_table_csv",
    "format_scope_table_text",
    "measure_inference_qps",
    "measure_training_throughput",
    "profile_operators",
    "scaling_config",
    "scaling_curve",
    "scope",
]
