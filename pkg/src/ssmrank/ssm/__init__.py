from .lti import (
    ConvKernel,
    DiscreteSsmParams,
    LtiSsmParams,
    SsmState,
    conv_forward,
    conv_kernel,
    discretize,
    discretize_zoh,
    init_lti_params,
    recurrent_forward,
    recurrent_step,
)
from .selective import (
    ChunkPlan,
    ScanStats,
    SelectiveProjections,
    SelectiveTrace,
    SsdHeadParams,
    SsdTrace,
    plan_chunks,
    project_selective,
    selective_scan_sequential,
    ssd_forward_chunked,
    ssd_forward_sequential,
)

__all__ = [
    "ConvKernel",
    "DiscreteSsmParams",
    "LtiSsmParams",
    "SsmState",
    "conv_forward",
    "conv_kernel",
    "discretize",
    "discretize_zoh",
    "init_lti_params",
    "recurrent_forward",
    "recurrent_step",
    "ChunkPlan",
    "ScanStats",
    "SelectiveProjections",
    "SelectiveTrace",
    "SsdHeadParams",
    "SsdTrace",
    "plan_chunks",
    "project_selective",
    "selective_scan_sequential",
    "ssd_forward_chunked",
    "ssd_forward_sequential",
]
