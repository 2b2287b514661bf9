"""Channel polarization laboratory: polar transform, construction, SC decoding and channel orders."""

__version__ = "0.1.0"

from .channels import (
    BinaryChannel,
    ChannelClass,
    bhattacharyya,
    gallager_e0,
    make_bec,
    make_bsc,
    make_quantized_bawgn,
    symmetric_capacity,
)
from .codes import CodeSpec
from .transform import TransformPair, merge_outputs, transform
from .codec import DecodeMetric, SCDecoder, encode, glrt_decode, sc_decode, transmit
from .construction import (
    BitChannelReport,
    compound_construct,
    mc_genie_estimate,
    select_information_set,
    synthesize,
)
from .extremality import (
    bec_with_capacity,
    bec_with_e0,
    bsc_with_capacity,
    bsc_with_e0,
    e0_extremality_scan,
)
from .ordering import (
    ConvexVerdict,
    bsc_decomposition,
    check_degradation,
    check_symmetric_convex_order,
    polar_order_probe,
)
