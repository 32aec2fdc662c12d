"""featcodec: feature-coding toolkit for split-inference feature tensors.

Pipeline: truncate -> quantize (10-bit) -> pack to a 2D plane -> code
(built-in intra codec or YUV-400 export for an external one), with the
exact inverses, plus rate-accuracy evaluation and dataset statistics.
"""

from .analysis import (
    basic_stats,
    dct_energy_map,
    gradient_magnitude,
    histogram_cdf,
    intensity_variance,
)
from .codec import (
    BACKEND,
    Bitstream,
    CodecConfig,
    decode,
    dct2,
    encode,
    idct2,
    range_decode,
    range_encode,
)
from .config import ToolkitConfig, default_truncation_table, load_config
from .containers import (
    CANONICAL_SHAPE,
    FeatureTensor,
    SplitPointId,
    TaskKind,
    load_feature,
    make_feature,
    save_feature,
    validate_feature,
)
from .errors import CodecError, FeatCodecError, FormatError, ValidationError
from .metrics import (
    AccuracyKind,
    RDCurve,
    RDRecord,
    accuracy_drop,
    bpfp,
    build_curve,
    feature_mse,
    r_squared,
)
from .packing import PackedPlane, PlaneProvenance, pack, unpack
from .preprocess import (
    QuantizedTensor,
    TruncationRegion,
    TruncationTable,
    dequantize,
    empirical_region,
    normalize,
    denormalize,
    quantize_uniform,
    truncate,
)
from .synth import synth_feature
from .yuv import SidecarMeta, export_yuv400, import_yuv400, measure_bits

__version__ = "0.1.0"
