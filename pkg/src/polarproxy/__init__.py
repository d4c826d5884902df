"""Entropy-based electoral polarization measures, pedestrian distance
aggregation and OLS diagnostics with a synthetic-data oracle."""

__version__ = "0.1.0"

from .entropy import (  # noqa: E402
    EntropyMeasures,
    effective_number_of_parties,
    province_entropies,
    shannon_entropy,
    weighted_entropy,
)
from .controls import SectorProportions, sector_proportions  # noqa: E402
from .geometry import (  # noqa: E402
    DepthMap,
    Detection,
    PairType,
    classify_pair,
    depth_at,
    frame_pair_means,
    pair_distance,
    province_mean_distances,
)
from .ingest import (  # noqa: E402
    AnalysisTable,
    join_province,
    parse_table,
    read_table,
    serialize,
)
from .regress import (  # noqa: E402
    ModelSpec,
    auxiliary_ovb,
    build_design,
    ols_fit,
    vif,
    vif_correlation,
)
from .synth import SynthConfig, generate, generate_inputs, recovery_check  # noqa: E402
