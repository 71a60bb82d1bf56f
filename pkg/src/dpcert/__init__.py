"""Discrete DP mechanisms, exact budget accounting, and desk-scale certification."""

from .budget import (
    Credits,
    EpsDeltaFilter,
    Ledger,
    OverspendError,
    PrivacyFilter,
    credits_join,
    credits_split,
)
from .checks import (
    ChoiceInstance,
    DpReport,
    InstanceInvalid,
    all_adjacent_pairs,
    all_databases,
    at_factory,
    check_bind_lifting,
    check_choice_composition,
    check_dp,
    check_laplace_choice,
    check_laplace_shift,
    check_metric_composition,
    check_post_processing,
    check_seq_composition,
    check_svt_adaptive,
    laplace_release_factory,
    random_choice_instance,
    rnm_factory,
    run_choice_composition_suite,
)
from .couplings import (
    SupportTooLargeError,
    coupling_divergence,
    coupling_exists,
    coupling_monotone_check,
    hockey_stick,
    lp_divergence,
)
from .dist import (
    MASS_TOL,
    LaplaceParams,
    SubDist,
    dist_bind,
    dist_mass,
    dist_ret,
    laplace_pmf,
    laplace_tail,
    laplace_truncated,
)
from .enumerate import BranchCapError, EnumConfig, EnumResult, enumerate_mechanism
from .mechanisms import (
    ADJACENCIES,
    AboveThreshold,
    AboveThresholdStream,
    Database,
    Query,
    QueryCache,
    SensitivityError,
    SparseVector,
    adaptive_count,
    at_transcript,
    auto_avg,
    clip_bound,
    clip_sum,
    count_query,
    create_query,
    laplace_add_noise,
    map_cache,
    rnm,
    row_hamming_adjacent,
    svt_stream,
    value_bounded_adjacent,
)
from .noise import NoiseSource, SamplingNoise
from .sampling import LaplaceSampler, goodness_of_fit, sample_laplace

__version__ = "0.1.0"
