"""Wavelet-compression screening for gastric electrical uncoupling in EGG recordings."""

from .compression import (
    CompressionConfig,
    CompressionResult,
    compress,
    keep_largest,
    prd,
)
from .io import (
    Cohort,
    Manifest,
    RecordingFile,
    load_cohort,
    read_manifest,
    read_recording,
    write_cohort,
    write_manifest,
    write_recording,
)
from .matcher import (
    GridSpec,
    MatchResult,
    PlaneMinimum,
    PrdSurface,
    aggregate_best,
    match_cohort,
    prd_surface,
    refine_surface,
    surface_minima,
    surface_to_csv,
    surface_to_pgm,
)
from .simulate import (
    CohortSpec,
    StateModel,
    simulate_cohort,
    simulate_recording,
    square_wave_signal,
    state_model,
)
from .stats import (
    ChannelComparison,
    SweepPoint,
    TestOutcome,
    compare_paired,
    compare_states,
    comparisons_to_csv,
    comparisons_to_text,
    cr_sweep,
    detection_rate,
    lilliefors,
    paired_t,
    state_prds,
    sweep_to_csv,
    wilcoxon_signed_rank,
)
from .wavelets import (
    COIFLET1_POINT,
    DAUBECHIES2_POINT,
    DAUBECHIES3_POINT,
    HAAR_POINT,
    DwtCoefficients,
    FilterPair,
    Signal,
    center_frequency,
    dwt_forward,
    dwt_inverse,
    named_wavelet,
    pollen_filter,
    pseudo_frequency,
    resolve_wavelet,
    select_scales,
)

__version__ = "0.1.0"

#: What this package deliberately does not reproduce.  The reference canine
#: experiment's numbers require its animal recordings, which are not
#: distributable: the per-channel comparison table entries (means, SDs and
#: p-values), the exact compression-ratio sensitivity curves, and the
#: averaged best-wavelet plane point (0.43, -0.26) all depend on that data.
#: This package reproduces the procedures, the report formats, and the
#: qualitative orderings on seeded synthetic cohorts only.
NON_REPRODUCIBILITY_NOTE = (
    "The reference canine experiment's numeric results are not reproducible "
    "without its animal recordings: per-channel comparison table entries, "
    "exact compression-ratio sensitivity curves, and the averaged "
    "best-wavelet plane point (0.43, -0.26) all depend on that data. This "
    "package reproduces the procedures, report formats, and qualitative "
    "orderings on seeded synthetic cohorts."
)
