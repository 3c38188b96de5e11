"""BKW-style solving of Learning with Errors: instance generation, plain BKW
reduction (LF1/LF2/sample amplification), hypothesis-testing distinguishers
(LLR, FFT, pruned FFT) and a reproducible sample-complexity experiment
harness."""

from .core import (
    LweParams,
    ParameterError,
    Rng,
    RoundedGaussian,
    canonical,
    noise_after_steps,
    rounded_gaussian_pmf,
    sample_rounded_gaussian,
    signed,
)
from .distinguish import (
    CosineFit,
    HypothesisSpace,
    ScoreTable,
    cosine_approximation,
    default_magnitude_bound,
    fft_distinguish,
    llr_distinguish,
    pruned_fft_distinguish,
    residual_error,
    theory_samples,
    theory_samples_pruned,
)
from .experiments import (
    ExperimentConfig,
    ExperimentPoint,
    ExperimentRecord,
    PRESETS,
    distinguisher_agreement,
    median_min_samples,
    min_samples_to_success,
    run_experiment,
    run_point,
)
from .instance import (
    BasisInfo,
    ChallengeParseError,
    LweInstance,
    Secret,
    SingularInstanceError,
    generate_instance,
    read_challenge,
    secret_noise_transform,
    write_challenge,
)
from .reduction import (
    CategoryIndex,
    SampleSet,
    categorize,
    reduce_step_lf1,
    reduce_step_lf2,
    sample_amplify,
)

__version__ = "0.1.0"
