"""Private release of fixed-size subsets and noisy pooled testing, with an
exact brute-force privacy auditor.

The library has three layers:

* mechanisms that perturb a secret size-d subset of {0, ..., n-1} within a
  distortion radius beta (sphere, ball and union-noise samplers, plus
  clamp/resize post-processing wrappers);
* pooled testing: designs, noise injected before or after pooling, an
  eliminator decoder, and end-to-end collector-to-lab simulation;
* an auditor that computes the tight additive leakage delta* and the exact
  accuracy failure rate of any of the above by exhaustive enumeration in
  rational arithmetic, alongside closed-form bounds to sandwich them.
"""

from .auditor import (
    AccuracyReport,
    AuditReport,
    McDeltaReport,
    audit_accuracy,
    audit_privacy,
    audit_testing_accuracy,
    audit_testing_privacy,
    canonical_pair,
    delta_star,
    mc_estimate_delta,
    neighbor_pairs,
)
from .bounds import (
    BoundReport,
    PrivacyParams,
    gt_lower_bound,
    gt_upper_bound,
    lower_bound_any,
    lower_bound_independent,
    upper_bound_sphere,
    upper_bound_union,
)
from .combinatorics import (
    Subset,
    ball_size,
    combination_rank,
    combination_unrank,
    distance,
    enumerate_ball,
    enumerate_excess_set,
    enumerate_sphere,
    enumerate_subsets,
    incidence_count,
    sample_at_distance,
    sample_uniform_subset,
    sphere_size,
    subset_count,
)
from .grouptesting import (
    ContaminationInduced,
    IndependentOverwrite,
    NoiseAfter,
    NoiseBefore,
    Noiseless,
    PoolingDesign,
    Syndrome,
    TrialResult,
    bernoulli_design,
    decode_comp,
    decoded_distribution_exact,
    identity_design,
    induced_overwrites,
    run_tests,
    sample_noise,
    simulate,
    syndrome_distribution_exact,
)
from .mechanisms import (
    BallMechanism,
    CapExceededError,
    ClampedMechanism,
    IdentityMechanism,
    Mechanism,
    OutputDistribution,
    ResizedMechanism,
    SphereMechanism,
    UniformMechanism,
    UnionMechanism,
    ball_release,
    clamp_to_accuracy,
    exact_output_distribution,
    make_mechanism,
    mechanism_from_json,
    resize_to_d,
    sphere_release,
    union_release,
)

__version__ = "0.1.0"
