"""Benchmarks for parity-encoded (SLHZ) and minor-embedded Ising machines."""

__version__ = "0.1.0"

from .instances import (  # noqa: E402
    GroundTruth,
    InstanceParseError,
    LogicalProblem,
    ResourceError,
    ValidationError,
    generate_instance,
    logical_energy,
    read_instance,
    solve_exhaustive,
    write_instance,
)
from .parity import (  # noqa: E402
    PairCodebook,
    build_codebook,
    build_plaquettes,
    build_triads,
    encode,
    slhz3_energy,
    slhz_energy,
    syndrome,
)
from .embedding import build_embedding, chain_intact, embed, me_energy  # noqa: E402
from .sampler import make_model, random_states, rf_mcmc_run  # noqa: E402
from .decoders import (  # noqa: E402
    bf_decode,
    bf_step,
    from_matrix,
    mv_decode,
    nearest_codeword_oracle,
    to_matrix,
)
from .experiments import (  # noqa: E402
    ExperimentSpec,
    analytic_success,
    is_success,
    run_experiment,
    sweep_landscape,
)
