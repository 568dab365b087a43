"""Exact simulator for a constrained quantum cellular automaton.

Spin chains with a nearest-neighbor occupation constraint evolve under a
brickwork of three-site controlled rotations. Near the deterministic gate
angle the dynamics supports solitonic quasiparticles; this package
provides the exact evolution, the quasiparticle perturbation theory, and
the entanglement and level-statistics diagnostics that separate the
regular from the thermalizing initial conditions.
"""

from .basis import (
    FibonacciBasis,
    SpinConfig,
    build_basis,
    fibonacci,
    format_bits,
    invert,
    parse_bits,
    translate2,
    wall_count,
    xor_string,
)
from .classical import (
    ClassicalStep,
    Cycle,
    classical_step,
    cycle_eigenstate,
    find_cycles,
    glider_mask,
    make_named_state,
    vacuum_masks,
)
from .evolve import (
    COMPILED_KERNEL,
    StateVector,
    StepParams,
    apply_gate,
    evolve,
    evolve_backward,
    pair_tables,
    step,
    step_backward,
)
from .quasiparticle import (
    GliderIndex,
    HbcMatrix,
    ModeIndex,
    build_lrk,
    build_q1q2k,
    dispersion,
    first_order_energy,
    glider_sector_quasienergies,
    hbc_matrix,
    loschmidt_analytic,
    loschmidt_gaussian,
    mode_grid,
    mode_overlap,
    momentum_values,
)
from .diagnostics import (
    DensityMatrix,
    SchmidtSpectrum,
    concurrence,
    entropy,
    fidelity,
    global_Q,
    ipr,
    loschmidt_numeric,
    negativity,
    r_statistics,
    rate_function,
    reduced_density,
    reference_pdf,
    schmidt_spectrum,
    spin_expectation,
    spin_z_profile,
    tangle,
    tangle_profile,
)
from .harness import (
    PRESETS,
    SCENARIOS,
    ExperimentConfig,
    SweepRecord,
    preset_config,
    resolve_config,
    run_scenario,
    spectrum_stats_scenario,
    sweep_all_configs,
)

__version__ = "0.1.0"
