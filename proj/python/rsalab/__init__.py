"""Monte Carlo laboratory for random sequential adsorption and related
spatial processes: exact infinite-volume packing on finite windows,
correlation-function estimation, and Gaussian-limit diagnostics."""

from rsalab._core import (  # noqa: F401
    BinnedCorrelation,
    CausalCone,
    CausalGraph,
    CellField,
    ConeCapError,
    ConfigError,
    PackedSample,
    ProbabilityEstimate,
    Region,
    RescaledVectorSample,
    SpaceTimePoint,
    __version__,
    assign_marks,
    backward_cone,
    boundary_processes,
    brute_force_sigma_oracle,
    build_causal_graph,
    build_nn_weights,
    cell_points,
    center_samples,
    cone_tail,
    default_config_json,
    estimate_C_corr,
    estimate_C_var,
    estimate_rbar,
    filter_by_mark,
    first_arrival,
    first_blocking_time,
    forward_cone,
    jam_lattice_window,
    jam_priority_flags,
    lattice_arrivals,
    make_field,
    moments_from_correlations,
    nn_measure,
    nn_rescaled_sample,
    nn_total_edge_length,
    overlaps,
    pack_sequential,
    pack_window_infinite,
    r1_profile,
    renyi_density_oracle,
    rescaled_sample,
    run_experiment,
    sample_window,
    sigma_infinite,
    sigma_joint,
    simulate_birth_growth,
    simulate_desorption,
    spatial_pair_correlation,
    stabilization_radius_probe,
)
