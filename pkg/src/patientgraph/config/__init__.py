from patientgraph.config.run_config import (
    RunConfig,
    format_config,
    load_run_config,
    load_synth_config,
    resolve_path,
    run_config_from_pairs,
    validate_run_config,
    write_run_config,
)

__all__ = [
    "RunConfig",
    "format_config",
    "load_run_config",
    "load_synth_config",
    "resolve_path",
    "run_config_from_pairs",
    "validate_run_config",
    "write_run_config",
]
