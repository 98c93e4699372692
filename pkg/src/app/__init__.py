"""Application layer: orchestrator, scenarios, sweeps and the CLI."""
