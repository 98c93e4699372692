"""
Simulation Orchestrator
Composition root: turns a validated RunConfig into results and files.
"""

import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from src.core import registry  # noqa: F401
from src.core.exceptions import ConfigError, OutputError
from src.core.factories import ScenarioFactory, ValidatorFactory, WriterFactory
from src.core.results import Document, ScenarioResult
from src.physics.adiabaticity import ADIABATICITY_CAP, adiabaticity, critical_rates, theta
from src.physics.bloch import BlochSimulator
from src.physics.cycle import CycleParams, effective_rotation, energy_levels
from src.physics.eigenmodes import decompose, eigenbasis
from src.theory.mode_trace import ModeTrace, mode_trace_from_echoes
from src.app.sweeps import resolve_workers, sweep_map
from src.utils.helpers import Formatter

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
FORMATS = ("csv", "structured-text")


class SimulationOrchestrator:
    """Composition root coordinating scenarios, sweeps and output emission."""

    def __init__(self, config, show_progress: bool = False):
        self.__config = config
        self.__show_progress = show_progress
        self.__workers = 1
        self.__written: List[str] = []
        self.__bytes_written = 0
        self.__start_time: Optional[datetime] = None
        self.__end_time: Optional[datetime] = None

    # ---------- Properties ----------

    @property
    def config(self):
        return self.__config

    @property
    def workers(self) -> int:
        return self.__workers

    @property
    def written_files(self) -> List[str]:
        return list(self.__written)

    @property
    def output_dir(self) -> Path:
        return Path(self.__config.output_dir)

    def initialize(self) -> None:
        self.__workers = resolve_workers(self.__config.threads)
        logger.debug("Using %d worker(s)", self.__workers)

    # ---------- Runs ----------

    def run_scenario(self, name: str) -> ScenarioResult:
        """
        Run one registered scenario.

        Raises:
            ConfigError: Unknown scenario name or invalid scenario parameters.
        """
        if not ScenarioFactory.is_registered(name):
            available = ", ".join(ScenarioFactory.get_registered_scenarios())
            raise ConfigError([f"scenario: unknown scenario '{name}' (available: {available})"])
        scenario = ScenarioFactory.create_scenario(
            name, self.__config, workers=self.__workers, show_progress=self.__show_progress
        )
        logger.info("Running scenario %s", name)
        return scenario.run()

    def sweep_map(self) -> ScenarioResult:
        sweep = self.__config.sweep
        if sweep is None:
            raise ConfigError(["sweep: a sweep section is required for the sweep command"])
        return sweep_map(
            sweep,
            self.__config.timing,
            workers=self.__workers,
            substeps=self.__config.substeps_per_interval,
            correction=self.__config.commutator_correction,
            show_progress=self.__show_progress,
        )

    def simulate(self) -> ScenarioResult:
        """Simulate the configured profile and decompose its echoes."""
        if self.__config.profile is None:
            raise ConfigError(["profile: a profile section is required for the simulate command"])
        profile = self.__config.profile.build()
        timing = self.__config.timing.build()
        train = BlochSimulator(
            profile, timing,
            self.__config.substeps_per_interval,
            self.__config.commutator_correction,
        ).solve()
        trace = mode_trace_from_echoes(train, profile, timing)

        result = ScenarioResult("simulate")
        header = [f"te_ratio {timing.te_ratio!r}", f"echo_count {timing.echo_count}"]
        result.add_table("echo_train", train.COLUMNS, train.rows(), header)
        result.add_table("mode_trace", ModeTrace.COLUMNS, trace.rows(),
                         header + [f"adiabaticity capped at {ADIABATICITY_CAP:g}"])
        for kind, data in (("echo_train", train), ("mode_partition", trace)):
            validator = ValidatorFactory.create_validator(kind)
            if not validator.validate(data):
                logger.warning("%s: %s", validator.validator_name, validator.validation_errors)
            result.add_validation(validator.get_validation_report())
        result.summary = {
            "profile": profile.describe(),
            "final_magnetization": train.magnetization[-1].tolist(),
            "final_a0": float(trace.a0[-1]),
        }
        return result

    def evaluate_cycle(self, omega0: float, omega1: float, te_ratio: float,
                       pulse_phase: float = 0.0) -> ScenarioResult:
        params = CycleParams(omega0, omega1, te_ratio, pulse_phase)
        er = effective_rotation(params)
        content: Dict[str, Any] = {
            "omega0_norm": omega0,
            "omega1_norm": omega1,
            "te_ratio": te_ratio,
            "alpha": er.alpha,
            "n_perp": er.n_perp,
            "n_z": er.n_z,
            "epsilon": er.epsilon,
            "degenerate_axis": bool(er.degenerate_axis),
            "energy_levels": list(energy_levels(params)),
        }
        if not er.degenerate_axis:
            rates = critical_rates(params)
            content.update(theta=theta(params), nu0_crit=rates.nu0_crit, nu1_crit=rates.nu1_crit)
        result = ScenarioResult("cycle")
        result.add_document("cycle", content)
        result.summary = content
        return result

    def evaluate_adiabaticity(self, omega0: float, omega1: float, te_ratio: float,
                              ramp0: float = 0.0, ramp1: float = 0.0) -> ScenarioResult:
        params = CycleParams(omega0, omega1, te_ratio, ramp0=ramp0, ramp1=ramp1)
        value = float(adiabaticity(params))
        rates = critical_rates(params)
        content = {
            "omega0_norm": omega0,
            "omega1_norm": omega1,
            "te_ratio": te_ratio,
            "ramp0": ramp0,
            "ramp1": ramp1,
            "adiabaticity": min(value, ADIABATICITY_CAP),
            "nu0_crit": rates.nu0_crit,
            "nu1_crit": rates.nu1_crit,
            "adiabatic": value > self.__config.threshold,
            "threshold": self.__config.threshold,
        }
        result = ScenarioResult("adiabaticity")
        result.add_document("adiabaticity", content)
        result.summary = content
        return result

    def decompose(self, magnetization, omega0: float, omega1: float, te_ratio: float) -> ScenarioResult:
        params = CycleParams(omega0, omega1, te_ratio)
        er = effective_rotation(params)
        basis = eigenbasis(er)
        amplitudes = decompose(np.asarray(magnetization, dtype=float), basis)
        content = {
            "magnetization": list(magnetization),
            "omega0_norm": omega0,
            "omega1_norm": omega1,
            "te_ratio": te_ratio,
            "axis": basis.v0.tolist(),
            "a0": amplitudes.a0,
            "a_plus": [amplitudes.a_plus.real, amplitudes.a_plus.imag],
            "cp_magnitude": amplitudes.cp_magnitude,
        }
        result = ScenarioResult("decompose")
        result.add_document("decompose", content)
        result.summary = content
        return result

    # ---------- Output ----------

    def emit_outputs(self, result: ScenarioResult, fmt: str = "csv",
                     wall_clock_s: Optional[float] = None) -> List[str]:
        """
        Write tables and documents, then the manifest.

        Args:
            result: Scenario output.
            fmt: ``csv`` writes tables as CSV; ``structured-text`` writes
                them as JSON documents.
            wall_clock_s: Run duration recorded in the manifest.

        Returns:
            Paths written, manifest last.

        Raises:
            OutputError: A writer failed.
        """
        if fmt not in FORMATS:
            raise ConfigError([f"format: must be one of {', '.join(FORMATS)}"])

        out_dir = self.output_dir
        self.__bytes_written = 0
        names: List[str] = []
        for table in result.tables:
            if fmt == "csv":
                names.append(self.__write("csv", out_dir / table.filename, table))
            else:
                document = Document(table.name, {
                    "header": list(table.header_lines),
                    "columns": list(table.columns),
                    "rows": [list(row) for row in table.rows],
                })
                names.append(self.__write("structured-text", out_dir / document.filename, document))
        for document in result.documents:
            names.append(self.__write("structured-text", out_dir / document.filename, document))

        manifest = {
            "scenario": result.scenario,
            "config": self.__config.resolved(),
            "wall_clock_s": wall_clock_s,
            "summary": result.summary,
            "validation": {"valid": result.is_valid, "reports": result.validations},
            "outputs": [Path(name).name for name in names],
        }
        names.append(self.__write("manifest", out_dir / MANIFEST_NAME, manifest))
        self.__written = names
        return names

    def __write(self, writer_type: str, path: Path, data: Any) -> str:
        writer = WriterFactory.create_writer(writer_type, str(path))
        if not writer.write(data):
            raise OutputError(f"Could not write {path}: {'; '.join(writer.write_errors)}")
        self.__bytes_written += writer.bytes_written
        logger.debug("Wrote %s (%d bytes)", path, writer.bytes_written)
        return str(path)

    # ---------- Pipeline ----------

    def execute(self, command: str, fmt: str = "csv", **kwargs: Any) -> ScenarioResult:
        """
        Initialize, run one command and emit its outputs.

        Args:
            command: ``scenario``, ``sweep``, ``simulate``, ``cycle``,
                ``adiabaticity`` or ``decompose``.
            fmt: Output format for tables.
            **kwargs: Command arguments.
        """
        self.initialize()
        self.__start_time = datetime.now()

        if command == "scenario":
            result = self.run_scenario(kwargs["name"])
        elif command == "sweep":
            result = self.sweep_map()
        elif command == "simulate":
            result = self.simulate()
        elif command == "cycle":
            result = self.evaluate_cycle(**kwargs)
        elif command == "adiabaticity":
            result = self.evaluate_adiabaticity(**kwargs)
        elif command == "decompose":
            result = self.decompose(**kwargs)
        else:
            raise ValueError(f"Unknown command: '{command}'")

        self.__end_time = datetime.now()
        self.emit_outputs(result, fmt, self.__execution_time())
        self.__print_summary(result)
        return result

    def __execution_time(self) -> float:
        if not self.__start_time or not self.__end_time:
            return 0.0
        return (self.__end_time - self.__start_time).total_seconds()

    def __print_summary(self, result: ScenarioResult) -> None:
        print("\n✓ EXECUTION COMPLETED")
        print(f"Command: {result.scenario}")
        print(f"Output: {self.output_dir}")
        print(f"Files: {len(self.__written)} ({Formatter.format_file_size(self.__bytes_written)})")
        if result.tables:
            rows = sum(len(table) for table in result.tables)
            print(f"Rows: {Formatter.format_number(rows)}")
        if result.validations:
            print(f"Validation: {'passed' if result.is_valid else 'FAILED'}")
        print(f"Duration: {Formatter.format_duration(self.__execution_time())}")


__all__ = ["SimulationOrchestrator", "MANIFEST_NAME", "FORMATS"]
