"""Run configuration: validated per-command records and the JSON config file."""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .core.eigensolver import SolverConfig
from .core.errors import ConfigurationError
from .core.export import FORMATS
from .core.model import Branch, ModelParams

BRANCH_CHOICES = ("plus", "minus", "both")


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI command needs, checked before any computation starts.

    Attributes:
        command: Subcommand name
        omega: Angular frequency
        k: Anharmonicity
        epsilon: Ordering parameter
        branch: "plus", "minus" or "both"
        levels: Number of levels
        solver: Finite-difference settings
        out: Output path, or None for a console table
        format: "json" or "csv"
        extra: Command-specific values (amplitudes, polynomial string, ...)
    """

    command: str
    omega: float = 10.0
    k: float = 1.0
    epsilon: float = 0.25
    branch: str = "plus"
    levels: int = 6
    solver: SolverConfig = field(default_factory=SolverConfig)
    out: Path | None = None
    format: str = "json"
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Validate the fields that the core modules would otherwise reject late."""
        if self.branch not in BRANCH_CHOICES:
            raise ConfigurationError(f"branch must be one of {BRANCH_CHOICES}, got {self.branch}")
        if self.format not in FORMATS:
            raise ConfigurationError(f"format must be one of {FORMATS}, got {self.format}")
        if self.levels < 1:
            raise ConfigurationError(f"levels must be positive, got {self.levels}")
        # Builds and validates the physical parameters.
        self.params_for(self.branches[0])

    @property
    def branches(self) -> tuple[Branch, ...]:
        if self.branch == "both":
            return (Branch.PLUS, Branch.MINUS)
        return (Branch(self.branch),)

    def params_for(self, branch: Branch) -> ModelParams:
        return ModelParams(self.omega, self.k, self.epsilon, branch)


def load_config_file(path: str | Path) -> dict[str, dict[str, Any]]:
    """Read a JSON config file keyed by subcommand name.

    The result is used as click's ``default_map``, so flags given on the command line
    override values from the file.

    Raises:
        ConfigurationError: If the file is not a JSON object of objects
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"cannot read config file {path}: {e}") from e
    if not isinstance(data, dict) or not all(isinstance(v, dict) for v in data.values()):
        raise ConfigurationError(
            f"config file {path} must map subcommand names to objects of option values"
        )
    # click's default_map uses parameter names, which have underscores.
    return {
        command: {key.replace("-", "_"): value for key, value in options.items()}
        for command, options in data.items()
    }
