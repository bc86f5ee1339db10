"""Regression of computed spectra against the published reference tables."""

import json
import logging
from dataclasses import dataclass
from importlib import resources
from typing import Any

try:
    import polars as pl
except ImportError:
    pl = None

from .eigensolver import DEFAULT_SOLVER, SolverConfig, solve_branches
from .errors import DomainError
from .model import Branch, ModelParams
from .perturbation import corrected_energies

logger = logging.getLogger(__name__)

TABLE_IDS = ("1", "2", "3")


@dataclass(frozen=True)
class ReferenceTable:
    """One published table of six level pairs with its acceptance tolerances."""

    table_id: str
    title: str
    method: str
    params: ModelParams
    plus: tuple[float, ...]
    minus: tuple[float, ...]
    tolerance: float
    splitting_tolerance: float | None


def load_reference_tables() -> dict[str, ReferenceTable]:
    """Read the bundled reference tables."""
    source = resources.files("branched").joinpath("data/reference_tables.json")
    raw = json.loads(source.read_text(encoding="utf-8"))
    tables = {}
    for table_id, entry in raw.items():
        tables[table_id] = ReferenceTable(
            table_id=table_id,
            title=entry["title"],
            method=entry["method"],
            params=ModelParams(entry["omega"], entry["k"], entry["epsilon"]),
            plus=tuple(entry["plus"]),
            minus=tuple(entry["minus"]),
            tolerance=entry["tolerance"],
            splitting_tolerance=entry["splitting_tolerance"],
        )
    return tables


@dataclass(frozen=True)
class TableReport:
    """Computed versus reference values of one table.

    Attributes:
        reference: The reference table
        plus: Computed Plus-branch energies
        minus: Computed Minus-branch energies
        max_deviation: Largest absolute difference over both branches
        splitting_deviation: Largest difference of the branch splittings E- - E+
    """

    reference: ReferenceTable
    plus: tuple[float, ...]
    minus: tuple[float, ...]
    max_deviation: float
    splitting_deviation: float

    @property
    def passed(self) -> bool:
        ok = self.max_deviation <= self.reference.tolerance
        if self.reference.splitting_tolerance is not None:
            ok = ok and self.splitting_deviation <= self.reference.splitting_tolerance
        return ok

    def to_dict(self) -> dict[str, Any]:
        return {
            "table": self.reference.table_id,
            "title": self.reference.title,
            "params": self.reference.params.to_dict(),
            "reference_plus": list(self.reference.plus),
            "computed_plus": list(self.plus),
            "reference_minus": list(self.reference.minus),
            "computed_minus": list(self.minus),
            "max_deviation": self.max_deviation,
            "tolerance": self.reference.tolerance,
            "splitting_deviation": self.splitting_deviation,
            "splitting_tolerance": self.reference.splitting_tolerance,
            "passed": self.passed,
        }

    def to_frame(self) -> "pl.DataFrame":
        if pl is None:
            raise ImportError("Polars is required but not installed")
        return pl.DataFrame(
            {
                "n": list(range(len(self.plus))),
                "reference_plus": list(self.reference.plus),
                "computed_plus": list(self.plus),
                "reference_minus": list(self.reference.minus),
                "computed_minus": list(self.minus),
            }
        )


def reproduce_table(table_id: str | int, config: SolverConfig = DEFAULT_SOLVER) -> TableReport:
    """Recompute a reference table with the matching pipeline and compare.

    Tables 1 and 2 use the finite-difference solver on both branches, table 3 the
    first-order perturbative energies.
    """
    table_id = str(table_id)
    tables = load_reference_tables()
    if table_id not in tables:
        raise DomainError(f"unknown table {table_id!r}; choose one of {', '.join(TABLE_IDS)}")
    reference = tables[table_id]
    n_levels = len(reference.plus)

    if reference.method == "Perturbation":
        plus = tuple(r.e1 for r in corrected_energies(reference.params, n_levels))
        minus = tuple(
            r.e1 for r in corrected_energies(reference.params.with_branch(Branch.MINUS), n_levels)
        )
    else:
        spectra = solve_branches(reference.params, n_levels, config=config)
        plus = spectra[Branch.PLUS].energies
        minus = spectra[Branch.MINUS].energies

    deviation = max(
        abs(c - r) for c, r in zip(plus + minus, reference.plus + reference.minus)
    )
    splitting = max(
        abs((cm - cp) - (rm - rp))
        for cp, cm, rp, rm in zip(plus, minus, reference.plus, reference.minus)
    )
    logger.info(
        "Table %s: max deviation %.3e, splitting deviation %.3e", table_id, deviation, splitting
    )
    return TableReport(
        reference=reference,
        plus=tuple(plus),
        minus=tuple(minus),
        max_deviation=deviation,
        splitting_deviation=splitting,
    )
