"""DuckDB persistence for spectra computed in parameter sweeps."""

from pathlib import Path
from typing import Any

try:
    import duckdb
except ImportError:
    duckdb = None

try:
    import polars as pl
except ImportError:
    pl = None

from ..core.eigensolver import Spectrum

SPECTRA_COLUMNS = (
    "run_id",
    "method",
    "omega",
    "k",
    "epsilon",
    "branch",
    "n",
    "energy",
    "est_error",
)

SPECTRA_SCHEMA = """
CREATE TABLE IF NOT EXISTS spectra (
    run_id VARCHAR,
    method VARCHAR,
    omega DOUBLE,
    k DOUBLE,
    epsilon DOUBLE,
    branch VARCHAR,
    n INTEGER,
    energy DOUBLE,
    est_error DOUBLE
)
"""


class ResultsStore:
    """DuckDB store for spectra produced by parameter sweeps."""

    def __init__(self, db_path: str | Path = ":memory:", name: str = "default"):
        """Point the store at a database; nothing is opened until first use.

        Args:
            db_path: DuckDB file, or ":memory:"
            name: Label for this store
        """
        if duckdb is None:
            raise ImportError("DuckDB is required but not installed")

        self.db_path = str(db_path)
        self.name = name
        self._connection = None

    @property
    def connection(self):
        """Get or create the DuckDB connection, creating the spectra table on first use."""
        if self._connection is None:
            self._connection = duckdb.connect(self.db_path)
            self._connection.execute(SPECTRA_SCHEMA)
        return self._connection

    def write_spectrum(self, spectrum: Spectrum, run_id: str) -> int:
        """Append every level of a spectrum as one row.

        Args:
            spectrum: Spectrum to store
            run_id: Label grouping the rows of one sweep

        Returns:
            Number of rows written
        """
        params = spectrum.params
        rows = [
            (
                run_id,
                spectrum.method.value,
                params.omega,
                params.k,
                params.epsilon,
                params.branch.value,
                n,
                energy,
                error,
            )
            for n, (energy, error) in enumerate(zip(spectrum.energies, spectrum.est_error))
        ]
        placeholders = ", ".join("?" for _ in SPECTRA_COLUMNS)
        self.connection.executemany(f"INSERT INTO spectra VALUES ({placeholders})", rows)
        return len(rows)

    def fetch_query(self, query: str, parameters: list[Any] | None = None) -> "pl.DataFrame":
        """Run SQL against the store and collect the rows column by column.

        Args:
            query: SQL text with ``?`` placeholders
            parameters: Values bound to the placeholders

        Raises:
            ImportError: If polars is not available
        """
        if pl is None:
            raise ImportError("Polars is required but not installed")

        cursor = self.connection.execute(query, parameters or [])
        columns = [column[0] for column in cursor.description]
        rows = cursor.fetchall()
        return pl.DataFrame({name: [row[i] for row in rows] for i, name in enumerate(columns)})

    def fetch_spectra(self, run_id: str | None = None) -> "pl.DataFrame":
        """All stored levels, or those of one run, ordered by k, branch and level."""
        query = "SELECT * FROM spectra"
        parameters = []
        if run_id is not None:
            query += " WHERE run_id = ?"
            parameters.append(run_id)
        return self.fetch_query(query + " ORDER BY k, branch, n", parameters)

    def list_tables(self) -> list[str]:
        """Names of the tables present in the database."""
        result = self.connection.execute("SHOW TABLES").fetchall()
        return [row[0] for row in result]

    def close(self) -> None:
        """Release the DuckDB connection; the next query reopens it."""
        if self._connection:
            self._connection.close()
            self._connection = None


def create_memory_store(name: str = "memory") -> ResultsStore:
    """A throwaway store, used by tests and one-off sweeps."""
    return ResultsStore(":memory:", name)


def create_file_store(file_path: str | Path, name: str | None = None) -> ResultsStore:
    """A store backed by a DuckDB file, named after the file stem unless given a name."""
    file_path = Path(file_path)
    if name is None:
        name = file_path.stem
    return ResultsStore(file_path, name)
