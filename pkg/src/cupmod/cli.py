"""
The ``cupmod`` command line.

Every subcommand is a ``Command`` with ``add_arguments`` and ``handle``;
raw argparse options are turned into a validated ``RunConfig`` first.
Exit codes: 0 on success, 1 when ``--verify`` (or ``verify``) finds a
difference, 2 on usage and input errors.
"""

import abc
import argparse
import concurrent.futures
import dataclasses
import json
import logging
import math
import pathlib
import sys
from collections.abc import Callable, Mapping, Sequence
from typing import Any, ClassVar, TextIO

from typing_extensions import Self

from cupmod import (
    barcodes,
    complex,
    config,
    cupcore,
    examples,
    geometry,
    oracle,
    partitions,
    persistence,
    relative,
)


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DIFF = 1
EXIT_USAGE = 2

# --verbosity levels, quietest first.
VERBOSITY_LEVELS = {
    0: logging.CRITICAL,
    1: logging.WARNING,
    2: logging.INFO,
    3: logging.DEBUG,
}

DUALITY = "duality"


class CommandError(Exception):
    pass


LIBRARY_ERRORS: tuple[type[Exception], ...] = (
    complex.FiltrationError,
    barcodes.BarcodeError,
    cupcore.CupModuleError,
    partitions.PartitionError,
    oracle.OracleError,
    geometry.GeometryError,
    examples.ExampleError,
    config.ConfigurationError,
    OSError,
)


@dataclasses.dataclass(frozen=True, kw_only=True)
class RunConfig:
    command: str
    input: pathlib.Path | None = None
    input_format: complex.FileFormat = complex.FileFormat.TEXT
    max_dim: int = 2
    threshold: float | None = None
    k: int | None = None
    all_k: bool = False
    lazy: bool = False
    wanted_partitions: tuple[partitions.Partition, ...] = ()
    max_q: int | None = None
    interval: tuple[int, int] | None = None
    all_intervals: bool = False
    output_format: str = "json"
    output: pathlib.Path | None = None
    verify: bool = False
    specs: tuple[str, ...] = ()
    limit: int | None = None
    seed: int = 0
    random: int = 0
    vertices: int = 6
    density: float = 0.5
    degree: int | None = None
    others: tuple[pathlib.Path, ...] = ()
    example: examples.Example | None = None
    threads: int = 1

    @classmethod
    def from_dictionary(
        cls, options: dict[str, Any], settings: config.Settings
    ) -> Self:
        interval = options.pop("interval", None)
        example = options.pop("example", None)
        return cls(
            command=options.pop("command"),
            input=_Parser.optional_path(options.pop("input", None)),
            input_format=complex.FileFormat(options.pop("input_format", "text")),
            max_dim=_Parser.required_non_negative_int(options.pop("max_dim", 2)),
            threshold=_Parser.optional_non_negative_float(
                options.pop("threshold", None)
            ),
            k=options.pop("k", None),
            all_k=bool(options.pop("all_k", False)),
            lazy=bool(options.pop("lazy", False)),
            wanted_partitions=tuple(
                partitions.Partition.parse(text)
                for text in options.pop("partition", None) or ()
            ),
            max_q=options.pop("max_q", None),
            interval=None if interval is None else (interval[0], interval[1]),
            all_intervals=bool(options.pop("all_intervals", False)),
            output_format=options.pop("format", "json"),
            output=_Parser.optional_path(options.pop("output", None)),
            verify=bool(options.pop("verify", False)),
            specs=tuple(options.pop("spec", None) or ()),
            limit=options.pop("limit", None) or settings.oracle_limit,
            seed=_Parser.optional_seed(options.pop("seed", None), settings),
            random=_Parser.required_non_negative_int(options.pop("random", 0)),
            vertices=_Parser.required_non_negative_int(options.pop("vertices", 6)),
            density=float(options.pop("density", 0.5)),
            degree=options.pop("degree", None),
            others=tuple(
                pathlib.Path(path) for path in options.pop("barcodes", None) or ()
            ),
            example=None if example is None else examples.Example.parse(example),
            threads=settings.threads,
        )

    def validate(self) -> None:
        if self.k is not None and self.k < 2:
            raise CommandError(f"--k must be at least 2, got {self.k}.")
        if self.k is not None and self.all_k:
            raise CommandError("--k and --all-k are mutually exclusive.")
        if self.interval is not None and self.all_intervals:
            raise CommandError("--interval and --all-intervals are mutually exclusive.")
        if self.interval is not None and self.interval[0] > self.interval[1]:
            raise CommandError(
                f"--interval {self.interval[0]} {self.interval[1]} is empty."
            )
        if self.max_q is not None and self.max_q < 2:
            raise CommandError(f"--max-q must be at least 2, got {self.max_q}.")
        if not 0.0 <= self.density <= 1.0:
            raise CommandError(f"--density must lie in [0, 1], got {self.density}.")
        if self.output_format not in ("json", "table"):
            raise CommandError(f"Unknown output format {self.output_format!r}.")


class _Parser:
    @classmethod
    def optional_path(cls, value: str | None) -> pathlib.Path | None:
        if value is None:
            return None
        return pathlib.Path(value)

    @classmethod
    def required_non_negative_int(cls, value: Any) -> int:
        if (not isinstance(value, int)) or (value < 0):
            raise CommandError(f"{value} is not a non-negative integer.")
        return value

    @classmethod
    def optional_non_negative_float(cls, value: float | None) -> float | None:
        if value is None:
            return None
        if math.isnan(value) or value < 0:
            raise CommandError(f"{value} is not a non-negative number.")
        return float(value)

    @classmethod
    def optional_seed(cls, value: int | None, settings: config.Settings) -> int:
        return settings.seed if value is None else value


class Emitter:
    """
    Writes documents to ``stream`` as JSON or as plain-text tables.
    """

    COLUMNS = (
        "degree",
        "death_index",
        "birth_index",
        "birth_value",
        "death_value",
        "partition",
    )

    def __init__(
        self, stream: TextIO, output_format: str, *, errors: TextIO | None = None
    ) -> None:
        self.stream = stream
        self.output_format = output_format
        self.errors = sys.stderr if errors is None else errors

    def barcode(
        self, bars: Sequence[barcodes.Bar], filtration: complex.Filtration
    ) -> None:
        if self.output_format == "json":
            self.stream.write(barcodes.dumps(bars, filtration) + "\n")
        else:
            self._table(
                [bar.to_record(filtration) for bar in barcodes.sort_bars(bars)]
            )

    def barcode_groups(
        self,
        groups: Mapping[str, Sequence[barcodes.Bar]],
        filtration: complex.Filtration,
    ) -> None:
        if self.output_format == "json":
            document = {
                label: [
                    bar.to_record(filtration) for bar in barcodes.sort_bars(bars)
                ]
                for label, bars in groups.items()
            }
            self.document(document)
            return
        for label, bars in groups.items():
            self.stream.write(f"[{label}]\n")
            self._table(
                [bar.to_record(filtration) for bar in barcodes.sort_bars(bars)]
            )

    def document(self, document: Any) -> None:
        if self.output_format == "json":
            self.stream.write(json.dumps(document, indent=2, allow_nan=False) + "\n")
        elif isinstance(document, Mapping):
            for key, value in document.items():
                self.stream.write(f"{key}: {value}\n")
        elif isinstance(document, list):
            for item in document:
                self.stream.write(f"{item}\n")
        else:
            self.stream.write(f"{document}\n")

    def matrix(self, rows: Sequence[Sequence[int]]) -> None:
        if self.output_format == "json":
            self.document([list(row) for row in rows])
            return
        width = max((len(str(x)) for row in rows for x in row), default=1)
        for row in rows:
            self.stream.write(" ".join(str(x).rjust(width) for x in row) + "\n")

    def _table(self, records: Sequence[Mapping[str, Any]]) -> None:
        rows = [list(self.COLUMNS)]
        rows += [
            ["-" if record[c] is None else str(record[c]) for c in self.COLUMNS]
            for record in records
        ]
        widths = [max(len(row[i]) for row in rows) for i in range(len(self.COLUMNS))]
        for row in rows:
            cells = [cell.ljust(width) for cell, width in zip(row, widths)]
            self.stream.write("  ".join(cells).rstrip() + "\n")


FastBarcode = Callable[[complex.Filtration], Sequence[barcodes.Bar]]


def fast_barcode(spec: oracle.ModuleSpec) -> FastBarcode:
    """
    The driver computing the module ``spec`` names.
    """
    kind = spec.kind
    if kind is oracle.ModuleKind.ORDINARY:
        return lambda f: persistence.persistent_cohomology(f).bars
    if kind is oracle.ModuleKind.REL_ORDINARY:
        return lambda f: persistence.relative_persistent_cohomology(f).bars
    if kind is oracle.ModuleKind.KCUP:
        assert spec.k is not None
        k = spec.k
        return lambda f: cupcore.order_k_cup_pers(f, k).bars
    if kind is oracle.ModuleKind.REL_KCUP:
        assert spec.k is not None
        k = spec.k
        return lambda f: relative.rel_order_k_cup_pers(f, k).bars
    assert spec.partition is not None
    partition = partitions.Partition(parts=spec.partition)
    return lambda f: partitions.extend_cup_pers_k_parts(f, partition).bars


def duality_report(filtration: complex.Filtration) -> dict[str, Any]:
    mismatches = relative.duality_mismatches(
        persistence.persistent_cohomology(filtration).bars,
        persistence.relative_persistent_cohomology(filtration).bars,
    )
    return {
        "spec": DUALITY,
        "ok": not mismatches,
        "mismatches": [
            {"bar": list(m.bar.key), "expected": list(m.expected), "reason": m.reason}
            for m in mismatches
        ],
    }


def run_verification(
    filtration: complex.Filtration,
    checks: Sequence[tuple[oracle.ModuleSpec, Sequence[barcodes.Bar]]],
    *,
    limit: int | None,
    threads: int,
) -> list[oracle.VerificationReport]:
    """
    Compare every ``(spec, bars)`` pair with the oracle, ``threads`` at a
    time.
    """
    if threads <= 1 or len(checks) <= 1:
        return [
            oracle.verify(filtration, bars, spec, limit=limit) for spec, bars in checks
        ]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(oracle.verify, filtration, bars, spec, limit=limit)
            for spec, bars in checks
        ]
        return [future.result() for future in futures]


class Command(abc.ABC):
    name: ClassVar[str]
    help: ClassVar[str]

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        pass

    @abc.abstractmethod
    def handle(self, run: RunConfig, out: Emitter) -> int: ...  # pragma: no cover

    def load(self, run: RunConfig) -> complex.Filtration:
        if run.input is None:
            raise CommandError(f"{self.name} needs an input filtration.")
        return complex.load_filtration(
            run.input,
            run.input_format,
            max_dim=run.max_dim,
            threshold=run.threshold,
        )

    def verified(
        self,
        run: RunConfig,
        out: Emitter,
        filtration: complex.Filtration,
        checks: Sequence[tuple[oracle.ModuleSpec, Sequence[barcodes.Bar]]],
    ) -> int:
        if not run.verify:
            return EXIT_OK
        reports = run_verification(
            filtration, checks, limit=run.limit, threads=run.threads
        )
        for report in reports:
            out.errors.write(json.dumps(report.to_dict()) + "\n")
        return EXIT_OK if all(report.ok for report in reports) else EXIT_DIFF


def _add_input(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("input", help="Filtration file.")
    parser.add_argument(
        "--input-format",
        dest="input_format",
        choices=[f.value for f in complex.FileFormat],
        default=complex.FileFormat.TEXT.value,
        help=(
            "Format of the input. A distance matrix is turned into its Rips "
            "filtration. Defaults to text."
        ),
    )
    parser.add_argument(
        "--max-dim",
        dest="max_dim",
        type=int,
        default=2,
        help="Top simplex dimension for distance-matrix input. Defaults to 2.",
    )
    parser.add_argument(
        "--threshold",
        type=float,
        required=False,
        help="Largest simplex diameter for distance-matrix input.",
    )


def _add_verify(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--verify",
        action="store_true",
        help=(
            "Also compute the barcode with the brute-force oracle and report "
            "differences on stderr; exits with 1 when they differ."
        ),
    )
    parser.add_argument(
        "--limit",
        type=int,
        required=False,
        help="Simplex cap of the oracle. Defaults to CUPMOD_ORACLE_LIMIT.",
    )


class BarcodeCommand(Command):
    name = "barcode"
    help = "Ordinary persistent cohomology barcode."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        _add_input(parser)
        _add_verify(parser)

    def handle(self, run: RunConfig, out: Emitter) -> int:
        filtration = self.load(run)
        bars = persistence.persistent_cohomology(filtration).bars
        out.barcode(bars, filtration)
        spec = oracle.ModuleSpec(kind=oracle.ModuleKind.ORDINARY)
        return self.verified(run, out, filtration, [(spec, bars)])


class RelBarcodeCommand(Command):
    name = "rel-barcode"
    help = "Relative persistent cohomology barcode of (K, K_j)."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        _add_input(parser)
        _add_verify(parser)

    def handle(self, run: RunConfig, out: Emitter) -> int:
        filtration = self.load(run)
        bars = persistence.relative_persistent_cohomology(filtration).bars
        out.barcode(bars, filtration)
        spec = oracle.ModuleSpec(kind=oracle.ModuleKind.REL_ORDINARY)
        return self.verified(run, out, filtration, [(spec, bars)])


class CupBarcodeCommand(Command):
    name = "cup-barcode"
    help = "Barcode of the persistent k-cup module."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        _add_input(parser)
        parser.add_argument(
            "--k", type=int, required=False, help="Order of the module. Defaults to 2."
        )
        parser.add_argument(
            "--all-k",
            dest="all_k",
            action="store_true",
            help="Every order from 2 up to the dimension of the complex.",
        )
        parser.add_argument(
            "--lazy",
            action="store_true",
            help="Restrict the coboundary matrix only where bars begin or end.",
        )
        _add_verify(parser)

    def handle(self, run: RunConfig, out: Emitter) -> int:
        filtration = self.load(run)
        basis = persistence.persistent_cohomology(filtration)
        if run.all_k:
            results = cupcore.cup_barcodes_up_to(filtration, basis=basis)
            out.barcode_groups(
                {str(k): barcode.bars for k, barcode in results.items()}, filtration
            )
            checks = [
                (oracle.ModuleSpec(kind=oracle.ModuleKind.KCUP, k=k), barcode.bars)
                for k, barcode in results.items()
            ]
            return self.verified(run, out, filtration, checks)
        k = run.k or 2
        barcode = cupcore.order_k_cup_pers(
            filtration, k, basis=basis, lazy_restriction=run.lazy
        )
        out.barcode(barcode.bars, filtration)
        spec = oracle.ModuleSpec(kind=oracle.ModuleKind.KCUP, k=k)
        return self.verified(run, out, filtration, [(spec, barcode.bars)])


class RelCupBarcodeCommand(Command):
    name = "rel-cup-barcode"
    help = "Barcode of the relative persistent k-cup module."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        _add_input(parser)
        parser.add_argument(
            "--k", type=int, required=False, help="Order of the module. Defaults to 2."
        )
        _add_verify(parser)

    def handle(self, run: RunConfig, out: Emitter) -> int:
        filtration = self.load(run)
        k = run.k or 2
        barcode = relative.rel_order_k_cup_pers(filtration, k)
        out.barcode(barcode.bars, filtration)
        spec = oracle.ModuleSpec(kind=oracle.ModuleKind.REL_KCUP, k=k)
        return self.verified(run, out, filtration, [(spec, barcode.bars)])


class PartitionBarcodesCommand(Command):
    name = "partition-barcodes"
    help = "Barcodes of the partition modules."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        _add_input(parser)
        parser.add_argument(
            "--partition",
            action="append",
            help=(
                "A partition such as 1+1+2. May be repeated. Defaults to every "
                "partition up to the dimension of the complex."
            ),
        )
        parser.add_argument(
            "--max-q",
            dest="max_q",
            type=int,
            required=False,
            help="Largest partitioned degree when no --partition is given.",
        )
        _add_verify(parser)

    def handle(self, run: RunConfig, out: Emitter) -> int:
        filtration = self.load(run)
        results = partitions.compute_partition_barcodes(
            filtration,
            max_q=run.max_q,
            partitions=run.wanted_partitions or None,
            threads=run.threads,
        )
        out.barcode_groups(
            {str(p): barcode.bars for p, barcode in results.items()}, filtration
        )
        checks = [
            (
                oracle.ModuleSpec(kind=oracle.ModuleKind.PARTITION, partition=p.parts),
                barcode.bars,
            )
            for p, barcode in results.items()
        ]
        return self.verified(run, out, filtration, checks)


class CupLengthCommand(Command):
    name = "cup-length"
    help = "Persistent cup-length of an interval, or of every interval."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        _add_input(parser)
        parser.add_argument(
            "--interval",
            nargs=2,
            type=int,
            metavar=("A", "B"),
            help="The interval [A, B] of insertion indices.",
        )
        parser.add_argument(
            "--all-intervals",
            dest="all_intervals",
            action="store_true",
            help="The upper-triangular table of every interval.",
        )

    def handle(self, run: RunConfig, out: Emitter) -> int:
        filtration = self.load(run)
        basis = persistence.persistent_cohomology(filtration)
        cups = cupcore.cup_barcodes_up_to(filtration, basis=basis)
        if run.all_intervals:
            table = cupcore.cup_length_table(
                cups, filtration.n, ordinary=basis.bars
            )
            out.matrix(table.tolist())
            return EXIT_OK
        a, b = run.interval or (filtration.n, filtration.n)
        length = cupcore.cup_length(cups, a, b, ordinary=basis.bars)
        out.document({"a": a, "b": b, "cup_length": length})
        return EXIT_OK


class _GeometricCommand(Command):
    kind: ClassVar[geometry.FiltrationKind]

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "--points",
            dest="input",
            required=True,
            help="CSV file with one point per row.",
        )
        parser.add_argument(
            "--max-dim", dest="max_dim", type=int, default=2, help="Defaults to 2."
        )
        parser.add_argument("--threshold", type=float, required=False)
        parser.add_argument(
            "--output",
            required=False,
            help="Write the filtration here instead of to stdout.",
        )

    def cloud(self, run: RunConfig) -> geometry.PointCloud:
        assert run.input is not None
        return geometry.PointCloud.load_points(run.input)

    def handle(self, run: RunConfig, out: Emitter) -> int:
        filtration = geometry.build_filtration(
            self.cloud(run), self.kind, max_dim=run.max_dim, threshold=run.threshold
        )
        header = [
            f"{self.kind.value} filtration of {run.input}",
            *geometry.metadata(max_dim=run.max_dim, threshold=run.threshold),
        ]
        if run.output is None:
            out.stream.write(complex.dumps_filtration(filtration, header=header))
        else:
            complex.dump_filtration(filtration, run.output, header=header)
        return EXIT_OK


class RipsCommand(_GeometricCommand):
    name = "rips"
    help = "Rips filtration of a point cloud, valued by simplex diameter."
    kind = geometry.FiltrationKind.RIPS

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        super().add_arguments(parser)
        parser.add_argument(
            "--distance-matrix",
            dest="input_format",
            action="store_const",
            const=complex.FileFormat.DISTANCE_MATRIX.value,
            default=complex.FileFormat.TEXT.value,
            help="Read the --points file as a distance matrix instead.",
        )

    def cloud(self, run: RunConfig) -> geometry.PointCloud:
        assert run.input is not None
        if run.input_format is complex.FileFormat.DISTANCE_MATRIX:
            return geometry.PointCloud.load_distance_matrix(run.input)
        return geometry.PointCloud.load_points(run.input)


class CechCommand(_GeometricCommand):
    name = "cech"
    help = "Čech filtration of a point cloud, valued by enclosing-ball radius."
    kind = geometry.FiltrationKind.CECH


class BottleneckCommand(Command):
    name = "bottleneck"
    help = "Bottleneck distance between two barcode JSON files."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("barcodes", nargs=2, help="Two barcode JSON files.")
        parser.add_argument(
            "--degree",
            type=int,
            required=False,
            help="Only compare bars of this degree.",
        )

    @staticmethod
    def diagrams(path: pathlib.Path) -> dict[int, list[tuple[float, float]]]:
        try:
            records = json.loads(path.read_text(encoding="utf-8"))
            by_degree: dict[int, list[tuple[float, float]]] = {}
            for record in records:
                birth = record["birth_value"]
                death = record["death_value"]
                by_degree.setdefault(int(record["degree"]), []).append(
                    (
                        -math.inf if birth is None else float(birth),
                        math.inf if death is None else float(death),
                    )
                )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise barcodes.InvalidRecord(f"Cannot read a barcode from {path}.") from exc
        return by_degree

    def handle(self, run: RunConfig, out: Emitter) -> int:
        first, second = (self.diagrams(path) for path in run.others)
        degrees = sorted(set(first) | set(second))
        if run.degree is not None:
            degrees = [run.degree]
        distances = {
            str(p): geometry.bottleneck(first.get(p, []), second.get(p, []))
            for p in degrees
        }
        out.document(
            {
                "degrees": {p: _finite_or_none(d) for p, d in distances.items()},
                "bottleneck": _finite_or_none(max(distances.values(), default=0.0)),
            }
        )
        return EXIT_OK


def _finite_or_none(value: float) -> float | None:
    return None if math.isinf(value) else value


class VerifyCommand(Command):
    name = "verify"
    help = (
        "Compare driver barcodes with the brute-force oracle, on a file or on "
        "seeded random filtrations."
    )

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("input", nargs="?", help="Filtration file.")
        parser.add_argument(
            "--spec",
            action="append",
            help=(
                "Module to check: ordinary, rel-ordinary, kcup:K, rel-kcup:K, "
                "partition:1+1 or duality. May be repeated. Defaults to "
                "ordinary and kcup:2."
            ),
        )
        parser.add_argument(
            "--random",
            type=int,
            default=0,
            help="Check this many seeded random filtrations instead of a file.",
        )
        parser.add_argument(
            "--seed",
            type=int,
            required=False,
            help="First seed for --random. Defaults to CUPMOD_SEED.",
        )
        parser.add_argument("--vertices", type=int, default=6)
        parser.add_argument("--max-dim", dest="max_dim", type=int, default=2)
        parser.add_argument("--density", type=float, default=0.5)
        parser.add_argument(
            "--limit",
            type=int,
            required=False,
            help="Simplex cap of the oracle. Defaults to CUPMOD_ORACLE_LIMIT.",
        )

    def filtrations(self, run: RunConfig) -> list[tuple[str, complex.Filtration]]:
        if run.random:
            return [
                (
                    f"seed {seed}",
                    examples.random_filtration(
                        seed, run.vertices, run.max_dim, run.density
                    ),
                )
                for seed in range(run.seed, run.seed + run.random)
            ]
        if run.input is None:
            raise CommandError("verify needs an input file or --random.")
        return [(str(run.input), complex.load_filtration(run.input))]

    def handle(self, run: RunConfig, out: Emitter) -> int:
        texts = run.specs or ("ordinary", "kcup:2")
        specs = [oracle.ModuleSpec.parse(t) for t in texts if t != DUALITY]
        results: list[dict[str, Any]] = []
        for label, filtration in self.filtrations(run):
            checks = [(spec, fast_barcode(spec)(filtration)) for spec in specs]
            reports = run_verification(
                filtration, checks, limit=run.limit, threads=run.threads
            )
            documents = [report.to_dict() for report in reports]
            if DUALITY in texts:
                documents.append(duality_report(filtration))
            for document in documents:
                results.append({"input": label, **document})
        out.document(results)
        return EXIT_OK if all(result["ok"] for result in results) else EXIT_DIFF


class GenExampleCommand(Command):
    name = "gen-example"
    help = "Write a curated example complex or point cloud."

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "example", choices=[example.value for example in examples.Example]
        )
        parser.add_argument(
            "--output",
            required=False,
            help="Target file. Defaults to <example>.flt, or <example>.csv for points.",
        )

    def handle(self, run: RunConfig, out: Emitter) -> int:
        assert run.example is not None
        path = run.output
        if path is None:
            points = run.example is examples.Example.HEXAGON_POINTS
            suffix = ".csv" if points else ".flt"
            path = pathlib.Path(run.example.value + suffix)
        examples.generate_example(run.example, path)
        out.document({"example": run.example.value, "path": str(path)})
        return EXIT_OK


COMMANDS: tuple[type[Command], ...] = (
    BarcodeCommand,
    RelBarcodeCommand,
    CupBarcodeCommand,
    RelCupBarcodeCommand,
    PartitionBarcodesCommand,
    CupLengthCommand,
    RipsCommand,
    CechCommand,
    BottleneckCommand,
    VerifyCommand,
    GenExampleCommand,
)


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, Command]]:
    parser = argparse.ArgumentParser(
        prog="cupmod",
        description="Persistent cup modules of simplicial filtrations over Z/2.",
    )
    parser.add_argument(
        "--verbosity",
        type=int,
        choices=sorted(VERBOSITY_LEVELS),
        required=False,
        help=(
            "0 silent, 1 warnings, 2 info, 3 debug. Defaults to "
            "CUPMOD_LOG_LEVEL."
        ),
    )
    parser.add_argument(
        "--format",
        choices=["json", "table"],
        default="json",
        help="Output format. Defaults to json.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    commands: dict[str, Command] = {}
    for command_class in COMMANDS:
        command = command_class()
        subparser = subparsers.add_parser(
            command.name, help=command.help, description=command.help
        )
        command.add_arguments(subparser)
        commands[command.name] = command
    return parser, commands


def configure_logging(verbosity: int | None, settings: config.Settings) -> None:
    if verbosity is None:
        level = settings.logging_level
    else:
        level = VERBOSITY_LEVELS[verbosity]
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("cupmod").setLevel(level)


def run(
    argv: Sequence[str] | None = None,
    *,
    stdout: TextIO | None = None,
    stderr: TextIO | None = None,
) -> int:
    """
    Run one subcommand and return its exit code.
    """
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser, commands = build_parser()
    try:
        namespace = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    options = vars(namespace)
    verbosity = options.pop("verbosity", None)
    try:
        settings = config.Settings.from_env()
        configure_logging(verbosity, settings)
        run_config = RunConfig.from_dictionary(options, settings)
        run_config.validate()
        command = commands[run_config.command]
        out = Emitter(stdout, run_config.output_format, errors=stderr)
        return command.handle(run_config, out)
    except barcodes.InvariantViolation as exc:
        # A driver broke its own structure checks: a failure, not bad input.
        stderr.write(f"cupmod: internal error: {exc}\n")
        return EXIT_DIFF
    except (CommandError, *LIBRARY_ERRORS) as exc:
        stderr.write(f"cupmod: error: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
