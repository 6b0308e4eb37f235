import io
import json
import os
import sys
from unittest import mock

import pytest

from cupmod import barcodes, cli, complex, examples


def _run(*argv: str) -> tuple[int, str, str]:
    stdout, stderr = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), stdout=stdout, stderr=stderr)
    return code, stdout.getvalue(), stderr.getvalue()


@pytest.fixture
def torus_file(write_filtration, torus7):
    return write_filtration(torus7, "torus7.flt")


@pytest.fixture
def hexagon_csv(tmp_path):
    path = tmp_path / "hexagon.csv"
    examples.hexagon_points().dump_points(path)
    return path


class TestArguments:
    def test_help(self, capsys):
        assert cli.run(["--help"]) == cli.EXIT_OK
        assert "cup-barcode" in capsys.readouterr().out

    @pytest.mark.parametrize(
        "argv",
        [
            [],
            ["persistence"],
            ["barcode"],
            ["--format", "xml", "barcode", "x.flt"],
            ["--verbosity", "7", "barcode", "x.flt"],
            ["gen-example", "mobius"],
            ["cech"],
        ],
    )
    def test_usage_errors(self, argv, capsys):
        assert cli.run(argv) == cli.EXIT_USAGE

    def test_missing_input_file(self, tmp_path):
        code, stdout, stderr = _run("barcode", str(tmp_path / "missing.flt"))

        assert code == cli.EXIT_USAGE
        assert stdout == ""
        assert stderr.startswith("cupmod: error: ")

    def test_malformed_input_file(self, tmp_path):
        path = tmp_path / "bad.flt"
        path.write_text("0 0\n0 1\nabc 0 1\n")

        code, _, stderr = _run("barcode", str(path))

        assert code == cli.EXIT_USAGE
        assert "Line 3" in stderr

    @mock.patch.dict(os.environ, {"CUPMOD_THREADS": "0"})
    def test_invalid_settings(self, torus_file):
        code, _, stderr = _run("barcode", str(torus_file))

        assert code == cli.EXIT_USAGE
        assert "CUPMOD_THREADS" in stderr

    def test_verbosity(self, torus_file):
        code, _, _ = _run("--verbosity", "3", "barcode", str(torus_file))

        assert code == cli.EXIT_OK

    def test_main_exits_with_the_code(self, torus_file):
        argv = ["cupmod", "barcode", str(torus_file)]
        with mock.patch.object(sys, "argv", argv), mock.patch.object(
            sys, "stdout", io.StringIO()
        ):
            with pytest.raises(SystemExit) as excinfo:
                cli.main()

        assert excinfo.value.code == cli.EXIT_OK


class TestBarcode:
    def test_torus(self, torus_file):
        code, stdout, stderr = _run("barcode", str(torus_file))

        records = json.loads(stdout)
        assert code == cli.EXIT_OK
        assert stderr == ""
        assert len(records) == 23
        essential = [r["degree"] for r in records if r["death_value"] is None]
        assert sorted(essential) == [0, 1, 1, 2]

    def test_verify(self, torus_file):
        code, _, stderr = _run("barcode", str(torus_file), "--verify")

        (report,) = [json.loads(line) for line in stderr.splitlines()]
        assert code == cli.EXIT_OK
        assert report == {"spec": "ordinary", "ok": True, "missing": [], "extra": []}

    def test_verify_limit(self, torus_file):
        code, _, stderr = _run("barcode", str(torus_file), "--verify", "--limit", "10")

        assert code == cli.EXIT_USAGE
        assert "at most 10" in stderr

    def test_table(self, torus_file):
        code, stdout, _ = _run("--format", "table", "barcode", str(torus_file))

        lines = stdout.splitlines()
        assert code == cli.EXIT_OK
        assert lines[0].startswith("degree")
        assert len(lines) == 24

    def test_relative(self, write_filtration, hollow_triangle):
        path = write_filtration(hollow_triangle)

        code, stdout, _ = _run("rel-barcode", str(path), "--verify")

        records = json.loads(stdout)
        assert code == cli.EXIT_OK
        assert sorted(
            (r["degree"], r["death_index"], r["birth_index"]) for r in records
        ) == [(0, -1, 0), (1, -1, 5), (1, 1, 3), (1, 2, 4)]

    def test_relative_output_is_strict_json(self, write_filtration):
        path = write_filtration(complex.Filtration.closure([(0,)]))

        code, stdout, _ = _run("rel-barcode", str(path))

        def reject(constant):
            raise ValueError(f"Non-standard JSON constant {constant}.")

        (record,) = json.loads(stdout, parse_constant=reject)
        assert code == cli.EXIT_OK
        assert (record["death_index"], record["birth_index"]) == (-1, 0)
        assert record["birth_value"] is None

    def test_distance_matrix_input(self, tmp_path):
        path = tmp_path / "distances.txt"
        path.write_text("0 1 1\n1 0 1\n1 1 0\n")

        code, stdout, _ = _run(
            "barcode", str(path), "--input-format", "distance-matrix", "--max-dim", "1"
        )

        records = json.loads(stdout)
        assert code == cli.EXIT_OK
        assert [r["degree"] for r in records if r["death_value"] is None] == [0, 1]


class TestCupBarcode:
    def test_torus(self, torus_file):
        code, stdout, _ = _run("cup-barcode", str(torus_file))

        assert code == cli.EXIT_OK
        assert json.loads(stdout) == [
            {
                "degree": 2,
                "birth_index": 42,
                "death_index": 41,
                "birth_value": 2.0,
                "death_value": None,
                "partition": None,
            }
        ]

    def test_all_orders(self, write_filtration, rp3_11):
        path = write_filtration(rp3_11)

        code, stdout, _ = _run("cup-barcode", str(path), "--all-k")

        document = json.loads(stdout)
        assert code == cli.EXIT_OK
        assert list(document) == ["2", "3"]
        assert [r["degree"] for r in document["3"]] == [3]

    def test_all_orders_as_tables(self, torus_file):
        code, stdout, _ = _run("--format", "table", "cup-barcode", str(torus_file), "--all-k")

        assert code == cli.EXIT_OK
        lines = stdout.splitlines()
        assert lines[0] == "[2]"
        assert lines[1].startswith("degree")

    @pytest.mark.parametrize("extra", [["--k", "1"], ["--k", "3", "--all-k"]])
    def test_bad_orders(self, torus_file, extra):
        code, stdout, stderr = _run("cup-barcode", str(torus_file), *extra)

        assert code == cli.EXIT_USAGE
        assert stdout == ""
        assert stderr.startswith("cupmod: error: ")

    @pytest.mark.parametrize("seed", range(3))
    def test_lazy_with_verification(self, write_filtration, seed):
        path = write_filtration(
            examples.random_filtration(seed, n_vertices=6, max_dim=3, density=0.7)
        )

        code, _, stderr = _run("cup-barcode", str(path), "--k", "3", "--lazy", "--verify")

        assert code == cli.EXIT_OK
        assert json.loads(stderr)["spec"] == "kcup:3"

    def test_verification_failure(self, torus_file):
        with mock.patch.object(cli.oracle, "oracle_barcode", return_value=[]):
            code, _, stderr = _run("cup-barcode", str(torus_file), "--verify")

        assert code == cli.EXIT_DIFF
        assert json.loads(stderr)["extra"] == [[2, 41, 42]]

    def test_broken_structure_is_a_failure(self, torus_file):
        with mock.patch.object(
            cli.cupcore,
            "order_k_cup_pers",
            side_effect=barcodes.InvariantViolation("two bars die at 7"),
        ):
            code, stdout, stderr = _run("cup-barcode", str(torus_file))

        assert code == cli.EXIT_DIFF
        assert stdout == ""
        assert stderr == "cupmod: internal error: two bars die at 7\n"

    def test_relative(self, torus_file):
        code, stdout, stderr = _run("rel-cup-barcode", str(torus_file), "--verify")

        records = json.loads(stdout)
        assert code == cli.EXIT_OK
        assert json.loads(stderr)["ok"]
        assert any(r["death_index"] == -1 for r in records)


class TestPartitionBarcodes:
    def test_defaults_to_the_dimension(self, torus_file):
        code, stdout, _ = _run("partition-barcodes", str(torus_file))

        document = json.loads(stdout)
        assert code == cli.EXIT_OK
        assert list(document) == ["1+1"]
        assert [r["partition"] for r in document["1+1"]] == ["1+1"]

    def test_selected_partitions(self, torus_file):
        code, stdout, _ = _run(
            "partition-barcodes", str(torus_file), "--partition", "2+1", "--partition", "1,1,1"
        )

        assert code == cli.EXIT_OK
        assert json.loads(stdout) == {"1+2": [], "1+1+1": []}

    def test_bad_partition(self, torus_file):
        code, _, stderr = _run("partition-barcodes", str(torus_file), "--partition", "1+a")

        assert code == cli.EXIT_USAGE
        assert stderr.startswith("cupmod: error: ")

    def test_bad_max_q(self, torus_file):
        code, _, _ = _run("partition-barcodes", str(torus_file), "--max-q", "1")

        assert code == cli.EXIT_USAGE

    def test_threads_from_the_environment(self, torus_file):
        argv = ["partition-barcodes", str(torus_file), "--max-q", "3", "--verify"]
        _, serial, _ = _run(*argv)

        with mock.patch.dict(os.environ, {"CUPMOD_THREADS": "3"}):
            code, threaded, stderr = _run(*argv)

        assert code == cli.EXIT_OK
        assert threaded == serial
        assert all(json.loads(line)["ok"] for line in stderr.splitlines())


class TestCupLength:
    def test_whole_complex(self, torus_file):
        code, stdout, _ = _run("cup-length", str(torus_file))

        assert code == cli.EXIT_OK
        assert json.loads(stdout) == {"a": 42, "b": 42, "cup_length": 2}

    def test_interval(self, torus_file):
        code, stdout, _ = _run("cup-length", str(torus_file), "--interval", "41", "42")

        assert code == cli.EXIT_OK
        assert json.loads(stdout)["cup_length"] == 1

    def test_empty_interval(self, torus_file):
        code, _, _ = _run("cup-length", str(torus_file), "--interval", "5", "4")

        assert code == cli.EXIT_USAGE

    def test_all_intervals(self, torus_file):
        code, stdout, _ = _run("cup-length", str(torus_file), "--all-intervals")

        table = json.loads(stdout)
        assert code == cli.EXIT_OK
        assert len(table) == 43
        assert table[42][42] == 2
        assert table[5][4] == 0

    def test_table_format(self, torus_file):
        code, stdout, _ = _run("--format", "table", "cup-length", str(torus_file))

        assert code == cli.EXIT_OK
        assert stdout.splitlines() == ["a: 42", "b: 42", "cup_length: 2"]


class TestGeometricFiltrations:
    def test_rips(self, hexagon_csv):
        code, stdout, _ = _run("rips", "--points", str(hexagon_csv))

        filtration = complex.parse_filtration(stdout.splitlines())
        assert code == cli.EXIT_OK
        assert stdout.startswith(f"# rips filtration of {hexagon_csv}\n")
        assert filtration.n == 6 + 15 + 20

    def test_rips_threshold(self, hexagon_csv):
        code, stdout, _ = _run("rips", "--points", str(hexagon_csv), "--threshold", "1.5")

        assert code == cli.EXIT_OK
        assert complex.parse_filtration(stdout.splitlines()).n == 12
        assert "# threshold: 1.5\n" in stdout

    def test_header_records_the_ball_tolerance(self, hexagon_csv):
        code, stdout, _ = _run("cech", "--points", str(hexagon_csv), "--max-dim", "1")

        assert code == cli.EXIT_OK
        assert stdout.splitlines()[1:4] == [
            "# max_dim: 1",
            "# threshold: none",
            "# ball_tolerance: 1e-09",
        ]

    def test_rips_of_a_distance_matrix(self, tmp_path):
        path = tmp_path / "distances.txt"
        path.write_text("0 1 1\n1 0 1\n1 1 0\n")

        code, stdout, _ = _run("rips", "--points", str(path), "--distance-matrix")

        assert code == cli.EXIT_OK
        assert complex.parse_filtration(stdout.splitlines()).n == 7

    def test_cech_to_a_file(self, hexagon_csv, tmp_path):
        output = tmp_path / "cech.flt"

        code, stdout, _ = _run(
            "cech", "--points", str(hexagon_csv), "--max-dim", "1", "--output", str(output)
        )

        assert code == cli.EXIT_OK
        assert stdout == ""
        assert complex.load_filtration(output).n == 6 + 15

    def test_cech_feeds_the_cup_barcode(self, hexagon_csv, tmp_path):
        output = tmp_path / "cech.flt"
        _run("cech", "--points", str(hexagon_csv), "--output", str(output))

        code, _, stderr = _run("cup-barcode", str(output), "--verify")

        assert code == cli.EXIT_OK
        assert json.loads(stderr)["ok"]

    def test_negative_threshold(self, hexagon_csv):
        code, _, _ = _run("rips", "--points", str(hexagon_csv), "--threshold", "-1")

        assert code == cli.EXIT_USAGE


class TestBottleneck:
    @staticmethod
    def _write(path, pairs):
        records = [
            {
                "degree": degree,
                "birth_index": 2,
                "death_index": 1,
                "birth_value": start,
                "death_value": end,
                "partition": None,
            }
            for degree, start, end in pairs
        ]
        path.write_text(json.dumps(records))
        return path

    def test_distance(self, tmp_path):
        first = self._write(tmp_path / "a.json", [(1, 0.0, 2.0), (0, 0.0, None)])
        second = self._write(tmp_path / "b.json", [(0, 0.5, None)])

        code, stdout, _ = _run("bottleneck", str(first), str(second))

        assert code == cli.EXIT_OK
        assert json.loads(stdout) == {
            "degrees": {"0": 0.5, "1": 1.0},
            "bottleneck": 1.0,
        }

    def test_one_degree(self, tmp_path):
        first = self._write(tmp_path / "a.json", [(1, 0.0, 2.0)])
        second = self._write(tmp_path / "b.json", [])

        code, stdout, _ = _run("bottleneck", str(first), str(second), "--degree", "0")

        assert code == cli.EXIT_OK
        assert json.loads(stdout) == {"degrees": {"0": 0.0}, "bottleneck": 0.0}

    def test_unmatched_essential_bars(self, tmp_path):
        first = self._write(tmp_path / "a.json", [(2, 1.0, None)])
        second = self._write(tmp_path / "b.json", [])

        code, stdout, _ = _run("bottleneck", str(first), str(second))

        assert code == cli.EXIT_OK
        assert json.loads(stdout) == {"degrees": {"2": None}, "bottleneck": None}

    def test_cup_barcodes_of_the_same_file(self, torus_file, tmp_path):
        path = tmp_path / "torus.json"
        _, stdout, _ = _run("cup-barcode", str(torus_file))
        path.write_text(stdout)

        code, stdout, _ = _run("bottleneck", str(path), str(path))

        assert code == cli.EXIT_OK
        assert json.loads(stdout)["bottleneck"] == 0.0

    def test_relative_barcodes_of_the_same_file(self, write_filtration, tmp_path):
        source = write_filtration(examples.torus7())
        path = tmp_path / "relative.json"
        _, stdout, _ = _run("rel-barcode", str(source))
        path.write_text(stdout)

        code, stdout, _ = _run("bottleneck", str(path), str(path))

        assert code == cli.EXIT_OK
        assert json.loads(stdout)["bottleneck"] == 0.0

    def test_malformed(self, tmp_path):
        first = tmp_path / "a.json"
        first.write_text("{not json")

        code, _, stderr = _run("bottleneck", str(first), str(first))

        assert code == cli.EXIT_USAGE
        assert "Cannot read a barcode" in stderr


class TestVerify:
    def test_file(self, torus_file):
        code, stdout, _ = _run(
            "verify", str(torus_file), "--spec", "kcup:2", "--spec", "duality"
        )

        results = json.loads(stdout)
        assert code == cli.EXIT_OK
        assert [r["spec"] for r in results] == ["kcup:2", "duality"]
        assert all(r["ok"] and r["input"] == str(torus_file) for r in results)

    def test_random(self):
        code, stdout, _ = _run(
            "verify", "--random", "3", "--seed", "5", "--spec", "partition:1+1"
        )

        results = json.loads(stdout)
        assert code == cli.EXIT_OK
        assert [r["input"] for r in results] == ["seed 5", "seed 6", "seed 7"]

    def test_defaults(self):
        code, stdout, _ = _run("verify", "--random", "2", "--vertices", "5", "--max-dim", "3")

        results = json.loads(stdout)
        assert code == cli.EXIT_OK
        assert [r["spec"] for r in results] == ["ordinary", "kcup:2"] * 2

    @mock.patch.dict(os.environ, {"CUPMOD_SEED": "9"})
    def test_seed_from_the_environment(self):
        code, stdout, _ = _run("verify", "--random", "1", "--spec", "ordinary")

        assert code == cli.EXIT_OK
        assert json.loads(stdout)[0]["input"] == "seed 9"

    def test_difference(self, torus_file):
        with mock.patch.object(cli, "fast_barcode", return_value=lambda f: []):
            code, stdout, _ = _run("verify", str(torus_file), "--spec", "kcup:2")

        (result,) = json.loads(stdout)
        assert code == cli.EXIT_DIFF
        assert result["missing"] == [[2, 41, 42]]

    def test_needs_an_input(self):
        code, _, stderr = _run("verify")

        assert code == cli.EXIT_USAGE
        assert "--random" in stderr

    @pytest.mark.parametrize("spec", ["kcup:1", "homology"])
    def test_bad_spec(self, torus_file, spec):
        code, _, _ = _run("verify", str(torus_file), "--spec", spec)

        assert code == cli.EXIT_USAGE


class TestGenExample:
    def test_writes_the_example(self, tmp_path):
        path = tmp_path / "klein.flt"

        code, stdout, _ = _run("gen-example", "klein9", "--output", str(path))

        assert code == cli.EXIT_OK
        assert json.loads(stdout) == {"example": "klein9", "path": str(path)}
        assert complex.load_filtration(path) == examples.klein9()

    def test_default_path(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)

        code, stdout, _ = _run("gen-example", "hexagon_points")

        assert code == cli.EXIT_OK
        assert json.loads(stdout)["path"] == "hexagon_points.csv"
        assert (tmp_path / "hexagon_points.csv").exists()
