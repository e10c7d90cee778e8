"""CLI: ingestion, plotting, curve spread, theory and sim tables."""

import csv
import math
import subprocess
import sys

import numpy as np
import pytest

from gtail.cli import DatasetSpec, _pairwise_sum_quantile, ingest, main
from gtail.errors import EmptyAfterFilter
from gtail.sampling import sample_gamma
from gtail.theory import GammaParams


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestIngest:
    def test_drop_and_report(self, tmp_path, capsys):
        path = write(tmp_path, "a.csv", "1.0\n0.0\n2.0\n-1.0\n3.0\n")
        s = ingest(DatasetSpec(path))
        assert np.array_equal(s.values, [1.0, 2.0, 3.0])
        assert "dropped=2" in capsys.readouterr().err

    def test_rescale_mean_one(self, tmp_path):
        path = write(tmp_path, "a.csv", "1.0\n0.0\n2.0\n-1.0\n3.0\n")
        s = ingest(DatasetSpec(path, rescale_mean_one=True))
        assert np.allclose(s.values, [0.5, 1.0, 1.5])

    def test_header_only_file(self, tmp_path):
        path = write(tmp_path, "a.csv", "value\n")
        with pytest.raises(EmptyAfterFilter):
            ingest(DatasetSpec(path))

    def test_delimiter_and_named_column(self, tmp_path):
        path = write(tmp_path, "a.csv", "city;rain\nx;1.5\ny;2.5\nz;0.5\n")
        s = ingest(DatasetSpec(path, column="rain"))
        assert np.array_equal(s.values, [1.5, 2.5, 0.5])

    def test_default_first_numeric_column(self, tmp_path):
        path = write(tmp_path, "a.tsv", "name\tval\na\t3.0\nb\t4.0\n")
        s = ingest(DatasetSpec(path))
        assert np.array_equal(s.values, [3.0, 4.0])

    def test_column_by_index(self, tmp_path):
        path = write(tmp_path, "a.csv", "1.0,9.0\n2.0,8.0\n")
        s = ingest(DatasetSpec(path, column="1"))
        assert np.array_equal(s.values, [9.0, 8.0])


class TestPairwiseQuantile:
    def test_matches_explicit_enumeration(self):
        rng = np.random.default_rng(40)
        x = rng.gamma(1.0, 1.0, 150)
        sums = np.sort([x[i] + x[j] for i in range(150) for j in range(i + 1, 150)])
        for q in (0.5, 0.98):
            t = _pairwise_sum_quantile(x, q)
            below = np.count_nonzero(sums <= t)
            assert abs(below - q * sums.size) <= max(2, 0.002 * sums.size)


class TestPlot:
    def test_known_values_and_schema(self, tmp_path, capsys):
        data = write(tmp_path, "d.csv", "1.0\n2.0\n3.0\n")
        out = str(tmp_path / "plot.csv")
        rc = main(["plot", "--input", data, "--d-list", "0,3.5", "--out", out])
        assert rc == 0
        rows = read_csv(out)
        assert [r["d"] for r in rows] == ["0", "3.5"]
        assert float(rows[0]["g_hat"]) == pytest.approx(31 / 90, rel=1e-10)
        assert float(rows[1]["g_hat"]) == pytest.approx(0.35, rel=1e-10)
        assert rows[0]["n_exceed"] == "3"

    def test_byte_identical_reruns(self, tmp_path):
        vals = sample_gamma(GammaParams(1.0, 1.0), 300, seed=3).values
        data = write(tmp_path, "d.csv", "\n".join(map(str, vals)) + "\n")
        out1 = str(tmp_path / "p1.csv")
        out2 = str(tmp_path / "p2.csv")
        args = ["plot", "--input", data, "--method", "bootstrap", "--boot-m",
                "59", "--seed", "7", "--d-steps", "8", "--d-max", "4.0"]
        assert main(args + ["--out", out1]) == 0
        assert main(args + ["--out", out2]) == 0
        assert open(out1, "rb").read() == open(out2, "rb").read()

    def test_constant_column(self, tmp_path):
        data = write(tmp_path, "c.csv", "2.0\n2.0\n2.0\n2.0\n2.0\n")
        out = str(tmp_path / "p.csv")
        assert main(["plot", "--input", data, "--d-list", "0", "--out", out]) == 0
        row = read_csv(out)[0]
        assert float(row["g_hat"]) == 0.0
        assert float(row["se"]) == 0.0
        assert row["implied_alpha"] == ""

    def test_ci_covers_exponential_truth(self, tmp_path):
        vals = sample_gamma(GammaParams(1.0, 1.0), 5000, seed=5).values
        data = write(tmp_path, "e.csv", "\n".join(map(str, vals)) + "\n")
        out = str(tmp_path / "p.csv")
        assert main(["plot", "--input", data, "--d-list", "0,1,2,3,4,5",
                     "--out", out]) == 0
        for row in read_csv(out):
            assert float(row["ci_lower"]) <= 0.5 <= float(row["ci_upper"])

    def test_rescale_equivariance(self, tmp_path):
        vals = sample_gamma(GammaParams(2.0, 1.0), 400, seed=9).values
        data = write(tmp_path, "r.csv", "\n".join(map(str, vals)) + "\n")
        mean = vals.mean()
        grid = [0.0, 1.0, 2.0, 4.0]
        out1 = str(tmp_path / "raw.csv")
        out2 = str(tmp_path / "scaled.csv")
        assert main(["plot", "--input", data,
                     "--d-list", ",".join(str(v * mean) for v in grid),
                     "--out", out1]) == 0
        assert main(["plot", "--input", data, "--rescale",
                     "--d-list", ",".join(str(v) for v in grid),
                     "--out", out2]) == 0
        g1 = [float(r["g_hat"]) for r in read_csv(out1)]
        g2 = [float(r["g_hat"]) for r in read_csv(out2)]
        assert g1 == pytest.approx(g2, rel=1e-10)

    def test_svg_written(self, tmp_path):
        data = write(tmp_path, "d.csv", "1.0\n2.0\n3.0\n4.0\n")
        out = str(tmp_path / "p.csv")
        assert main(["plot", "--input", data, "--d-list", "0,1,2", "--svg",
                     "--out", out]) == 0
        svg = (tmp_path / "p.svg").read_text()
        assert svg.startswith("<svg") and "polyline" in svg

    def test_degenerate_grid_point_warns_not_fatal(self, tmp_path, capsys):
        data = write(tmp_path, "d.csv", "1.0\n2.0\n3.0\n")
        out = str(tmp_path / "p.csv")
        assert main(["plot", "--input", data, "--d-list", "0,50",
                     "--out", out]) == 0
        rows = read_csv(out)
        assert rows[1]["g_hat"] == ""
        assert "no exceeding pair" in capsys.readouterr().err


class TestAltail:
    def test_curve_ids_and_determinism(self, tmp_path):
        vals = sample_gamma(GammaParams(1.0, 1.0), 100, seed=13).values
        data = write(tmp_path, "a.csv", "\n".join(map(str, vals)) + "\n")
        out1 = str(tmp_path / "a1.csv")
        out2 = str(tmp_path / "a2.csv")
        args = ["altail", "--input", data, "--replications", "20",
                "--seed", "11", "--d-list", "0,1,2"]
        assert main(args + ["--out", out1]) == 0
        assert main(args + ["--out", out2]) == 0
        assert open(out1, "rb").read() == open(out2, "rb").read()
        ids = {r["curve_id"] for r in read_csv(out1)}
        assert len(ids) == 21 and "ustat" in ids

    def test_constant_dataset_curves_zero(self, tmp_path):
        data = write(tmp_path, "c.csv", "3.0\n3.0\n3.0\n3.0\n")
        out = str(tmp_path / "a.csv")
        assert main(["altail", "--input", data, "--replications", "2",
                     "--d-list", "0", "--out", out]) == 0
        for row in read_csv(out):
            assert float(row["value"]) == 0.0


class TestTheoryCmd:
    def test_values(self, tmp_path):
        out = str(tmp_path / "t.csv")
        assert main(["theory", "--alpha", "1", "--d-list", "0,3",
                     "--out", out]) == 0
        rows = read_csv(out)
        assert float(rows[0]["nu_d"]) == 1.0
        assert float(rows[0]["g"]) == 0.5
        assert float(rows[0]["sigma_tilde_sq"]) == pytest.approx(1 / 12, rel=1e-10)
        assert 0.375 <= float(rows[1]["are"]) <= 0.405

    def test_remark_values(self, tmp_path):
        out = str(tmp_path / "t.csv")
        assert main(["theory", "--alpha", "5", "--d-list", "1",
                     "--out", out]) == 0
        assert float(read_csv(out)[0]["g"]) == pytest.approx(63 / 256, rel=1e-10)


class TestSimCmd:
    def test_variance_table_renders_dash(self, tmp_path, capsys):
        out = str(tmp_path / "s.csv")
        rc = main(["sim", "variance", "--alpha", "1", "--d", "3",
                   "--n-eff", "20", "--reps", "500", "--truth-reps", "4000",
                   "--methods", "unbiased,noether", "--seed", "2",
                   "--out", out])
        assert rc == 0
        rows = read_csv(out)
        by = {r["method"]: r for r in rows}
        assert by["noether"]["ave_relative"] == "-"
        assert float(by["unbiased"]["ave_relative"]) > 0.5
        assert "noether" in capsys.readouterr().out

    def test_coverage_monotone_toward_nominal(self, tmp_path):
        out = str(tmp_path / "c.csv")
        rc = main(["sim", "coverage", "--alpha", "1", "--d", "3",
                   "--n-eff", "10,40", "--reps", "800",
                   "--methods", "unbiased", "--seed", "3", "--out", out])
        assert rc == 0
        rows = read_csv(out)
        cov = [float(r["coverage"]) for r in rows]
        assert cov[0] < cov[1] < 0.96

    def test_are_below_half(self, tmp_path):
        out = str(tmp_path / "r.csv")
        rc = main(["sim", "are", "--alpha-single", "1", "--d", "0,3",
                   "--n", "400", "--reps", "1500", "--seed", "4",
                   "--out", out])
        assert rc == 0
        for row in read_csv(out):
            assert float(row["are_mc"]) < 0.5
            assert float(row["are_theory"]) < 0.5


class TestErrors:
    def test_missing_file_exit_code(self, tmp_path, capsys):
        assert main(["plot", "--input", str(tmp_path / "nope.csv"),
                     "--d-list", "0"]) == 2
        assert "error" in capsys.readouterr().err

    def test_console_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "gtail.cli", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "plot" in proc.stdout
