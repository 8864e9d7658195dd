from __future__ import annotations

import csv
import hashlib
import io
import json
from importlib import resources

import numpy as np
import pytest

from egtl import cli
from egtl.estimation import Dataset
from egtl.io import (
    DatasetParseError,
    RunConfig,
    dataset_to_csv,
    format_number,
    load_dataset,
    parse_dataset,
    render,
)

DIGESTS = {
    "barlow1975": "16b201d875aef30060550d36e819b3d02238f5cf1979569e5bd72f06717c03a0",
    "quesenberry1982": "280c2d19aa3c7a626da1160614e09a2b78724d7f0c09912e4a840c76cbbb782a",
}


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestDatasets:
    @pytest.mark.parametrize("name", sorted(DIGESTS))
    def test_digest(self, name):
        raw = resources.files("egtl").joinpath("data", f"{name}.txt").read_bytes()
        assert hashlib.sha256(raw).hexdigest() == DIGESTS[name]

    def test_barlow(self):
        ds = load_dataset("barlow1975")
        assert ds.n == 107 and ds.values.min() == 56 and ds.values.max() == 7739

    def test_quesenberry(self):
        ds = load_dataset("quesenberry1982")
        assert ds.n == 100 and ds.values.min() == 15 and 829 in ds.values


class TestParsing:
    def test_comma_line(self, tmp_path):
        f = tmp_path / "a.txt"
        f.write_text("1,2,3\n")
        assert list(load_dataset(f).values) == [1.0, 2.0, 3.0]

    def test_mixed_and_comments(self):
        ds = parse_dataset("# header\n1.5 2, 3\n\n4e0  # tail\n")
        assert list(ds.values) == [1.5, 2.0, 3.0, 4.0]

    def test_parse_error_line(self):
        with pytest.raises(DatasetParseError, match=":3:"):
            parse_dataset("1 2\n3\n4 x5\n")

    def test_negative(self):
        with pytest.raises(DatasetParseError, match="negative"):
            parse_dataset("1 2\n-3\n")

    def test_empty(self):
        with pytest.raises(DatasetParseError, match="no data"):
            parse_dataset("# nothing\n\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_dataset(tmp_path / "nope.txt")

    def test_csv_round_trip(self):
        ds = Dataset(np.random.default_rng(0).exponential(3.0, 50))
        back = parse_dataset(dataset_to_csv(ds))
        assert np.array_equal(back.values, ds.values)


class TestRender:
    rows = [{"a": 1.0 / 3.0, "b": 2, "c": "x"}, {"a": 123456.789012345678, "b": None, "c": True}]

    def test_twelve_digits(self):
        assert format_number(1.0 / 3.0) == 0.333333333333
        assert format_number(2.5e-17) == 2.5e-17

    def test_json_csv_agree(self):
        js = json.loads(render(self.rows, "json"))
        cs = list(csv.DictReader(io.StringIO(render(self.rows, "csv"))))
        for j, c in zip(js, cs):
            assert float(c["a"]) == j["a"]

    def test_table(self):
        text = render(self.rows, "table")
        assert len(text.splitlines()) == 4

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            render(self.rows, "xml")


class TestRunConfig:
    def test_requires_data(self):
        with pytest.raises(ValueError):
            RunConfig(command="fit")

    def test_requires_params(self):
        with pytest.raises(ValueError):
            RunConfig(command="curve", p=0.5, k=1)

    def test_unknown_command(self):
        with pytest.raises(ValueError):
            RunConfig(command="plot")


class TestCli:
    def test_fit_json_schema(self, capsys):
        code, out, _ = run(capsys, "fit", "--data", "barlow1975", "--k", "2", "--method", "mle", "--format", "json")
        assert code == 0
        obj = json.loads(out)
        assert {"p", "theta", "k", "log_lik", "se_p", "se_theta", "converged"} <= set(obj)

    def test_em_matches_mle(self, capsys):
        _, a, _ = run(capsys, "fit", "--data", "quesenberry1982", "--k", "3", "--method", "em")
        _, b, _ = run(capsys, "fit", "--data", "quesenberry1982", "--k", "3", "--method", "mle")
        a, b = json.loads(a), json.loads(b)
        assert abs(a["p"] - b["p"]) < 1e-3 and abs(a["theta"] - b["theta"]) < 1e-3

    def test_missing_file(self, capsys):
        code, out, err = run(capsys, "fit", "--data", "missing.txt", "--k", "2")
        assert code == cli.EXIT_IO and out == "" and "missing.txt" in err

    def test_usage_error(self, capsys):
        code, _, err = run(capsys, "fit", "--k", "2")
        assert code == cli.EXIT_USAGE and err

    def test_data_quality(self, capsys, tmp_path):
        f = tmp_path / "z.txt"
        f.write_text("0 1 2 3\n")
        code, _, err = run(capsys, "fit", "--data", str(f), "--k", "2")
        assert code == cli.EXIT_DATA and "data error" in err

    def test_no_moment_root(self, capsys):
        code, _, _ = run(capsys, "fit", "--data", "barlow1975", "--k", "1", "--method", "moments")
        assert code == cli.EXIT_DATA

    def test_nonconvergence_code(self, capsys, monkeypatch):
        from egtl.estimation import FitResult
        from egtl.distribution import EgtlParams

        def fake(data, k, **kw):
            return FitResult(EgtlParams(0.5, 1.0, k), -1.0, "em", converged=False)

        monkeypatch.setattr(cli, "fit_em", fake)
        code, out, err = run(capsys, "fit", "--data", "barlow1975", "--k", "2", "--method", "em")
        assert code == cli.EXIT_NONCONVERGENCE and json.loads(out)["converged"] is False

    def test_gof_rows(self, capsys):
        code, out, _ = run(capsys, "gof", "--data", "barlow1975", "--k-max", "4")
        rows = json.loads(out)
        assert code == 0 and len(rows) == 6
        assert [r["model"] for r in rows][-2:] == ["gamma", "weibull"]

    def test_gof_barlow_k1_significant(self, capsys):
        _, out, _ = run(capsys, "gof", "--data", "barlow1975", "--k-max", "1")
        assert json.loads(out)[0]["p_value"] < 0.001

    def test_gof_csv(self, capsys):
        _, out, _ = run(capsys, "gof", "--data", "quesenberry1982", "--k-max", "4", "--format", "csv")
        assert len(out.strip().splitlines()) == 7

    def test_gof_kmax2(self, capsys):
        _, out, _ = run(capsys, "gof", "--data", "barlow1975", "--k-max", "2")
        assert len(json.loads(out)) == 4

    def test_curve_example(self, capsys):
        argv = ["curve", "--p", "0.5", "--theta", "1", "--k", "2", "--points", "3", "--x-max", "1"]
        code, out, _ = run(capsys, *argv)
        rows = json.loads(out)
        assert code == 0 and [r["x"] for r in rows] == [0.0, 0.5, 1.0]
        assert rows[0]["hazard"] == 0.0
        assert set(rows[0]) == {"x", "pdf", "cdf", "survival", "hazard"}

    def test_curve_k1_hazard_nonincreasing(self, capsys):
        _, out, _ = run(capsys, "curve", "--p", "0.6", "--theta", "2", "--k", "1", "--format", "csv")
        h = [float(r["hazard"]) for r in csv.DictReader(io.StringIO(out))]
        assert len(h) == 101 and all(b <= a for a, b in zip(h, h[1:]))

    def test_curve_default_xmax(self, capsys):
        from egtl import distribution as d
        from egtl.distribution import EgtlParams

        _, out, _ = run(capsys, "curve", "--p", "0.3", "--theta", "2", "--k", "3", "--points", "5")
        rows = json.loads(out)
        assert rows[-1]["x"] == pytest.approx(float(d.quantile(EgtlParams(0.3, 2, 3), 0.999)), rel=1e-11)

    def test_sample_deterministic(self, capsys):
        argv = ["sample", "--p", "0.5", "--theta", "1", "--k", "2", "--n", "5", "--seed", "42"]
        _, a, _ = run(capsys, *argv)
        _, b, _ = run(capsys, *argv)
        assert a == b and len(json.loads(a)) == 5

    def test_bad_params(self, capsys):
        code, _, err = run(capsys, "sample", "--p", "1.5", "--theta", "1", "--k", "2")
        assert code == cli.EXIT_USAGE and "p must" in err

    def test_simulate_by_method(self, capsys):
        argv = ["simulate", "--n-values", "20", "--k-values", "1", "--replications", "2",
                "--methods", "mle_direct", "--layout", "by-method", "--format", "table"]
        code, out, _ = run(capsys, *argv)
        assert code == 0 and "mle_direct" in out.splitlines()[0]
