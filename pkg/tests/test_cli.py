import io
import json
from fractions import Fraction

import pytest

from contexture import cli
from contexture.files import dump_scenario, load_scenario
from contexture.scenario import epr_scenario, lg_scenario


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path, pr_box, lg_classical):
    paths = {}
    for name, s in (("pr", pr_box), ("lg", lg_classical)):
        p = tmp_path / f"{name}.json"
        p.write_text(dump_scenario(s))
        paths[name] = p
    data = json.loads(dump_scenario(pr_box))
    data["tables"][0]["probs"] = {"++": "1/4", "+-": "1/4", "-+": "0", "--": "1/2"}
    paths["signaling"] = tmp_path / "signaling.json"
    paths["signaling"].write_text(json.dumps(data))
    paths["broken"] = tmp_path / "broken.json"
    paths["broken"].write_text('{"kind": "epr-bell",\n  "properties": [}')
    return paths


def test_analyze_pr_box(files):
    code, out, _ = run("analyze", str(files["pr"]))
    assert code == 0
    assert "S: 4 (4.000000)" in out
    assert "gamma_min: 1 (1.000000)" in out and "delta_min: 1 (1.000000)" in out
    assert "equal: yes" in out


def test_analyze_json(files):
    code, out, _ = run("analyze", str(files["lg"]), "--json")
    report = json.loads(out)
    assert code == 0
    assert list(report) == ["kind", "properties", "tables", "no_signaling", "s_value",
                            "gamma_min", "delta_min", "equal"]
    assert report["gamma_min"]["value"] == report["delta_min"]["value"] == "0"
    assert report["s_value"] == "1"


def test_analyze_json_round_trip(files, tmp_path):
    code, first, _ = run("analyze", str(files["pr"]), "--json", "--witness")
    again = tmp_path / "again.json"
    again.write_text(first)
    code2, second, _ = run("analyze", str(again), "--json", "--witness")
    assert code == code2 == 0
    assert first == second
    assert load_scenario(again) == load_scenario(files["pr"])


def test_witness_output(files):
    _, out, _ = run("analyze", str(files["pr"]), "--json", "--witness")
    w = json.loads(out)["witnesses"]
    assert w["quasi_distribution"]["mass"] == "2"
    assert sum(Fraction(v) for v in w["coupling"]["atoms"].values()) == 1
    _, text, _ = run("analyze", str(files["pr"]), "--witness")
    assert "coupling over" in text


def test_signaling_exit(files):
    code, _, err = run("analyze", str(files["signaling"]))
    assert code == 3
    assert "B1" in err and "'11'" in err
    assert run("check", str(files["signaling"]))[0] == 3


def test_parse_error_exit(files):
    code, _, err = run("analyze", str(files["broken"]))
    assert code == 2
    assert "line 2" in err
    assert run("check", "/nonexistent/file.json")[0] == 2


def test_check_ok(files):
    code, out, _ = run("check", str(files["pr"]))
    assert code == 0 and "no-signaling holds" in out


def test_usage_errors():
    assert run("derive", "generic")[0] == 2
    assert run("random", "--kind", "generic", "--count", "1", "--seed", "1")[0] == 2
    assert run("random", "--kind", "lg", "--count", "0", "--seed", "1")[0] == 2
    assert run("random", "--kind", "lg", "--count", "1", "--seed", "1", "--denominator-bound", "1")[0] == 2
    assert run("bogus")[0] == 2


def test_random_summary():
    code, out, _ = run("random", "--kind", "epr", "--count", "30", "--seed", "7", "--json")
    lines = [json.loads(l) for l in out.splitlines()]
    assert code == 0
    assert len(lines) == 31
    summary = lines[-1]["summary"]
    assert summary["max_discrepancy"] == "0"
    assert summary["contextual"] + summary["noncontextual"] == 30
    assert all(l["equal"] for l in lines[:-1])


def test_random_degenerate_grid():
    code, out, _ = run("random", "--kind", "lg", "--count", "40", "--seed", "3",
                       "--denominator-bound", "2", "--json")
    assert code == 0
    assert json.loads(out.splitlines()[-1])["summary"]["max_discrepancy"] == "0"


def test_random_is_deterministic():
    a = run("random", "--kind", "epr", "--count", "1", "--seed", "99", "--json")
    b = run("random", "--kind", "epr", "--count", "1", "--seed", "99", "--json")
    assert a == b


def test_random_worker_pool_keeps_order(monkeypatch):
    serial = run("random", "--kind", "lg", "--count", "12", "--seed", "5", "--json")
    monkeypatch.setenv("CONTEXTURE_THREADS", "2")
    pooled = run("random", "--kind", "lg", "--count", "12", "--seed", "5", "--json")
    assert serial == pooled


def test_discrepancy_writes_reproducer(monkeypatch, tmp_path):
    real = cli._analyze_one

    def broken(s):
        gamma, delta, sv, problems = real(s)
        return gamma, delta + 1, sv, ["injected"]

    monkeypatch.setattr(cli, "_analyze_one", broken)
    monkeypatch.setattr(cli, "_discrepant", lambda s: True)
    code, _, err = run("random", "--kind", "lg", "--count", "3", "--seed", "1",
                       "--repro-dir", str(tmp_path))
    assert code == 4
    (path,) = tmp_path.glob("contexture-repro-1-0.json")
    assert "reproducer written" in err
    load_scenario(path)


def test_minimizer_keeps_failure():
    s = epr_scenario(["5/8", "5/8", "5/8", "-5/8"], ["1/8", "0", "-1/8", "1/16"])

    def failing(t):
        from contexture.measures import s_chsh
        return s_chsh(t) > 2

    small = cli.minimize_scenario(s, failing)
    assert failing(small)
    from contexture.scenario import to_expectations
    e = to_expectations(small)
    assert all(m == 0 for m in e.marginals.values())
    assert max(v.denominator for v in e.pair_correlations.values()) <= 16


def test_inconsistency_exit(monkeypatch, files):
    real = cli.analyze

    def skewed(s):
        a = real(s)
        from dataclasses import replace
        return cli.Analysis(a.scenario, a.s_value, a.gamma, replace(a.delta, value=a.delta.value + 1))

    monkeypatch.setattr(cli, "analyze", skewed)
    code, _, err = run("analyze", str(files["lg"]))
    assert code == 4 and "inconsistency" in err


def test_derive_lg_text():
    code, out, _ = run("derive", "lg", "--samples", "10")
    assert code == 0
    assert "32 non-trivial + 21 trivial" in out
    assert "equivalent to published bounds: yes" in out


def test_derive_mismatch_exit(monkeypatch):
    import contexture.derive as derive
    monkeypatch.setattr(derive, "systems_equivalent", lambda a, b: False)
    code, _, err = run("derive", "lg", "--samples", "0")
    assert code == 5 and "mismatch" in err


def test_lg_file_classical(files):
    code, out, _ = run("analyze", str(files["lg"]))
    assert code == 0 and "gamma_min: 0 (0.000000)" in out
