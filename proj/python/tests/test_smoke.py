import math
from collections import Counter

import pytest

import conq


def test_log_scale_and_sketch():
    assert conq.log_scale(math.e, 2) == 1.0
    users = [[10.0, 20.0], [30.0], [10.0], [40.0, 50.0, 60.0]]
    s = conq.build_sketch(users, digits=2, buckets=2, seed=1)
    assert s.n_users == 4
    assert s.n_events == 7
    assert sum(s.total_counts) == 7
    assert len(s) == len(s.values) == 6
    values, fractions = conq.ecdf(s)
    assert fractions[-1] == 1.0
    assert conq.quantile(s, 1.0) == values[-1]


def test_balanced_assignments_are_balanced():
    rows = conq.balanced_assignments(5, 8, seed=3)
    assert len(rows) == 8
    counts = Counter(i for row in rows for i in row)
    assert counts == {b: 8 for b in range(5)}


def test_variance_and_se_shapes():
    control, _ = conq.simulate_experiment(n_users=300, seed=2)
    s = conq.build_sketch(control, buckets=20)
    nu = conq.blb_variance(s, replicates=50, seed=1)
    se = conq.woodruff_se(s, nu)
    assert len(nu) == len(se) == len(s)
    assert all(v >= 0 for v in nu) and all(x >= 0 for x in se)


def test_qte_oracles():
    row = conq.qte_row(0.5, math.log(100.0), math.log(110.0), 0.03, 0.03)
    assert row["delta_pct"] == pytest.approx(10.0)
    assert row["se_pct"] == pytest.approx(4.666904755831214)
    assert row["p_value"] == pytest.approx(0.0321334, abs=1e-6)
    assert conq.p_value(1.959964, 1.0) == pytest.approx(0.05, abs=1e-4)
    assert conq.bandwidth_normal_reference(1.0, 2.68, 32) == pytest.approx(0.53)
    assert conq.bh_adjust([0.005, 0.01, 0.03, 0.04], 0.05) == [0, 1, 2, 3]
    assert len(conq.default_grid()) == 80


def test_analyze_recovers_effect():
    control, treatment = conq.simulate_experiment(n_users=1500, effect=1.1, seed=4)
    rows = conq.analyze(control, treatment, grid=[0.5, 0.9], buckets=50, bootstraps=100, seed=9)
    assert [r["percentile"] for r in rows] == [0.5, 0.9]
    for r in rows:
        assert 5.0 < r["delta_pct"] < 15.0
        assert r["ci_lower"] <= r["delta_pct"] <= r["ci_upper"]
    delta = conq.analyze(control, treatment, method="delta", grid=[0.5], buckets=50, bootstraps=100)
    assert len(delta) == 1


def test_errors_are_typed():
    with pytest.raises(conq.ConfigError):
        conq.parse_grid("P20:P100:1")
    with pytest.raises(conq.DomainError):
        conq.log_scale(-1.0)
    with pytest.raises(conq.Error):
        conq.build_sketch([[1.0]], buckets=3)


def test_analyze_file(tmp_path):
    path = tmp_path / "events.csv"
    lines = ["experiment,variant,user_id,metric,value"]
    for u in range(40):
        lines.append(f"e,C,c{u},m,{10 + u}")
        lines.append(f"e,T,t{u},m,{11 + u}")
    path.write_text("\n".join(lines) + "\n")
    rc, log = conq.analyze_file(path, tmp_path / "out", buckets=10, grid="P50:P90:10")
    assert rc == 0, log
    text = (tmp_path / "out" / "qte.csv").read_text().splitlines()
    assert text[0].startswith("experiment,metric,segment,percentile")
    assert len(text) == 1 + 5
