import pytest

from gdplots.io import (
    SchemaError,
    branch_counts,
    read_arcs,
    read_bifurcation,
    read_fig1,
    read_stable_minima,
    read_trajectory,
)


def test_read_fig1(fig1_dir):
    doc = read_fig1(fig1_dir / "fig1.csv", fig1_dir / "fig1_summary.json")
    assert doc.eta == 0.5
    assert doc.collapsed
    assert len(doc.theta_in) == 101
    assert doc.interval == (2.1, 2.7)


def test_read_bifurcation(bifurcation_dir):
    rows = read_bifurcation(bifurcation_dir / "bifurcation.csv")
    assert rows
    assert {r.k for r in rows} <= {1, 2}
    assert all(r.multiplier.imag == 0 for r in rows)


def test_branch_counts(bifurcation_dir):
    counts = branch_counts(read_bifurcation(bifurcation_dir / "bifurcation.csv"))
    low = [c for eta, c in counts.items() if eta < 0.27]
    high = [c for eta, c in counts.items() if eta > 0.30]
    assert all(c == 1 for c in low)
    assert all(c >= 2 for c in high)


def test_read_stable_minima_and_arcs(arcs_dir):
    rows = read_stable_minima(arcs_dir / "stable_minima.csv")
    arcs = read_arcs(arcs_dir / "arcs.json")
    assert rows and arcs.gd
    for r in rows:
        assert r.theta1 * r.theta2 == pytest.approx(1.0, rel=1e-12)


def test_read_trajectory(trajectory_dir):
    rows = read_trajectory(trajectory_dir / "trajectory.csv")
    assert rows[0].step == 0
    assert len(rows[0].theta) == 2
    assert rows[0].batch is None


def test_schema_error_on_wrong_header(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(SchemaError):
        read_bifurcation(bad)
    with pytest.raises(SchemaError):
        read_stable_minima(bad)
    with pytest.raises(SchemaError):
        read_trajectory(bad)


def test_schema_error_on_bad_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"gd": "nope"}')
    with pytest.raises(SchemaError):
        read_arcs(bad)
