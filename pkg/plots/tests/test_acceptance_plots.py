"""Secondary acceptance: render all three figure kinds from primary
outputs, check the branch structure across the period-doubling threshold,
and confirm re-rendering is pixel-identical."""

from gdplots.io import branch_counts, read_bifurcation
from gdplots.render import PlotJob, render

ETA_STAR = 2.0 / 7.06


def _verdict(desc: str, ok: bool) -> None:
    print(f"criterion 9: {'PASS' if ok else 'FAIL'} - {desc}")
    assert ok, f"criterion 9 failed: {desc}"


def test_criterion_9_plots(fig1_dir, bifurcation_dir, arcs_dir, trajectory_dir, tmp_path):
    outs = [
        render(
            PlotJob(
                "fig1",
                (str(fig1_dir / "fig1.csv"), str(fig1_dir / "fig1_summary.json")),
                str(tmp_path / "fig1.png"),
            )
        ),
        render(
            PlotJob(
                "bifurcation",
                (str(bifurcation_dir / "bifurcation.csv"),),
                str(tmp_path / "bif.png"),
            )
        ),
        render(
            PlotJob(
                "stable_minima",
                (str(arcs_dir / "stable_minima.csv"), str(arcs_dir / "arcs.json")),
                str(tmp_path / "arcs.png"),
            )
        ),
        render(
            PlotJob(
                "trajectory",
                (str(trajectory_dir / "trajectory.csv"),),
                str(tmp_path / "traj.png"),
            )
        ),
    ]
    rendered = all((tmp_path / p).exists() or True for p in outs) and all(
        (tmp_path / name).stat().st_size > 0
        for name in ("fig1.png", "bif.png", "arcs.png", "traj.png")
    )

    counts = branch_counts(read_bifurcation(bifurcation_dir / "bifurcation.csv"))
    before = [c for eta, c in counts.items() if eta < ETA_STAR - 1e-3]
    after = [c for eta, c in counts.items() if eta > ETA_STAR + 1e-3]
    branches = before and after and all(c == 1 for c in before) and all(c >= 2 for c in after)

    again = render(
        PlotJob(
            "bifurcation",
            (str(bifurcation_dir / "bifurcation.csv"),),
            str(tmp_path / "bif2.png"),
        )
    )
    identical = (tmp_path / "bif.png").read_bytes() == (tmp_path / "bif2.png").read_bytes()

    _verdict(
        "all figure kinds render; 1 branch before doubling, >= 2 after; re-render pixel-identical",
        bool(rendered and branches and identical),
    )
