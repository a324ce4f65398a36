import numpy as np
import pytest

from pedtrack import tables
from pedtrack.cli import main
from pedtrack.imaging import write_netpbm
from pedtrack.synth import Actor, Scenario, render_background, render_scenario, score_tracking
from pedtrack.tracking import NtxyRecord

TRACK_ARGS = ["--speed_threshold", "12", "--area_threshold", "20"]


def write_stack(directory, scenario):
    stack, truth = render_scenario(scenario)
    directory.mkdir(parents=True, exist_ok=True)
    for t, frame in stack.slices():
        write_netpbm(directory / f"frame_{t:04d}.ppm", frame)
    bg = directory.parent / "background.ppm"
    write_netpbm(bg, render_background(scenario))
    return truth, bg


def two_disks(frames=12):
    return Scenario(actors=[
        Actor(size=7, color=(230, 40, 40), path=[(1, 30, 60), (frames, 250, 60)]),
        Actor(size=10, color=(40, 40, 230), path=[(1, 280, 170), (frames, 60, 170)]),
    ], frame_count=frames)


def test_detect_one_disk(tmp_path, capsys):
    s = Scenario(actors=[Actor(size=6, path=[(1, 40, 100), (8, 200, 100)])], frame_count=8)
    _, bg = write_stack(tmp_path / "frames", s)
    out = tmp_path / "db.csv"
    code = main(["detect", "--frames", str(tmp_path / "frames"), "--out", str(out), "--background", str(bg)])
    assert code == 0
    rows = tables.read_database(out)
    assert [r.slice_number for r in rows] == list(range(1, 9))
    assert out.read_text().startswith("# config: ")
    assert "slice 8: 1 objects" in capsys.readouterr().out


def test_detect_theta_255_is_empty(tmp_path):
    write_stack(tmp_path / "frames", two_disks(4))
    out = tmp_path / "db.csv"
    assert main(["detect", "--frames", str(tmp_path / "frames"), "--out", str(out), "--theta", "255"]) == 0
    assert tables.read_database(out) == []


def test_detect_missing_frames(tmp_path, capsys):
    code = main(["detect", "--frames", str(tmp_path / "nothing"), "--out", str(tmp_path / "db.csv")])
    assert code == 2
    assert "no input frames" in capsys.readouterr().err


def test_bad_config_value_is_usage_error(tmp_path):
    write_stack(tmp_path / "frames", two_disks(3))
    code = main(["detect", "--frames", str(tmp_path / "frames"), "--out", str(tmp_path / "db.csv"),
                 "--theta", "300"])
    assert code == 2


def test_track_two_disks(tmp_path, capsys):
    truth, bg = write_stack(tmp_path / "frames", two_disks())
    out = tmp_path / "ntxy.csv"
    code = main(["track", "--frames", str(tmp_path / "frames"), "--out", str(out),
                 "--background", str(bg), *TRACK_ARGS, "--speed_threshold", "25"])
    assert code == 0
    records = tables.read_ntxy(out)
    assert {r.pedestrian_number for r in records} == {1, 2}
    assert "pedestrians: 2, slices: 12" in capsys.readouterr().out


def test_track_needs_speed_threshold(tmp_path):
    tables.write_database(tmp_path / "db.csv", [])
    assert main(["track", "--db", str(tmp_path / "db.csv"), "--out", str(tmp_path / "n.csv")]) == 2


def test_track_empty_database(tmp_path):
    tables.write_database(tmp_path / "db.csv", [])
    out = tmp_path / "ntxy.csv"
    assert main(["track", "--db", str(tmp_path / "db.csv"), "--out", str(out), *TRACK_ARGS]) == 0
    assert tables.read_ntxy(out) == []


def test_track_applies_calibration(tmp_path):
    truth, bg = write_stack(tmp_path / "frames", two_disks(4))
    cal = tmp_path / "points.csv"
    cal.write_text("Xi,Yi,Xr,Yr\n0,0,0,0\n100,0,1,0\n0,100,0,2\n")
    out = tmp_path / "ntxy.csv"
    assert main(["track", "--frames", str(tmp_path / "frames"), "--out", str(out), "--background", str(bg),
                 "--calibration", str(cal), *TRACK_ARGS, "--speed_threshold", "80"]) == 0
    first = tables.read_ntxy(out)[0]
    x, y = truth.positions[1][1]
    assert (first.x, first.y) == pytest.approx((x / 100, y / 50), abs=0.02)


@pytest.mark.xfail(strict=True, reason=(
    "greedy descriptor voting hands the merged blob to the hidden actor's track, "
    "and no speed gate both excludes it and keeps gap-1 self matches"))
def test_track_crossing_occlusion_keeps_identities(tmp_path):
    # small disk passes behind a large one; it is invisible for exactly slices 10-11
    small = Actor(size=4, color=(40, 220, 40), path=[(1, 60, 120), (20, 212, 120)], hidden={10, 11})
    big = Actor(size=12, color=(220, 40, 40), path=[(1, 216, 120), (20, 64, 120)])
    s = Scenario(actors=[small, big], frame_count=20)
    truth, bg = write_stack(tmp_path / "frames", s)
    out = tmp_path / "ntxy.csv"
    assert main(["track", "--frames", str(tmp_path / "frames"), "--out", str(out), "--background", str(bg),
                 "--speed_threshold", "12", "--max_gap", "3", "--area_threshold", "20"]) == 0
    rep = score_tracking(tables.read_ntxy(out), truth)
    assert rep.identity_rate == 100.0 and rep.false_positives == 0


def write_two_speed_ntxy(path):
    recs = [NtxyRecord(1, t, 0.0, t - 1.0) for t in range(1, 11)]
    recs += [NtxyRecord(2, t, 5.0, 2.0 * (t - 1)) for t in range(1, 11)]
    tables.write_ntxy(path, recs)


def test_metrics_hand_built(tmp_path):
    write_two_speed_ntxy(tmp_path / "ntxy.csv")
    out = tmp_path / "report.csv"
    code = main(["metrics", "--ntxy", str(tmp_path / "ntxy.csv"), "--out", str(out),
                 "--trap=-1,-1,10,30", "--interval", "1", "10", "--series-dir", str(tmp_path / "series")])
    assert code == 0
    summary = tables.read_flow_summary(out)
    assert abs(float(summary["time_mean_speed"]) - 1.5) <= 1e-9
    assert abs(float(summary["space_mean_speed"]) - 4 / 3) <= 1e-9
    assert int(summary["kappa"]) == 2
    for name in ("trajectories.csv", "speed_profile.csv", "headways.csv"):
        assert (tmp_path / "series" / name).exists()


def test_metrics_empty(tmp_path):
    tables.write_ntxy(tmp_path / "ntxy.csv", [])
    out = tmp_path / "report.csv"
    assert main(["metrics", "--ntxy", str(tmp_path / "ntxy.csv"), "--out", str(out), "--trap", "0,0,5,5"]) == 0
    assert int(tables.read_flow_summary(out)["kappa"]) == 0


def test_metrics_bad_interval(tmp_path):
    write_two_speed_ntxy(tmp_path / "ntxy.csv")
    code = main(["metrics", "--ntxy", str(tmp_path / "ntxy.csv"), "--out", str(tmp_path / "r.csv"),
                 "--trap", "0,0,5,5", "--interval", "7", "7"])
    assert code == 2


def test_metrics_needs_trap(tmp_path):
    write_two_speed_ntxy(tmp_path / "ntxy.csv")
    assert main(["metrics", "--ntxy", str(tmp_path / "ntxy.csv"), "--out", str(tmp_path / "r.csv")]) == 2


SCENARIO = """\
# two disks on separate lanes
width = 320
height = 240
frame_count = 15
actor.1.size = 8
actor.1.color = 230, 40, 40
actor.1.path = 1:30:60; 15:250:60
actor.2.size = 11
actor.2.color = 40, 40, 230
actor.2.path = 1:280:170; 15:70:170
"""


def test_synth_detect_track_score_roundtrip(tmp_path, capsys):
    (tmp_path / "scene.txt").write_text(SCENARIO)
    run = tmp_path / "run"
    assert main(["synth", "--scenario", str(tmp_path / "scene.txt"), "--out-dir", str(run)]) == 0
    assert len(list((run / "frames").glob("*.ppm"))) == 15
    common = ["--background", str(run / "background.ppm"), *TRACK_ARGS, "--speed_threshold", "25"]
    assert main(["detect", "--frames", str(run / "frames"), "--out", str(run / "db.csv"), *common]) == 0
    assert main(["track", "--db", str(run / "db.csv"), "--out", str(run / "piped.csv"), *common]) == 0
    assert main(["track", "--frames", str(run / "frames"), "--out", str(run / "fused.csv"), *common]) == 0
    assert (run / "piped.csv").read_bytes() == (run / "fused.csv").read_bytes()
    capsys.readouterr()
    assert main(["score", "--ntxy", str(run / "piped.csv"), "--truth", str(run / "truth.csv"),
                 "--out", str(run / "score.csv")]) == 0
    out = capsys.readouterr().out
    assert "identity_rate: 100.0" in out
    assert "false_positives: 0" in out and "false_negatives: 0" in out


def test_calibrate(tmp_path, capsys):
    pts = [(3, 7), (150, 20), (40, 200), (310, 230), (95, 120), (220, 60)]
    lines = ["Xi,Yi,Xr,Yr"] + [f"{x},{y},{2 + 0.1 * x + 0.02 * y!r},{-1 + 0.01 * x + 0.12 * y!r}" for x, y in pts]
    (tmp_path / "pts.csv").write_text("\n".join(lines) + "\n")
    out = tmp_path / "cal.csv"
    assert main(["calibrate", "--points", str(tmp_path / "pts.csv"), "--out", str(out)]) == 0
    cal = tables.read_calibration(out)
    assert np.allclose((cal.u, cal.v, cal.w, cal.x0, cal.y0, cal.z0), (2, 0.1, 0.02, -1, 0.01, 0.12), atol=1e-9)


def test_calibrate_collinear(tmp_path):
    (tmp_path / "pts.csv").write_text("Xi,Yi,Xr,Yr\n0,0,0,0\n1,1,1,1\n2,2,2,2\n")
    assert main(["calibrate", "--points", str(tmp_path / "pts.csv"), "--out", str(tmp_path / "c.csv")]) == 2
