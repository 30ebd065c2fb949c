import pytest

from killedwalk.cli import run

MODEL = "dim 2\njump 1 0 0.3\njump -1 0 0.2\njump 0 1 0.3\njump 0 -1 0.2\n"


@pytest.fixture
def model(tmp_path):
    p = tmp_path / "m1.model"
    p.write_text(MODEL)
    return str(p)


def kv(text):
    return dict(line.split("=", 1) for line in text.strip().splitlines())


def test_validate(model, capsys):
    assert run(["validate", "--model", model]) == 0
    out = kv(capsys.readouterr().out)
    assert out["period"] == "2" and out["left_continuous"] == "true"


def test_validate_failure_exit_two(tmp_path, capsys):
    p = tmp_path / "zm.model"
    p.write_text("dim 2\njump 1 0 0.25\njump -1 0 0.25\njump 0 1 0.25\njump 0 -1 0.25\n")
    assert run(["validate", "--model", str(p)]) == 2


def test_geometry_output(model, capsys):
    assert run(["geometry", "--model", model, "--q", "1,0"]) == 0
    out = kv(capsys.readouterr().out)
    ax, ay = (float(c) for c in out["a"].split(","))
    assert ax == pytest.approx(0.0834878, abs=1e-7) and ay == pytest.approx(-0.2027326, abs=1e-7)
    assert out["class"] == "tangent"


def test_harmonic_csv(model, capsys):
    assert run(["harmonic", "--model", model, "--a", "0,0", "--z", "0,1;7,2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "z,h,residual,explicit"
    assert float(lines[2].split(",")[1]) == pytest.approx(5 / 9)


def test_green_and_out(model, tmp_path, capsys):
    out = tmp_path / "g.csv"
    assert run(["green", "--model", model, "--target", "1,2", "--z", "0,1", "--box", "20,20", "--out", str(out)]) == 0
    assert out.read_text().startswith("z,G\n")


def test_ratio_csv(model, capsys):
    assert run(["ratio", "--model", model, "--q", "1,1", "--z", "0,2", "--z0", "0,1", "--targets", "diag:5..10:5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,abs_zn,kernel,limit,abs_err" and len(lines) == 3


def test_mc_needs_seed(model, capsys):
    assert run(["mc", "boundary", "--model", model]) == 2
    assert "seed" in capsys.readouterr().err


def test_mc_reproducible(model, capsys):
    args = ["mc", "boundary", "--model", model, "--seed", "4", "--paths", "2000", "--horizon", "200"]
    run(args)
    first = capsys.readouterr().out
    run(args)
    assert capsys.readouterr().out == first


def test_bad_inputs_exit_two(tmp_path, model, capsys):
    assert run(["validate", "--model", str(tmp_path / "missing")]) == 2
    bad = tmp_path / "bad.model"
    bad.write_text("dim 2\njump 1 0 oops\n")
    assert run(["validate", "--model", str(bad)]) == 2
    assert run(["geometry", "--model", model, "--q", "1,x"]) == 2
    assert run(["harmonic", "--model", model, "--a", "0.3,0.3", "--z", "0,1"]) == 2


def test_rate(model, capsys):
    assert run(["rate", "--model", model, "--path", "0:0,0;1:0.1,-0.1"]) == 0
    out = kv(capsys.readouterr().out)
    assert out["rate_killed"] == "inf" and float(out["rate_free"]) > 0
