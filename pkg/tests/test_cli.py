import pytest

from fireretain.cli import main
from fireretain.groups import construct_group, lamplighter_element as lamp


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_growth(capsys):
    code, out = run(capsys, "growth", "Z^2", "3")
    assert code == 0
    assert out.out.splitlines() == ["radius,volume", "0,1", "1,5", "2,13", "3,25"]


def test_growth_falls_back_to_packed_lamplighter(capsys):
    code, out = run(capsys, "--memory-budget", "100", "growth", "Z2wrZ", "6")
    assert code == 0 and out.out.splitlines()[-1] == "6,904"
    code, out = run(capsys, "--memory-budget", "100", "growth", "F2", "6")
    assert code == 2 and "largest" in out.err.lower()


def test_simulate(capsys, tmp_path):
    conf = tmp_path / "run.ini"
    out = tmp_path / "run.csv"
    conf.write_text(f"[experiment]\ngroup = F2\nstrategy = branch-cut\nbudget = const:1\nT = 6\nR_max = 7\n"
                    f"report_radii = 6\noutput = {out}\n")
    code, res = run(capsys, "simulate", str(conf))
    assert code == 0 and "saved fraction at radius 6: 364/1457" in res.out
    first = out.read_bytes()
    run(capsys, "simulate", str(conf))
    assert out.read_bytes() == first


def test_isoperim_and_poincare(capsys):
    code, out = run(capsys, "isoperim", "Z^2", "2", "--trials", "20", "--seed", "1")
    assert code == 0 and "0 violations" in out.out
    code, out = run(capsys, "poincare", "F2", "2", "--trials", "20")
    assert code == 0 and "20 instances" in out.out


def test_paths(capsys, tmp_path):
    G = construct_group("Z2wrZ")
    fam = tmp_path / "fam.txt"
    pairs = [(lamp([0], 0), lamp([1], 1)), (lamp([-1], 0), lamp([0, 1], 0))]
    body = "\n".join(f"pair {G.encode(a).hex()} {G.encode(b).hex()}" for a, b in pairs)
    fam.write_text(f"# two pairs\ngroup Z2wrZ\nn 2\ncase 1\n{body}\n")
    code, out = run(capsys, "paths", str(fam))
    lines = out.out.splitlines()
    assert code == 0
    assert lines[0] == "index,length,endpoint_ok,intersections"
    assert all(l.split(",")[2] == "1" for l in lines[1:3])
    assert "pairwise disjoint True" in lines[-1]
    fam.write_text("n 2\n")
    code, out = run(capsys, "paths", str(fam))
    assert code == 2


def test_shield_verify(capsys):
    code, out = run(capsys, "shield-verify", "3", "8", "--census", "9")
    assert code == 0
    assert "# shield elements burnt by turn 8: 0" in out.out
    assert "9,160,8352," in out.out


def test_cache_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("FIRERETAIN_CACHE", str(tmp_path))
    assert run(capsys, "cache", "list")[0] == 0
    assert run(capsys, "cache", "build", "Z^2", "5")[0] == 0
    code, out = run(capsys, "cache", "verify", "Z^2", "5")
    assert code == 0 and out.out.startswith("ok")
    code, out = run(capsys, "cache", "list")
    assert "Z^2" in out.out


def test_bad_arguments(capsys):
    with pytest.raises(SystemExit):
        main(["growth"])
    assert run(capsys, "growth", "Q7", "2")[0] == 2
