import json
from pathlib import Path

import pytest

jsonschema = pytest.importorskip("jsonschema")

from hypothesis import given, settings
from hypothesis import strategies as st

from frontlab.cli import main
from frontlab.config import ConfigError, parse_config_text, validate, Option

SCHEMA_DIR = Path(__file__).resolve().parents[1] / "docs" / "schemas"


def write_config(tmp_path: Path, text: str) -> Path:
    p = tmp_path / "run.cfg"
    p.write_text(text)
    return p


def check_schema(path: Path, schema_name: str):
    payload = json.loads(path.read_text())
    schema = json.loads((SCHEMA_DIR / schema_name).read_text())
    jsonschema.validate(payload, schema)
    return payload


EIGEN_CFG = """
experiment = eigen
reaction.name = compact_favorable
reaction.m = 2.0
reaction.mprime = 2.0
reaction.L = 2.0
reaction.K = 1.0
grid.X = 10
grid.nodes_per_unit = 8
grid.ny = 7
grid.lateral = neumann
speed.c = 1.0
eigen.R_list = 6, 8, 10
"""


def test_config_parser_basics():
    cfg = parse_config_text("a.b = 1.5\nflag = true\nname = hi # comment\nlist = 1,2,3\n")
    assert cfg["a.b"] == 1.5
    assert cfg["flag"] is True
    assert cfg["name"] == "hi"
    assert cfg["list"] == [1, 2, 3]


def test_config_rejects_duplicates_and_garbage():
    with pytest.raises(ConfigError):
        parse_config_text("a = 1\na = 2\n")
    with pytest.raises(ConfigError):
        parse_config_text("not a key value line\n")


def test_validate_rejects_unknown_key():
    schema = {"a": Option(float, 1.0)}
    with pytest.raises(ConfigError) as err:
        validate({"bogus": 2}, schema, "demo")
    assert "bogus" in str(err.value)


def test_cmd_eigen_writes_valid_artifacts(tmp_path):
    cfg = write_config(tmp_path, EIGEN_CFG)
    out = tmp_path / "out"
    assert main(["eigen", "--config", str(cfg), "--out", str(out)]) == 0
    payload = check_schema(out / "eigen.json", "eigen.schema.json")
    assert payload["c_star"] is not None
    assert payload["monotone"] is True
    check_schema(out / "manifest.json", "manifest.schema.json")
    csv = (out / "lambda_R.csv").read_text().splitlines()
    assert csv[0] == "R,lambda"
    assert len(csv) == 4


def test_cmd_eigen_null_cstar(tmp_path):
    cfg = write_config(
        tmp_path,
        """
experiment = eigen
reaction.name = illustration
reaction.alpha = 0.3
reaction.L = 0.0
reaction.theta = -2.0
grid.X = 10
grid.nodes_per_unit = 8
grid.ny = 9
eigen.R_list = 6, 8, 10
""",
    )
    out = tmp_path / "out"
    assert main(["eigen", "--config", str(cfg), "--out", str(out)]) == 0
    payload = check_schema(out / "eigen.json", "eigen.schema.json")
    assert payload["c_star"] is None  # lambda0 >= 0 encodes extinction at all speeds


def test_malformed_key_exits_1(tmp_path, capsys):
    cfg = write_config(tmp_path, EIGEN_CFG + "\nbogus.key = 3\n")
    code = main(["eigen", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 1
    assert "bogus.key" in capsys.readouterr().err


def test_missing_config_exits_1(tmp_path):
    assert main(["eigen", "--config", str(tmp_path / "nope.cfg")]) == 1


def test_experiment_mismatch_exits_1(tmp_path):
    cfg = write_config(tmp_path, EIGEN_CFG.replace("experiment = eigen", "experiment = front"))
    assert main(["eigen", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1


def test_cmd_front_artifacts(tmp_path):
    cfg = write_config(
        tmp_path,
        """
experiment = front
reaction.name = compact_favorable
reaction.L = 2.0
grid.X = 16
grid.nodes_per_unit = 10
grid.ny = 7
speed.c = 1.0
""",
    )
    out = tmp_path / "out"
    assert main(["front", "--config", str(cfg), "--out", str(out)]) == 0
    payload = check_schema(out / "front.json", "front.schema.json")
    assert payload["positive"] is True
    assert payload["residual"] < 1e-9
    header = (out / "front.csv").read_text().splitlines()[0]
    assert header == "x1,y,U"


def test_cmd_evolve_and_exit_codes(tmp_path):
    base = """
experiment = evolve
reaction.name = compact_favorable
reaction.L = 2.0
grid.X = 20
grid.nodes_per_unit = 8
grid.ny = 7
evolve.sample_every = 2.0
"""
    cfg = write_config(tmp_path, base + "speed.c = 2.5\nevolve.horizon = 120\n")
    out = tmp_path / "ext"
    assert main(["evolve", "--config", str(cfg), "--out", str(out)]) == 0
    payload = check_schema(out / "evolve.json", "evolve.schema.json")
    assert payload["outcome"] == "extinction"
    # a short horizon leaves the verdict undecided: exit code 3
    cfg2 = write_config(tmp_path, base + "speed.c = 2.5\nevolve.horizon = 6\n")
    out2 = tmp_path / "und"
    assert main(["evolve", "--config", str(cfg2), "--out", str(out2)]) == 3
    payload2 = check_schema(out2 / "evolve.json", "evolve.schema.json")
    assert payload2["outcome"] == "undecided"


def test_cmd_sweep_determinism(tmp_path):
    cfg = write_config(
        tmp_path,
        """
experiment = sweep
reaction.name = compact_favorable
reaction.L = 2.0
grid.X = 14
grid.nodes_per_unit = 8
grid.ny = 7
sweep.points = 5
sweep.horizon = 80
""",
    )
    out1, out2 = tmp_path / "a", tmp_path / "b"
    code1 = main(["sweep", "--config", str(cfg), "--out", str(out1)])
    code2 = main(["sweep", "--config", str(cfg), "--out", str(out2)])
    assert code1 == code2
    assert code1 in (0, 3)
    assert (out1 / "phase.csv").read_bytes() == (out2 / "phase.csv").read_bytes()
    assert (out1 / "sweep.json").read_bytes() == (out2 / "sweep.json").read_bytes()
    check_schema(out1 / "sweep.json", "sweep.schema.json")
    header = (out1 / "phase.csv").read_text().splitlines()[0]
    assert header == "c,lambda,outcome"


def test_cmd_pulsate_refusal(tmp_path):
    cfg = write_config(
        tmp_path,
        """
experiment = pulsate
reaction.name = compact_favorable
reaction.L = 2.0
grid.X = 10
grid.nodes_per_unit = 8
grid.ny = 8
grid.lateral = periodic_y
speed.c = 2.5
pulsate.steps = 32
""",
    )
    out = tmp_path / "out"
    assert main(["pulsate", "--config", str(cfg), "--out", str(out)]) == 0
    payload = check_schema(out / "pulsate.json", "pulsate.schema.json")
    assert payload["refused"] is True
    assert not (out / "orbit.csv").exists()


def test_cmd_symmetry(tmp_path):
    cfg = write_config(
        tmp_path,
        """
experiment = symmetry
reaction.name = illustration
reaction.alpha = 0.3
reaction.L = 3.0
reaction.theta = -2.0
grid.X = 11
grid.nodes_per_unit = 20
grid.ny = 9
speed.c = 1.0
symmetry.fit_lo = 0.45
symmetry.fit_hi = 0.8
""",
    )
    out = tmp_path / "out"
    assert main(["symmetry", "--config", str(cfg), "--out", str(out)]) == 0
    payload = check_schema(out / "symmetry.json", "symmetry.schema.json")
    assert payload["verdict"] == "Asymmetric"


def test_numerical_failure_exits_2(tmp_path, capsys):
    cfg = write_config(tmp_path, EIGEN_CFG.replace("experiment = eigen", "experiment = eigen") + "\nsolver.tol = 1e-30\n")
    code = main(["eigen", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "numerical failure" in capsys.readouterr().err
    assert not (tmp_path / "o" / "eigen.json").exists()  # partial outputs removed


def test_fixture_artifacts_validate_against_schemas():
    fixtures = Path(__file__).resolve().parents[1] / "frontend" / "fixtures"
    if not fixtures.is_dir():
        pytest.skip("reference artifact set not generated")
    pairs = [
        ("front/front.json", "front.schema.json"),
        ("evolve/evolve.json", "evolve.schema.json"),
        ("sweep/sweep.json", "sweep.schema.json"),
        ("illustrate/lstar.json", "lstar.schema.json"),
        ("symmetry/symmetry.json", "symmetry.schema.json"),
        ("concentrate/concentration.json", "concentration.schema.json"),
        ("pulsate/pulsate.json", "pulsate.schema.json"),
    ]
    for rel, schema in pairs:
        path = fixtures / rel
        assert path.is_file(), f"missing fixture {rel}"
        check_schema(path, schema)
        check_schema(path.parent / "manifest.json", "manifest.schema.json")


def test_cmd_eigen_and_front_rerun_byte_identical(tmp_path):
    cfg = write_config(tmp_path, EIGEN_CFG)
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert main(["eigen", "--config", str(cfg), "--out", str(out)]) == 0
        outs.append(out)
    for artifact in ("eigen.json", "lambda_R.csv", "manifest.json"):
        assert (outs[0] / artifact).read_bytes() == (outs[1] / artifact).read_bytes()


@settings(max_examples=40, deadline=None)
@given(
    keys=st.lists(
        st.from_regex(r"[a-z][a-z0-9_]{0,8}(\.[a-z][a-z0-9_]{0,8})?", fullmatch=True),
        min_size=1, max_size=6, unique=True,
    ),
    values=st.lists(
        st.one_of(st.integers(-10**6, 10**6), st.floats(-1e6, 1e6, allow_nan=False), st.booleans()),
        min_size=6, max_size=6,
    ),
)
def test_config_roundtrip_property(keys, values):
    text = "\n".join(f"{k} = {v}" for k, v in zip(keys, values))
    parsed = parse_config_text(text)
    assert set(parsed) == set(keys)
    for k, v in zip(keys, values):
        if isinstance(v, bool):
            assert parsed[k] is v
        elif isinstance(v, int):
            assert parsed[k] == v
        else:
            assert parsed[k] == pytest.approx(v, rel=1e-12, abs=1e-12)


def test_cmd_symmetry_trivial_front_exits_2(tmp_path, capsys):
    # above the critical speed the front is trivial: symmetry analysis refuses
    cfg = write_config(
        tmp_path,
        """
experiment = symmetry
reaction.name = illustration
reaction.alpha = 0.3
reaction.L = 2.0
reaction.theta = -2.0
grid.X = 10
grid.nodes_per_unit = 8
grid.ny = 9
speed.c = 4.0
""",
    )
    code = main(["symmetry", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 2
    err = capsys.readouterr().err
    assert "numerical failure" in err and "trivial" in err
