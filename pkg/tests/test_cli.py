import json

import jsonschema
import pytest
from click.testing import CliRunner

from symexpand.cli import cli, load_schema

C2V_TYPES = """\
1             +1
m1            -1
m1^2 - 1/3 i  +1
m2^2 - m3^2   +1
m2 m3         -1
"""

S4_TYPES = """\
1             +1
m1            +1
m1^2 - 1/3 i  +1
m2^2 - m3^2   -1
m2 m3         -1
"""

CROSS_LINES = {
    "C2v": ["ε_{ijk} ⟨m1^2 - 1/3 i⟩_{i1,i} ∂_{k}⟨m2 m3⟩_{i1,j}",
            "ε_{ijk} ⟨m2^2 - m3^2⟩_{i1,i} ∂_{k}⟨m2 m3⟩_{i1,j}"],
    "S4": ["ε_{ijk} ⟨m1^2 - 1/3 i⟩_{i1,i} ∂_{k}⟨m2^2 - m3^2⟩_{i1,j}",
           "ε_{ijk} ⟨m1^2 - 1/3 i⟩_{i1,i} ∂_{k}⟨m2 m3⟩_{i1,j}"],
}


def run(*args):
    return CliRunner().invoke(cli, list(args))


@pytest.mark.parametrize("group,text", [("C2v", C2V_TYPES), ("S4", S4_TYPES)])
def test_type_table_output(group, text):
    res = run("types", "--group", group, "--max-order", "2")
    assert res.exit_code == 0
    assert res.output == text


@pytest.mark.parametrize("group", ["C2v", "S4"])
def test_first_order_cross_couplings(group):
    res = run("expand", "--group", group, "--gradient", "1", "--max-order", "2")
    assert res.exit_code == 0
    got = [line[5:] for line in res.output.splitlines() if "ε" in line]
    assert got == CROSS_LINES[group]


def test_basis_text():
    res = run("basis", "--order", "1")
    assert res.output == "order 1: 3 tensors\nW1_0 = m1\nW1_1 = m2\nW1_2 = m3\n"


def test_invariants_json():
    res = run("invariants", "--group", "D3", "--order", "3", "--format", "json")
    doc = json.loads(res.output)
    assert doc["kind"] == "invariants" and len(doc["tensors"]) == 1


@pytest.mark.parametrize("args", [
    ("expand", "--group", "C2v", "--gradient", "1", "--max-order", "2", "--certify"),
    ("expand", "--group", "D3d", "--cluster", "3", "--max-order", "2"),
    ("expand", "--group", "Td", "--cluster", "4", "--max-order", "2"),
    ("expand", "--group", "Oh", "--max-order", "2", "--orthogonal", "--gradient", "2"),
])
def test_expand_json_validates(args):
    res = run(*args, "--format", "json")
    assert res.exit_code == 0, res.output
    doc = json.loads(res.output)
    jsonschema.validate(doc, load_schema())
    assert [t["index"] for t in doc["terms"]] == list(range(len(doc["terms"])))


def test_certificate_embedded():
    doc = json.loads(run("expand", "--group", "C2v", "--gradient", "1", "--max-order", "2", "--certify",
                         "--format", "json").output)
    cert = doc["certificate"]
    assert cert["status"] == "passed" and cert["rank"] == len(doc["terms"])


def test_expand_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run("expand", "--group", "D3h", "--gradient", "2", "--max-order", "3", "--format", "json",
                   "--output", str(path)).exit_code == 0
    assert a.read_bytes() == b.read_bytes()


def test_oh_two_body_zeroth_order_is_constant_only():
    doc = json.loads(run("expand", "--group", "Oh", "--max-order", "3", "--format", "json").output)
    assert len(doc["terms"]) == 1
    assert doc["terms"][0]["rendering"] == "⟨1⟩ ⟨1⟩"


@pytest.mark.parametrize("args,code", [
    (("basis", "--order", "9"), 2),
    (("types", "--group", "T", "--max-order", "2"), 3),
    (("types", "--group", "Q7", "--max-order", "2"), 2),
    (("expand", "--group", "C2v", "--cluster", "5"), 2),
    (("expand", "--group", "C2v", "--cluster", "3", "--gradient", "1"), 2),
    (("project", "--kernel", "isotropic-gaussian", "--grid", "4,2,4,2,3,3"), 5),
    (("project", "--kernel", "rotation-distance-gaussian", "--grid", "4,2,4,2,3,3"), 5),
    (("project", "--kernel", "no-such-kernel"), 2),
    (("project", "--kernel", "isotropic-gaussian", "--grid", "1,2,3"), 2),
])
def test_exit_codes(args, code):
    assert run(*args).exit_code == code


def test_verify_single_suite():
    res = run("verify", "--suite", "m4-selection")
    assert res.exit_code == 0
    assert res.stdout.splitlines()[-1] == "suite m4-selection: passed"


def test_project_with_figure(tmp_path):
    fig, out = tmp_path / "r.png", tmp_path / "r.json"
    res = run("project", "--kernel", "planted-bandlimited", "--max-order", "2", "--figure", str(fig),
              "--format", "json", "--output", str(out))
    assert res.exit_code == 0, res.output
    assert fig.read_bytes()[:4] == b"\x89PNG"
    doc = json.loads(out.read_text())
    assert max(p["error"] for p in doc["planted"]) <= 1e-8
    assert doc["residuals"][-1]["residual"] < 1e-8


def test_project_plugin(tmp_path, monkeypatch):
    (tmp_path / "cliplug.py").write_text("from symexpand.kernelproj import isotropic_gaussian\n"
                                         "KERNEL = isotropic_gaussian(sigma=0.7)\n")
    monkeypatch.syspath_prepend(str(tmp_path))
    res = run("project", "--kernel", "cliplug:KERNEL", "--max-order", "1", "--grid", "16,4,8,8,12,12",
              "--no-resolution-check")
    assert res.exit_code == 0, res.output
    assert res.output.startswith("kernel isotropic-gaussian")


def test_console_entry_point():
    from symexpand.cli import main

    with pytest.raises(SystemExit) as exc:
        main(["basis", "--order", "0"])
    assert exc.value.code == 0
