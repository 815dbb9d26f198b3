import csv
import io
import json
from importlib import resources

import jsonschema
import pytest

from laymat.calibration import error_map
from laymat.circuit import from_gates, load_circuit, serialize_circuit
from laymat.cli import main
from laymat.interaction import build_interaction_graph
from laymat.selector import load_device
from laymat.subiso import Layout, verify_layout

from .oracles import brute_force_embeddings, hand_ghz_on_nairobi, reference_score


def schema(name):
    return json.loads(resources.files("laymat").joinpath(f"schemas/{name}.schema.json").read_text())


def run(*argv):
    buf = io.StringIO()
    code = main([str(a) for a in argv], out=buf)
    return code, buf.getvalue()


def run_json(*argv, expect=0):
    code, text = run(*argv)
    assert code == expect, text
    return json.loads(text)


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    for name, topo, profile in [("uniform", "nairobi", "uniform"), ("gradient", "nairobi", "gradient"),
                                ("hotspot", "nairobi", "hotspot"), ("pair", "line:2", "gradient"),
                                ("hh", "heavy-hex:3", "gradient")]:
        code, text = run("device", "--topology", topo, "--profile", profile, "--seed", 3, "--name", name)
        assert code == 0
        (d / f"{name}.json").write_text(text)
    (d / "ghz.qasm").write_text(hand_ghz_on_nairobi())
    path3 = from_gates(3, [("sx", 0), ("cx", 0, 1), ("cx", 2, 1), ("rz", (0.5,), 2),
                           ("measure", 0, 0), ("measure", 1, 1), ("measure", 2, 2)], 3)
    (d / "path3.qasm").write_text(serialize_circuit(path3))
    return d


def test_device_bundle_validates_and_loads(workdir):
    data = json.loads((workdir / "gradient.json").read_text())
    jsonschema.validate(data, schema("device"))
    assert load_device(data).coupling_map.num_qubits == 7


def test_graph_output(workdir):
    data = run_json("graph", workdir / "path3.qasm")
    jsonschema.validate(data, schema("graph"))


def test_find_layouts_output(workdir):
    data = run_json("find-layouts", workdir / "path3.qasm", "--device", workdir / "gradient.json")
    jsonschema.validate(data, schema("find-layouts"))
    assert data["num_layouts"] == 14
    assert data["exhausted"] is True
    scores = [r["score"] for r in data["layouts"]]
    assert scores == sorted(scores)


def test_find_layouts_respects_max_layouts(workdir):
    data = run_json("find-layouts", workdir / "path3.qasm", "--device", workdir / "gradient.json",
                    "--max-layouts", 1)
    assert len(data["layouts"]) == 1
    assert data["exhausted"] is False


def test_find_layouts_table_and_plot(workdir, tmp_path):
    png = tmp_path / "scores.png"
    code, text = run("find-layouts", workdir / "path3.qasm", "--device", workdir / "uniform.json",
                     "--format", "table", "--plot", png)
    assert code == 0
    lines = text.splitlines()
    assert lines[0].split() == ["rank", "layout", "score", "tied_with"]
    assert len(lines) == 15
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_no_embedding_exit_code(workdir):
    data = run_json("find-layouts", workdir / "path3.qasm", "--device", workdir / "pair.json", expect=3)
    assert data["layouts"] == []
    code, _ = run("remap", workdir / "path3.qasm", "--device", workdir / "pair.json")
    assert code == 3


def test_edgeless_device_exits_3(workdir, tmp_path):
    data = json.loads((workdir / "uniform.json").read_text())
    data["coupling_map"]["edges"] = []
    bare = tmp_path / "bare.json"
    bare.write_text(json.dumps(data))
    (tmp_path / "pair.qasm").write_text(serialize_circuit(from_gates(2, [("cx", 0, 1)])))
    out = run_json("find-layouts", tmp_path / "pair.qasm", "--device", bare, expect=3)
    assert out["num_layouts"] == 0 and out["exhausted"] is True


def test_budget_exhaustion_without_layouts_exits_3(workdir):
    data = run_json("find-layouts", workdir / "path3.qasm", "--device", workdir / "gradient.json",
                    "--max-visits", 1, expect=3)
    assert data["exhausted"] is False


@pytest.mark.parametrize("argv", [
    ["find-layouts", "{d}/missing.qasm", "--device", "{d}/gradient.json"],
    ["find-layouts", "{d}/path3.qasm", "--device", "{d}/missing.json"],
    ["find-layouts", "{d}/path3.qasm"],
    ["find-layouts", "{d}/gradient.json", "--device", "{d}/gradient.json"],
    ["find-layouts", "{d}/path3.qasm", "--device", "{d}/path3.qasm"],
    ["remap", "{d}/path3.qasm", "--device", "{d}/gradient.json", "--device", "{d}/uniform.json"],
    ["device", "--topology", "torus:4"],
])
def test_input_errors_exit_2(workdir, argv):
    code, _ = run(*[a.format(d=workdir) for a in argv])
    assert code == 2


def test_argument_errors_exit_2(workdir):
    with pytest.raises(SystemExit) as info:
        run("find-layouts", workdir / "path3.qasm", "--mode", "sloppy")
    assert info.value.code == 2


@pytest.mark.parametrize("mode", ["loose", "strict"])
def test_remap_output_reembeds(workdir, tmp_path, mode):
    out = tmp_path / "out.qasm"
    data = run_json("remap", workdir / "path3.qasm", "--device", workdir / "hh.json",
                    "--mode", mode, "-o", out)
    jsonschema.validate(data, schema("remap"))
    circuit = load_circuit(out.read_text())
    dev = load_device((workdir / "hh.json").read_text())
    ig = build_interaction_graph(circuit, mode)
    assert verify_layout(ig, dev.coupling_map, Layout.identity(circuit.active_qubits()), mode)
    assert [q for q in data["layout"]] == [i.qubits[0] for i in circuit.instructions if i.name == "measure"]


def test_remap_json_output_inline(workdir):
    data = run_json("remap", workdir / "path3.qasm", "--device", workdir / "gradient.json",
                    "--output-format", "json")
    jsonschema.validate(data, schema("remap"))
    assert load_circuit(data["circuit"]).num_qubits == 7


def test_remap_is_idempotent(workdir, tmp_path):
    first, second = tmp_path / "a.qasm", tmp_path / "b.qasm"
    run_json("remap", workdir / "path3.qasm", "--device", workdir / "gradient.json", "-o", first)
    run_json("remap", first, "--device", workdir / "gradient.json", "-o", second)
    assert first.read_text() == second.read_text()


@pytest.mark.parametrize("profile", ["gradient", "hotspot"])
def test_remap_matches_brute_force_optimum(workdir, profile):
    data = run_json("remap", workdir / "path3.qasm", "--device", workdir / f"{profile}.json")
    dev = load_device((workdir / f"{profile}.json").read_text())
    circuit = load_circuit((workdir / "path3.qasm").read_text())
    em = error_map(dev.calibration, "loose")
    ig = build_interaction_graph(circuit, "loose")
    images = brute_force_embeddings(ig.nodes, ig.edges, 7, dev.coupling_map.edges, directed=False)

    def score(image):
        m = dict(zip(sorted(ig.nodes), image))
        return reference_score([em.error(i.name, tuple(m[q] for q in i.qubits))
                                for i in circuit.instructions if i.name != "barrier"])

    best = min(score(im) for im in images)
    assert abs(data["score"] - best) <= 1e-12
    assert abs(score(tuple(data["layout"])) - best) <= 1e-12


def test_select_device_output(workdir):
    data = run_json("select-device", workdir / "path3.qasm", "--device", workdir / "pair.json",
                    "--device", workdir / "uniform.json", "--device", workdir / "gradient.json")
    jsonschema.validate(data, schema("select-device"))
    assert data["devices"][0]["skip_reason"] == "insufficient embedding"
    live = [d for d in data["devices"] if d["best"]]
    assert data["winner"]["score"] == min(d["best"]["score"] for d in live)
    code, text = run("select-device", workdir / "path3.qasm", "--device", workdir / "pair.json",
                     "--device", workdir / "gradient.json", "--format", "table")
    assert code == 0 and text.splitlines()[-1] == "winner: gradient"


def test_validate_output_and_plot(workdir, tmp_path):
    png = tmp_path / "v.png"
    data = run_json("validate", workdir / "ghz.qasm", "--device", workdir / "gradient.json",
                    "--shots", 2000, "--plot", png)
    jsonschema.validate(data, schema("validate"))
    assert len(data["results"]) == 14
    assert all(0 <= r["sim_fidelity"] <= 1 for r in data["results"])
    assert png.stat().st_size > 0


def test_bench_csv_and_plot(tmp_path):
    out, png = tmp_path / "b.csv", tmp_path / "b.png"
    code, _ = run("bench", "--widths", "2,3", "--distance", 2, "--runs", 2, "--depth", 2,
                  "--csv", out, "--plot", png)
    assert code == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert [(r["width"], r["ordering"]) for r in rows] == [("2", "vf2"), ("2", "vf2pp"),
                                                          ("3", "vf2"), ("3", "vf2pp")]
    assert all(float(r["median_s"]) < 1.0 for r in rows)
    assert png.stat().st_size > 0


def test_bench_to_stdout():
    code, text = run("bench", "--widths", "2", "--distance", 2, "--runs", 1, "--depth", 1)
    assert code == 0
    assert text.splitlines()[0].startswith("width,ordering")


@pytest.mark.parametrize("argv", [
    ["graph", "{d}/ghz.qasm"],
    ["find-layouts", "{d}/ghz.qasm", "--device", "{d}/hotspot.json", "--cost", "idle"],
    ["select-device", "{d}/ghz.qasm", "--device", "{d}/uniform.json", "--device", "{d}/hh.json",
     "--workers", "2"],
])
def test_repeat_runs_are_byte_identical(workdir, argv):
    argv = [a.format(d=workdir) for a in argv]
    outputs = {run(*argv)[1] for _ in range(3)}
    assert len(outputs) == 1
