import numpy as np
import pytest
from hypothesis import given

from conftest import graph_seeds, random_graph
from graphflame import lattice_line, regular_tree
from graphflame.config import ConfigError, ExperimentConfig, build_datum, build_source, load_config, parse_config
from graphflame.io import GraphFormatError, format_float, parse_graph, write_csv, write_graph

GOOD = """# a path
graph v2
node a 1.0
node b 2.5   # heavier
node c 1.0
edge a b 1.0
edge b c 0.5
"""


def test_parse_graph():
    g = parse_graph(GOOD)
    assert list(g.ids) == ["a", "b", "c"]
    assert np.allclose(g.mu, [1.0, 2.5, 1.0])
    assert g.weights[g.index("c"), g.index("b")] == 0.5


@given(graph_seeds)
def test_graph_file_round_trip(seed):
    g = random_graph(seed, 12)
    h = parse_graph(write_graph(g))
    assert h.ids == g.ids and np.array_equal(h.mu, g.mu)
    assert sorted(h.edges()) == sorted(g.edges())


@pytest.mark.parametrize("text, line, needle", [
    ("node a 1\n", 1, "header"),
    ("graph v2\nnode a 1\nnode a 2\n", 3, "duplicate node"),
    ("graph v2\nnode a 1\nnode b 1\nedge a b 1\nedge b a 2\n", 5, "duplicate edge"),
    ("graph v2\nnode a 1\nedge a z 1\n", 3, "undeclared"),
    ("graph v2\nnode a one\n", 2, "bad number"),
    ("graph v2\nnode a 1\nvertex b 1\n", 3, "cannot parse"),
    ("", 1, "empty"),
])
def test_graph_parse_errors_report_line(text, line, needle):
    with pytest.raises(GraphFormatError) as exc:
        parse_graph(text)
    assert exc.value.line == line and needle in str(exc.value)


def test_csv_format():
    text = write_csv(None, ["t", "x"], [(0.1, "a"), (np.float64(1 / 3), "b"), (float("inf"), "c")])
    assert text == "t,x\n0.1,a\n0.3333333333333333,b\ninf,c\n"
    assert format_float(float("nan")) == "nan" and format_float(-np.inf) == "-inf"


CFG = """
[graph]
family = regular_tree
args = 3, 4

[source]
kind = linear_plus_power
a = 0.1
p = 2
b = 1

[datum]
kind = indicator
value = 0.25
vertices = v0, v1

[run]
center = v0
radii = 2, 3
horizon = 5
phi_vertex = v0
"""


def test_config_round_trip():
    cfg = parse_config(CFG)
    assert cfg.family_args == [3, 4] and cfg.radii == [2, 3] and cfg.source_params["p"] == 2.0
    text = cfg.to_text()
    again = parse_config(text)
    assert again == cfg
    assert again.to_text() == text


def test_config_round_trip_table_source_and_file_graph(tmp_path):
    cfg = ExperimentConfig(graph_file="g.txt", source="table", source_params={"points": [(0.0, 0.0), (1.0, 2.0)]},
                           datum="file", datum_file="u0.csv", delta=0.5, cap=100.0)
    assert parse_config(cfg.to_text()) == cfg


def test_overrides_and_relative_paths(tmp_path):
    write_graph(lattice_line(5), tmp_path / "line.txt")
    (tmp_path / "exp.cfg").write_text("[graph]\nfile = line.txt\n[run]\nhorizon = 1\n")
    cfg = load_config(tmp_path / "exp.cfg", ["run.horizon=3", "n_times=5", "source.kind=power", "p=3"])
    assert cfg.horizon == 3.0 and cfg.n_times == 5
    assert cfg.source == "power" and build_source(cfg).f(np.array([2.0]))[0] == 8.0
    assert cfg.graph_file == str(tmp_path / "line.txt")


@pytest.mark.parametrize("edit, needle", [
    ("[graph]\nfamily = cycle\nfile = x\n", "exactly one"),
    ("[graph]\nfamily = cycle\nargs = 4\n[source]\nkind = cubic\n", "unknown source"),
    ("[graph]\nfamily = cycle\nargs = 4\n[source]\nkind = linear\n", "missing a"),
    ("[graph]\nfamily = cycle\nargs = 4\n[run]\nhorizon = -1\n", "horizon"),
    ("[graph]\nfamily = cycle\nargs = 4\n[run]\nradii = 3, 2\n", "radii"),
    ("[graph]\nfamily = cycle\nargs = 4\n[run]\nwibble = 2\n", "unknown [run] key"),
    ("[graph]\nfamily = cycle\nargs = 4\n[extra]\n", "unknown section"),
    ("[graph]\nfamily = cycle\nargs = 4\n[run]\nhorizon = soon\n", "bad value"),
    ("[graph]\nfamily = cycle\nargs = 4\n[datum]\nkind = indicator\n", "vertices"),
    ("[graph]\nfamily = cycle\nargs = 4\n[datum]\nkind = eigenfunction\n", "radii"),
    ("[graph]\nfamily = cycle\nargs = 4\n[run]\nmode = fancy\n", "mode"),
])
def test_config_validation_errors(edit, needle):
    with pytest.raises(ConfigError, match=None) as exc:
        parse_config(edit)
    assert needle in str(exc.value)


def test_missing_files_are_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")
    (tmp_path / "exp.cfg").write_text("[graph]\nfile = missing.txt\n")
    with pytest.raises(ConfigError, match="does not exist"):
        load_config(tmp_path / "exp.cfg")


def test_datum_builders(tmp_path):
    g = regular_tree(3, 2)
    cfg = parse_config(CFG)
    u = build_datum(cfg, g)
    assert u[g.index("v0")] == 0.25 and u[g.index("v1")] == 0.25 and u.sum() == 0.5
    (tmp_path / "u0.csv").write_text("vertex,value\nv0,1.5\nv1, 2\n")
    cfg = ExperimentConfig(family="regular_tree", family_args=[3, 2], datum="file", datum_file=str(tmp_path / "u0.csv"))
    u = build_datum(cfg, g)
    assert u[g.index("v1")] == 2.0 and u.sum() == 3.5
