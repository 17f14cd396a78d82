import itertools

import pytest

corelens = pytest.importorskip("corelens")


@pytest.fixture(scope="module")
def core():
    return corelens.make_preset("3a")


def test_preset_shape(core):
    assert core.name == "3a"
    assert core.type == "PWR"
    assert core.size == 3
    fuel = core.assembly_at("fuel", "B2")
    assert core.assembly_size(fuel) == 17
    assert core.features(fuel) == ["Axial Power", "Total Power"]
    assert len(core.axial_series(fuel, "H7", "Axial Power")) == 49
    assert core.assembly_at("fuel", "A1") is None


def test_bytes_round_trip(core):
    data = core.to_bytes()
    assert data[:4] == b"NRDF"
    (back,) = corelens.from_bytes(data)
    assert back == core
    assert corelens.dump(data).startswith("/\n  reactors\n    3a\n")


def test_file_round_trip(core, tmp_path):
    path = str(tmp_path / "core.nrdf")
    corelens.save(path, [core])
    assert corelens.open(path) == [core]


def test_errors_carry_codes():
    with pytest.raises(corelens.CorelensError) as info:
        corelens.from_bytes(b"XXXX" + bytes(40))
    assert info.value.code == "not-nrdf"
    assert "bad magic" in str(info.value)
    with pytest.raises(corelens.CorelensError) as info:
        corelens.make_preset("nope")
    assert info.value.code == "invalid-argument"


def test_pin_diff_identity(core):
    res = corelens.pin_diff(core, core, "Axial Power", ["B2", "E4", "H7"])
    table = res["tables"][0]
    assert table["row_labels"] == ["B2", "E4", "H7"]
    assert all(v == 0.0 for row in table["values"] for v in row)


def _inertia(points, groups):
    total = 0.0
    for members in groups:
        mean = [sum(points[i][d] for i in members) / len(members) for d in range(len(points[0]))]
        total += sum((points[i][d] - mean[d]) ** 2 for i in members for d in range(len(mean)))
    return total


def test_kmeans_against_brute_force():
    points = [[0.0, 0.1], [0.2, 0.0], [5.0, 5.1], [5.2, 4.9], [9.0, 0.0]]
    best = min(
        _inertia(points, [[i for i, g in enumerate(labels) if g == c] for c in range(3)])
        for labels in itertools.product(range(3), repeat=len(points))
        if len(set(labels)) == 3
    )
    found = min(corelens.kmeans(points, 3, seed=s)["inertia"] for s in range(10))
    assert abs(found - best) < 1e-9


def test_render_and_ingest(core):
    assert corelens.render_core(core).startswith("<?xml")
    fuel = core.assembly_at("fuel", "B2")
    svg = corelens.render_assembly(core, fuel, "Axial Power", level=28)
    assert svg.count('class="cell"') == 289
    plot = corelens.render_plot([corelens.Series("a", [(0.0, 1.0), (1.0, 2.0)])], "t", "x", "y")
    assert 'data-name="a"' in plot

    skeleton = corelens.make_preset("sfr7")
    csv = (
        "row_label,col_label,z_cm,time_s,feature,value,uncertainty,units\n"
        "B,2,50,0,Flux,1e14,,n/cm2/s\n"
    )
    out = corelens.ingest_csv(skeleton, csv, assembly="sfr7_fuel")
    assert "Flux" in out.features("sfr7_fuel")
