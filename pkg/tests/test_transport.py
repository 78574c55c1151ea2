import numpy as np
import pytest

from skewflow.evolution import adjoint_generator, evolve_cayley
from skewflow.operators import check_skew_symmetry, deficiency
from skewflow.transport import (
    Grid2D,
    build_transport_operator,
    field_from_stream,
    gaussian_blob,
    read_stream_file,
    rotation_benchmark,
    transport_gs_residual,
    write_stream_file,
)

RIGID = lambda x, y: -((x - 0.5) ** 2 + (y - 0.5) ** 2) / 2.0
CELLULAR = lambda x, y: np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)


def hat(x, y):
    # piecewise-linear stream with a kink along x = 0.5
    return np.minimum(x, 1.0 - x) * np.sin(2 * np.pi * y)


# ---------------------------------------------------------------------------
# grids and fields
# ---------------------------------------------------------------------------

def test_grid_rejects_degenerate_shapes():
    with pytest.raises(ValueError):
        Grid2D(nx=1, ny=8)
    with pytest.raises(ValueError):
        Grid2D(nx=8, ny=8, lx=0.0)


def test_cell_index_wraps_periodically():
    g = Grid2D(nx=4, ny=3)
    assert g.cell_index(4, 0) == g.cell_index(0, 0)
    assert g.cell_index(-1, -1) == g.cell_index(3, 2)


@pytest.mark.parametrize("psi", [RIGID, CELLULAR, hat],
                         ids=["rigid", "cellular", "hat"])
def test_face_fields_have_telescoping_divergence(psi):
    # the four corner samples cancel algebraically, so all that remains
    # is the rounding of their floating-point differences
    g = Grid2D(nx=17, ny=23)  # deliberately unequal and odd
    fld = field_from_stream(g, psi)
    assert np.max(np.abs(fld.divergence())) < 1e-13 * max(1.0, fld.max_speed)


def test_field_accepts_nodal_arrays():
    g = Grid2D(nx=8, ny=8)
    xn, yn = g.node_coords()
    P = RIGID(xn[:, None], yn[None, :])
    fld = field_from_stream(g, P)
    np.testing.assert_allclose(fld.psi, P)
    with pytest.raises(ValueError):
        field_from_stream(g, P[:-1])


# ---------------------------------------------------------------------------
# the transport stencil
# ---------------------------------------------------------------------------

def test_periodic_transport_is_skew_to_rounding():
    g = Grid2D(nx=16, ny=16)
    op = build_transport_operator(field_from_stream(g, CELLULAR))
    rep = check_skew_symmetry(op)
    assert rep.passed
    assert rep.max_defect < 1e-12


def test_transport_annihilates_constants():
    g = Grid2D(nx=12, ny=10)
    op = build_transport_operator(field_from_stream(g, CELLULAR))
    ones = np.ones(g.ncells)
    # row sums reduce to the (telescoping) cell divergence
    assert np.max(np.abs(op.apply(ones))) < 1e-13


def test_transport_conserves_mass_and_energy():
    g = Grid2D(nx=32, ny=32)
    op = build_transport_operator(field_from_stream(g, RIGID))
    gen = adjoint_generator(op)
    u0 = gaussian_blob(g, (0.65, 0.5), 0.12)
    traj = evolve_cayley(gen, u0, 5e-3, 200)
    norms = traj.norms()
    assert np.max(np.abs(norms - norms[0])) < 1e-12
    area = op.space.weights[0]
    mass = area * traj.states.sum(axis=1)
    assert np.max(np.abs(mass - mass[0])) < 1e-13


def test_nonperiodic_stream_is_rejected_for_the_wrapped_mode():
    g = Grid2D(nx=8, ny=8)
    fld = field_from_stream(g, lambda x, y: x * y)  # wrap faces disagree
    with pytest.raises(ValueError, match="close periodically"):
        build_transport_operator(fld)
    # but the interior restriction never touches the seam
    op = build_transport_operator(fld, mode="interior_domain")
    assert op.domain is not None


def test_interior_domain_codimension():
    g = Grid2D(nx=10, ny=10)
    op = build_transport_operator(field_from_stream(g, CELLULAR),
                                  mode="interior_domain")
    # two-cell rim all around: interior is (10-4)^2 of 100 cells
    assert op.domain_dim == 36
    assert op.codim == 64
    dd = deficiency(op)
    assert dd.d_plus == dd.d_minus  # balanced, as for every real skew pairing


def test_unknown_mode_is_rejected():
    g = Grid2D(nx=8, ny=8)
    with pytest.raises(ValueError, match="mode"):
        build_transport_operator(field_from_stream(g, CELLULAR), mode="free")


def test_gaussian_blob_is_unit_normalized():
    g = Grid2D(nx=24, ny=24)
    u = gaussian_blob(g, (0.5, 0.5), 0.1)
    area = g.hx * g.hy
    assert np.sqrt(area * np.dot(u, u)) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# residual hookup and the rigid-rotation benchmark
# ---------------------------------------------------------------------------

def test_transport_flow_passes_the_weak_identity():
    g = Grid2D(nx=24, ny=24)
    op = build_transport_operator(field_from_stream(g, RIGID))
    gen = adjoint_generator(op)
    u0 = gaussian_blob(g, (0.6, 0.5), 0.14)
    traj = evolve_cayley(gen, u0, 2e-3, 500)
    rep = transport_gs_residual(traj, u0, op)
    assert rep.passed


def test_rotation_benchmark_smoke():
    res = rotation_benchmark(16, 2 * np.pi / 200)
    assert res["energy_drift"] < 1e-10
    assert res["steps"] == 200
    # coarse grid, coarse step: the blob survives but imperfectly
    assert 0.0 < res["final_error"] < 1.0


def test_rotation_benchmark_validates_arguments():
    with pytest.raises(ValueError):
        rotation_benchmark(16, -0.1)
    with pytest.raises(ValueError):
        rotation_benchmark(1, 0.1)


# ---------------------------------------------------------------------------
# stream files
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("fmt", ["csv", "binary"])
def test_stream_file_roundtrip(tmp_path, fmt):
    g = Grid2D(nx=12, ny=9, lx=2.0, ly=1.5)
    path = tmp_path / f"psi.{fmt}"
    write_stream_file(path, CELLULAR, g, fmt=fmt)
    g2, p2 = read_stream_file(path)
    assert (g2.nx, g2.ny, g2.lx, g2.ly) == (12, 9, 2.0, 1.5)
    xn, yn = g.node_coords()
    np.testing.assert_array_equal(p2, CELLULAR(xn[:, None], yn[None, :]))


def test_stream_file_rejects_bad_header(tmp_path):
    path = tmp_path / "psi.csv"
    path.write_text("not json\n1,2\n")
    with pytest.raises(ValueError, match="header"):
        read_stream_file(path)


def test_stream_file_rejects_truncated_binary(tmp_path):
    g = Grid2D(nx=8, ny=8)
    path = tmp_path / "psi.bin"
    write_stream_file(path, CELLULAR, g, fmt="binary")
    data = path.read_bytes()
    path.write_bytes(data[:-16])
    with pytest.raises(ValueError):
        read_stream_file(path)


def test_stream_file_rejects_wrong_shape(tmp_path):
    g = Grid2D(nx=8, ny=8)
    with pytest.raises(ValueError):
        write_stream_file(tmp_path / "x.csv", np.zeros((3, 3)), g)
