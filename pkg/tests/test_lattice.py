import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from giant_ssh.errors import ConfigError
from giant_ssh.lattice import (
    AtomSpec,
    BasisLayout,
    LatticeSpec,
    System,
    band_edges,
    build_hamiltonian,
    dispersion,
    hopping_amplitudes,
    ssh_block,
)


def test_hoppings_default_angle():
    t1, t2 = hopping_amplitudes(0.2 * math.pi, 0.5)
    assert t1 == pytest.approx(1 + 0.5 * math.cos(0.2 * math.pi))
    assert t1 + t2 == pytest.approx(2.0)


def test_band_edges_fig_parameters():
    edges = LatticeSpec(L=100).edges
    assert edges.gap[1] == pytest.approx(0.8090169943749474, abs=1e-12)
    assert edges.band_top == pytest.approx(2.0)
    assert edges.in_gap(0.0) and not edges.in_gap(0.81)


def test_zero_dimerization_closes_gap():
    e = band_edges(1.0, 1.0)
    assert e.gap == (0.0, 0.0)
    assert not e.in_gap(0.0)


def test_two_cell_ring_eigenvalues():
    # only k = 0 and k = pi fit on two cells
    lat = LatticeSpec(L=2)
    e = np.linalg.eigvalsh(build_hamiltonian(lat, []))
    t1, t2 = lat.hoppings
    expect = sorted([-(t1 + t2), -abs(t1 - t2), abs(t1 - t2), t1 + t2])
    np.testing.assert_allclose(e, expect, atol=1e-12)


@given(st.integers(2, 40))
@settings(max_examples=20, deadline=None)
def test_ring_matches_dispersion(L):
    lat = LatticeSpec(L=L)
    t1, t2 = lat.hoppings
    k = 2 * np.pi * np.arange(L) / L
    lo, hi = dispersion(k, t1, t2)
    np.testing.assert_allclose(np.linalg.eigvalsh(ssh_block(lat)), np.sort(np.concatenate([lo, hi])), atol=1e-10)


def test_fig2_matrix_structure():
    lat = LatticeSpec(L=100)
    atoms = [AtomSpec(50, 52), AtomSpec(54, 55)]
    h = build_hamiltonian(lat, atoms, [0.4, -0.25])
    assert h.shape == (202, 202)  # 2L photon sites plus N atoms
    assert np.isrealobj(h) and np.array_equal(h, h.T)
    atom_photon = h[:2, 2:]
    assert np.count_nonzero(atom_photon) == 4
    assert np.all(atom_photon[atom_photon != 0] == 0.9)
    layout = BasisLayout(2, 100)
    assert h[0, layout.site_index("A", 49)] == 0.9
    assert h[0, layout.site_index("B", 51)] == 0.9
    assert h[1, layout.site_index("A", 53)] == 0.9
    assert h[1, layout.site_index("B", 54)] == 0.9


def test_intercell_bond_wraps():
    lat = LatticeSpec(L=5)
    h = ssh_block(lat)
    t1, t2 = lat.hoppings
    assert h[9, 0] == t2 and h[0, 9] == t2  # B of the last cell to A of the first
    assert h[0, 1] == t1


def test_shared_site_is_summed_and_warned():
    lat = LatticeSpec(L=6)
    with pytest.warns(UserWarning, match="share"):
        h = build_hamiltonian(lat, [AtomSpec(2, 3), AtomSpec(2, 4)])
    layout = BasisLayout(2, 6)
    a2 = layout.site_index("A", 1)
    assert h[0, a2] == 0.9 and h[1, a2] == 0.9


def test_cell_range_errors():
    with pytest.raises(ConfigError):
        build_hamiltonian(LatticeSpec(L=10), [AtomSpec(0, 3)])
    with pytest.raises(ConfigError):
        System(LatticeSpec(L=10), [AtomSpec(2, 11)])


@pytest.mark.parametrize("kw", [dict(L=1), dict(L=10, q=0.0), dict(L=10, boundary="OPEN")])
def test_lattice_validation(kw):
    with pytest.raises(ConfigError):
        LatticeSpec(**kw)


def test_layout_roundtrip_labels():
    layout = BasisLayout(N=3, L=4, include_vacuum=True)
    assert layout.dim == 12
    for i in range(layout.dim):
        assert layout.index(layout.label(i)) == i
    assert layout.label(0) == ("vac",)
    assert layout.label(1) == ("atom", 0)
    assert layout.label(4) == ("A", 0)
    assert layout.label(11) == ("B", 3)


def test_embed_pads_vacuum():
    layout = BasisLayout(N=1, L=2, include_vacuum=True)
    v = np.arange(5.0)
    out = layout.embed(v)
    assert out[0] == 0 and np.array_equal(out[1:], v)
    with pytest.raises(ValueError):
        layout.embed(np.zeros(3))


def test_system_with_vacuum_has_zero_row():
    sysm = System(LatticeSpec(L=4), [AtomSpec(1, 2, omega0=0.3)])
    h = sysm.hamiltonian()
    assert h.shape == (1 + 1 + 8, 1 + 1 + 8)
    assert not h[0].any()
    assert h[1, 1] == 0.3
    np.testing.assert_array_equal(sysm.one_excitation().hamiltonian(), h[1:, 1:])


@given(st.integers(0, 29))
@settings(max_examples=15, deadline=None)
def test_translation_isospectral(offset):
    lat = LatticeSpec(L=30)
    atoms = [AtomSpec(5, 7, omega0=0.4), AtomSpec(9, 10, omega0=-0.3)]
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        e0 = np.linalg.eigvalsh(build_hamiltonian(lat, atoms))
        e1 = np.linalg.eigvalsh(build_hamiltonian(lat, [a.shifted(offset, 30) for a in atoms]))
    np.testing.assert_allclose(e0, e1, atol=1e-9)
