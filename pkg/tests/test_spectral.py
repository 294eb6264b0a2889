"""Oracle tests for the lattice torus index and the sphere kernel spectrum."""

import numpy as np
import pytest

from gerbedex.registry import SphereBenchmark, TorusBenchmark
from gerbedex.spectral import (
    LatticeGauge,
    build_flux_background,
    index_compare,
    monopole_kernel,
    overlap_index,
    wilson_dirac,
)

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="module")
def torus():
    return TorusBenchmark()


@pytest.fixture(scope="module")
def sphere():
    return SphereBenchmark()


# ------------------------------------------------------------- flux background


def test_zero_flux_links_are_trivial():
    gauge = build_flux_background(8, 0)
    assert np.max(np.abs(gauge.links_x - 1.0)) == 0.0
    assert np.max(np.abs(gauge.links_y - 1.0)) == 0.0


def test_uniform_plaquette_with_single_twist_column():
    gauge = build_flux_background(8, 1)
    expected = np.exp(TWO_PI * 1j / 64)
    assert np.max(np.abs(gauge.plaquette_phases() - expected)) < 1e-12
    # only the last column of first-direction links is twisted
    assert np.max(np.abs(gauge.links_x[:-1, :] - 1.0)) == 0.0
    assert np.max(np.abs(gauge.links_x[-1, :]
                         - np.exp(-TWO_PI * 1j * np.arange(8) / 8))) < 1e-12


def test_opposite_flux_conjugates_links():
    plus = build_flux_background(12, 2)
    minus = build_flux_background(12, -2)
    assert np.max(np.abs(minus.links_x - np.conj(plus.links_x))) == 0.0
    assert np.max(np.abs(minus.links_y - np.conj(plus.links_y))) == 0.0


@pytest.mark.parametrize("m", [-3, 1, 3])
def test_total_plaquette_phase_counts_flux(m):
    gauge = build_flux_background(12, m)
    total = float(np.sum(np.angle(gauge.plaquette_phases())))
    assert abs(total - TWO_PI * m) < 1e-9


def test_flux_background_rejections():
    with pytest.raises(ValueError):
        build_flux_background(6, 1)
    with pytest.raises(ValueError):
        build_flux_background(12, 4)
    # boundary admitted by the stability matrix
    assert build_flux_background(10, 3).flux == 3


def test_lattice_gauge_validates_inputs():
    ones = np.ones((8, 8), dtype=complex)
    with pytest.raises(ValueError):
        LatticeGauge(8, 0, 2.0 * ones, ones)
    with pytest.raises(ValueError):
        LatticeGauge(8, 1, ones, ones)  # trivial links, declared flux 1


# ------------------------------------------------------------ Wilson operator


def test_wilson_dirac_shape_and_gamma_hermiticity():
    op = wilson_dirac(build_flux_background(8, 1))
    dim = 2 * 64
    assert op.matrix.shape == (dim, dim)
    flipped = op.chirality[:, None] * op.matrix * op.chirality[None, :]
    assert np.max(np.abs(flipped - op.matrix.conj().T)) < 1e-12
    ham = op.hermitian_form()
    assert np.max(np.abs(ham - ham.conj().T)) < 1e-12


def test_free_wilson_operator_momentum_spectrum():
    op = wilson_dirac(build_flux_background(8, 0), wilson_r=1.0, bare_mass=1.0)
    sing = np.linalg.svd(op.matrix, compute_uv=False)
    momenta = TWO_PI * np.arange(8) / 8
    expected = []
    for px in momenta:
        for py in momenta:
            wilson = 2.0 - np.cos(px) - np.cos(py) - 1.0
            mag = np.sqrt(np.sin(px) ** 2 + np.sin(py) ** 2 + wilson ** 2)
            expected.extend([mag, mag])
    assert np.max(np.abs(np.sort(sing) - np.sort(expected))) < 1e-12


# -------------------------------------------------------------- lattice index


def test_overlap_index_zero_flux():
    assert overlap_index(build_flux_background(12, 0)) == 0


@pytest.mark.parametrize("m", range(-3, 4))
def test_overlap_index_equals_flux(m):
    assert overlap_index(build_flux_background(12, m)) == m


@pytest.mark.parametrize("m", [1, 2, 3])
def test_overlap_index_charge_conjugation(m):
    plus = overlap_index(build_flux_background(12, m))
    minus = overlap_index(build_flux_background(12, -m))
    assert plus + minus == 0


@pytest.mark.parametrize("size", [10, 16])
@pytest.mark.parametrize("wilson_r", [0.8, 1.2])
def test_overlap_index_stability_corners(size, wilson_r):
    gauge = build_flux_background(size, 2)
    assert overlap_index(gauge, wilson_r=wilson_r) == 2


def test_overlap_index_mass_branch_guard():
    gauge = build_flux_background(8, 0)
    with pytest.raises(ValueError):
        overlap_index(gauge, bare_mass=0.0)
    with pytest.raises(ValueError):
        overlap_index(gauge, wilson_r=1.0, bare_mass=2.0)


# -------------------------------------------------------------- sphere kernel


def test_monopole_kernel_zero_charge():
    result = monopole_kernel(0)
    assert result.kernel_plus == 0 and result.kernel_minus == 0
    assert result.index == 0
    assert result.levels[0][0] == 1.0  # smallest nonzero eigenvalue


def test_monopole_kernel_positive_charge():
    result = monopole_kernel(3)
    assert result.kernel_plus == 3 and result.kernel_minus == 0
    assert result.index == 3
    assert abs(result.levels[0][0] - 2.0) < 1e-15  # sqrt(1 * (1 + 3))
    assert result.levels[0][1] == 5


def test_monopole_kernel_negative_charge():
    result = monopole_kernel(-1)
    assert result.kernel_plus == 0 and result.kernel_minus == 1
    assert result.index == -1


@pytest.mark.parametrize("m", [0, -1, 1, 4])
def test_monopole_kernel_level_formula(m):
    result = monopole_kernel(m, cutoff=6)
    for n, (eigenvalue, mult) in enumerate(result.levels, start=1):
        assert abs(eigenvalue - np.sqrt(n * (n + abs(m)))) < 1e-14
        assert mult == abs(m) + 2 * n
        # multiplicity is 2j+1 at angular momentum j = (|m|-1)/2 + n
        assert mult == 2 * ((abs(m) - 1) / 2 + n) + 1


@pytest.mark.parametrize("m", [0, 2, -3])
def test_monopole_kernel_bookkeeping(m):
    cutoff = 7
    result = monopole_kernel(m, cutoff=cutoff)

    # chirality blocks are charge m-1 and m+1 section spaces; level k of a
    # charge-p block holds |p| + 1 + 2k states, and the block carrying the
    # kernel keeps one more level than its partner
    def count_block(p, top_level):
        return sum(abs(p) + 1 + 2 * k for k in range(top_level + 1))

    if m > 0:
        plus_top, minus_top = cutoff, cutoff - 1
    elif m < 0:
        plus_top, minus_top = cutoff - 1, cutoff
    else:
        plus_top = minus_top = cutoff - 1
    total = count_block(m - 1, plus_top) + count_block(m + 1, minus_top)
    assert result.total_dimension == total


def test_monopole_kernel_rejections():
    with pytest.raises(ValueError):
        monopole_kernel(21)
    with pytest.raises(ValueError):
        monopole_kernel(2, cutoff=51)
    with pytest.raises(ValueError):
        monopole_kernel(2, cutoff=0)


# --------------------------------------------------------------- both sides


def test_index_compare_torus(torus):
    report = index_compare("T2", 2, lattice_size=12, benchmark=torus)
    assert report == {
        "manifold": "T2",
        "flux": 2,
        "N": 12,
        "index_spectral": 2,
        "index_topological": 2,
        "match": True,
    }


def test_index_compare_sphere(sphere):
    report = index_compare("S2", -3, benchmark=sphere)
    assert report["index_spectral"] == -3
    assert report["index_topological"] == -3
    assert report["N"] is None
    assert report["match"] is True


def test_index_compare_rejects_other_manifolds():
    with pytest.raises(ValueError):
        index_compare("CP2", 1)
