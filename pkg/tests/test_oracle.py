import pytest

from measure_spectra.oracle import (
    CircleSpec,
    circle_eigenvalue,
    circle_spectrum,
    matching_function,
    radial_defect,
)


def test_reference_circle():
    spec = CircleSpec(10.0, 1.0)
    sp = circle_spectrum(spec)
    assert [lev.l for lev in sp.levels] == [0, 1, 2, 3, 4]
    assert sp.count == 9
    assert sp.levels[0].kappa == pytest.approx(0.50269313765, rel=1e-10)
    assert sp.energies == sorted(sp.energies)


def test_threshold_channels():
    # γR = 2l exactly: the l-channel sits on the threshold and does not bind
    spec = CircleSpec(5.0, 2.0)
    assert circle_eigenvalue(5, spec) is None
    assert circle_eigenvalue(4, spec) is not None


def test_weak_coupling_s_wave():
    # l = 0 always binds; for small γR, κR ≈ 2 exp(-1/(γR) - γ_E)
    spec = CircleSpec(1.0, 0.05)
    kappa = circle_eigenvalue(0, spec)
    assert 0 < kappa < 1e-8
    assert abs(matching_function(0, spec, kappa)) < 1e-10


@pytest.mark.parametrize("gamma,radius", [(1.0, 10.0), (3.0, 2.0), (0.7, 4.0)])
def test_levels_solve_radial_problem(gamma, radius):
    spec = CircleSpec(radius, gamma)
    for lev in circle_spectrum(spec).levels:
        assert abs(matching_function(lev.l, spec, lev.kappa)) < 1e-10
        assert abs(radial_defect(lev.l, spec, lev.kappa)) < 1e-6
        # a wrong κ is clearly rejected
        assert abs(radial_defect(lev.l, spec, 1.1 * lev.kappa)) > 1e-3


def test_order_cap():
    with pytest.raises(OverflowError):
        circle_spectrum(CircleSpec(100.0, 2.0))


def test_bad_input():
    with pytest.raises(ValueError):
        CircleSpec(-1.0, 1.0)
    with pytest.raises(ValueError):
        circle_eigenvalue(-1, CircleSpec(1.0, 1.0))
