import math

import numpy as np
import pytest

from latticevar.model import (ModelParams, LatticeSpec, ValidationError,
                              DegenerateParametersError, validate,
                              atomic_ground_occupations, atomic_energy_per_pair)


def brute_force_minimum(params, n_max=8):
    """Exhaustive minimizer of the two-site-periodic zero-hopping energy."""
    best = None
    for n_o in range(n_max + 1):
        for n_e in range(n_max + 1):
            e = atomic_energy_per_pair(n_o, n_e, params)
            if best is None or e < best[0] - 1e-12:
                best = (e, max(n_o, n_e), min(n_o, n_e))
    return best


def test_validate_ok_on_domain_boundary():
    validate(ModelParams(mu=0.0, u=1.0), LatticeSpec(sites=4, n_max=3))


def test_validate_rejects_zero_u():
    with pytest.raises(ValidationError, match="u must be positive"):
        validate(ModelParams(mu=0.0, u=0.0), LatticeSpec(sites=4, n_max=3))


def test_validate_rejects_odd_lattice():
    with pytest.raises(ValidationError, match="L must be even"):
        validate(ModelParams(mu=0.0, u=1.0), LatticeSpec(sites=5, n_max=3))


def test_validate_rejects_nonfinite():
    with pytest.raises(ValidationError, match="finite"):
        validate(ModelParams(mu=math.inf, u=1.0), LatticeSpec(sites=4, n_max=3))


def test_validate_rejects_negative_couplings():
    with pytest.raises(ValidationError, match="v must be nonnegative"):
        validate(ModelParams(mu=0.0, u=1.0, v=-0.1), LatticeSpec(sites=4, n_max=3))


def test_checkerboard_branch():
    gs = atomic_ground_occupations(ModelParams(mu=1.8, u=1.0, v=0.75))
    assert (gs.n_odd, gs.n_even) == (2, 0)
    assert gs.energy_per_pair == pytest.approx(-2.6, abs=1e-14)


def test_vacuum_at_zero_mu():
    for v in (0.0, 0.2, 0.9):
        gs = atomic_ground_occupations(ModelParams(mu=0.0, u=1.0, v=v))
        assert (gs.n_odd, gs.n_even) == (0, 0)
        assert gs.energy_per_pair == 0.0


def test_uniform_branch_point():
    # frozen from the brute-force oracle below at mu/u=0.5, 2v/u=0.5
    gs = atomic_ground_occupations(ModelParams(mu=0.5, u=1.0, v=0.25))
    assert (gs.n_odd, gs.n_even) == (1, 0)


def test_degenerate_line_rejected():
    with pytest.raises(DegenerateParametersError):
        atomic_ground_occupations(ModelParams(mu=0.7, u=1.0, v=0.5))


def test_energy_formula_values():
    assert atomic_energy_per_pair(2, 0, ModelParams(mu=1.8, u=1.0, v=0.75)) == \
        pytest.approx(-2.6, abs=1e-14)
    assert atomic_energy_per_pair(0, 0, ModelParams(mu=3.0, u=1.0, v=0.4)) == 0.0
    assert atomic_energy_per_pair(1, 1, ModelParams(mu=1.0, u=1.0, v=0.0)) == \
        pytest.approx(-2.0, abs=1e-14)


def test_energy_swap_symmetry():
    p = ModelParams(mu=1.3, u=1.0, v=0.4)
    for n_o, n_e in ((3, 1), (2, 0), (5, 5)):
        assert atomic_energy_per_pair(n_o, n_e, p) == atomic_energy_per_pair(n_e, n_o, p)


@pytest.mark.parametrize("mu,v", [
    (mu, v)
    for mu in (0.05, 0.3, 0.77, 1.18, 1.9, 2.6, 3.3)
    for v in (0.0, 0.2, 0.45, 0.62, 0.9, 1.3)
])
def test_occupations_match_exhaustive_search(mu, v):
    params = ModelParams(mu=mu, u=1.0, v=v)
    e_min, n_o, n_e = brute_force_minimum(params)
    gs = atomic_ground_occupations(params)
    # compare energies: on degeneracy points several patterns tie
    assert gs.energy_per_pair == pytest.approx(e_min, abs=1e-11)
    assert gs.n_odd >= gs.n_even
