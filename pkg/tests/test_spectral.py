import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bbm_renorm.spectral import (
    GridSpec,
    SpectralField,
    Trajectory,
    dirichlet_project,
    field_from_records,
    field_to_records,
    from_physical,
    h_norm,
    pairing,
    phi_symbol,
    physical_transform,
    quadratic_product,
    semigroup_apply,
    to_physical,
    winf_norm,
)


def random_field(M, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    half = (rng.standard_normal(M + 1) + 1j * rng.standard_normal(M + 1)) * scale
    half[0] = half[0].real
    return SpectralField.from_half(GridSpec(M), half)


def cos_field(M=4, k=1):
    return SpectralField.from_modes(GridSpec(M), {k: 0.5})


def direct_convolution(a, b, M):
    out = np.zeros(2 * M + 1, dtype=complex)
    for n in range(-M, M + 1):
        for n1 in range(-M, M + 1):
            n2 = n - n1
            if abs(n2) <= M:
                out[n + M] += a[n1 + M] * b[n2 + M]
    return out


# ---- grid / field construction

def test_grid_requires_enough_points():
    with pytest.raises(ValueError):
        GridSpec(4, physical_points=9)
    g = GridSpec(4)
    assert g.physical_points >= 10
    assert list(g.modes) == list(range(-4, 5))


def test_field_rejects_non_hermitian():
    c = np.zeros(5, dtype=complex)
    c[3] = 1.0
    with pytest.raises(ValueError):
        SpectralField(GridSpec(2), c)


def test_field_coeffs_are_read_only():
    f = cos_field()
    with pytest.raises(ValueError):
        f.coeffs[0] = 1.0


# ---- phi symbol

def test_phi_symbol_values():
    assert phi_symbol(0) == 0
    assert phi_symbol(1) == -0.5j
    assert phi_symbol(-2) == pytest.approx(0.4j, abs=1e-16)
    assert phi_symbol(2) == -phi_symbol(-2)


@given(st.integers(-10**6, 10**6))
def test_phi_symbol_imaginary_odd_bounded(n):
    p = phi_symbol(n)
    assert p.real == 0
    assert abs(p) <= 0.5
    assert phi_symbol(-n) == -p


# ---- semigroup

def test_semigroup_identity_and_rotation():
    f = random_field(6, 1)
    assert np.array_equal(semigroup_apply(f, 0.0).coeffs, f.coeffs)
    e1 = SpectralField.from_modes(GridSpec(3), {1: 1.0})
    t = 0.8
    r = semigroup_apply(e1, t)
    assert r.mode(1) == pytest.approx(np.exp(-0.5j * t))
    assert r.mode(-1) == pytest.approx(np.exp(0.5j * t))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.floats(-20, 20), st.floats(-20, 20), st.floats(-2, 2))
def test_semigroup_group_law_and_isometry(seed, s, t, sob):
    f = random_field(8, seed)
    a = semigroup_apply(semigroup_apply(f, s), t)
    b = semigroup_apply(f, s + t)
    assert np.allclose(a.coeffs, b.coeffs, atol=1e-12)
    assert h_norm(semigroup_apply(f, t), sob) == pytest.approx(h_norm(f, sob), rel=1e-12)
    assert a.is_hermitian(1e-12)


# ---- projection

def test_dirichlet_projection():
    f = random_field(6, 2)
    assert np.array_equal(dirichlet_project(f, 6).coeffs, f.coeffs)
    e2 = SpectralField.from_modes(GridSpec(3), {2: 1.0})
    assert not np.any(dirichlet_project(e2, 1).coeffs)
    p0 = dirichlet_project(f, 3, drop_zero_mode=True)
    assert p0.mode(0) == 0 and p0.mode(3) == f.mode(3) and p0.mode(4) == 0


@given(st.integers(0, 2**31), st.integers(0, 10), st.integers(0, 10))
def test_projection_composition(seed, N, K):
    f = random_field(10, seed)
    lhs = dirichlet_project(dirichlet_project(f, K), N)
    assert np.array_equal(lhs.coeffs, dirichlet_project(f, min(N, K)).coeffs)


# ---- products

def test_product_of_constants_and_cosines():
    c = SpectralField.from_modes(GridSpec(3), {0: 1.5})
    assert quadratic_product(c, c).mode(0) == pytest.approx(2.25)
    cc = quadratic_product(cos_field(3), cos_field(3))
    assert cc.mode(0) == pytest.approx(0.5)
    assert cc.mode(2) == pytest.approx(0.25)
    assert cc.mode(-2) == pytest.approx(0.25)
    assert abs(cc.mode(1)) < 1e-15


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 32))
def test_dealiased_product_matches_direct_convolution(seed, M):
    f, g = random_field(M, seed), random_field(M, seed + 1)
    p = quadratic_product(f, g)
    assert np.allclose(p.coeffs, direct_convolution(f.coeffs, g.coeffs, M), atol=1e-12 * M)
    assert p.is_hermitian(1e-12)


def test_product_grid_mismatch():
    with pytest.raises(ValueError):
        quadratic_product(random_field(3), random_field(4))


# ---- pairing and norms

def test_pairing_values():
    assert pairing(cos_field(), cos_field()) == pytest.approx(0.5)
    e2 = SpectralField.from_modes(GridSpec(3), {2: 1.0})
    assert pairing(e2, cos_field(3)) == 0.0


@given(st.integers(0, 2**31), st.floats(-3, 3), st.floats(-3, 3))
def test_pairing_bilinear(seed, a, b):
    f, g, psi = random_field(5, seed), random_field(5, seed + 1), random_field(5, seed + 2)
    lhs = pairing(f * a + g * b, psi)
    rhs = a * pairing(f, psi) + b * pairing(g, psi)
    assert lhs == pytest.approx(rhs, abs=1e-11)


def test_pairing_equals_grid_quadrature():
    f, psi = random_field(7, 3), random_field(7, 4)
    uf, up = to_physical(f), to_physical(psi)
    assert pairing(f, psi) == pytest.approx(np.mean(uf * up), abs=1e-10)


def test_h_norm_values_and_plancherel():
    assert h_norm(SpectralField.zeros(GridSpec(3)), 1.0) == 0.0
    e = SpectralField.from_modes(GridSpec(3), {1: 1.0})
    assert h_norm(e, 1.0) == pytest.approx(2.0)
    f = random_field(9, 5)
    assert h_norm(f, 0.0) ** 2 == pytest.approx(np.mean(to_physical(f) ** 2), rel=1e-10)


def test_winf_norm():
    assert winf_norm(SpectralField.zeros(GridSpec(2)), 0.0) == 0.0
    assert winf_norm(cos_field(4), 0.0, oversample=4) == pytest.approx(1.0, abs=1e-6)
    f = random_field(6, 7)
    vals = [winf_norm(f, 0.5, oversample=k) for k in (2, 4, 8, 16)]
    assert all(b >= a - 1e-14 for a, b in zip(vals, vals[1:]))  # nested grids
    assert vals[-1] <= np.sum(np.abs(f.coeffs) * (1 + f.modes.astype(float) ** 2) ** 0.25) + 1e-12
    with pytest.raises(ValueError):
        winf_norm(f, 0.0, oversample=1)


# ---- physical transform

def test_physical_transform_conventions():
    g = GridSpec(4)
    one = from_physical(np.ones(g.physical_points), g)
    assert one.mode(0) == pytest.approx(1.0) and np.allclose(one.coeffs[g.mode_bound + 1 :], 0)
    c = from_physical(np.cos(g.x), g)
    assert c.mode(1) == pytest.approx(0.5) and c.mode(-1) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        from_physical(np.ones(3), g)


@given(st.integers(0, 2**31), st.integers(1, 40))
def test_physical_round_trip(seed, M):
    f = random_field(M, seed)
    back = physical_transform(physical_transform(f, "to-physical"), "from-physical", grid=f.grid)
    assert np.allclose(back.coeffs, f.coeffs, atol=1e-12)


# ---- trajectory and records

def test_trajectory_validation_and_lookup():
    g = GridSpec(2)
    c = np.zeros((3, 5), dtype=complex)
    tr = Trajectory(g, [0.0, 0.5, 1.0], c)
    assert len(tr) == 3 and tr.index_of(0.5) == 1
    with pytest.raises(ValueError):
        Trajectory(g, [0.0, 0.0, 1.0], c)
    with pytest.raises(ValueError):
        Trajectory(g, [-1.0, 0.0, 1.0], c)


def test_record_round_trip():
    f = random_field(5, 9)
    back = field_from_records(field_to_records(f))
    assert np.array_equal(back.coeffs, f.coeffs)
