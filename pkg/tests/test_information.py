import math

import numpy as np
import numpy.testing as npt
import pytest

from errors import ContractViolation, FIDivergenceError, NonIdentifiable, PoleError
from information import (DistributionFamily, FisherMatrix3, WeightMatrix, convex_qfim, cramer_rao_bound,
                         fi_from_distribution, finite_fidelity_fi, qfi_pure, qfim_sld, schur_alpha_bound, sld_residual,
                         sphere_average_qfi, sphere_nodes, symmetric_log_derivative)
from numeric import I2, dagger, kron
from protocols import (ADAPTIVE, X_AXIS, Y_AXIS, Z_AXIS, Agnostic, AncillaTagged, BellBasis, Hindsight, NoiseSpec,
                       OutcomeDistribution, SingleQubit, evolve_probe, protocol_family, state_family,
                       tagged_state_families)
from rotations import RotationParams, axis_unitary
from states import (AncillaTaggedEnsemble, PureState, TaggedComponent, pure_state_from_bloch, random_density_matrix,
                    random_pure_state, rho_star, singlet, tagged_density)

ALPHAS = (math.pi / 3, 1.0, 2 * math.pi / 3, -1.2, 2.5)
THETAS = (math.pi / 5, math.pi / 3, 1.1, 2.0, 2.6)
PHIS = (0.3, 1.2, 2.2, 4.0, 5.5)
GRID = [RotationParams(a, t, f) for a in ALPHAS for t in THETAS for f in PHIS]


def binary_family(p0):
    return DistributionFamily(lambda q: OutcomeDistribution(('0', '1'), np.array([p0(q), 1 - p0(q)])), name='binary')


def bell_fim_oracle(p):
    s2= math.sin(p.alpha / 2) ** 2
    return np.diag([1.0, 4 * s2, 4 * s2 * math.sin(p.theta) ** 2])


def rho_star_qfim_oracle(p):
    s2= math.sin(p.alpha / 2) ** 2
    return np.diag([2 / 3, 8 / 3 * s2, 8 / 3 * s2 * math.sin(p.theta) ** 2])


def zero_probe_qfim_oracle(p):
    sh, ch= math.sin(p.alpha / 2), math.cos(p.alpha / 2)
    s, c= math.sin(p.theta), math.cos(p.theta)
    sa= math.sin(p.alpha)
    m11= s * s
    m12= s * c * sa
    m13= 2 * s * s * c * sh * sh
    m22= c * c * sa * sa + 4 * sh ** 4
    m23= -2 * s ** 3 * sh * sh * sa
    m33= 4 * s * s * sh * sh * (ch * ch + c * c * sh * sh)
    return np.array([[m11, m12, m13], [m12, m22, m23], [m13, m23, m33]])


@pytest.mark.parametrize('alpha', [math.pi / 4, math.pi / 2, 3 * math.pi / 4])
def test_fi_of_cos_squared_family(alpha):
    fam= binary_family(lambda q: math.cos(q.alpha / 2) ** 2)
    assert abs(fi_from_distribution(fam, RotationParams(alpha, 0.4, 0.2)).alpha_alpha - 1) < 1e-8


def test_fi_of_constant_family_is_zero():
    info= fi_from_distribution(binary_family(lambda q: 0.5), RotationParams(0.7, 1.0, 2.0))
    npt.assert_array_equal(info.entries, np.zeros((3, 3)))


def test_fi_divergence_is_reported():
    fam= binary_family(lambda q: max(q.alpha, 0.0) / 4)
    with pytest.raises(FIDivergenceError) as info:
        fi_from_distribution(fam, RotationParams(0.0, 1.0, 1.0))
    assert info.value.label == '0'


class Unnormalized:
    labels= ('0', '1')
    probs= np.array([0.7, 0.7])


def test_distribution_family_checks_outputs():
    fam= DistributionFamily(lambda q: Unnormalized(), name='broken')
    with pytest.raises(ContractViolation):
        fam(RotationParams(0.1, 0.1, 0.1))


def test_bell_basis_fim_closed_form():
    fam= protocol_family(BellBasis())
    for p in GRID:
        npt.assert_allclose(fi_from_distribution(fam, p).entries, bell_fim_oracle(p), atol=1e-5)


def test_qfi_pure_known_values():
    zero= np.array([1, 0], dtype=complex)
    family= lambda q: PureState(axis_unitary(q) @ zero)
    assert abs(qfi_pure(family, RotationParams(0.8, math.pi / 2, 0.0)) - 1) < 1e-6
    assert qfi_pure(family, RotationParams(0.8, 0.0, 0.0)) < 1e-8

    pair= lambda q: PureState(kron(axis_unitary(q), I2) @ singlet().vec)
    rng= np.random.default_rng(6)
    for _ in range(10):
        p= RotationParams(rng.uniform(-3, 3), math.acos(rng.uniform(-1, 1)), rng.uniform(0, 2 * math.pi))
        assert abs(qfi_pure(pair, p) - 1) < 1e-6


def test_qfim_matches_qfi_pure_on_pure_families():
    rng= np.random.default_rng(12)
    for _ in range(10):
        psi= random_pure_state(rng)
        p= RotationParams(rng.uniform(-3, 3), rng.uniform(0.2, 2.9), rng.uniform(0, 6))
        pure= lambda q: PureState(axis_unitary(q) @ psi.vec)
        mixed= lambda q: pure(q).density()
        assert abs(qfim_sld(mixed, p)[0].alpha_alpha - qfi_pure(pure, p)) < 1e-5


def test_zero_probe_qfim_closed_form_is_singular():
    fam= state_family(SingleQubit())
    for p in GRID:
        info, slds= qfim_sld(fam, p)
        npt.assert_allclose(info.entries, zero_probe_qfim_oracle(p), atol=1e-5)
        assert abs(np.linalg.det(info.entries)) < 1e-8
        assert isinstance(schur_alpha_bound(info), NonIdentifiable)
        assert not schur_alpha_bound(info)


def test_rho_star_qfim_and_schur_bound():
    families= tagged_state_families(rho_star())
    for p in GRID:
        info= convex_qfim(families, p)
        npt.assert_allclose(info.entries, rho_star_qfim_oracle(p), atol=1e-5)
        assert abs(schur_alpha_bound(info) - 1.5) < 1e-6


def test_singlet_qfim_is_optimal():
    fam= state_family(Agnostic())
    for p in GRID[::7]:
        npt.assert_allclose(qfim_sld(fam, p)[0].entries, bell_fim_oracle(p), atol=1e-5)


def test_schur_decoupled_and_singular_cases():
    assert schur_alpha_bound(FisherMatrix3(np.diag([1.0, 0.0, 0.0]))) == pytest.approx(1.0)
    assert schur_alpha_bound(FisherMatrix3(np.diag([4.0, 2.0, 1.0]))) == pytest.approx(0.25)
    coupled= FisherMatrix3(np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 0.0]]))
    assert isinstance(schur_alpha_bound(coupled), NonIdentifiable)


def test_schur_bound_dominates_the_diagonal_inverse():
    rng= np.random.default_rng(30)
    for _ in range(100):
        a= rng.normal(size=(3, 3))
        m= FisherMatrix3(a @ a.T + 0.1 * np.eye(3))
        bound= schur_alpha_bound(m)
        assert bound == pytest.approx(np.linalg.inv(m.entries)[0, 0], rel=1e-9)
        assert bound >= 1 / m.alpha_alpha - 1e-9


def test_schur_inequality_on_computed_qfims():
    produced= [qfim_sld(state_family(Agnostic()), p)[0] for p in GRID[::9]]
    produced+= [qfim_sld(state_family(Hindsight(), NoiseSpec(0.9, 0)), p)[0] for p in GRID[::9]]
    produced+= [convex_qfim(tagged_state_families(rho_star()), p) for p in GRID[::9]]
    checked= 0
    for m in produced:
        bound= schur_alpha_bound(m)
        if isinstance(bound, float):
            assert bound >= 1 / m.alpha_alpha - 1e-9
            checked+= 1
    assert checked >= len(GRID[::9])


@pytest.mark.parametrize('kind,noise', [
    (SingleQubit(), NoiseSpec()),
    (SingleQubit(lam=0.7, obs_axis=X_AXIS), NoiseSpec()),
    (Hindsight(ancilla_axis=ADAPTIVE, probe_axis=Y_AXIS), NoiseSpec()),
    (Hindsight(ancilla_axis=Z_AXIS, probe_axis=Y_AXIS), NoiseSpec(0.9, 0)),
    (Agnostic(), NoiseSpec()),
    (Agnostic(), NoiseSpec(0.94, 1)),
    (BellBasis(), NoiseSpec()),
    (AncillaTagged(), NoiseSpec()),
])
def test_measurement_never_beats_the_qfim(kind, noise):
    fam= protocol_family(kind, noise)
    for p in GRID[::9]:
        if isinstance(kind, AncillaTagged):
            qfim= convex_qfim(tagged_state_families(kind.ensemble), p)
        else:
            qfim= qfim_sld(state_family(kind, noise), p)[0]
        assert fi_from_distribution(fam, p).alpha_alpha <= qfim.alpha_alpha + 1e-5


def test_tagged_density_qfim_equals_weighted_component_sum():
    ens= AncillaTaggedEnsemble((
        TaggedComponent(0.25, pure_state_from_bloch([0, 0, 1]), 0, [0, 0, 1]),
        TaggedComponent(0.75, pure_state_from_bloch([0.6, 0.0, 0.8]), 1, [1, 0, 0]),
    ))
    joint= tagged_density(ens)
    family= lambda q: evolve_probe(joint, q)
    for p in GRID[::9]:
        direct= qfim_sld(family, p)[0]
        npt.assert_allclose(direct.entries, convex_qfim(tagged_state_families(ens), p).entries, atol=1e-5)


def test_fisher_matrix_validation():
    with pytest.raises(ContractViolation):
        FisherMatrix3(np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
    with pytest.raises(ContractViolation):
        FisherMatrix3(np.diag([1.0, -1.0, 0.0]))


def test_weight_matrix_bound():
    p= RotationParams(1.0, 1.1, 0.3)
    info= convex_qfim(tagged_state_families(rho_star()), p)
    assert WeightMatrix().bound(info, 10) == pytest.approx(0.15, abs=1e-6)

    bell= fi_from_distribution(protocol_family(BellBasis()), p)
    s2= math.sin(p.alpha / 2) ** 2
    expected= 1 + 1 / (4 * s2) + 1 / (4 * s2 * math.sin(p.theta) ** 2)
    assert WeightMatrix(np.eye(3)).bound(bell) == pytest.approx(expected, rel=1e-5)


def test_cramer_rao_bound():
    assert cramer_rao_bound(1.0, 100) == pytest.approx(0.01)
    assert cramer_rao_bound(0.0, 100) == math.inf
    with pytest.raises(ContractViolation):
        cramer_rao_bound(1.0, 0)


def test_sld_solves_its_defining_equation():
    rng= np.random.default_rng(21)
    for dim in (2, 4):
        for _ in range(10):
            rho= random_density_matrix(rng, dim).mat
            g= rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            drho= (g + dagger(g)) / 2
            drho-= np.trace(drho) * np.eye(dim) / dim
            sld= symmetric_log_derivative(rho, drho)
            assert sld_residual(rho, drho, sld) < 1e-9


def test_sphere_nodes_weights_sum_to_one():
    assert sum(w for _, _, w in sphere_nodes()) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize('direction', [[0, 0, 1], [1, 0, 0]])
def test_sphere_average_qfi_is_two_thirds(direction):
    assert abs(sphere_average_qfi(pure_state_from_bloch(direction), 0.9) - 2 / 3) < 1e-4


@pytest.mark.slow
def test_sphere_average_qfi_random_inputs():
    rng= np.random.default_rng(34)
    for _ in range(20):
        assert abs(sphere_average_qfi(random_pure_state(rng), rng.uniform(0.1, 3.0)) - 2 / 3) < 1e-4


def test_finite_fidelity_known_values():
    for alpha in np.linspace(0.1, 3.0, 7):
        assert finite_fidelity_fi(1.0, alpha) == pytest.approx(1.0, abs=1e-12)
        assert finite_fidelity_fi(0.25, alpha) == pytest.approx(0.0, abs=1e-15)
    assert abs(finite_fidelity_fi(0.94, math.pi / 2) - 0.84779) < 1e-4


def test_finite_fidelity_poles_and_domain():
    with pytest.raises(PoleError):
        finite_fidelity_fi(1.0, 0.0)
    with pytest.raises(PoleError):
        finite_fidelity_fi(1.0, math.pi)
    with pytest.raises(ContractViolation):
        finite_fidelity_fi(1.5, 1.0)


@pytest.mark.parametrize('f', [0.25, 0.5, 0.75, 0.94, 1.0])
def test_finite_fidelity_matches_numeric_fi(f):
    fam= protocol_family(Agnostic(), NoiseSpec(f, 0))
    for alpha in np.linspace(0.05, math.pi - 0.05, 20):
        numeric= fi_from_distribution(fam, RotationParams(alpha, 0.7, 1.9)).alpha_alpha
        assert abs(numeric - finite_fidelity_fi(f, alpha)) < 1e-6
