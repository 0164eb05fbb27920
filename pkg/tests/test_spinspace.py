"""Coupled-basis decomposition of the spinor space."""

import mpmath
import pytest

from qdirac.coordalg import Truncation, generators
from qdirac.linalg import BlockOperator, commutator
from qdirac.repsu2 import irrep_matrix
from qdirac.scalars import QContext
from qdirac.spinspace import (
    ProdLabel,
    SpinLabel,
    build_decomposition,
    coupled_twoj,
    dtilde_label_value,
    equivariance_defect,
    interior_spin_labels,
    isospectral_dirac,
    prod_labels,
    q_dirac_label_value,
    rho_prod,
    rho_spin,
    spin_labels,
    symmetry_action,
)

CTX = QContext("0.5", prec=128)
TOL = mpmath.mpf("1e-30")


def test_label_counts_match():
    for twol_max in (0, 1, 4):
        p = prod_labels(twol_max)
        s = spin_labels(twol_max)
        assert len(p) == len(s) == 2 * sum((twol + 1) ** 2 for twol in range(twol_max + 1))


def test_tower_multiplicities():
    labs = spin_labels(6)
    for twoj in range(7):
        ups = [lab for lab in labs if lab.twoj == twoj and lab.up]
        downs = [lab for lab in labs if lab.twoj == twoj and not lab.up]
        assert len(ups) == (twoj + 2) * (twoj + 1)
        assert len(downs) == twoj * (twoj + 1)


def test_coupled_label_ranges():
    for lab in spin_labels(5):
        two_big = coupled_twoj(lab)
        assert two_big == lab.twoj + (1 if lab.up else -1)
        assert abs(lab.twomu) <= two_big and (lab.twomu - two_big) % 2 == 0
        assert abs(lab.twon) <= lab.twoj and (lab.twon - lab.twoj) % 2 == 0


def test_dirac_label_values():
    assert dtilde_label_value(SpinLabel(4, 1, 0, True)) == 4
    assert dtilde_label_value(SpinLabel(4, 1, 0, False)) == -6
    with CTX.guard():
        up = q_dirac_label_value(CTX, SpinLabel(2, 1, 0, True))
        down = q_dirac_label_value(CTX, SpinLabel(2, 1, 0, False))
        assert abs(up - CTX.mpf("2.5")) < TOL
        assert abs(down + CTX.mpf("10.625")) < TOL


@pytest.mark.parametrize("q_str", ["0.3", "0.5", "0.9"])
def test_decomposition_unitary(q_str):
    ctx = QContext(q_str, prec=128)
    C = build_decomposition(ctx, 3)
    n_spin = len(C.labels)
    n_prod = len(C.row_labels)
    assert n_spin == n_prod
    left = C.dagger() @ C - BlockOperator.identity(ctx, C.labels)
    right = C @ C.dagger() - BlockOperator.identity(ctx, C.row_labels)
    assert left.frobenius() < TOL
    assert right.frobenius() < TOL


def test_decomposition_singlet_entries():
    # the j=1/2 singlet column carries the two elementary coupling factors
    C = build_decomposition(CTX, 1)
    col = SpinLabel(1, 0, 1, False)
    with CTX.guard():
        root2q = mpmath.sqrt(CTX.q_int(2))
        plus = C.entry(ProdLabel(1, 1, 1, -1), col)
        minus = C.entry(ProdLabel(1, -1, 1, 1), col)
        assert abs(plus - CTX.s / root2q) < TOL
        assert abs(minus + 1 / (CTX.s * root2q)) < TOL


def test_symmetry_action_star_structure():
    for gen, adj in (("e", "f"), ("k", "k")):
        a = symmetry_action(CTX, 2, gen)
        b = symmetry_action(CTX, 2, adj)
        assert (a.dagger() - b).frobenius() < TOL


@pytest.mark.parametrize("gen", ["e", "f", "k"])
def test_decomposition_block_diagonalizes(gen):
    twol_max = 3
    C = build_decomposition(CTX, twol_max)
    D = C.dagger() @ symmetry_action(CTX, twol_max, gen) @ C
    # no matrix elements between different coupled sectors
    off = mpmath.mpf(0)
    with CTX.guard():
        for c, rows in D.cols.items():
            for r, v in rows.items():
                if (r.twoj, r.up, r.twon) != (c.twoj, c.up, c.twon):
                    off = max(off, abs(v))
    assert off < TOL
    # each sector block is the irreducible action of total spin j +- 1/2
    for twoj, up, twon in ((1, True, 1), (2, False, 0), (3, True, -3)):
        two_big = twoj + (1 if up else -1)
        ref = irrep_matrix(CTX, two_big, gen)
        with CTX.guard():
            worst = mpmath.mpf(0)
            for i_out in range(two_big + 1):
                for i_in in range(two_big + 1):
                    got = D.entry(
                        SpinLabel(twoj, 2 * i_out - two_big, twon, up),
                        SpinLabel(twoj, 2 * i_in - two_big, twon, up),
                    )
                    worst = max(worst, abs(got - ref[i_out, i_in]))
        assert worst < TOL


@pytest.mark.parametrize("q_str", ["0.3", "0.9"])
def test_linear_dirac_equivariant(q_str):
    ctx = QContext(q_str, prec=128)
    twol_max = 3
    C = build_decomposition(ctx, twol_max)
    d_prod = C @ isospectral_dirac(ctx, twol_max) @ C.dagger()
    assert equivariance_defect(ctx, twol_max, d_prod) < mpmath.mpf("1e-28")


def test_multiplication_operator_not_equivariant():
    # multiplication by a coordinate moves between spins: a negative control
    trunc = Truncation(6, 2)
    op = rho_prod(CTX, generators(CTX)["a"], trunc)
    assert equivariance_defect(CTX, trunc.twol_max, op) > mpmath.mpf("0.1")


def test_rho_spin_star_representation():
    trunc = Truncation(4, 2)
    C = build_decomposition(CTX, trunc.twol_max)
    gens = generators(CTX)
    x = gens["a"] * gens["bstar"]
    left = rho_spin(CTX, x, trunc, decomposition=C).dagger()
    right = rho_spin(CTX, x.star(), trunc, decomposition=C)
    assert (left - right).frobenius() < TOL


def test_interior_spin_labels():
    trunc = Truncation(6, 2)
    labs = interior_spin_labels(trunc, 2)
    assert all(lab.twoj <= 4 for lab in labs)
    with pytest.raises(ValueError):
        interior_spin_labels(trunc, 4)
