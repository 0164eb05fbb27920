"""Spinor Hilbert space over the truncated quantum sphere algebra.

The full space is L2 tensor a 2-dimensional spinor leg.  Two bases are kept:

* product labels (twol, twom, twon, twosigma), where the symmetry coproduct
  and the Dirac operator words have their natural sparse form, and
* coupled spin labels (twoj, twomu, twon, up), where the Dirac operators are
  diagonal; ``up`` selects total spin j+1/2, else j-1/2.

``build_decomposition`` returns the unitary change of basis C with product
rows and spin columns, so X_spin = C* X_prod C.  All half-integer quantum
numbers are doubled integers throughout.
"""

from __future__ import annotations

from collections import namedtuple

import mpmath

from .coordalg import PWElement, Truncation, gns_matrix
from .linalg import BlockOperator, commutator
from .repsu2 import cg_table, irrep_matrix
from .scalars import QContext

ProdLabel = namedtuple("ProdLabel", "twol twom twon twosigma")
SpinLabel = namedtuple("SpinLabel", "twoj twomu twon up")

GENS = ("e", "f", "k", "ki")

# coproduct legs per generator, first leg orbital, second leg spinor
_COPRODUCT = {
    "e": (("e", "k"), ("ki", "e")),
    "f": (("f", "k"), ("ki", "f")),
    "k": (("k", "k"),),
    "ki": (("ki", "ki"),),
}


def coupled_twoj(lab: SpinLabel) -> int:
    """Total-spin label of a coupled basis vector (doubled)."""
    return lab.twoj + (1 if lab.up else -1)


def prod_labels(twol_max: int):
    """Product basis, sigma descending within each (l, m, n)."""
    out = []
    for twol in range(0, twol_max + 1):
        for twom in range(-twol, twol + 1, 2):
            for twon in range(-twol, twol + 1, 2):
                for twosigma in (1, -1):
                    out.append(ProdLabel(twol, twom, twon, twosigma))
    return tuple(out)


def spin_labels(twol_max: int):
    """Coupled basis; the up tower j+1/2 precedes the down tower j-1/2."""
    out = []
    for twoj in range(0, twol_max + 1):
        for up in (True, False):
            if not up and twoj == 0:
                continue
            two_big = twoj + (1 if up else -1)
            for twomu in range(-two_big, two_big + 1, 2):
                for twon in range(-twoj, twoj + 1, 2):
                    out.append(SpinLabel(twoj, twomu, twon, up))
    return tuple(out)


def build_decomposition(ctx: QContext, twol_max: int, cache=None) -> BlockOperator:
    """Clebsch-Gordan unitary from the coupled basis to the product basis."""
    rows = prod_labels(twol_max)
    cols = spin_labels(twol_max)
    C = BlockOperator(ctx, cols, row_labels=rows)
    tables = {twoj: cg_table(ctx, twoj, 1, cache=cache) for twoj in range(0, twol_max + 1)}
    for lab in cols:
        tab = tables[lab.twoj]
        two_big = coupled_twoj(lab)
        for twosigma in (1, -1):
            twom = lab.twomu - twosigma
            if abs(twom) > lab.twoj:
                continue
            coeff = tab.get(two_big, twom, twosigma)
            if coeff != 0:
                C.add_to_entry(ProdLabel(lab.twoj, twom, lab.twon, twosigma), lab, coeff)
    return C


def symmetry_action(ctx: QContext, twol_max: int, gen: str) -> BlockOperator:
    """Coproduct action of a generator on the product basis."""
    if gen not in _COPRODUCT:
        raise ValueError(f"unknown generator {gen!r}")
    labels = prod_labels(twol_max)
    out = BlockOperator(ctx, labels)
    with ctx.guard():
        for gen_a, gen_b in _COPRODUCT[gen]:
            spin_b = irrep_matrix(ctx, 1, gen_b)
            for twol in range(0, twol_max + 1):
                orb_a = irrep_matrix(ctx, twol, gen_a)
                dim = twol + 1
                for i_out in range(dim):
                    for i_in in range(dim):
                        a = orb_a[i_out, i_in]
                        if a == 0:
                            continue
                        twom_out = 2 * i_out - twol
                        twom_in = 2 * i_in - twol
                        for s_out in range(2):
                            for s_in in range(2):
                                b = spin_b[s_out, s_in]
                                if b == 0:
                                    continue
                                for twon in range(-twol, twol + 1, 2):
                                    out.add_to_entry(
                                        ProdLabel(twol, twom_out, twon, 2 * s_out - 1),
                                        ProdLabel(twol, twom_in, twon, 2 * s_in - 1),
                                        a * b,
                                    )
    return out


def dtilde_label_value(lab: SpinLabel) -> int:
    """Linear Dirac eigenvalue on a coupled label: 2j up, -(2j+2) down."""
    return lab.twoj if lab.up else -(lab.twoj + 2)


def isospectral_dirac(ctx: QContext, twol_max: int, shifted: bool = False) -> BlockOperator:
    """Label-diagonal linear Dirac operator on the coupled basis.

    With ``shifted`` the constant 3/2 is added, matching the round
    (2j + 3/2, -(2j + 1/2)) spectrum of the shifted operator.
    """
    labels = spin_labels(twol_max)
    with ctx.guard():
        shift = mpmath.mpf(3) / 2 if shifted else mpmath.mpf(0)
        return BlockOperator.diagonal(ctx, labels, lambda lab: dtilde_label_value(lab) + shift)


def q_dirac_label_value(ctx: QContext, lab: SpinLabel):
    """q-integer Dirac eigenvalue on a coupled label: [2j] up, [-(2j+2)] down."""
    return ctx.q_int(dtilde_label_value(lab))


def lift_to_prod(ctx: QContext, mat: BlockOperator, twol_max: int) -> BlockOperator:
    """Tensor an L2 operator with the identity on the spinor leg."""
    labels = prod_labels(twol_max)
    out = BlockOperator(ctx, labels)
    for c, rows in mat.cols.items():
        for r, v in rows.items():
            for twosigma in (1, -1):
                out.add_to_entry(
                    ProdLabel(r.twol, r.twom, r.twon, twosigma),
                    ProdLabel(c.twol, c.twom, c.twon, twosigma),
                    v,
                )
    return out


def rho_prod(ctx: QContext, x: PWElement, trunc: Truncation) -> BlockOperator:
    """GNS action of an algebra element, tensored with the spinor identity."""
    return lift_to_prod(ctx, gns_matrix(x, trunc), trunc.twol_max)


def rho_spin(ctx: QContext, x: PWElement, trunc: Truncation, decomposition: BlockOperator = None) -> BlockOperator:
    """GNS action conjugated into the coupled basis."""
    C = decomposition if decomposition is not None else build_decomposition(ctx, trunc.twol_max)
    return C.dagger() @ rho_prod(ctx, x, trunc) @ C


def interior_spin_labels(trunc: Truncation, twodegree: int):
    """Coupled labels untouched by truncation under degree <= twodegree/2."""
    if twodegree > trunc.twodelta:
        raise ValueError("element degree exceeds the truncation margin")
    keep = trunc.twol_max - trunc.twodelta
    return tuple(lab for lab in spin_labels(trunc.twol_max) if lab.twoj <= keep)


def equivariance_defect(ctx: QContext, twol_max: int, op: BlockOperator, gens=("e", "f", "k")):
    """Largest commutator norm of op against the symmetry generators."""
    with ctx.guard():
        worst = mpmath.mpf(0)
        for gen in gens:
            r = commutator(op, symmetry_action(ctx, twol_max, gen)).frobenius()
            if r > worst:
                worst = r
        return worst
