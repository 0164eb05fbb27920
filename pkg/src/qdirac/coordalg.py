"""Coordinate algebra of quantum SU(2) in matrix-coefficient coordinates.

Elements are finite combinations of matrix coefficients t^l_{m,n} (half
integers doubled).  Fixed conventions:

* product:  t^l_{m,n} t^{l'}_{m',n'} =
      sum_p C(p; m,m') C(p; n,n') t^p_{m+m', n+n'}
  with the coupling tables of ``repsu2``;
* involution: (t^l_{m,n})* = (-1)^(2l+m+n) q^(n-m) t^l_{-m,-n};
* Haar pairing: <t^l_{m,n}, t^l_{m,n}> = q^(-2m) / [2l+1], so the
  orthonormal basis is |l m n> = q^m [2l+1]^(1/2) t^l_{m,n};
* generators a = t^(1/2)_(1/2,1/2), b = t^(1/2)_(1/2,-1/2);
* the symmetry generators act on the m index through the irrep matrices.

GNS multiplication matrices are written in the orthonormal coordinates on a
finite truncation l <= L_max; a column is exact whenever the multiplier
cannot push it past the cutoff, which is what the interior margin tracks.
"""

from __future__ import annotations

from collections import namedtuple

import mpmath

from .linalg import BlockOperator
from .repsu2 import cg_table, rep_word
from .scalars import QContext

PWIndex = namedtuple("PWIndex", "twol twom twon")

Truncation = namedtuple("Truncation", "twol_max twodelta")


def make_index(twol: int, twom: int, twon: int) -> PWIndex:
    """Validated matrix-coefficient index."""
    if twol < 0 or abs(twom) > twol or abs(twon) > twol:
        raise ValueError(f"index out of range: (2l,2m,2n)=({twol},{twom},{twon})")
    if (twol - twom) % 2 or (twol - twon) % 2:
        raise ValueError(f"index parity violation: (2l,2m,2n)=({twol},{twom},{twon})")
    return PWIndex(twol, twom, twon)


class PWElement:
    """Finite combination of matrix coefficients at one context."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: QContext, terms=None):
        self.ctx = ctx
        clean = {}
        with ctx.guard():
            # conversion rounds at ambient precision, so it must be guarded
            for idx, c in (terms or {}).items():
                idx = make_index(*idx)
                c = mpmath.mpc(c)
                if c != 0:
                    clean[idx] = c
        self.terms = clean

    @classmethod
    def basis(cls, ctx, twol, twom, twon, coeff=1) -> "PWElement":
        return cls(ctx, {make_index(twol, twom, twon): ctx.mpc(coeff)})

    @classmethod
    def one(cls, ctx) -> "PWElement":
        return cls.basis(ctx, 0, 0, 0)

    def coeff(self, twol, twom, twon):
        return self.terms.get(PWIndex(twol, twom, twon), mpmath.mpc(0))

    def degree(self) -> int:
        """Largest 2l present; products raise the cutoff need by this much."""
        return max((idx.twol for idx in self.terms), default=0)

    def max_abs_coeff(self):
        with self.ctx.guard():
            return max((abs(c) for c in self.terms.values()), default=mpmath.mpf(0))

    def __add__(self, other):
        self.ctx.check(other.ctx)
        with self.ctx.guard():
            out = dict(self.terms)
            for idx, c in other.terms.items():
                out[idx] = out.get(idx, mpmath.mpc(0)) + c
            return PWElement(self.ctx, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "PWElement":
        with self.ctx.guard():
            c = self.ctx.mpc(c)
            return PWElement(self.ctx, {idx: c * v for idx, v in self.terms.items()})

    def __mul__(self, other):
        """Product through the coupling tables."""
        self.ctx.check(other.ctx)
        ctx = self.ctx
        out = {}
        with ctx.guard():
            for i1, c1 in self.terms.items():
                for i2, c2 in other.terms.items():
                    tab = cg_table(ctx, i1.twol, i2.twol)
                    c12 = c1 * c2
                    twom = i1.twom + i2.twom
                    twon = i1.twon + i2.twon
                    for twop in tab.twop_values():
                        if abs(twom) > twop or abs(twon) > twop:
                            continue
                        cm = tab.get(twop, i1.twom, i2.twom)
                        cn = tab.get(twop, i1.twon, i2.twon)
                        if cm == 0 or cn == 0:
                            continue
                        idx = PWIndex(twop, twom, twon)
                        out[idx] = out.get(idx, mpmath.mpc(0)) + c12 * cm * cn
        return PWElement(ctx, {k: v for k, v in out.items() if v != 0})

    def star(self) -> "PWElement":
        """Involution; antilinear."""
        ctx = self.ctx
        out = {}
        with ctx.guard():
            for idx, c in self.terms.items():
                sign = -1 if ((2 * idx.twol + idx.twom + idx.twon) // 2) % 2 else 1
                factor = sign * ctx.s ** (idx.twon - idx.twom)
                tgt = PWIndex(idx.twol, -idx.twom, -idx.twon)
                out[tgt] = out.get(tgt, mpmath.mpc(0)) + mpmath.conj(c) * factor
        return PWElement(ctx, out)

    def __repr__(self):
        items = ", ".join(f"{tuple(i)}: {mpmath.nstr(c, 8)}" for i, c in sorted(self.terms.items()))
        return f"PWElement({{{items}}})"


def generators(ctx: QContext) -> dict:
    """The generators a, b and their involutions."""
    a = PWElement.basis(ctx, 1, 1, 1)
    b = PWElement.basis(ctx, 1, 1, -1)
    return {"a": a, "b": b, "astar": a.star(), "bstar": b.star()}


def haar_state(x: PWElement):
    """Haar functional: the trivial-coefficient component."""
    return x.coeff(0, 0, 0)


def haar_inner(x: PWElement, y: PWElement):
    """<x, y> = h(x* y), evaluated on the diagonal pairing."""
    x.ctx.check(y.ctx)
    ctx = x.ctx
    with ctx.guard():
        acc = mpmath.mpc(0)
        for idx, cx in x.terms.items():
            cy = y.terms.get(idx)
            if cy is not None:
                acc += mpmath.conj(cx) * cy * ctx.s ** (-2 * idx.twom) / ctx.q_int(idx.twol + 1)
        return acc


def ortho_basis_coeff(ctx: QContext, twol: int, twom: int):
    """Normalization q^m [2l+1]^(1/2) making |l m n> orthonormal."""
    with ctx.guard():
        return ctx.s ** twom * mpmath.sqrt(ctx.q_int(twol + 1))


def left_action(ctx: QContext, word, x: PWElement) -> PWElement:
    """Action of a symmetry word on the m index."""
    out = {}
    with ctx.guard():
        mats = {}
        for idx, c in x.terms.items():
            w = mats.get(idx.twol)
            if w is None:
                w = rep_word(ctx, idx.twol, word)
                mats[idx.twol] = w
            jin = (idx.twom + idx.twol) // 2
            for jout in range(idx.twol + 1):
                v = w[jout, jin]
                if v != 0:
                    tgt = PWIndex(idx.twol, -idx.twol + 2 * jout, idx.twon)
                    out[tgt] = out.get(tgt, mpmath.mpc(0)) + v * c
    return PWElement(ctx, {k: v for k, v in out.items() if v != 0})


def l2_labels(twol_max: int):
    """Orthonormal basis labels |l m n| up to the cutoff."""
    out = []
    for twol in range(0, twol_max + 1):
        for twom in range(-twol, twol + 2, 2):
            for twon in range(-twol, twol + 2, 2):
                out.append(PWIndex(twol, twom, twon))
    return tuple(out)


def interior_labels(trunc: Truncation, twodegree: int):
    """Labels whose image under a degree-bounded multiplier stays inside."""
    if twodegree > trunc.twodelta:
        raise ValueError(
            f"interior margin 2dL={trunc.twodelta} too small for multiplier degree {twodegree}"
        )
    return tuple(lab for lab in l2_labels(trunc.twol_max) if lab.twol <= trunc.twol_max - trunc.twodelta)


def gns_matrix(x: PWElement, trunc: Truncation) -> BlockOperator:
    """Left-multiplication matrix in orthonormal coordinates on the truncation.

    Rows above the cutoff are dropped; columns in the interior (margin at
    least the multiplier degree) are exact.
    """
    ctx = x.ctx
    labels = l2_labels(trunc.twol_max)
    op = BlockOperator(ctx, labels)
    with ctx.guard():
        for col in labels:
            img = x * PWElement.basis(ctx, *col)
            c_col = ortho_basis_coeff(ctx, col.twol, col.twom)
            for idx, c in img.terms.items():
                if idx.twol > trunc.twol_max:
                    continue
                val = c * c_col / ortho_basis_coeff(ctx, idx.twol, idx.twom)
                op.add_to_entry(idx, col, val)
    return op
