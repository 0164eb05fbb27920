"""Sparse operators on finite labelled bases, at arbitrary precision.

A ``BlockOperator`` is a square matrix indexed by an ordered tuple of
hashable basis labels, stored column-major as nested dicts of mpmath
complex entries.  Eigen- and singular-value problems are solved blockwise:
the sparsity graph is split into connected components and each component is
handed to mpmath's dense Hermitian solver.  This keeps every dense solve at
the size of a conserved-quantity block.

Float64/numpy enters only through the fit helpers at the bottom, which back
the percent-scale statistical checks; all identity-level arithmetic stays in
mpmath at the context precision.
"""

from __future__ import annotations

import mpmath
import numpy as np

from .scalars import QContext


class BlockOperator:
    """Sparse operator between ordered labelled bases.

    ``labels`` indexes columns (the domain); rows default to the same basis,
    so most operators are square maps of one labelled space.
    """

    __slots__ = ("ctx", "labels", "index", "row_labels", "row_index", "cols")

    def __init__(self, ctx: QContext, labels, row_labels=None):
        self.ctx = ctx
        self.labels = tuple(labels)
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self.index) != len(self.labels):
            raise ValueError("duplicate basis labels")
        if row_labels is None:
            self.row_labels = self.labels
            self.row_index = self.index
        else:
            self.row_labels = tuple(row_labels)
            self.row_index = {lab: i for i, lab in enumerate(self.row_labels)}
            if len(self.row_index) != len(self.row_labels):
                raise ValueError("duplicate row labels")
        self.cols = {}

    def is_square(self) -> bool:
        return self.row_labels == self.labels

    # -- construction -----------------------------------------------------

    @classmethod
    def zeros(cls, ctx, labels, row_labels=None) -> "BlockOperator":
        return cls(ctx, labels, row_labels=row_labels)

    @classmethod
    def identity(cls, ctx, labels) -> "BlockOperator":
        out = cls(ctx, labels)
        one = mpmath.mpc(1)
        for lab in out.labels:
            out.cols[lab] = {lab: one}
        return out

    @classmethod
    def diagonal(cls, ctx, labels, value) -> "BlockOperator":
        """Diagonal operator; ``value`` maps a label to a scalar."""
        out = cls(ctx, labels)
        with ctx.guard():
            for lab in out.labels:
                v = mpmath.mpc(value(lab))
                if v != 0:
                    out.cols[lab] = {lab: v}
        return out

    def copy(self) -> "BlockOperator":
        out = BlockOperator(self.ctx, self.labels, row_labels=self.row_labels)
        out.cols = {c: dict(rows) for c, rows in self.cols.items()}
        return out

    # -- entry access ------------------------------------------------------

    def entry(self, row, col):
        return self.cols.get(col, {}).get(row, mpmath.mpc(0))

    def add_to_entry(self, row, col, val):
        """Accumulate into one entry, dropping exact zeros."""
        if row not in self.row_index or col not in self.index:
            raise KeyError(f"label not in basis: {row if row not in self.row_index else col}")
        rows = self.cols.setdefault(col, {})
        with self.ctx.guard():
            v = rows.get(row, mpmath.mpc(0)) + mpmath.mpc(val)
        if v == 0:
            rows.pop(row, None)
            if not rows:
                self.cols.pop(col, None)
        else:
            rows[row] = v

    def set_entry(self, row, col, val):
        if row not in self.row_index or col not in self.index:
            raise KeyError(f"label not in basis: {row if row not in self.row_index else col}")
        with self.ctx.guard():
            v = mpmath.mpc(val)
        if v == 0:
            rows = self.cols.get(col)
            if rows is not None:
                rows.pop(row, None)
                if not rows:
                    self.cols.pop(col, None)
        else:
            self.cols.setdefault(col, {})[row] = v

    def nnz(self) -> int:
        return sum(len(rows) for rows in self.cols.values())

    # -- arithmetic ---------------------------------------------------------

    def _check_compat(self, other: "BlockOperator"):
        self.ctx.check(other.ctx)
        if self.labels != other.labels or self.row_labels != other.row_labels:
            raise ValueError("operators live on different bases")

    def __add__(self, other):
        self._check_compat(other)
        out = self.copy()
        with self.ctx.guard():
            for c, rows in other.cols.items():
                for r, v in rows.items():
                    out.add_to_entry(r, c, v)
        return out

    def __sub__(self, other):
        self._check_compat(other)
        out = self.copy()
        with self.ctx.guard():
            for c, rows in other.cols.items():
                for r, v in rows.items():
                    out.add_to_entry(r, c, -v)
        return out

    def __neg__(self):
        out = BlockOperator(self.ctx, self.labels, row_labels=self.row_labels)
        out.cols = {c: {r: -v for r, v in rows.items()} for c, rows in self.cols.items()}
        return out

    def scale(self, scalar) -> "BlockOperator":
        with self.ctx.guard():
            s = self.ctx.mpc(scalar)
            out = BlockOperator(self.ctx, self.labels, row_labels=self.row_labels)
            if s == 0:
                return out
            out.cols = {c: {r: s * v for r, v in rows.items()} for c, rows in self.cols.items()}
            return out

    def __matmul__(self, other):
        self.ctx.check(other.ctx)
        if self.labels != other.row_labels:
            raise ValueError("inner bases do not match")
        out = BlockOperator(self.ctx, other.labels, row_labels=self.row_labels)
        with self.ctx.guard():
            for c, brows in other.cols.items():
                acc = {}
                for k, bkc in brows.items():
                    arows = self.cols.get(k)
                    if not arows:
                        continue
                    for r, ark in arows.items():
                        acc[r] = acc.get(r, mpmath.mpc(0)) + ark * bkc
                acc = {r: v for r, v in acc.items() if v != 0}
                if acc:
                    out.cols[c] = acc
        return out

    def dagger(self) -> "BlockOperator":
        out = BlockOperator(self.ctx, self.row_labels, row_labels=self.labels)
        for c, rows in self.cols.items():
            for r, v in rows.items():
                out.cols.setdefault(r, {})[c] = mpmath.conj(v)
        return out

    def apply(self, vec: dict) -> dict:
        """Apply to a vector given as a label -> coefficient dict."""
        out = {}
        with self.ctx.guard():
            for c, vc in vec.items():
                rows = self.cols.get(c)
                if not rows:
                    continue
                for r, arc in rows.items():
                    out[r] = out.get(r, mpmath.mpc(0)) + arc * vc
        return {r: v for r, v in out.items() if v != 0}

    def restrict(self, sublabels, row_sublabels=None) -> "BlockOperator":
        """Compression to a subset of the basis (row and column)."""
        sublabels = tuple(sublabels)
        rows_keep = sublabels if row_sublabels is None else tuple(row_sublabels)
        out = BlockOperator(self.ctx, sublabels, row_labels=rows_keep)
        keep = set(rows_keep)
        for c in sublabels:
            rows = self.cols.get(c)
            if not rows:
                continue
            sub = {r: v for r, v in rows.items() if r in keep}
            if sub:
                out.cols[c] = sub
        return out

    def pruned(self, abs_tol) -> "BlockOperator":
        """Drop entries below abs_tol; for block-structure recovery only."""
        out = BlockOperator(self.ctx, self.labels, row_labels=self.row_labels)
        with self.ctx.guard():
            t = mpmath.mpf(abs_tol)
            for c, rows in self.cols.items():
                sub = {r: v for r, v in rows.items() if abs(v) > t}
                if sub:
                    out.cols[c] = sub
        return out

    # -- norms ---------------------------------------------------------------

    def frobenius(self):
        with self.ctx.guard():
            acc = mpmath.mpf(0)
            for rows in self.cols.values():
                for v in rows.values():
                    acc += abs(v) ** 2
            return mpmath.sqrt(acc)

    def max_entry(self):
        with self.ctx.guard():
            m = mpmath.mpf(0)
            for rows in self.cols.values():
                for v in rows.values():
                    a = abs(v)
                    if a > m:
                        m = a
            return m

    def hermiticity_defect(self):
        return (self - self.dagger()).frobenius()

    # -- blocked spectral theory ----------------------------------------------

    def components(self):
        """Connected components of the symmetrized sparsity graph."""
        if not self.is_square():
            raise ValueError("components need a square operator")
        parent = {lab: lab for lab in self.labels}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for c, rows in self.cols.items():
            rc = find(c)
            for r in rows:
                rr = find(r)
                if rr != rc:
                    parent[rr] = rc
        groups = {}
        for lab in self.labels:
            groups.setdefault(find(lab), []).append(lab)
        return [tuple(g) for g in groups.values()]

    def to_dense(self, order=None, row_order=None):
        order = tuple(order) if order is not None else self.labels
        if row_order is None:
            row_order = order if self.is_square() else self.row_labels
        pos = {lab: i for i, lab in enumerate(order)}
        rpos = {lab: i for i, lab in enumerate(row_order)}
        with self.ctx.guard():
            A = mpmath.matrix(len(row_order), len(order))
            for c, rows in self.cols.items():
                if c not in pos:
                    continue
                j = pos[c]
                for r, v in rows.items():
                    if r in rpos:
                        A[rpos[r], j] = mpmath.mpc(v)
        return A

    def eigh_blocks(self, herm_tol=None):
        """Blockwise Hermitian eigendecomposition.

        Returns a list of (labels, eigenvalues ascending, Q dense) per
        connected component.  Refuses visibly non-Hermitian input.
        """
        with self.ctx.guard():
            scale = max(mpmath.mpf(1), self.frobenius())
            tol = mpmath.mpf(herm_tol) if herm_tol is not None else scale * mpmath.mpf(2) ** (-self.ctx.prec + 40)
            defect = self.hermiticity_defect()
            if defect > tol:
                raise ValueError(f"operator is not Hermitian (defect {mpmath.nstr(defect, 8)})")
            out = []
            for comp in self.components():
                A = self.to_dense(order=comp)
                E, Q = mpmath.eighe(A)
                out.append((comp, [E[i] for i in range(len(comp))], Q))
            return out

    def eigenvalues(self, herm_tol=None):
        """All eigenvalues of a Hermitian operator, ascending."""
        vals = []
        for _, evs, _ in self.eigh_blocks(herm_tol=herm_tol):
            vals.extend(evs)
        with self.ctx.guard():
            return sorted(vals)

    def func_calc(self, f, herm_tol=None) -> "BlockOperator":
        """Hermitian functional calculus sum over eigenblocks of Q f(E) Q*."""
        out = BlockOperator(self.ctx, self.labels)
        with self.ctx.guard():
            for comp, evs, Q in self.eigh_blocks(herm_tol=herm_tol):
                n = len(comp)
                fe = [mpmath.mpc(f(ev)) for ev in evs]
                for j in range(n):
                    col = {}
                    for i in range(n):
                        acc = mpmath.mpc(0)
                        for k in range(n):
                            acc += Q[i, k] * fe[k] * mpmath.conj(Q[j, k])
                        if acc != 0:
                            col[comp[i]] = acc
                    if col:
                        rows = out.cols.setdefault(comp[j], {})
                        rows.update(col)
        return out

    def singular_values(self):
        """All singular values, descending (square operator)."""
        gram = self.dagger() @ self
        with self.ctx.guard():
            vals = []
            for ev in gram.eigenvalues():
                vals.append(mpmath.sqrt(ev.real if ev.real > 0 else mpmath.mpf(0)))
            return sorted(vals, reverse=True)

    def opnorm(self):
        """Operator 2-norm (largest singular value)."""
        if not self.cols:
            return mpmath.mpf(0)
        return self.singular_values()[0]


def frobenius_inner(a: BlockOperator, b: BlockOperator):
    """Hilbert-Schmidt pairing tr(a* b) over the common basis."""
    a._check_compat(b)
    with a.ctx.guard():
        acc = mpmath.mpc(0)
        for c, rows in a.cols.items():
            brows = b.cols.get(c)
            if not brows:
                continue
            for r, v in rows.items():
                w = brows.get(r)
                if w is not None:
                    acc += mpmath.conj(v) * w
        return acc


def commutator(a: BlockOperator, b: BlockOperator) -> BlockOperator:
    return a @ b - b @ a


def anticommutator(a: BlockOperator, b: BlockOperator) -> BlockOperator:
    return a @ b + b @ a


def q_bracket_op(a: BlockOperator) -> BlockOperator:
    """[A] = (q^A - q^-A)/(q - q^-1) for Hermitian A, by spectral calculus."""
    ctx = a.ctx
    return a.func_calc(lambda ev: ctx.q_bracket(ev.real))


def dense_lstsq(ctx: QContext, a, b):
    """Least squares for dense mpmath systems; returns (x, residual norm)."""
    with ctx.guard():
        return mpmath.qr_solve(a, b)


def component_singular_values(op: BlockOperator, rel_floor=None):
    """All singular values of a sparse square operator, descending, in float64.

    Works one connected component at a time, so shift operators whose graph
    splits into short chains stay cheap even on large label sets.  With
    ``rel_floor`` set, values below that fraction of their own component's
    largest singular value are dropped: double-precision SVD is only
    norm-accurate, so such values are rounding noise, not data.
    """
    vals = []
    for comp in op.components():
        A = op.to_dense(order=comp)
        arr = np.array(
            [[complex(A[i, j]) for j in range(A.cols)] for i in range(A.rows)],
            dtype=complex,
        )
        sv = np.linalg.svd(arr, compute_uv=False)
        if rel_floor is not None:
            sv = sv[sv > rel_floor * sv[0]] if len(sv) and sv[0] > 0 else sv[:0]
        vals.extend(sv.tolist())
    vals.sort(reverse=True)
    return vals


def opnorm_float(op: BlockOperator) -> float:
    """Operator 2-norm estimate in float64, exact per-component SVD."""
    vals = component_singular_values(op)
    return vals[0] if vals else 0.0


# -- float64 fit helpers -------------------------------------------------------


def _linfit(xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def fit_exponential(xs, ys):
    """Fit y = a*exp(rate*x); returns (rate, r2) from the log-linear fit."""
    ys = [float(y) for y in ys]
    if any(y <= 0 for y in ys):
        raise ValueError("exponential fit needs positive data")
    rate, _, r2 = _linfit([float(x) for x in xs], np.log(ys))
    return rate, r2


def fit_powerlaw(ks, ys):
    """Fit y = a*k^p on log-log axes; returns (p, r2)."""
    ks = [float(k) for k in ks]
    ys = [float(y) for y in ys]
    if any(k <= 0 for k in ks) or any(y <= 0 for y in ys):
        raise ValueError("power-law fit needs positive data")
    p, _, r2 = _linfit(np.log(ks), np.log(ys))
    return p, r2
