"""Charged extension of the quantum 3-sphere: coordinate algebra and block Dirac.

The coordinate algebra adds a central charge to the matrix-coefficient basis:
symbols t^{l,c}_{m,n} carry a half-integer charge c with l and c both integers
or both half integers, products add charges on top of the same coupling
tables, the involution flips the charge, and the Haar state keeps the
charge-zero component only.  The charge generator is the l = 0 symbol with
c = 1; it is central and unitary.

The Hilbert space attaches to each coupled spinor label a charge c of the
same parity as the shell label and a two-valued sector sign.  The block Dirac
operator is off-diagonal in the sector,

    D_hat = (0, i D + c; -i D + c, 0),

with D the shifted label-diagonal linear Dirac operator of the 3-sphere and c
acting as a scalar.  |D_hat| is diagonal with values

    n(lab) = sqrt((d(lab) + 3/2)^2 + c^2),

the chirality is the sector sign, and the derivation delta(X) = [|D_hat|, X]
weights entries by n-value differences, which drives the regularity probes
and the quartic closed-form dimension count.  Half integers are doubled
integers throughout; boundary columns of a represented element lose the rows
their image pushes past the window, so every claim is quantified over the
interior in both the shell and the charge direction.
"""

from __future__ import annotations

import random
from collections import namedtuple

import mpmath

from .coordalg import PWElement, PWIndex, Truncation, make_index
from .diracsu2 import cluster_levels
from .linalg import (
    BlockOperator,
    anticommutator,
    commutator,
    component_singular_values,
    fit_exponential,
    fit_powerlaw,
    opnorm_float,
)
from .scalars import QContext
from .spinspace import (
    build_decomposition,
    dtilde_label_value,
    rho_spin,
    spin_labels,
    symmetry_action,
)

U2Index = namedtuple("U2Index", "twol twom twon twoc")

U2Label = namedtuple("U2Label", "twoj twomu twon up twoc pm")


def make_u2_index(twol: int, twom: int, twon: int, twoc: int) -> U2Index:
    """Validated charged index; the shell and the charge share parity."""
    make_index(twol, twom, twon)
    if (twol - twoc) % 2:
        raise ValueError(f"charge parity violation: (2l,2c)=({twol},{twoc})")
    return U2Index(twol, twom, twon, twoc)


class U2Element:
    """Finite combination of charged matrix coefficients at one context."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: QContext, terms=None):
        self.ctx = ctx
        clean = {}
        with ctx.guard():
            for idx, c in (terms or {}).items():
                idx = make_u2_index(*idx)
                c = mpmath.mpc(c)
                if c != 0:
                    clean[idx] = c
        self.terms = clean

    @classmethod
    def basis(cls, ctx, twol, twom, twon, twoc, coeff=1) -> "U2Element":
        return cls(ctx, {make_u2_index(twol, twom, twon, twoc): ctx.mpc(coeff)})

    @classmethod
    def one(cls, ctx) -> "U2Element":
        return cls.basis(ctx, 0, 0, 0, 0)

    def coeff(self, twol, twom, twon, twoc):
        return self.terms.get(U2Index(twol, twom, twon, twoc), mpmath.mpc(0))

    def degree(self) -> int:
        return max((idx.twol for idx in self.terms), default=0)

    def charge_span(self):
        """Smallest and largest charge present."""
        if not self.terms:
            return (0, 0)
        charges = [idx.twoc for idx in self.terms]
        return (min(charges), max(charges))

    def max_abs_coeff(self):
        with self.ctx.guard():
            return max((abs(c) for c in self.terms.values()), default=mpmath.mpf(0))

    def by_charge(self) -> dict:
        """Charge components as plain sphere elements, keyed by 2c."""
        groups = {}
        for idx, c in self.terms.items():
            groups.setdefault(idx.twoc, {})[PWIndex(idx.twol, idx.twom, idx.twon)] = c
        return {twoc: PWElement(self.ctx, d) for twoc, d in groups.items()}

    @classmethod
    def from_charge_parts(cls, ctx, parts: dict) -> "U2Element":
        terms = {}
        with ctx.guard():
            for twoc, pw in parts.items():
                for idx, c in pw.terms.items():
                    key = U2Index(idx.twol, idx.twom, idx.twon, twoc)
                    terms[key] = terms.get(key, mpmath.mpc(0)) + c
        return cls(ctx, terms)

    def __add__(self, other):
        self.ctx.check(other.ctx)
        with self.ctx.guard():
            out = dict(self.terms)
            for idx, c in other.terms.items():
                out[idx] = out.get(idx, mpmath.mpc(0)) + c
            return U2Element(self.ctx, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "U2Element":
        with self.ctx.guard():
            c = self.ctx.mpc(c)
            return U2Element(self.ctx, {idx: c * v for idx, v in self.terms.items()})

    def __mul__(self, other):
        """Product: coupling tables on the shell part, charges add."""
        self.ctx.check(other.ctx)
        parts = {}
        with self.ctx.guard():
            for twoc1, p1 in self.by_charge().items():
                for twoc2, p2 in other.by_charge().items():
                    prod = p1 * p2
                    tgt = parts.setdefault(twoc1 + twoc2, {})
                    for idx, v in prod.terms.items():
                        tgt[idx] = tgt.get(idx, mpmath.mpc(0)) + v
        return U2Element.from_charge_parts(
            self.ctx, {twoc: PWElement(self.ctx, d) for twoc, d in parts.items()}
        )

    def star(self) -> "U2Element":
        """Involution: shell part as on the sphere, charge negated."""
        return U2Element.from_charge_parts(
            self.ctx, {-twoc: pw.star() for twoc, pw in self.by_charge().items()}
        )

    def __repr__(self):
        items = ", ".join(f"{tuple(i)}: {mpmath.nstr(c, 8)}" for i, c in sorted(self.terms.items()))
        return f"U2Element({{{items}}})"


def u2_generators(ctx: QContext) -> dict:
    """Sphere generators at charge 1/2 plus the central charge generator."""
    a = U2Element.basis(ctx, 1, 1, 1, 1)
    b = U2Element.basis(ctx, 1, 1, -1, 1)
    circ = U2Element.basis(ctx, 0, 0, 0, 2)
    return {
        "a": a,
        "b": b,
        "astar": a.star(),
        "bstar": b.star(),
        "C": circ,
        "Cstar": circ.star(),
    }


def u2_haar_state(x: U2Element):
    """Haar functional: the charge-zero trivial-coefficient component."""
    return x.coeff(0, 0, 0, 0)


def u2_haar_inner(x: U2Element, y: U2Element):
    """<x, y> = h(x* y); charges pair only with themselves."""
    x.ctx.check(y.ctx)
    ctx = x.ctx
    with ctx.guard():
        acc = mpmath.mpc(0)
        for idx, cx in x.terms.items():
            cy = y.terms.get(idx)
            if cy is not None:
                acc += mpmath.conj(cx) * cy * ctx.s ** (-2 * idx.twom) / ctx.q_int(idx.twol + 1)
        return acc


def random_u2_element(ctx: QContext, rng: random.Random, twol_max: int = 2, nterms: int = 3) -> U2Element:
    """Small random element on the valid index lattice, integer coefficients."""
    pool = []
    for twol in range(0, twol_max + 1):
        for twom in range(-twol, twol + 2, 2):
            for twon in range(-twol, twol + 2, 2):
                # stepping from -twol-4 by 2 keeps the charge parity tied to the shell
                for twoc in range(-twol - 4, twol + 5, 2):
                    pool.append(U2Index(twol, twom, twon, twoc))
    terms = {}
    for idx in rng.sample(pool, nterms):
        terms[idx] = complex(rng.randint(-3, 3), rng.randint(-3, 3))
    return U2Element(ctx, terms)


# -- charged spinor space ----------------------------------------------------------


def u2_labels(twol_max: int, twoc_max: int):
    """Charged sector labels; charge parity follows the shell label."""
    out = []
    for sl in spin_labels(twol_max):
        for twoc in range(-twoc_max, twoc_max + 1):
            if (twoc - sl.twoj) % 2:
                continue
            for pm in (1, -1):
                out.append(U2Label(sl.twoj, sl.twomu, sl.twon, sl.up, twoc, pm))
    return tuple(out)


def u2_interior(twol_max: int, twoc_max: int, twol_margin: int = 2, twoc_margin: int = 2):
    """Labels a margin away from both the shell and the charge boundary."""
    if twol_max < twol_margin + 1 or twoc_max < twoc_margin + 1:
        raise ValueError("truncation too small for the requested interior margins")
    return tuple(
        lab
        for lab in u2_labels(twol_max, twoc_max)
        if lab.twoj <= twol_max - twol_margin and abs(lab.twoc) <= twoc_max - twoc_margin
    )


def n_label_value(ctx: QContext, lab) -> mpmath.mpf:
    """|D_hat| value sqrt((d + 3/2)^2 + c^2) of a charged label."""
    d2 = 2 * dtilde_label_value(lab) + 3
    with ctx.guard():
        return mpmath.sqrt(mpmath.mpf(d2) ** 2 + mpmath.mpf(lab.twoc) ** 2) / 2


def charge_operator(ctx: QContext, twol_max: int, twoc_max: int) -> BlockOperator:
    """The central derivation: multiplication by the scalar charge c."""
    labels = u2_labels(twol_max, twoc_max)
    return BlockOperator.diagonal(ctx, labels, lambda lab: mpmath.mpf(lab.twoc) / 2)


def sector_swap(ctx: QContext, twol_max: int, twoc_max: int) -> BlockOperator:
    """The off-diagonal (0 1; 1 0) sector flip."""
    labels = u2_labels(twol_max, twoc_max)
    out = BlockOperator(ctx, labels)
    for lab in labels:
        out.add_to_entry(lab._replace(pm=-lab.pm), lab, 1)
    return out


def rho_hat(
    ctx: QContext,
    x: U2Element,
    twol_max: int,
    twoc_max: int,
    decomposition: BlockOperator = None,
    strict: bool = False,
) -> BlockOperator:
    """GNS action on the charged spinor space.

    Each charge component acts through the coupled-basis GNS matrices of the
    sphere, shifted by its own charge, identically in both sectors.  Columns
    whose image leaves the charge window lose those rows; ``strict`` turns
    that boundary clipping into an error.
    """
    C = decomposition if decomposition is not None else build_decomposition(ctx, twol_max)
    trunc = Truncation(twol_max, 0)
    out = BlockOperator(ctx, u2_labels(twol_max, twoc_max))
    for twoc_x, pw in x.by_charge().items():
        R = rho_spin(ctx, pw, trunc, decomposition=C)
        for col_spin, rows in R.cols.items():
            for twoc in range(-twoc_max, twoc_max + 1):
                if (twoc - col_spin.twoj) % 2:
                    continue
                tgt = twoc + twoc_x
                if abs(tgt) > twoc_max:
                    if strict:
                        raise ValueError("charge window overflow")
                    continue
                for row_spin, v in rows.items():
                    for pm in (1, -1):
                        out.add_to_entry(
                            U2Label(*row_spin, tgt, pm), U2Label(*col_spin, twoc, pm), v
                        )
    return out


def dirac_uq2(ctx: QContext, twol_max: int, twoc_max: int):
    """Block Dirac operator, chirality, and the diagonal |D_hat|."""
    labels = u2_labels(twol_max, twoc_max)
    dhat = BlockOperator(ctx, labels)
    with ctx.guard():
        half3 = mpmath.mpf(3) / 2
        for lab in labels:
            if lab.pm != 1:
                continue
            minus = lab._replace(pm=-1)
            d = dtilde_label_value(lab) + half3
            c = mpmath.mpf(lab.twoc) / 2
            dhat.add_to_entry(lab, minus, mpmath.mpc(c, d))
            dhat.add_to_entry(minus, lab, mpmath.mpc(c, -d))
    gamma = BlockOperator.diagonal(ctx, labels, lambda lab: lab.pm)
    absd = BlockOperator.diagonal(ctx, labels, lambda lab: n_label_value(ctx, lab))
    return dhat, gamma, absd


def u2_symmetry_action(
    ctx: QContext, twol_max: int, twoc_max: int, gen: str, decomposition: BlockOperator = None
) -> BlockOperator:
    """Symmetry generator on the charged spinor space.

    The sphere generators act within each (charge, sector) block through the
    coupled basis; ``center`` is the grouplike central generator acting by
    q^c on charge-c vectors.
    """
    labels = u2_labels(twol_max, twoc_max)
    if gen == "center":
        return BlockOperator.diagonal(ctx, labels, lambda lab: ctx.s ** lab.twoc)
    C = decomposition if decomposition is not None else build_decomposition(ctx, twol_max)
    S = C.dagger() @ symmetry_action(ctx, twol_max, gen) @ C
    out = BlockOperator(ctx, labels)
    for col_spin, rows in S.cols.items():
        for twoc in range(-twoc_max, twoc_max + 1):
            if (twoc - col_spin.twoj) % 2:
                continue
            for row_spin, v in rows.items():
                for pm in (1, -1):
                    out.add_to_entry(
                        U2Label(*row_spin, twoc, pm), U2Label(*col_spin, twoc, pm), v
                    )
    return out


# -- verification reports ----------------------------------------------------------


def algebra_report(ctx: QContext, seed: int = 0, nrand: int = 20) -> dict:
    """Charged product, involution and Haar checks at the algebra level."""
    gens = u2_generators(ctx)
    one = U2Element.one(ctx)
    out = {}
    with ctx.guard():
        out["unitarity_defect"] = max(
            (gens["C"] * gens["Cstar"] - one).max_abs_coeff(),
            (gens["Cstar"] * gens["C"] - one).max_abs_coeff(),
        )
        out["centrality_defect"] = max(
            (gens["C"] * gens[t] - gens[t] * gens["C"]).max_abs_coeff() for t in ("a", "b", "astar")
        )
        shift = mpmath.mpf(0)
        for twol, twom, twon, twoc in ((0, 0, 0, 0), (1, 1, -1, 3), (2, 0, 2, -2)):
            lhs = gens["C"] * U2Element.basis(ctx, twol, twom, twon, twoc)
            rhs = U2Element.basis(ctx, twol, twom, twon, twoc + 2)
            shift = max(shift, (lhs - rhs).max_abs_coeff())
        out["charge_shift_defect"] = shift
        t = U2Element.basis(ctx, 2, 0, 2, 4)
        norm_product = u2_haar_state(t.star() * t)
        norm_paired = u2_haar_inner(t, t)
        out["norm_example_product"] = norm_product.real
        out["norm_example_defect"] = max(
            abs(norm_product - 1 / ctx.q_int(3)), abs(norm_paired - 1 / ctx.q_int(3))
        )
        rng = random.Random(seed)
        invol = mpmath.mpf(0)
        faithful = mpmath.inf
        parity_ok = True
        for _ in range(nrand):
            x = random_u2_element(ctx, rng)
            y = random_u2_element(ctx, rng)
            invol = max(invol, (x.star().star() - x).max_abs_coeff())
            try:
                z = (x * y) * gens["a"] + gens["C"] * x
            except ValueError:
                parity_ok = False
                continue
            for idx in z.terms:
                make_u2_index(*idx)
            if x.terms:
                faithful = min(faithful, u2_haar_inner(x, x).real)
        out["involution_defect"] = invol
        out["parity_closed"] = parity_ok
        out["faithful_min_norm"] = faithful
    return out


def rep_report(ctx: QContext, twol_max: int, twoc_max: int, decomposition: BlockOperator = None) -> dict:
    """Charged GNS action checks: shifts, centrality, sectors, adjoints."""
    C = decomposition if decomposition is not None else build_decomposition(ctx, twol_max)
    gens = u2_generators(ctx)
    rho = {t: rho_hat(ctx, gens[t], twol_max, twoc_max, decomposition=C) for t in gens}
    interior = u2_interior(twol_max, twoc_max, 2, 2)
    wide = u2_interior(twol_max, twoc_max, 2, 4)
    eye = BlockOperator.identity(ctx, u2_labels(twol_max, twoc_max))
    out = {}
    with ctx.guard():
        out["isometry_defect"] = (
            (rho["C"].dagger() @ rho["C"] - eye).restrict(u2_interior(twol_max, twoc_max, 0, 2)).max_entry()
        )
        out["central_commutant_defect"] = max(
            commutator(rho["C"], rho[t]).restrict(wide).max_entry() for t in ("a", "b", "astar")
        )
        mismatch = mpmath.mpf(0)
        for t in ("a", "C"):
            for col, rows in rho[t].cols.items():
                if col.pm != 1:
                    continue
                for row, v in rows.items():
                    twin = rho[t].entry(row._replace(pm=-1), col._replace(pm=-1))
                    mismatch = max(mismatch, abs(v - twin))
        out["sector_mismatch"] = mismatch
        out["adjoint_defect"] = max(
            (rho[t + "star"] - rho[t].dagger()).restrict(interior).max_entry() for t in ("a", "b")
        )
    return out


def dirac_report(ctx: QContext, twol_max: int, twoc_max: int, decomposition: BlockOperator = None) -> dict:
    """Block Dirac checks: |D_hat| values, chirality, exact identities."""
    C = decomposition if decomposition is not None else build_decomposition(ctx, twol_max)
    gens = u2_generators(ctx)
    dhat, gamma, absd = dirac_uq2(ctx, twol_max, twoc_max)
    interior = u2_interior(twol_max, twoc_max, 2, 2)
    out = {}
    with ctx.guard():
        out["selfadjoint_defect"] = dhat.hermiticity_defect()
        out["calculus_absd_defect"] = (dhat.func_calc(lambda ev: abs(ev.real)) - absd).max_entry()
        base = U2Label(0, 1, 0, True, 0, 1)
        out["base_n_defect"] = abs(n_label_value(ctx, base) - mpmath.mpf(3) / 2)
        out["gamma_anticommutator"] = anticommutator(gamma, dhat).frobenius()
        rho = {t: rho_hat(ctx, gens[t], twol_max, twoc_max, decomposition=C) for t in ("a", "b", "C")}
        out["gamma_rho_commutant"] = max(
            commutator(gamma, rho[t]).frobenius() for t in ("a", "b", "C")
        )
        swap = sector_swap(ctx, twol_max, twoc_max)
        out["circle_identity_defect"] = (
            (commutator(dhat, rho["C"]) - swap @ rho["C"]).restrict(interior).max_entry()
        )
        x0 = charge_operator(ctx, twol_max, twoc_max)
        out["half_shift_defect"] = max(
            (commutator(x0, rho[t]) - rho[t].scale(mpmath.mpf(1) / 2)).restrict(interior).max_entry()
            for t in ("a", "b")
        )
        out["equivariance_defect"] = max(
            commutator(dhat, u2_symmetry_action(ctx, twol_max, twoc_max, g, decomposition=C)).frobenius()
            for g in ("e", "f", "k", "center")
        )
    return out


def _delta_power(absd: BlockOperator, X: BlockOperator, p: int) -> BlockOperator:
    out = X
    for _ in range(p):
        out = commutator(absd, out)
    return out


def _sign_split(X: BlockOperator):
    """Diagonal and off-diagonal parts wrt the sign of the linear Dirac."""
    diag = BlockOperator(X.ctx, X.labels)
    off = BlockOperator(X.ctx, X.labels)
    for col, rows in X.cols.items():
        for row, v in rows.items():
            (diag if row.up == col.up else off).add_to_entry(row, col, v)
    return diag, off


def regularity_probe(ctx: QContext, t_name: str, order: int, twol_max: int, twoc_max: int) -> dict:
    """Iterated-derivation norms and the displayed weight structure.

    For p up to ``order`` the probe returns interior operator norms of
    delta^p(rho_hat(t)) at the given shell cutoff and at the cutoff + 1, with
    the charge window held fixed, plus exact residuals for the derivation
    identity delta([D_hat, X]) = [D_hat, delta(X)] and for the column-indexed
    n-difference weights on the sign-diagonal blocks.  The sign-off-diagonal
    remainder is reported through its singular value decay.
    """
    if t_name not in ("a", "b", "C"):
        raise ValueError(f"probe generator must be a, b or C, got {t_name!r}")
    if not 1 <= order <= 3:
        raise ValueError("probe order limited to 1..3")
    u2_interior(twol_max, twoc_max, 2, 2)
    out = {"norms": {}}
    deltas_small = None
    for tl in (twol_max, twol_max + 2):
        C = build_decomposition(ctx, tl)
        gens = u2_generators(ctx)
        X = rho_hat(ctx, gens[t_name], tl, twoc_max, decomposition=C)
        _, _, absd = dirac_uq2(ctx, tl, twoc_max)
        interior = u2_interior(tl, twoc_max, 2, 2)
        powers = []
        Y = X
        for p in range(1, order + 1):
            Y = commutator(absd, Y)
            powers.append(Y.restrict(interior))
        for p, Yp in enumerate(powers, start=1):
            out["norms"].setdefault(p, []).append(opnorm_float(Yp))
        if tl == twol_max:
            deltas_small = (X, absd, interior, powers)
    for p, pair in out["norms"].items():
        small, big = pair
        out["norms"][p] = {
            "small": small,
            "big": big,
            "drift": abs(big - small) / max(abs(big), 1e-300),
        }
    X, absd, interior, powers = deltas_small
    dhat, _, _ = dirac_uq2(ctx, twol_max, twoc_max)
    with ctx.guard():
        lhs = _delta_power(absd, commutator(dhat, X), 1).restrict(interior)
        rhs = commutator(dhat, _delta_power(absd, X, 1)).restrict(interior)
        out["derivation_identity_defect"] = (lhs - rhs).max_entry()
        twoc_shift = 2 if t_name == "C" else 1
        worst = mpmath.mpf(0)
        for p, Yp in enumerate(powers, start=1):
            diag, _ = _sign_split(Yp)
            for col, rows in diag.cols.items():
                base = n_label_value(ctx, col)
                for row, v in rows.items():
                    lifted = col._replace(twoj=row.twoj, up=row.up, twoc=col.twoc + twoc_shift)
                    w = n_label_value(ctx, lifted) - base
                    x_entry = X.entry(row, col)
                    worst = max(worst, abs(v - w ** p * x_entry))
        out["weight_identity_defect"] = worst
        _, off_top = _sign_split(powers[-1])
        svals = component_singular_values(off_top)
        # floor against the full derivation norm: a sign-preserving operator
        # leaves pure roundoff here, which must not masquerade as decay data
        floor = 1e-13 * max(out["norms"][order]["small"], 1e-300)
        svals = [s for s in svals if s > floor]
        if svals:
            reps = cluster_levels(svals)
            rate, r2 = fit_exponential(range(len(reps)), reps)
            out["remainder_levels"] = len(reps)
            out["remainder_rate"] = rate
            out["remainder_r2"] = r2
        else:
            out["remainder_levels"] = 0
            out["remainder_rate"] = 0.0
            out["remainder_r2"] = 1.0
        if t_name == "C":
            Y1 = powers[0]
            sup = max(
                (abs(v) for rows in Y1.cols.values() for v in rows.values()),
                default=mpmath.mpf(0),
            )
            out["first_order_sup"] = sup
            out["first_order_norm_defect"] = abs(mpmath.mpf(out["norms"][1]["small"]) - sup)
            out["first_order_le_one"] = bool(sup <= 1)
    return out


def comm_norm_drifts(ctx: QContext, twol_max: int, twoc_max: int) -> dict:
    """Interior norms of [D_hat, rho_hat(t)] at two shell cutoffs."""
    out = {}
    for tl in (twol_max, twol_max + 2):
        C = build_decomposition(ctx, tl)
        gens = u2_generators(ctx)
        dhat, _, _ = dirac_uq2(ctx, tl, twoc_max)
        interior = u2_interior(tl, twoc_max, 2, 2)
        for t in ("a", "b", "C"):
            X = rho_hat(ctx, gens[t], tl, twoc_max, decomposition=C)
            out.setdefault(t, []).append(opnorm_float(commutator(dhat, X).restrict(interior)))
    for t, (small, big) in out.items():
        out[t] = {"small": small, "big": big, "drift": abs(big - small) / max(abs(big), 1e-300)}
    return out


# -- dimension counting ------------------------------------------------------------


def _parity_window_count(twoc_bound: float, parity: int) -> int:
    """Integers 2c in [-B, B] with the given parity."""
    m = int(mpmath.floor(twoc_bound))
    if m < 0:
        return 0
    if parity % 2 == 0:
        return 2 * (m // 2) + 1
    return 2 * ((m + 1) // 2)


def shell_count(lam: float) -> int:
    """Closed-form count with both towers lumped at the shell value n(j, c)."""
    total = 0
    twoj = 0
    while twoj + 1.5 <= lam:
        bound2 = lam * lam - (twoj + 1.5) ** 2
        k = _parity_window_count(2 * mpmath.sqrt(bound2), twoj)
        total += 4 * (twoj + 1) ** 2 * int(k)
        twoj += 1
    return total


def exact_count(lam: float) -> int:
    """Eigenvalue count of |D_hat| from the label lattice, no lumping."""
    total = 0
    twoj = 0
    while twoj + 0.5 <= lam:
        towers = ((twoj + 1.5, (twoj + 2) * (twoj + 1)), (twoj + 0.5, twoj * (twoj + 1)))
        for dval, mult in towers:
            if mult == 0 or dval > lam:
                continue
            bound2 = lam * lam - dval * dval
            k = _parity_window_count(2 * mpmath.sqrt(bound2), twoj)
            total += 2 * mult * int(k)
        twoj += 1
    return total


def dimension_fit(ctx: QContext, lam_max: float = 20.0, lam_min: float = 5.0, npoints: int = 16) -> dict:
    """Growth exponent of the eigenvalue count, with controls.

    Fits log N against log lambda for the closed-form lumped count; the same
    counter restricted to charge zero is the three-dimensional control, and
    refitting on the half window measures the estimate's stability.
    """
    lams = [lam_min + i * (lam_max - lam_min) / (npoints - 1) for i in range(npoints)]
    counts = [shell_count(lam) for lam in lams]
    exponent, r2 = fit_powerlaw(lams, counts)
    half = [(lam, n) for lam, n in zip(lams, counts) if lam <= lam_max / 2]
    exponent_half, _ = fit_powerlaw([h[0] for h in half], [h[1] for h in half])
    control = []
    for lam in lams:
        total = 0
        twoj = 0
        while twoj + 1.5 <= lam:
            if twoj % 2 == 0:
                total += 4 * (twoj + 1) ** 2
            twoj += 1
        control.append(total)
    control_exponent, control_r2 = fit_powerlaw(lams, control)
    exact_exponent, _ = fit_powerlaw(lams, [exact_count(lam) for lam in lams])
    return {
        "exponent": exponent,
        "r2": r2,
        "exponent_half_window": exponent_half,
        "half_window_shift": abs(exponent - exponent_half),
        "control_exponent": control_exponent,
        "control_r2": control_r2,
        "exact_count_exponent": exact_exponent,
        "count_at_cap": counts[-1],
    }


def truncation_count_check(ctx: QContext, twol_max: int, twoc_max: int) -> dict:
    """Operator-side eigenvalue count against the closed-form lattice count.

    The comparison cap is the smallest |D_hat| value outside the truncation,
    so the counting ball is fully contained and the two counts must agree
    exactly.
    """
    _, _, absd = dirac_uq2(ctx, twol_max, twoc_max)
    # smallest value past the shell cutoff sits on the next down tower
    beyond_shell = float(
        n_label_value(ctx, U2Label(twol_max + 1, 0, 0, False, (twol_max + 1) % 2, 1))
    )
    # smallest value past the charge window has tower base 3/2 in either parity
    beyond_charge = min(
        float(n_label_value(ctx, lab._replace(twoc=twoc_max + 1 + (lab.twoj + twoc_max + 1) % 2)))
        for lab in (U2Label(0, 1, 0, True, 0, 1), U2Label(1, 0, 1, False, 0, 1))
    )
    lam = min(beyond_shell, beyond_charge) * (1 - 1e-12)
    with ctx.guard():
        operator_count = sum(
            1
            for rows in absd.cols.values()
            for v in rows.values()
            if v.real <= lam
        )
    lattice_count = exact_count(lam)
    return {
        "cap": lam,
        "operator_count": operator_count,
        "lattice_count": lattice_count,
        "match": operator_count == lattice_count,
    }


def full_report(ctx: QContext, twol_max: int = 8, twoc_max: int = 12, probe_order: int = 2) -> dict:
    """Everything the charged-model verification needs, in one dictionary."""
    C = build_decomposition(ctx, twol_max)
    out = {
        "algebra": algebra_report(ctx),
        "rep": rep_report(ctx, twol_max, twoc_max, decomposition=C),
        "dirac": dirac_report(ctx, twol_max, twoc_max, decomposition=C),
        "comm_drifts": comm_norm_drifts(ctx, twol_max, twoc_max),
        "probes": {
            t: regularity_probe(ctx, t, probe_order, twol_max, twoc_max) for t in ("a", "b", "C")
        },
        "dimension": dimension_fit(ctx),
        "count_check": truncation_count_check(ctx, twol_max, twoc_max),
    }
    return out
