"""Covariant Clifford family for the rank-two symmetry on a 16-dim spinor space.

The adjoint representation of the rank-two deformed enveloping algebra acts on
an eight-dimensional weight basis; the spinor space doubles it.  This module
builds those matrices, the eight covariant generators ``psi_i`` living in the
off-diagonal blocks (two free parameters, one per block), and the three
multiplication-map conditions that pin the parameters: the square of the top
generator, the six-term adjoint-copy tensor, and the eight-term invariant
tensor whose image is a computable scalar.
"""

from __future__ import annotations

import random

import mpmath

from .linalg import BlockOperator, anticommutator, commutator, frobenius_inner
from .scalars import QContext

GT_BASIS = tuple(range(1, 9))
SPINOR_BASIS = tuple(("+", i) for i in GT_BASIS) + tuple(("-", i) for i in GT_BASIS)

_CARTAN = ((2, -1), (-1, 2))
_GENS = ("e1", "e2", "f1", "f2", "k1", "k2")


def _mat8(ctx: QContext, entries: dict) -> BlockOperator:
    out = BlockOperator.zeros(ctx, GT_BASIS)
    with ctx.guard():
        for (r, c), v in entries.items():
            out.set_entry(r, c, v)
    return out


def adjoint_rep_su3(ctx: QContext) -> dict:
    """Eight-dimensional weight-basis matrices for the six symmetry generators.

    Raising matrices are entered literally; lowering matrices are their
    daggers, and the torus matrices are diagonal in half-integer powers.
    """
    with ctx.guard():
        r2 = mpmath.sqrt(ctx.q_int(2))
        r32 = mpmath.sqrt(ctx.q_int(3) / ctx.q_int(2))
        r2i = 1 / r2
        e1 = _mat8(ctx, {(1, 2): 1, (3, 5): r2, (5, 6): r2, (7, 8): 1})
        e2 = _mat8(
            ctx,
            {(1, 3): 1, (2, 4): r32, (2, 5): r2i, (4, 7): r32, (5, 7): r2i, (6, 8): 1},
        )
        k1_exp = {1: 1, 2: -1, 3: 2, 4: 0, 5: 0, 6: -2, 7: 1, 8: -1}
        k2_exp = {1: 1, 2: 2, 3: -1, 4: 0, 5: 0, 6: 1, 7: -2, 8: -1}
        gens = {
            "e1": e1,
            "e2": e2,
            "f1": e1.dagger(),
            "f2": e2.dagger(),
            "k1": BlockOperator.diagonal(ctx, GT_BASIS, lambda i: ctx.q_pow(k1_exp[i])),
            "k2": BlockOperator.diagonal(ctx, GT_BASIS, lambda i: ctx.q_pow(k2_exp[i])),
            "k1i": BlockOperator.diagonal(ctx, GT_BASIS, lambda i: ctx.q_pow(-k1_exp[i])),
            "k2i": BlockOperator.diagonal(ctx, GT_BASIS, lambda i: ctx.q_pow(-k2_exp[i])),
        }
    return gens


def _inverse_op(op: BlockOperator) -> BlockOperator:
    """Dense inverse of a small square operator, back in sparse form."""
    with op.ctx.guard():
        inv = mpmath.inverse(op.to_dense())
        out = BlockOperator.zeros(op.ctx, op.labels)
        for r, rl in enumerate(op.labels):
            for c, cl in enumerate(op.labels):
                out.set_entry(rl, cl, inv[r, c])
    return out


def su3_relation_residuals(ctx: QContext, gens: dict = None, include_star: bool = True) -> dict:
    """Max-entry defects of the defining and deformed Serre relations.

    Works for any six matrices keyed e1,e2,f1,f2,k1,k2 (torus inverses are
    computed when not supplied), so the same check runs on the weight-basis
    matrices and on induced expansion matrices.
    """
    if gens is None:
        gens = adjoint_rep_su3(ctx)
    gens = dict(gens)
    for i in (1, 2):
        if f"k{i}i" not in gens:
            gens[f"k{i}i"] = _inverse_op(gens[f"k{i}"])
    e = (gens["e1"], gens["e2"])
    f = (gens["f1"], gens["f2"])
    k = (gens["k1"], gens["k2"])
    ki = (gens["k1i"], gens["k2i"])
    with ctx.guard():
        res = {
            "torus_commute": commutator(k[0], k[1]).max_entry(),
            "torus_raise": mpmath.mpf(0),
            "torus_lower": mpmath.mpf(0),
            "ladder_offdiag": mpmath.mpf(0),
            "ladder_diag": mpmath.mpf(0),
            "serre_raise": mpmath.mpf(0),
            "serre_lower": mpmath.mpf(0),
        }
        two = ctx.q_int(2)
        for i in range(2):
            for j in range(2):
                a = _CARTAN[i][j]
                d = k[i] @ e[j] @ ki[i] - e[j].scale(ctx.q_pow(a))
                res["torus_raise"] = max(res["torus_raise"], d.max_entry())
                d = k[i] @ f[j] @ ki[i] - f[j].scale(ctx.q_pow(-a))
                res["torus_lower"] = max(res["torus_lower"], d.max_entry())
                if i == j:
                    rhs = (k[i] @ k[i] - ki[i] @ ki[i]).scale(1 / (ctx.q - ctx.qi))
                    d = commutator(e[i], f[i]) - rhs
                    res["ladder_diag"] = max(res["ladder_diag"], d.max_entry())
                else:
                    d = commutator(e[i], f[j])
                    res["ladder_offdiag"] = max(res["ladder_offdiag"], d.max_entry())
                    d = e[i] @ e[i] @ e[j] - (e[i] @ e[j] @ e[i]).scale(two) + e[j] @ e[i] @ e[i]
                    res["serre_raise"] = max(res["serre_raise"], d.max_entry())
                    d = f[i] @ f[i] @ f[j] - (f[i] @ f[j] @ f[i]).scale(two) + f[j] @ f[i] @ f[i]
                    res["serre_lower"] = max(res["serre_lower"], d.max_entry())
        if include_star:
            res["star"] = max(
                (e[i].dagger() - f[i]).max_entry() for i in range(2)
            )
    return res


# -- covariant generator family ---------------------------------------------------


def _psi_block_entries(ctx: QContext, b) -> dict:
    """Entry tables of the eight off-diagonal blocks at one parameter value."""
    with ctx.guard():
        q, qi = ctx.q, ctx.qi
        b = ctx.mpc(b)
        c2 = ctx.q_int(2)
        r2 = mpmath.sqrt(c2)
        r3 = mpmath.sqrt(ctx.q_int(3))
        i_q2 = 1 / (q * c2)
        i_q22 = 1 / (q ** 2 * c2)
        i_q32 = 1 / (q ** 3 * c2)
        i_q42 = 1 / (q ** 4 * c2)
        i_sq2 = 1 / mpmath.sqrt(q * c2)
        i_sq32 = 1 / mpmath.sqrt(q ** 3 * c2)
        return {
            1: {
                (1, 4): 1,
                (1, 5): b,
                (2, 6): ctx.q_pow(-1) * r2 * b,
                (3, 7): i_sq2 * (b + r3),
                (4, 8): i_q2 * (r3 * b - 1),
                (5, 8): i_q2 * (r3 + b),
            },
            2: {
                (1, 3): -ctx.q_pow(-3) * r2 * b,
                (2, 4): 1,
                (2, 5): -(qi ** 2) * b,
                (4, 7): -i_q22 * (r3 * b - 1),
                (5, 7): (r3 + b) / c2,
                (6, 8): i_sq2 * (r3 + b),
            },
            3: {
                (1, 2): -i_sq32 * (r3 + b),
                (3, 4): -i_q2 * (qi ** 2 + r3 * b),
                (3, 5): i_q2 * (q ** 2 * b - r3),
                (4, 6): (qi ** 2 + r3 * b) / c2,
                (5, 6): (b - qi ** 2 * r3) / c2,
                (7, 8): ctx.q_pow(-1) * r2 * b,
            },
            4: {
                (1, 1): i_q32 * (r3 * b - 1),
                (2, 2): i_q32 * (r3 * b - 1),
                (3, 3): -i_q32 * (1 + q ** 2 * r3 * b),
                (4, 4): 1 - i_q32 * (1 - r3 * b),
                (5, 5): -i_q32 * (1 + q ** 2 * r3 * b),
                (6, 6): -i_q32 * (1 + q ** 2 * r3 * b),
                (7, 7): 1,
                (8, 8): 1,
            },
            5: {
                (1, 1): i_q32 * (b + r3),
                (2, 2): -i_q2 * (b + r3),
                (3, 3): -i_q32 * (q ** 2 * b - r3),
                (4, 5): -i_q32 * (q ** 2 * r3 * b + 1),
                (5, 4): -i_q32 * (q ** 2 * r3 * b + 1),
                (5, 5): (q - qi) * (b - qi ** 2 * r3) / c2,
                (6, 6): i_q2 * (q ** 2 * b - r3),
                (7, 7): -(qi ** 2) * b,
                (8, 8): b,
            },
            6: {
                (2, 1): (r3 + b) / (ctx.q_pow(5) * r2),
                (4, 3): i_q42 * (q ** 2 * r3 * b + 1),
                (5, 3): i_q22 * (r3 - q ** 2 * b),
                (6, 4): -i_q32 * (q ** 2 * r3 * b + 1),
                (6, 5): i_q32 * (r3 - q ** 2 * b),
                (8, 7): -ctx.q_pow(-3) * r2 * b,
            },
            7: {
                (3, 1): ctx.q_pow(-5) * r2 * b,
                (4, 2): -qi,
                (5, 2): qi ** 3 * b,
                (7, 4): i_q32 * (r3 * b - 1),
                (7, 5): -i_q2 * (r3 + b),
                (8, 6): -(r3 + b) / (ctx.q_pow(3) * r2),
            },
            8: {
                (4, 1): qi ** 2,
                (5, 1): qi ** 2 * b,
                (6, 2): ctx.q_pow(-5) * r2 * b,
                (7, 3): (r3 + b) / (ctx.q_pow(5) * r2),
                (8, 4): i_q32 * (r3 * b - 1),
                (8, 5): i_q32 * (r3 + b),
            },
        }


def psi_family(ctx: QContext, b_plus, b_minus) -> dict:
    """The eight covariant generators as 16x16 block matrices.

    Diagonal blocks vanish by construction; the upper block carries b_plus,
    the lower one b_minus.  Construction is unconditional; parameter poles
    only matter for the constraint solvers downstream.
    """
    with ctx.guard():
        bp = ctx.mpc(b_plus)
        bm = ctx.mpc(b_minus)
    plus_tabs = _psi_block_entries(ctx, bp)
    minus_tabs = _psi_block_entries(ctx, bm)
    psi, plus, minus = {}, {}, {}
    for i in GT_BASIS:
        plus[i] = _mat8(ctx, plus_tabs[i])
        minus[i] = _mat8(ctx, minus_tabs[i])
        big = BlockOperator.zeros(ctx, SPINOR_BASIS)
        for (r, c), v in plus_tabs[i].items():
            big.set_entry(("+", r), ("-", c), v)
        for (r, c), v in minus_tabs[i].items():
            big.set_entry(("-", r), ("+", c), v)
        psi[i] = big
    return {"psi": psi, "plus": plus, "minus": minus, "b_plus": bp, "b_minus": bm}


def doubled_rep(ctx: QContext) -> dict:
    """Symmetry matrices acting identically on both spinor halves."""
    out = {}
    for name, m in adjoint_rep_su3(ctx).items():
        big = BlockOperator.zeros(ctx, SPINOR_BASIS)
        for c, rows in m.cols.items():
            for r, v in rows.items():
                big.set_entry(("+", r), ("+", c), v)
                big.set_entry(("-", r), ("-", c), v)
        out[name] = big
    return out


def adjoint_action(ctx: QContext, gens: dict, name: str, y: BlockOperator) -> BlockOperator:
    """Deformed adjoint action of one generator on an operator.

    Derived from the coproduct and antipode: the torus acts by conjugation,
    a ladder generator x with partner torus element k acts as
    x.y.k^-1 - q^(+-1) k^-1.y.x.
    """
    with ctx.guard():
        if name in ("k1", "k2"):
            return gens[name] @ y @ gens[name + "i"]
        if name in ("e1", "e2", "f1", "f2"):
            ki = gens["k" + name[1] + "i"]
            sign_q = ctx.q if name[0] == "e" else ctx.qi
            return gens[name] @ y @ ki - (ki @ y @ gens[name]).scale(sign_q)
    raise ValueError(f"unknown generator {name!r}")


def _gram_solve(ctx: QContext, gram, rhs):
    """Solve the normal equations for one expansion; returns the coefficients."""
    with ctx.guard():
        sol = mpmath.lu_solve(gram, rhs)
    return sol


def covariance_report(ctx: QContext, b_plus, b_minus=None, perturb=None) -> dict:
    """Closure of the family under the adjoint action, with expansion matrices.

    Expands each acted generator back in the family (normal equations over the
    Hilbert-Schmidt pairing) and reports the worst reconstruction defect, the
    relation defects of the induced 8x8 expansion matrices, and their weight
    structure against the weight-basis torus diagonals.

    ``perturb`` = (i, row, col, eps) adds eps to one upper-block entry before
    checking; used as a negative control.
    """
    if b_minus is None:
        b_minus = constraint_b_minus(ctx, b_plus)
    fam = psi_family(ctx, b_plus, b_minus)
    psi = dict(fam["psi"])
    if perturb is not None:
        i, row, col, eps = perturb
        bumped = psi[i] + BlockOperator.zeros(ctx, SPINOR_BASIS)
        with ctx.guard():
            bumped.add_to_entry(("+", row), ("-", col), ctx.mpc(eps))
        psi[i] = bumped
    dgens = doubled_rep(ctx)
    with ctx.guard():
        gram = mpmath.matrix(8, 8)
        for a in GT_BASIS:
            for b in GT_BASIS:
                gram[a - 1, b - 1] = frobenius_inner(psi[a], psi[b])
        svals = mpmath.svd_c(gram, compute_uv=False)
        if svals[7] < mpmath.mpf("1e-20") * svals[0]:
            raise ValueError("covariant family is linearly dependent")
        closure = mpmath.mpf(0)
        rmats = {}
        for name in _GENS:
            R = mpmath.matrix(8, 8)
            for i in GT_BASIS:
                acted = adjoint_action(ctx, dgens, name, psi[i])
                rhs = mpmath.matrix([frobenius_inner(psi[j], acted) for j in GT_BASIS])
                coeff = _gram_solve(ctx, gram, rhs)
                recon = BlockOperator.zeros(ctx, SPINOR_BASIS)
                for j in GT_BASIS:
                    R[j - 1, i - 1] = coeff[j - 1]
                    recon = recon + psi[j].scale(coeff[j - 1])
                closure = max(closure, (acted - recon).max_entry())
            rmats[name] = R
        # relation defects of the induced matrices (no star check: the family
        # basis is not orthonormal, so dagger is not the right involution there)
        rops = {}
        for name, R in rmats.items():
            op = BlockOperator.zeros(ctx, GT_BASIS)
            for r in GT_BASIS:
                for c in GT_BASIS:
                    op.set_entry(r, c, R[r - 1, c - 1])
            rops[name] = op
        rel = su3_relation_residuals(ctx, rops, include_star=False)
        # torus expansion matrices must be diagonal with the adjoint weights
        weight_offdiag = mpmath.mpf(0)
        pairs_got, pairs_want = [], []
        gt = adjoint_rep_su3(ctx)
        for i in GT_BASIS:
            pairs_got.append((rmats["k1"][i - 1, i - 1].real, rmats["k2"][i - 1, i - 1].real))
            pairs_want.append((gt["k1"].entry(i, i).real, gt["k2"].entry(i, i).real))
            for j in GT_BASIS:
                if i != j:
                    weight_offdiag = max(
                        weight_offdiag, abs(rmats["k1"][i - 1, j - 1]), abs(rmats["k2"][i - 1, j - 1])
                    )
        # index-by-index: each generator carries exactly its own basis weight
        weight_match = max(
            max(abs(g[0] - w[0]), abs(g[1] - w[1]))
            for g, w in zip(pairs_got, pairs_want)
        )
    return {
        "closure_residual": closure,
        "relation_residuals": rel,
        "relation_worst": max(rel.values()),
        "weight_offdiag": weight_offdiag,
        "weight_match": weight_match,
        "gram_min_sv": svals[7],
        "expansion": rmats,
    }


def intertwiner(ctx: QContext, rmats: dict) -> dict:
    """Change of basis T with R(x) T = T pi(x) for the weight-basis matrices pi.

    Both sides are irreducible copies of the adjoint module, so T is unique up
    to scale; it is built by matching highest-weight vectors and descending
    with lowering words until the orbit spans, then verified on all six
    generators.
    """
    gt = adjoint_rep_su3(ctx)
    with ctx.guard():
        # highest-weight direction on the expansion side: joint kernel of both raisers
        stack = mpmath.matrix(16, 8)
        for r in range(8):
            for c in range(8):
                stack[r, c] = rmats["e1"][r, c]
                stack[8 + r, c] = rmats["e2"][r, c]
        U, S, V = mpmath.svd_c(stack)
        if S[6] < mpmath.mpf("1e-15") or S[7] > mpmath.mpf("1e-20") * S[0]:
            raise ValueError("expansion matrices have no clean highest-weight direction")
        hw = mpmath.matrix([mpmath.conj(V[7, j]) for j in range(8)])
        # fix the phase by the largest component
        piv = max(range(8), key=lambda j: abs(hw[j]))
        hw = hw / hw[piv] * abs(hw[piv])

        def dense(op):
            return op.to_dense()

        pi = {name: dense(gt[name]) for name in _GENS}
        # the weight-basis highest-weight vector is the first basis vector
        pvecs = [mpmath.matrix([1] + [0] * 7)]
        rvecs = [hw]
        words_pending = [()]
        while len(pvecs) < 8 and words_pending:
            word = words_pending.pop(0)
            if len(word) >= 6:
                continue
            for letter in ("f1", "f2"):
                base = len(word)
                pv = pvecs[0]
                rv = rvecs[0]
                for w in word + (letter,):
                    pv = pi[w] * pv
                    rv = rmats[w] * rv
                # accept when the new vector enlarges the span
                M = mpmath.matrix(8, len(pvecs) + 1)
                for r in range(8):
                    for c, v in enumerate(pvecs + [pv]):
                        M[r, c] = v[r]
                sv = mpmath.svd_c(M, compute_uv=False)
                if sv[len(pvecs)] > mpmath.mpf("1e-10"):
                    pvecs.append(pv)
                    rvecs.append(rv)
                    words_pending.append(word + (letter,))
                del base
        if len(pvecs) < 8:
            raise ValueError("lowering orbit failed to span the module")
        P = mpmath.matrix(8, 8)
        Q = mpmath.matrix(8, 8)
        for r in range(8):
            for c in range(8):
                P[r, c] = pvecs[c][r]
                Q[r, c] = rvecs[c][r]
        T = Q * mpmath.inverse(P)
        tmax = max(abs(T[r, c]) for r in range(8) for c in range(8))
        T = T / tmax
        residual = mpmath.mpf(0)
        for name in _GENS:
            d = rmats[name] * T - T * pi[name]
            residual = max(residual, max(abs(d[r, c]) for r in range(8) for c in range(8)))
        tsv = mpmath.svd_c(T, compute_uv=False)
    return {"T": T, "residual": residual, "min_sv": tsv[7]}


def intertwiner_residual(ctx: QContext, rmats: dict, T) -> mpmath.mpf:
    """Defect of a fixed T against freshly computed expansion matrices."""
    gt = adjoint_rep_su3(ctx)
    with ctx.guard():
        residual = mpmath.mpf(0)
        for name in _GENS:
            d = rmats[name] * T - T * gt[name].to_dense()
            residual = max(residual, max(abs(d[r, c]) for r in range(8) for c in range(8)))
    return residual


def covariance_suite(ctx: QContext, nsamples: int = 20, seed: int = 0) -> dict:
    """Covariance over random parameter samples, one reused change of basis.

    Samples b_plus uniformly in a complex box (away from the constraint pole),
    pairs it through the constraint, and accumulates worst-case defects.  The
    intertwiner is computed at the first sample only and reused.
    """
    rng = random.Random(seed)
    with ctx.guard():
        r3 = mpmath.sqrt(ctx.q_int(3))
        samples = []
        while len(samples) < nsamples:
            b = mpmath.mpc(ctx.mpf(str(rng.uniform(-2, 2))), ctx.mpf(str(rng.uniform(-2, 2))))
            if abs(b + r3) < mpmath.mpf("0.3"):
                continue
            samples.append(b)
    out = {
        "closure_residual": ctx.mpf(0),
        "relation_worst": ctx.mpf(0),
        "weight_offdiag": ctx.mpf(0),
        "weight_match": ctx.mpf(0),
        "intertwiner_residual": ctx.mpf(0),
        "nsamples": nsamples,
    }
    T = None
    with ctx.guard():
        for b in samples:
            rep = covariance_report(ctx, b)
            if T is None:
                tw = intertwiner(ctx, rep["expansion"])
                T = tw["T"]
                out["intertwiner_min_sv"] = tw["min_sv"]
            out["closure_residual"] = max(out["closure_residual"], rep["closure_residual"])
            out["relation_worst"] = max(out["relation_worst"], rep["relation_worst"])
            out["weight_offdiag"] = max(out["weight_offdiag"], rep["weight_offdiag"])
            out["weight_match"] = max(out["weight_match"], rep["weight_match"])
            out["intertwiner_residual"] = max(
                out["intertwiner_residual"], intertwiner_residual(ctx, rep["expansion"], T)
            )
        control = covariance_report(ctx, samples[0], perturb=(3, 1, 2, ctx.mpf("1e-2")))
        out["perturbed_closure"] = control["closure_residual"]
    return out


# -- parameter constraints ---------------------------------------------------------


def constraint_b_minus(ctx: QContext, b_plus):
    """Parameter pairing that kills the square of the top generator."""
    with ctx.guard():
        r3 = mpmath.sqrt(ctx.q_int(3))
        b = ctx.mpc(b_plus)
        den = r3 + b
        if abs(den) < mpmath.mpf("1e-25"):
            raise ValueError("parameter pole: b_plus at minus the root of [3]")
        return (1 - r3 * b) / den


def solve_b_minus_numeric(ctx: QContext, b_plus) -> dict:
    """Independent route to the pairing.

    The square of the top generator has entries affine in the lower-block
    parameter; the largest-slope entry is solved and every entry of the
    resulting square is reported as the residual.
    """
    fam0 = psi_family(ctx, b_plus, 0)
    fam1 = psi_family(ctx, b_plus, 1)
    with ctx.guard():
        sq0 = fam0["psi"][1] @ fam0["psi"][1]
        slope = fam1["psi"][1] @ fam1["psi"][1] - sq0
        best, best_abs = None, mpmath.mpf(0)
        for c, rows in slope.cols.items():
            for r, v in rows.items():
                if abs(v) > best_abs:
                    best, best_abs = (r, c), abs(v)
        if best is None:
            raise ValueError("square does not depend on the lower-block parameter")
        b = -sq0.entry(*best) / slope.entry(*best)
        residual = (sq0 + slope.scale(b)).max_entry()
    return {"b_minus": b, "residual": residual}


def top_square_residual(ctx: QContext, b_plus) -> mpmath.mpf:
    """Max entry of the top generator's square under the constraint pairing."""
    fam = psi_family(ctx, b_plus, constraint_b_minus(ctx, b_plus))
    with ctx.guard():
        return (fam["psi"][1] @ fam["psi"][1]).max_entry()


# -- the six-term adjoint-copy tensor ----------------------------------------------


def omega_rho_image(ctx: QContext, fam: dict, z) -> BlockOperator:
    """Multiplication image of the six-term adjoint-copy tensor."""
    psi = fam["psi"]
    with ctx.guard():
        z = ctx.mpc(z)
        q, qi = ctx.q, ctx.qi
        c2 = ctx.q_int(2)
        r3i = 1 / mpmath.sqrt(ctx.q_int(3))
        r2 = mpmath.sqrt(c2)
        out = (psi[1] @ psi[4]).scale(r3i * (q ** 3 * c2 * z - 1))
        out = out + (psi[4] @ psi[1]).scale(r3i * (qi ** 3 * c2 - z))
        out = out + psi[1] @ psi[5]
        out = out + (psi[5] @ psi[1]).scale(z)
        out = out - (psi[2] @ psi[3]).scale(ctx.q_pow(-3) * r2)
        out = out - (psi[3] @ psi[2]).scale(ctx.q_pow(3) * r2 * z)
    return out


def _affine_parts(ctx: QContext, b_plus):
    """The six-term image as (A, B) with image = A + z B at fixed b_plus."""
    fam = psi_family(ctx, b_plus, constraint_b_minus(ctx, b_plus))
    A = omega_rho_image(ctx, fam, 0)
    with ctx.guard():
        B = omega_rho_image(ctx, fam, 1) - A
    return A, B


def solve_omega_rho(ctx: QContext, tol="1e-18") -> list:
    """All (z, b_plus) pairs killing the six-term image, numerically.

    The image is affine in z, and after clearing the single constraint pole
    its entries are quadratic polynomials in b_plus; eliminating z between two
    probe entries leaves a quartic, whose roots are then verified against
    every entry of the full image.
    """
    with ctx.guard():
        tol_m = ctx.mpf(tol)
        r3 = mpmath.sqrt(ctx.q_int(3))
        probe = ctx.mpf("0.37")
        A, B = _affine_parts(ctx, probe)
        # the two diagonal blocks impose identical conditions, so eliminate
        # within one block only; mirrored positions cross to the zero polynomial
        ranked = []
        for lab_r in SPINOR_BASIS:
            if lab_r[0] != "+":
                continue
            for lab_c in SPINOR_BASIS:
                if lab_c[0] != "+":
                    continue
                score = min(abs(A.entry(lab_r, lab_c)), abs(B.entry(lab_r, lab_c)))
                if score > 0:
                    ranked.append((score, (lab_r, lab_c)))
        ranked.sort(key=lambda t: -t[0])
        if len(ranked) < 2:
            raise ValueError("six-term image too sparse to eliminate")
        # interpolate the degree-4 elimination polynomial on rational nodes;
        # proportional position pairs degenerate, so advance until one survives
        nodes = [ctx.mpf(n) / 3 for n in (-4, -3, -2, -1, 0, 1, 2, 3, 4)]
        samples = {}
        for idx, x in enumerate(nodes):
            Ax, Bx = _affine_parts(ctx, x)
            fac = r3 + x
            samples[idx] = (Ax, Bx, fac)
        p1 = ranked[0][1]
        poly = None
        for _, p2 in ranked[1:]:
            vand = mpmath.matrix(len(nodes), 5)
            gvals = mpmath.matrix(len(nodes), 1)
            scale = mpmath.mpf(0)
            for idx, x in enumerate(nodes):
                Ax, Bx, fac = samples[idx]
                a1, b1 = fac * Ax.entry(*p1), fac * Bx.entry(*p1)
                a2, b2 = fac * Ax.entry(*p2), fac * Bx.entry(*p2)
                gvals[idx] = a1 * b2 - a2 * b1
                scale = max(scale, abs(a1 * b2), abs(a2 * b1))
                for c in range(5):
                    vand[idx, c] = x ** c
            coeffs, fit_res = mpmath.qr_solve(vand, gvals)
            cmax = max(abs(coeffs[i]) for i in range(5))
            if cmax < mpmath.mpf("1e-25") * max(scale, 1):
                continue
            if mpmath.norm(fit_res) > mpmath.mpf("1e-25") * max(cmax, 1):
                raise ValueError("elimination interpolation is inconsistent")
            cand = [coeffs[i] for i in range(4, -1, -1)]
            while len(cand) > 1 and abs(cand[0]) < mpmath.mpf("1e-30") * cmax:
                cand.pop(0)
            if len(cand) >= 2:
                poly = cand
                break
        if poly is None:
            raise ValueError("elimination polynomial degenerated")
        roots = mpmath.polyroots(poly, maxsteps=200, extraprec=ctx.prec)
        sols = []
        for b in roots:
            b = mpmath.mpc(b)
            if abs(b + r3) < mpmath.mpf("1e-10"):
                continue
            Ax, Bx = _affine_parts(ctx, b)
            den = frobenius_inner(Bx, Bx)
            if abs(den) == 0:
                continue
            z = -frobenius_inner(Bx, Ax) / den
            residual = (Ax + Bx.scale(z)).max_entry()
            if residual < tol_m:
                sols.append(
                    {
                        "z": z,
                        "b_plus": b,
                        "b_minus": constraint_b_minus(ctx, b),
                        "residual": residual,
                    }
                )
        deduped = []
        for s in sols:
            if all(
                max(abs(s["z"] - t["z"]), abs(s["b_plus"] - t["b_plus"])) > mpmath.mpf("1e-12")
                for t in deduped
            ):
                deduped.append(s)
        deduped.sort(key=lambda s: (s["z"].real, s["z"].imag, s["b_plus"].real, s["b_plus"].imag))
    return deduped


def closed_form_solutions(ctx: QContext) -> list:
    """The four closed-form (z, b_plus) pairs killing the six-term image.

    The quartet is closed under complex conjugation (the defining system has
    real coefficients) and matches the numeric solver: b-values carry the
    plain radical i*sqrt(3) in the numerator over sqrt([3]) below, with
    |b| = 1/q on the z' branch and |b| = q on the z'' branch.
    """
    with ctx.guard():
        q = ctx.q
        c2 = ctx.q_int(2)
        r3 = mpmath.sqrt(ctx.q_int(3))
        im3 = mpmath.mpc(0, 1) * mpmath.sqrt(mpmath.mpf(3))
        z1 = (q ** 6 + q ** 2 + 1) / ((q ** 6 + q ** 4 + 1) * q ** 4)
        z2 = (q ** 6 + q ** 4 + 1) / ((q ** 6 + q ** 2 + 1) * q ** 2)
        out = []
        for sgn in (1, -1):
            out.append(
                {
                    "z": mpmath.mpc(z1),
                    "b_plus": (q ** 2 - 1 + sgn * q * c2 * im3) / (2 * q ** 2 * r3),
                }
            )
            out.append(
                {
                    "z": mpmath.mpc(z2),
                    "b_plus": (-(q ** 2) + 1 + sgn * q * c2 * im3) / (2 * r3),
                }
            )
    return out


def closed_form_bracket_variant(ctx: QContext) -> list:
    """Variant quartet carrying the q-bracket inside both radicals.

    Same z values, but every square root is sqrt(-[3]) (positive-imaginary
    branch).  Retained for comparison: this set is NOT closed under complex
    conjugation and does not satisfy the six-term kernel condition (its
    b-values tend to +-1 as q -> 1, while the kernel locus tends to +-i).
    """
    with ctx.guard():
        q = ctx.q
        c2 = ctx.q_int(2)
        root_m3 = mpmath.sqrt(mpmath.mpc(-ctx.q_int(3)))
        if root_m3.imag <= 0:
            raise ValueError("branch convention violated")
        z1 = (q ** 6 + q ** 2 + 1) / ((q ** 6 + q ** 4 + 1) * q ** 4)
        z2 = (q ** 6 + q ** 4 + 1) / ((q ** 6 + q ** 2 + 1) * q ** 2)
        out = []
        for sgn in (1, -1):
            out.append(
                {
                    "z": mpmath.mpc(z1),
                    "b_plus": (q ** 2 - 1 + sgn * q * c2 * root_m3) / (2 * q ** 2 * root_m3),
                }
            )
            out.append(
                {
                    "z": mpmath.mpc(z2),
                    "b_plus": (-(q ** 2) + 1 + sgn * q * c2 * root_m3) / (2 * root_m3),
                }
            )
    return out


def match_solutions(ctx: QContext, numeric: list, closed: list) -> dict:
    """Bidirectional nearest-pair distances and conjugation closure."""
    with ctx.guard():

        def dist(s, t):
            return max(abs(s["z"] - t["z"]), abs(s["b_plus"] - t["b_plus"]))

        if not numeric or not closed:
            raise ValueError("empty solution set")
        worst_closed = max(min(dist(c, n) for n in numeric) for c in closed)
        worst_numeric = max(min(dist(n, c) for c in closed) for n in numeric)
        conj = max(
            min(
                max(
                    abs(mpmath.conj(s["z"]) - t["z"]),
                    abs(mpmath.conj(s["b_plus"]) - t["b_plus"]),
                )
                for t in numeric
            )
            for s in numeric
        )
    return {
        "closed_to_numeric": worst_closed,
        "numeric_to_closed": worst_numeric,
        "conjugation_closure": conj,
        "count": len(numeric),
    }


# -- the invariant tensor -----------------------------------------------------------


def omega_zero_image(ctx: QContext, fam: dict) -> BlockOperator:
    """Multiplication image of the eight-term invariant tensor."""
    psi = fam["psi"]
    with ctx.guard():
        q, qi = ctx.q, ctx.qi
        out = (psi[1] @ psi[8]).scale(q ** 2) + (psi[8] @ psi[1]).scale(qi ** 2)
        out = out - (psi[2] @ psi[7]).scale(q) - (psi[7] @ psi[2]).scale(qi)
        out = out - (psi[3] @ psi[6]).scale(q) - (psi[6] @ psi[3]).scale(qi)
        out = out + psi[4] @ psi[4] + psi[5] @ psi[5]
    return out


def omega_zero_scalar(ctx: QContext, b_plus, tol="1e-20") -> dict:
    """Scalar value of the invariant image, two routes.

    Route one: build the 16x16 image, check it is proportional to the
    identity, return trace/16.  Route two: the closed rational form.  Both are
    reported with their defect.
    """
    bm = constraint_b_minus(ctx, b_plus)
    fam = psi_family(ctx, b_plus, bm)
    M = omega_zero_image(ctx, fam)
    with ctx.guard():
        scalar = sum(M.entry(lab, lab) for lab in SPINOR_BASIS) / 16
        off = (M - BlockOperator.identity(ctx, SPINOR_BASIS).scale(scalar)).max_entry()
        if off > ctx.mpf(tol) * max(abs(scalar), 1):
            raise ValueError("invariant image is not scalar")
        bp = ctx.mpc(b_plus)
        r3 = mpmath.sqrt(ctx.q_int(3))
        closed = ctx.q_int(4) * (2 * bp + (1 - bp ** 2) * r3) / (ctx.q ** 3 * (bp + r3))
        return {
            "scalar": scalar,
            "closed_form": closed,
            "match_defect": abs(scalar - closed),
            "off_scalar_residual": off,
        }


def classical_limit_report(ctx: QContext) -> dict:
    """Near q = 1 the solution-branch family closes like a Clifford family.

    On the kernel locus the parameters tend to b_plus -> i, b_minus -> -i
    and z -> 1; there every anticommutator {psi_i, psi_j} approaches a
    scalar and the induced pairing is symmetric and nondegenerate.  The
    off-scalar residual is O(1 - q), so callers should evaluate near 1.
    """
    sols = solve_omega_rho(ctx)
    with ctx.guard():
        sol = min(sols, key=lambda s: abs(s["b_plus"] - mpmath.mpc(0, 1)))
        bp = sol["b_plus"]
        bm = constraint_b_minus(ctx, bp)
        fam = psi_family(ctx, bp, bm)
        psi = fam["psi"]
        worst = mpmath.mpf(0)
        pairing = mpmath.matrix(8, 8)
        ident = BlockOperator.identity(ctx, SPINOR_BASIS)
        for i in GT_BASIS:
            for j in GT_BASIS:
                ac = anticommutator(psi[i], psi[j])
                scalar = sum(ac.entry(lab, lab) for lab in SPINOR_BASIS) / 16
                pairing[i - 1, j - 1] = scalar
                worst = max(worst, (ac - ident.scale(scalar)).max_entry())
        svals = mpmath.svd_c(pairing, compute_uv=False)
        conj_merge = abs(bm - mpmath.conj(bp))
        z_drift = abs(sol["z"] - 1)
    return {
        "off_scalar_residual": worst,
        "pairing_min_sv": svals[7],
        "pairing_symmetry": max(
            abs(pairing[i, j] - pairing[j, i]) for i in range(8) for j in range(8)
        ),
        "conjugate_merge_defect": conj_merge,
        "z_drift": z_drift,
        "b_plus": bp,
        "b_minus": bm,
    }


def su3_report(ctx: QContext, nsamples: int = 20, seed: int = 0) -> dict:
    """Everything the rank-two family claims, in one dictionary."""
    relations = su3_relation_residuals(ctx)
    suite = covariance_suite(ctx, nsamples=nsamples, seed=seed)
    numeric = solve_omega_rho(ctx)
    closed = closed_form_solutions(ctx)
    match = match_solutions(ctx, numeric, closed)
    oracle = solve_b_minus_numeric(ctx, ctx.mpf("0.25"))
    with ctx.guard():
        oracle_defect = abs(oracle["b_minus"] - constraint_b_minus(ctx, ctx.mpf("0.25")))
        square = max(top_square_residual(ctx, s["b_plus"]) for s in numeric)
    invariant = omega_zero_scalar(ctx, 0)
    return {
        "relations": relations,
        "covariance": suite,
        "solutions": numeric,
        "closed_forms": closed,
        "solution_match": match,
        "constraint_oracle_defect": oracle_defect,
        "constraint_oracle_residual": oracle["residual"],
        "top_square_residual": square,
        "invariant_scalar": invariant,
    }
