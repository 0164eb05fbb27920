"""Finite-dimensional representations of quantized su(2).

Conventions (fixed for the whole package):

* generators e, f, k with k e k^-1 = q e, k f k^-1 = q^-1 f,
  [e,f] = (k^2 - k^-2)/(q - q^-1); involution e* = f, k* = k;
* coproduct  D(k) = k (x) k,  D(e) = e (x) k + k^-1 (x) e,  likewise f;
  antipode S(k) = k^-1, S(e) = -q e, S(f) = -q^-1 f;
* spin-l irrep on basis |l,m>, m ascending:  k|l,m> = q^m |l,m>,
  e|l,m> = sqrt([l-m][l+m+1]) |l,m+1>,  f|l,m> = sqrt([l-m+1][l+m]) |l,m-1>.

Half-integers are doubled everywhere (two_l, two_m, ...).  Clebsch-Gordan
tables are built numerically per (l1, l2, q, precision): the highest-weight
vector of each coupled spin is the kernel of D(e) on a weight space
(multiplicity-free, so one-dimensional), with the phase fixed by making the
coefficient at (m1, m2) = (l1, p - l1) real and positive; lower weights
follow by normalized D(f) descent.  An exact rational classical oracle
(factorial sum) provides the independent cross-check near q = 1.
"""

from __future__ import annotations

import hashlib
import pickle
import threading
from fractions import Fraction
from math import factorial

import mpmath

from .scalars import QContext

GENS = ("e", "f", "k", "ki")

_CG_CACHE_VERSION = 1


def _qint(ctx: QContext, n: int):
    return ctx.q_int(n)


def irrep_matrix(ctx: QContext, twol: int, gen: str):
    """Dense matrix of one generator in the spin-l irrep (m ascending)."""
    if twol < 0:
        raise ValueError("negative spin")
    if gen not in GENS:
        raise ValueError(f"unknown generator {gen!r}")
    d = twol + 1
    with ctx.guard():
        a = mpmath.matrix(d, d)
        for i in range(d):
            twom = -twol + 2 * i
            if gen == "k":
                a[i, i] = ctx.s ** twom
            elif gen == "ki":
                a[i, i] = ctx.s ** (-twom)
            elif gen == "e" and i + 1 < d:
                lm = (twol - twom) // 2
                lp = (twol + twom) // 2
                a[i + 1, i] = mpmath.sqrt(_qint(ctx, lm) * _qint(ctx, lp + 1))
            elif gen == "f" and i - 1 >= 0:
                lm = (twol - twom) // 2
                lp = (twol + twom) // 2
                a[i - 1, i] = mpmath.sqrt(_qint(ctx, lm + 1) * _qint(ctx, lp))
        return a


def rep_word(ctx: QContext, twol: int, word):
    """Matrix of a product of generators, leftmost factor applied last."""
    gens = word.split() if isinstance(word, str) else list(word)
    with ctx.guard():
        out = mpmath.eye(twol + 1)
        for g in gens:
            out = out * irrep_matrix(ctx, twol, g)
        return out


def _max_abs(a):
    return max((abs(a[i, j]) for i in range(a.rows) for j in range(a.cols)), default=mpmath.mpf(0))


def check_relations(ctx: QContext, twol: int) -> dict:
    """Defining-relation residuals (max entry) for the spin-l irrep."""
    with ctx.guard():
        e = irrep_matrix(ctx, twol, "e")
        f = irrep_matrix(ctx, twol, "f")
        k = irrep_matrix(ctx, twol, "k")
        ki = irrep_matrix(ctx, twol, "ki")
        one = mpmath.eye(twol + 1)
        res = {
            "k_e_conj": _max_abs(k * e * ki - ctx.q * e),
            "k_f_conj": _max_abs(k * f * ki - ctx.qi * f),
            "e_f_comm": _max_abs(e * f - f * e - (k * k - ki * ki) / (ctx.q - ctx.qi)),
            "k_inverse": _max_abs(k * ki - one),
            "star_e": _max_abs(e.H - f),
            "star_k": _max_abs(k.H - k),
        }
        return res


def _kron(a, b):
    """Kronecker product, first factor on the slow index."""
    out = mpmath.matrix(a.rows * b.rows, a.cols * b.cols)
    for i1 in range(a.rows):
        for j1 in range(a.cols):
            v = a[i1, j1]
            if v == 0:
                continue
            for i2 in range(b.rows):
                for j2 in range(b.cols):
                    w = b[i2, j2]
                    if w != 0:
                        out[i1 * b.rows + i2, j1 * b.cols + j2] = v * w
    return out


def coproduct_matrix(ctx: QContext, twol1: int, twol2: int, gen: str):
    """Matrix of D(gen) on the tensor product of two irreps."""
    with ctx.guard():
        if gen == "k":
            return _kron(irrep_matrix(ctx, twol1, "k"), irrep_matrix(ctx, twol2, "k"))
        if gen == "ki":
            return _kron(irrep_matrix(ctx, twol1, "ki"), irrep_matrix(ctx, twol2, "ki"))
        if gen in ("e", "f"):
            return _kron(irrep_matrix(ctx, twol1, gen), irrep_matrix(ctx, twol2, "k")) + _kron(
                irrep_matrix(ctx, twol1, "ki"), irrep_matrix(ctx, twol2, gen)
            )
        raise ValueError(f"unknown generator {gen!r}")


class CGTable:
    """Coupling coefficients for one (l1, l2) pair at one context."""

    __slots__ = ("ctx", "twol1", "twol2", "coeffs")

    def __init__(self, ctx, twol1, twol2, coeffs):
        self.ctx = ctx
        self.twol1 = twol1
        self.twol2 = twol2
        self.coeffs = coeffs

    def twop_values(self):
        return list(range(self.twol1 + self.twol2, abs(self.twol1 - self.twol2) - 2, -2))

    def get(self, twop: int, twom1: int, twom2: int):
        """C(l1 m1; l2 m2 | p, m1+m2); zero when out of range."""
        return self.coeffs.get((twop, twom1, twom2), mpmath.mpf(0))

    def pairs(self, twom: int):
        out = []
        for twom1 in range(-self.twol1, self.twol1 + 2, 2):
            twom2 = twom - twom1
            if -self.twol2 <= twom2 <= self.twol2:
                out.append((twom1, twom2))
        return out

    def weight_matrix(self, twom: int):
        """Square matrix [pairs x coupled spins] at one total weight."""
        cols = [twop for twop in self.twop_values() if abs(twom) <= twop]
        rows = self.pairs(twom)
        with self.ctx.guard():
            u = mpmath.matrix(len(rows), len(cols))
            for j, twop in enumerate(cols):
                for i, (twom1, twom2) in enumerate(rows):
                    u[i, j] = self.get(twop, twom1, twom2)
        return u

    def unitarity_residual(self):
        """Max departure of every weight-block from unitarity."""
        with self.ctx.guard():
            worst = mpmath.mpf(0)
            for twom in range(-(self.twol1 + self.twol2), self.twol1 + self.twol2 + 2, 2):
                u = self.weight_matrix(twom)
                if u.rows != u.cols:
                    raise RuntimeError("weight block is not square")
                worst = max(worst, _max_abs(u.H * u - mpmath.eye(u.rows)), _max_abs(u * u.H - mpmath.eye(u.rows)))
            return worst

    def decomposition_residual(self, gen: str):
        """Max entry of U* D(gen) U minus the direct sum of irreps."""
        ctx = self.ctx
        d1, d2 = self.twol1 + 1, self.twol2 + 1
        with ctx.guard():
            big = coproduct_matrix(ctx, self.twol1, self.twol2, gen)
            u = mpmath.matrix(d1 * d2, d1 * d2)
            col = 0
            blocks = []
            for twop in self.twop_values():
                mat = irrep_matrix(ctx, twop, gen)
                blocks.append((col, mat))
                for jj, twomu in enumerate(range(-twop, twop + 2, 2)):
                    for twom1 in range(-self.twol1, self.twol1 + 2, 2):
                        twom2 = twomu - twom1
                        if -self.twol2 <= twom2 <= self.twol2:
                            i1 = (twom1 + self.twol1) // 2
                            i2 = (twom2 + self.twol2) // 2
                            u[i1 * d2 + i2, col + jj] = self.get(twop, twom1, twom2)
                col += twop + 1
            direct = mpmath.matrix(d1 * d2, d1 * d2)
            for start, mat in blocks:
                for i in range(mat.rows):
                    for j in range(mat.cols):
                        direct[start + i, start + j] = mat[i, j]
            return _max_abs(u.H * big * u - direct)


def _build_cg(ctx: QContext, twol1: int, twol2: int) -> CGTable:
    """Kernel-and-descent construction of a coupling table."""
    hw_gap = mpmath.mpf("0.01")
    with ctx.guard():
        ktol = mpmath.mpf(2) ** (-(3 * ctx.prec) // 4)
        e1 = irrep_matrix(ctx, twol1, "e")
        e2 = irrep_matrix(ctx, twol2, "e")
        f1 = irrep_matrix(ctx, twol1, "f")
        f2 = irrep_matrix(ctx, twol2, "f")

        def cop_e(vec):
            # D(e) = e (x) k + k^-1 (x) e on weight vectors {(m1,m2): coeff}
            out = {}
            for (twom1, twom2), c in vec.items():
                i1 = (twom1 + twol1) // 2
                i2 = (twom2 + twol2) // 2
                if twom1 < twol1:
                    v = e1[i1 + 1, i1] * ctx.s ** twom2 * c
                    if v != 0:
                        out[(twom1 + 2, twom2)] = out.get((twom1 + 2, twom2), mpmath.mpc(0)) + v
                if twom2 < twol2:
                    v = ctx.s ** (-twom1) * e2[i2 + 1, i2] * c
                    if v != 0:
                        out[(twom1, twom2 + 2)] = out.get((twom1, twom2 + 2), mpmath.mpc(0)) + v
            return out

        def cop_f(vec):
            out = {}
            for (twom1, twom2), c in vec.items():
                i1 = (twom1 + twol1) // 2
                i2 = (twom2 + twol2) // 2
                if twom1 > -twol1:
                    v = f1[i1 - 1, i1] * ctx.s ** twom2 * c
                    if v != 0:
                        out[(twom1 - 2, twom2)] = out.get((twom1 - 2, twom2), mpmath.mpc(0)) + v
                if twom2 > -twol2:
                    v = ctx.s ** (-twom1) * f2[i2 - 1, i2] * c
                    if v != 0:
                        out[(twom1, twom2 - 2)] = out.get((twom1, twom2 - 2), mpmath.mpc(0)) + v
            return out

        def pairs(twom):
            out = []
            for twom1 in range(-twol1, twol1 + 2, 2):
                twom2 = twom - twom1
                if -twol2 <= twom2 <= twol2:
                    out.append((twom1, twom2))
            return out

        coeffs = {}
        for twop in range(twol1 + twol2, abs(twol1 - twol2) - 2, -2):
            cols = pairs(twop)
            if len(cols) == 1:
                hw = {cols[0]: mpmath.mpc(1)}
            else:
                # kernel of D(e) on the weight-p space via the Gram matrix
                g = mpmath.matrix(len(cols), len(cols))
                images = []
                for pair in cols:
                    images.append(cop_e({pair: mpmath.mpc(1)}))
                for i in range(len(cols)):
                    for j in range(len(cols)):
                        acc = mpmath.mpc(0)
                        for key, vi in images[i].items():
                            vj = images[j].get(key)
                            if vj is not None:
                                acc += mpmath.conj(vi) * vj
                        g[i, j] = acc
                evals, qmat = mpmath.eighe(g)
                if evals[0] > ktol:
                    raise RuntimeError(
                        f"no highest-weight kernel at 2p={twop} for (2l1,2l2)=({twol1},{twol2})"
                    )
                if len(cols) > 1 and evals[1] < hw_gap:
                    raise RuntimeError(
                        f"ill-separated highest-weight kernel at 2p={twop} (gap {mpmath.nstr(evals[1], 6)})"
                    )
                hw = {pair: qmat[i, 0] for i, pair in enumerate(cols)}
            # phase: the (l1, p-l1) component is real positive
            anchor = hw.get((twol1, twop - twol1))
            if anchor is None or abs(anchor) < ktol:
                raise RuntimeError(f"vanishing anchor component at 2p={twop}")
            phase = mpmath.conj(anchor) / abs(anchor)
            hw = {pair: v * phase for pair, v in hw.items()}
            nrm = mpmath.sqrt(sum(abs(v) ** 2 for v in hw.values()))
            hw = {pair: v / nrm for pair, v in hw.items()}

            vec = hw
            for twomu in range(twop, -twop - 2, -2):
                for pair, v in vec.items():
                    if abs(mpmath.im(v)) > ktol:
                        raise RuntimeError("coupling coefficient acquired an imaginary part")
                    coeffs[(twop, pair[0], pair[1])] = mpmath.re(v)
                if twomu > -twop:
                    nxt = cop_f(vec)
                    nrm = mpmath.sqrt(sum(abs(v) ** 2 for v in nxt.values()))
                    vec = {pair: v / nrm for pair, v in nxt.items()}
        return CGTable(ctx, twol1, twol2, coeffs)


class CGCacheCorrupt(RuntimeError):
    """A persisted coupling-table record failed validation."""


class CGCache:
    """Memoized coupling tables with optional checksummed disk records."""

    def __init__(self, disk_dir=None):
        self._mem = {}
        self._lock = threading.RLock()
        self.disk_dir = disk_dir

    def _disk_path(self, key):
        twol1, twol2, q_str, prec = key
        tag = hashlib.sha256(repr(key).encode()).hexdigest()[:16]
        return self.disk_dir / f"cg_{twol1}_{twol2}_{tag}.pkl"

    @staticmethod
    def _payload(key, coeffs):
        # raw mpf tuples with plain-int mantissas: exact and backend-neutral
        items = sorted(
            (k, (v._mpf_[0], int(v._mpf_[1]), v._mpf_[2], v._mpf_[3])) for k, v in coeffs.items()
        )
        return {"version": _CG_CACHE_VERSION, "key": key, "items": items}

    def _store(self, key, table: CGTable):
        if self.disk_dir is None:
            return
        self.disk_dir.mkdir(parents=True, exist_ok=True)
        payload = self._payload(key, table.coeffs)
        blob = pickle.dumps(payload, protocol=4)
        record = {"sha256": hashlib.sha256(blob).hexdigest(), "blob": blob}
        self._disk_path(key).write_bytes(pickle.dumps(record, protocol=4))

    def _load(self, ctx, key):
        if self.disk_dir is None:
            return None
        path = self._disk_path(key)
        if not path.exists():
            return None
        try:
            record = pickle.loads(path.read_bytes())
            blob = record["blob"]
            digest = record["sha256"]
        except Exception as exc:
            raise CGCacheCorrupt(f"unreadable coupling-cache record {path}") from exc
        if hashlib.sha256(blob).hexdigest() != digest:
            raise CGCacheCorrupt(f"checksum mismatch in coupling-cache record {path}")
        payload = pickle.loads(blob)
        if payload.get("version") != _CG_CACHE_VERSION or tuple(payload.get("key")) != tuple(key):
            raise CGCacheCorrupt(f"wrong key or version in coupling-cache record {path}")
        with ctx.guard():
            coeffs = {tuple(k): mpmath.mpf(tuple(v)) for k, v in payload["items"]}
        return CGTable(ctx, key[0], key[1], coeffs)

    def get(self, ctx: QContext, twol1: int, twol2: int) -> CGTable:
        key = (twol1, twol2, ctx.q_str, ctx.prec)
        with self._lock:
            table = self._mem.get(key)
            if table is not None:
                return table
            table = self._load(ctx, key)
            if table is None:
                table = _build_cg(ctx, twol1, twol2)
                self._store(key, table)
            self._mem[key] = table
            return table


CG_CACHE = CGCache()


def cg_table(ctx: QContext, twol1: int, twol2: int, cache: CGCache | None = None) -> CGTable:
    """Coupling table for (l1, l2), from the cache."""
    return (cache or CG_CACHE).get(ctx, twol1, twol2)


def set_cg_cache_dir(path):
    """Route the process-wide coupling cache to a disk directory."""
    from pathlib import Path

    CG_CACHE.disk_dir = None if path is None else Path(path)


def adjoint_action(ctx: QContext, twol: int, word, y):
    """Adjoint action x |> Y = pi(x') Y pi(S(x'')) in the spin-l irrep."""
    gens = word.split() if isinstance(word, str) else list(word)
    with ctx.guard():
        mats = {g: irrep_matrix(ctx, twol, g) for g in GENS}
        out = mpmath.matrix(y)
        for g in reversed(gens):
            if g == "k":
                out = mats["k"] * out * mats["ki"]
            elif g == "ki":
                out = mats["ki"] * out * mats["k"]
            elif g == "e":
                out = mats["e"] * out * mats["ki"] - ctx.q * (mats["ki"] * out * mats["e"])
            elif g == "f":
                out = mats["f"] * out * mats["ki"] - ctx.qi * (mats["ki"] * out * mats["f"])
            else:
                raise ValueError(f"unknown generator {g!r}")
        return out


# -- exact classical oracle ----------------------------------------------------


def classical_cg_exact(twol1, twom1, twol2, twom2, twop):
    """Classical coupling coefficient as (sign, squared value as Fraction)."""
    twom = twom1 + twom2
    if abs(twom) > twop or twop > twol1 + twol2 or twop < abs(twol1 - twol2):
        return (0, Fraction(0))
    if (twol1 + twol2 + twop) % 2 != 0 or abs(twom1) > twol1 or abs(twom2) > twol2:
        return (0, Fraction(0))

    def fct(twice):
        if twice % 2 != 0 or twice < 0:
            raise ValueError("non-integer factorial argument")
        return factorial(twice // 2)

    pref = Fraction(
        (twop + 1)
        * fct(twol1 + twol2 - twop)
        * fct(twop + twol1 - twol2)
        * fct(twop - twol1 + twol2),
        fct(twol1 + twol2 + twop + 2),
    )
    pref *= Fraction(
        fct(twop + twom)
        * fct(twop - twom)
        * fct(twol1 - twom1)
        * fct(twol1 + twom1)
        * fct(twol2 - twom2)
        * fct(twol2 + twom2)
    )
    total = Fraction(0)
    kmin = max(0, -(twop - twol2 + twom1) // 2, -(twop - twol1 - twom2) // 2)
    kmax = min((twol1 + twol2 - twop) // 2, (twol1 - twom1) // 2, (twol2 + twom2) // 2)
    for k in range(kmin, kmax + 1):
        den = (
            fct(2 * k)
            * fct(twol1 + twol2 - twop - 2 * k)
            * fct(twol1 - twom1 - 2 * k)
            * fct(twol2 + twom2 - 2 * k)
            * fct(twop - twol2 + twom1 + 2 * k)
            * fct(twop - twol1 - twom2 + 2 * k)
        )
        total += Fraction((-1) ** k, den)
    if total == 0:
        return (0, Fraction(0))
    sign = 1 if total > 0 else -1
    return (sign, pref * total * total)


def classical_cg(ctx: QContext, twol1, twom1, twol2, twom2, twop):
    """Numeric value of the exact classical coupling coefficient."""
    sign, sq = classical_cg_exact(twol1, twom1, twol2, twom2, twop)
    with ctx.guard():
        if sign == 0:
            return mpmath.mpf(0)
        return sign * mpmath.sqrt(mpmath.mpf(sq.numerator) / sq.denominator)


def _classical_su2(twol: int):
    """Classical spin-l matrices of j+, j-, j0 (m ascending), at float-free mpf."""
    d = twol + 1
    jp = mpmath.matrix(d, d)
    jm = mpmath.matrix(d, d)
    j0 = mpmath.matrix(d, d)
    l = mpmath.mpf(twol) / 2
    for i in range(d):
        m = mpmath.mpf(-twol + 2 * i) / 2
        j0[i, i] = m
        if i + 1 < d:
            jp[i + 1, i] = mpmath.sqrt(l * (l + 1) - m * (m + 1))
        if i - 1 >= 0:
            jm[i - 1, i] = mpmath.sqrt(l * (l + 1) - m * (m - 1))
    return jp, jm, j0


def classical_iso_check(ctx: QContext, twol: int) -> dict:
    """Residuals of the diagonal-rescaling isomorphism onto the classical irrep.

    The q-irrep generator matrices must equal the classical ladder matrices
    left-multiplied by the stated diagonal factor evaluated at the outgoing
    weight (the removable 0/0 at the lowest weight is defined as 0).
    """
    with ctx.guard():
        jp, jm, j0 = _classical_su2(twol)
        d = twol + 1
        l = mpmath.mpf(twol) / 2

        de = mpmath.matrix(d, d)
        df = mpmath.matrix(d, d)
        dk = mpmath.matrix(d, d)
        for i in range(d):
            w = mpmath.mpf(-twol + 2 * i) / 2
            den_e = l * (l + 1) - w * (w - 1)
            if den_e > 0:
                de[i, i] = mpmath.sqrt(ctx.q_bracket(l - w + 1) * ctx.q_bracket(l + w)) / mpmath.sqrt(den_e)
            den_f = l * (l + 1) - w * (w + 1)
            if den_f > 0:
                df[i, i] = mpmath.sqrt(ctx.q_bracket(l - w) * ctx.q_bracket(l + w + 1)) / mpmath.sqrt(den_f)
            dk[i, i] = ctx.q ** w
        res = {
            "phi_e": _max_abs(de * jp - irrep_matrix(ctx, twol, "e")),
            "phi_f": _max_abs(df * jm - irrep_matrix(ctx, twol, "f")),
            "phi_k": _max_abs(dk - irrep_matrix(ctx, twol, "k")),
            "classical_comm": _max_abs(jp * jm - jm * jp - 2 * j0),
        }
        return res
