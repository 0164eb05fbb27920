from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest

from qdirac.repsu2 import (
    CGCache,
    CGCacheCorrupt,
    adjoint_action,
    cg_table,
    check_relations,
    classical_cg,
    classical_cg_exact,
    classical_iso_check,
    coproduct_matrix,
    irrep_matrix,
    rep_word,
)
from qdirac.scalars import QContext

CTX = QContext("0.5", prec=128)
TOL = mpmath.mpf("1e-30")


def _max_abs(a):
    return max(abs(a[i, j]) for i in range(a.rows) for j in range(a.cols))


def test_spin_half_matrices_are_the_frozen_ones():
    with CTX.guard():
        e = irrep_matrix(CTX, 1, "e")
        k = irrep_matrix(CTX, 1, "k")
        # e|1/2,-1/2> = sqrt([1][1]) |1/2,+1/2>, k = diag(q^-1/2, q^1/2)
        assert abs(e[1, 0] - 1) < TOL and e[0, 0] == 0 and e[0, 1] == 0 and e[1, 1] == 0
        assert abs(k[0, 0] - 1 / mpmath.sqrt(CTX.q)) < TOL
        assert abs(k[1, 1] - mpmath.sqrt(CTX.q)) < TOL


def test_irrep_relations_all_small_spins():
    for q_str in ("0.3", "0.5", "0.9"):
        ctx = QContext(q_str, prec=128)
        for twol in range(0, 7):
            res = check_relations(ctx, twol)
            assert max(res.values()) < TOL, (q_str, twol, res)


def test_spin_one_e_matrix_frozen_value():
    # e|1,0> = sqrt([1][2]) |1,1> = sqrt(2.5) at q = 1/2
    with CTX.guard():
        e = irrep_matrix(CTX, 2, "e")
        assert abs(e[2, 1] - mpmath.sqrt(mpmath.mpf("2.5"))) < TOL


def test_rep_word_order():
    with CTX.guard():
        ef = rep_word(CTX, 2, "e f")
        assert _max_abs(ef - irrep_matrix(CTX, 2, "e") * irrep_matrix(CTX, 2, "f")) == 0


def test_coproduct_counit_consistency():
    # (eps (x) id) D(x) = x with eps(k) = 1, eps(e) = eps(f) = 0:
    # the l1 = 0 factor collapses D to the bare generator
    with CTX.guard():
        for gen in ("e", "f", "k", "ki"):
            big = coproduct_matrix(CTX, 0, 4, gen)
            assert _max_abs(big - irrep_matrix(CTX, 4, gen)) < TOL


def test_singlet_coupling_frozen_values():
    # C(1/2 1/2; 1/2 -1/2 | 0) = q^(1/2)/[2]^(1/2) = 0.4472135955 at q = 1/2,
    # C(1/2 -1/2; 1/2 1/2 | 0) = -q^(-1/2)/[2]^(1/2)
    tab = cg_table(CTX, 1, 1)
    with CTX.guard():
        plus = tab.get(0, 1, -1)
        minus = tab.get(0, -1, 1)
        assert abs(plus - CTX.mpf("0.44721359549995793928")) < 1e-18
        assert abs(plus - mpmath.sqrt(CTX.q) / mpmath.sqrt(CTX.q_int(2))) < TOL
        assert abs(minus + 1 / (mpmath.sqrt(CTX.q) * mpmath.sqrt(CTX.q_int(2)))) < TOL
        # top coupling is trivial
        assert abs(tab.get(2, 1, 1) - 1) < TOL


def test_cg_unitarity_and_block_decomposition():
    for pair in ((1, 1), (2, 1), (2, 2), (3, 2)):
        tab = cg_table(CTX, *pair)
        assert tab.unitarity_residual() < TOL
    tab = cg_table(CTX, 2, 2)
    for gen in ("e", "f", "k"):
        assert tab.decomposition_residual(gen) < TOL


def test_cg_determinism_and_memoization():
    t1 = cg_table(CTX, 3, 1)
    t2 = cg_table(CTX, 3, 1)
    assert t1 is t2
    fresh = CGCache()
    t3 = fresh.get(CTX, 3, 1)
    assert t3 is not t1
    assert set(t3.coeffs) == set(t1.coeffs)
    assert all(t3.coeffs[k] == t1.coeffs[k] for k in t1.coeffs)


def test_cg_disk_cache_roundtrip_and_corruption(tmp_path):
    cache = CGCache(disk_dir=tmp_path)
    t1 = cache.get(CTX, 2, 1)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    reload_cache = CGCache(disk_dir=tmp_path)
    t2 = reload_cache.get(CTX, 2, 1)
    assert set(t2.coeffs) == set(t1.coeffs)
    assert all(t2.coeffs[k] == t1.coeffs[k] for k in t1.coeffs)
    files[0].write_bytes(files[0].read_bytes()[:-7] + b"garbage")
    with pytest.raises(CGCacheCorrupt):
        CGCache(disk_dir=tmp_path).get(CTX, 2, 1)


def test_classical_cg_exact_frozen_values():
    # <1/2 1/2 1/2 -1/2|0 0> = 1/sqrt(2)
    assert classical_cg_exact(1, 1, 1, -1, 0) == (1, Fraction(1, 2))
    # <1 1 1 -1|0 0> = 1/sqrt(3)
    assert classical_cg_exact(2, 2, 2, -2, 0) == (1, Fraction(1, 3))
    # <1 0 1 0|2 0> = sqrt(2/3)
    assert classical_cg_exact(2, 0, 2, 0, 4) == (1, Fraction(2, 3))
    # <1 0 1 0|1 0> = 0
    assert classical_cg_exact(2, 0, 2, 0, 2) == (0, Fraction(0))
    # <1/2 -1/2 1/2 1/2|0 0> = -1/sqrt(2)
    assert classical_cg_exact(1, -1, 1, 1, 0) == (-1, Fraction(1, 2))
    # out of range
    assert classical_cg_exact(1, 1, 1, 1, 0) == (0, Fraction(0))


def test_q_cg_matches_classical_oracle_near_one():
    ctx = QContext("0.9999", prec=128)
    for twol1, twol2 in ((1, 1), (2, 1), (2, 2), (3, 2)):
        tab = cg_table(ctx, twol1, twol2)
        for (twop, twom1, twom2), val in tab.coeffs.items():
            ref = classical_cg(ctx, twol1, twom1, twol2, twom2, twop)
            assert abs(val - ref) < 1e-3, (twol1, twol2, twop, twom1, twom2)


def test_adjoint_action_is_multiplicative_and_unital():
    with CTX.guard():
        y = irrep_matrix(CTX, 2, "e") + irrep_matrix(CTX, 2, "f") * mpmath.mpc(0, 1)
        lhs = adjoint_action(CTX, 2, "e f", y)
        rhs = adjoint_action(CTX, 2, "e", adjoint_action(CTX, 2, "f", y))
        assert _max_abs(lhs - rhs) < TOL
        one = mpmath.eye(3)
        assert _max_abs(adjoint_action(CTX, 2, "k", one) - one) < TOL
        assert _max_abs(adjoint_action(CTX, 2, "e", one)) < TOL
        # k |> e = q e (conjugation scales by the root weight)
        assert _max_abs(adjoint_action(CTX, 2, "k", irrep_matrix(CTX, 2, "e")) - CTX.q * irrep_matrix(CTX, 2, "e")) < TOL


def test_classical_isomorphism_residuals():
    for twol in (1, 2, 3, 5):
        res = classical_iso_check(CTX, twol)
        assert max(res.values()) < TOL, (twol, res)
    # near q = 1 the q-irrep matrices approach the classical ladder matrices
    ctx = QContext("0.9999", prec=128)
    with ctx.guard():
        from qdirac.repsu2 import _classical_su2

        jp, _, _ = _classical_su2(4)
        assert _max_abs(irrep_matrix(ctx, 4, "e") - jp) < 1e-3
