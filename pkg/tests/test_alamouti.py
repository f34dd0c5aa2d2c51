import numpy as np
import pytest

from gstbc.alamouti import (
    AB_IDENTITY,
    AB_ZERO,
    AlamoutiBlock,
    StructuredHermitianBlockMatrix,
    ab_add,
    ab_adjoint,
    ab_adjoint_apply,
    ab_apply,
    ab_dense,
    ab_from_dense,
    ab_mul,
    ab_scale_real,
    ab_sub,
    sbm_build,
    sbm_from_dense,
    sbm_identity,
    sbm_leading,
    sbm_matvec,
    sbm_swap_blocks,
    sbm_to_dense,
)
from gstbc.errors import StructureViolation

RNG = np.random.default_rng(90210)


def random_block():
    r = RNG.standard_normal(4)
    return AlamoutiBlock(complex(r[0], r[1]), complex(r[2], r[3]))


def dense_oracle(x: AlamoutiBlock) -> np.ndarray:
    # the 2x2 pattern, written out independently of ab_dense
    return np.array(
        [[x.a1, -np.conj(x.a2)], [x.a2, np.conj(x.a1)]], dtype=np.complex128
    )


def test_dense_layout():
    x = AlamoutiBlock(1 + 2j, 3 - 4j)
    assert np.array_equal(np.asarray(ab_dense(x)), dense_oracle(x))


def test_algebra_matches_dense_oracle():
    # the block set must be closed under +, -, *, adjoint; verify each
    # operation against plain 2x2 matrix arithmetic
    for _ in range(50):
        x, y = random_block(), random_block()
        dx, dy = dense_oracle(x), dense_oracle(y)
        assert np.allclose(np.asarray(ab_dense(ab_add(x, y))), dx + dy)
        assert np.allclose(np.asarray(ab_dense(ab_sub(x, y))), dx - dy)
        assert np.allclose(np.asarray(ab_dense(ab_mul(x, y))), dx @ dy)
        assert np.allclose(np.asarray(ab_dense(ab_adjoint(x))), dx.conj().T)
        assert np.allclose(np.asarray(ab_dense(ab_scale_real(0.75, x))), 0.75 * dx)


def test_mul_frozen_value():
    x = AlamoutiBlock(1 + 1j, 2 - 1j)
    y = AlamoutiBlock(-1 + 2j, 0 + 3j)
    got = ab_mul(x, y)
    # hand-computed: a1 = (1+1j)(-1+2j) - (2+1j)(3j), a2 = (2-1j)(-1+2j) + (1-1j)(3j)
    assert got.a1 == pytest.approx((1 + 1j) * (-1 + 2j) - (2 + 1j) * 3j)
    assert got.a2 == pytest.approx((2 - 1j) * (-1 + 2j) + (1 - 1j) * 3j)


def test_apply_matches_dense():
    for _ in range(20):
        x = random_block()
        v = RNG.standard_normal(2) + 1j * RNG.standard_normal(2)
        d = dense_oracle(x)
        got = ab_apply(x, v[0], v[1])
        assert np.allclose(np.asarray(got), d @ v)
        got_adj = ab_adjoint_apply(x, v[0], v[1])
        assert np.allclose(np.asarray(got_adj), d.conj().T @ v)


def test_identity_and_zero():
    x = random_block()
    assert ab_mul(AB_IDENTITY, x) == x
    assert ab_add(AB_ZERO, x) == x


def test_from_dense_roundtrip_and_rejection():
    x = random_block()
    assert ab_from_dense(np.asarray(ab_dense(x))) == x
    bad = np.asarray(dense_oracle(x)).copy()
    bad[0, 1] += 1e-3  # break the conjugate pairing
    with pytest.raises(StructureViolation):
        ab_from_dense(bad)


# --- structured Hermitian block matrices ---


def random_sbm(m: int) -> StructuredHermitianBlockMatrix:
    diag = tuple(float(2.0 + RNG.random()) for _ in range(m))
    upper = tuple(random_block() for _ in range(m * (m - 1) // 2))
    return StructuredHermitianBlockMatrix(m, diag, upper)


def test_sbm_dense_is_hermitian_with_scalar_diag_blocks():
    a = random_sbm(4)
    d = np.asarray(sbm_to_dense(a))
    assert d.shape == (8, 8)
    assert np.allclose(d, d.conj().T)
    for i in range(4):
        blk = d[2 * i : 2 * i + 2, 2 * i : 2 * i + 2]
        assert np.allclose(blk, a.diag[i] * np.eye(2))


def test_sbm_block_lower_is_adjoint_of_upper():
    a = random_sbm(3)
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            bij = np.asarray(ab_dense(a.block(i, j)))
            bji = np.asarray(ab_dense(a.block(j, i)))
            assert np.allclose(bji, bij.conj().T)


def test_sbm_from_dense_roundtrip():
    a = random_sbm(4)
    assert sbm_from_dense(np.asarray(sbm_to_dense(a))) == a


def test_sbm_from_dense_rejects_broken_structure():
    a = random_sbm(3)
    d = np.asarray(sbm_to_dense(a)).copy()
    d[0, 0] += 1e-3  # diagonal block no longer scalar * I
    with pytest.raises(StructureViolation):
        sbm_from_dense(d, tol=1e-9)
    d = np.asarray(sbm_to_dense(a)).copy()
    d[0, 1] = d[0, 1] + 1.0  # diagonal block loses the zero off entry
    with pytest.raises(StructureViolation):
        sbm_from_dense(d, tol=1e-9)


def test_sbm_identity_and_build():
    ident = sbm_identity(3, 2.5)
    assert np.allclose(np.asarray(sbm_to_dense(ident)), 2.5 * np.eye(6))
    built = sbm_build(3, [1.0, 2.0, 3.0], lambda i, j: AlamoutiBlock(i + 1j * j, 0))
    assert built.block(0, 2) == AlamoutiBlock(0 + 2j, 0)


def test_sbm_swap_matches_dense_permutation():
    for m in (2, 3, 5):
        a = random_sbm(m)
        d = np.asarray(sbm_to_dense(a))
        for i in range(m):
            for j in range(m):
                swapped = sbm_swap_blocks(a, i, j)
                perm = list(range(2 * m))
                perm[2 * i], perm[2 * j] = perm[2 * j], perm[2 * i]
                perm[2 * i + 1], perm[2 * j + 1] = perm[2 * j + 1], perm[2 * i + 1]
                oracle = d[np.ix_(perm, perm)]
                assert np.allclose(np.asarray(sbm_to_dense(swapped)), oracle), (m, i, j)


def test_sbm_leading_is_principal_submatrix():
    a = random_sbm(5)
    d = np.asarray(sbm_to_dense(a))
    for k in range(1, 6):
        lead = sbm_leading(a, k)
        assert np.allclose(np.asarray(sbm_to_dense(lead)), d[: 2 * k, : 2 * k])


def test_sbm_matvec_matches_dense():
    for m in (1, 2, 4):
        a = random_sbm(m)
        d = np.asarray(sbm_to_dense(a))
        v = RNG.standard_normal(2 * m) + 1j * RNG.standard_normal(2 * m)
        blocks = [AlamoutiBlock(v[2 * i], v[2 * i + 1]) for i in range(m)]
        out = sbm_matvec(a, blocks)
        flat = np.array([c for b in out for c in (b.a1, b.a2)])
        assert np.allclose(flat, d @ v)


def test_sbm_rejects_bad_shapes():
    with pytest.raises(Exception):
        StructuredHermitianBlockMatrix(2, (1.0,), ())  # diag too short
    with pytest.raises(Exception):
        StructuredHermitianBlockMatrix(2, (1.0, 2.0), (AB_ZERO, AB_ZERO))  # upper too long
    with pytest.raises(StructureViolation):
        sbm_from_dense(np.eye(5))  # odd size
