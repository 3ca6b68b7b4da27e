"""Cayley transform on the compact Stiefel manifold of orthonormal k-frames.

Implements the projection from the group onto the manifold, frame completion
(lifting), the Stiefel Cayley transform and its inverse, its differential
and injectivity predicates, local sections of the projection, and the
contraction of a Cayley open subset onto a point.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import group, kalg
from .group import GroupElement, InvalidTangent, SkewBlockTangent
from .kalg import Field, Mat, Singular

POINT_CHECK_TOL = 1e-8


class OutsideCayleyOpen(Exception):
    """Raised when a target point falls outside the Cayley open subset."""


class RankDeficient(Exception):
    """Raised when random frame generation keeps hitting rank-deficient draws."""


@dataclass(frozen=True)
class StiefelPoint:
    """An n x k matrix x with x*x = I_k: an orthonormal k-frame in K^n."""

    m: Mat
    check_tol: float = dc_field(default=POINT_CHECK_TOL, repr=False)

    def __post_init__(self):
        n, k = self.m.shape
        if k > n:
            raise ValueError(f"need k <= n, got n={n}, k={k}")
        resid = kalg.frobenius_norm(self.m.H @ self.m - kalg.identity(k, self.m.field))
        if resid > self.check_tol:
            raise ValueError(f"x*x - I residual {resid:.3e} exceeds {self.check_tol:.1e}")

    @property
    def n(self) -> int:
        return self.m.rows

    @property
    def k(self) -> int:
        return self.m.cols

    @property
    def field(self) -> Field:
        return self.m.field

    @property
    def T(self) -> Mat:
        """Top (n-k) x k block."""
        return self.m.block(0, self.n - self.k, 0, self.k)

    @property
    def P(self) -> Mat:
        """Bottom k x k block."""
        return self.m.block(self.n - self.k, self.n, 0, self.k)


@dataclass(frozen=True)
class Lift:
    """A group element A whose last k columns are exactly the frame x."""

    point: StiefelPoint
    A: GroupElement

    def __post_init__(self):
        n, k = self.point.n, self.point.k
        if self.A.n != n:
            raise ValueError("lift dimension mismatch")
        if not np.array_equal(self.A.m.data[:, n - k:], self.point.m.data):
            raise ValueError("last k columns of A must equal x exactly")

    @property
    def n(self) -> int:
        return self.point.n

    @property
    def k(self) -> int:
        return self.point.k

    @property
    def field(self) -> Field:
        return self.point.field

    @property
    def alpha(self) -> Mat:
        n, k = self.n, self.k
        return self.A.m.block(0, n - k, 0, n - k)

    @property
    def beta(self) -> Mat:
        n, k = self.n, self.k
        return self.A.m.block(n - k, n, 0, n - k)

    @property
    def T(self) -> Mat:
        return self.point.T

    @property
    def P(self) -> Mat:
        return self.point.P


@dataclass(frozen=True)
class TangentCoords:
    """Coordinates (X, Y) of the tangent vector v = A [X; Y] at x.

    X is (n-k) x k, Y is k x k skew-Hermitian; the lift is carried along
    because the Stiefel Cayley transform genuinely depends on it.
    """

    lift: Lift
    X: Mat
    Y: Mat
    check_tol: float = dc_field(default=POINT_CHECK_TOL, repr=False)

    def __post_init__(self):
        n, k = self.lift.n, self.lift.k
        if self.X.shape != (n - k, k) or self.Y.shape != (k, k):
            raise ValueError("tangent block shapes do not match the lift")
        resid = kalg.frobenius_norm(self.Y + self.Y.H)
        if resid > self.check_tol * max(1.0, kalg.frobenius_norm(self.Y)):
            raise InvalidTangent(f"Y + Y* residual {resid:.3e}")

    @property
    def field(self) -> Field:
        return self.lift.field

    def scaled(self, t: float) -> "TangentCoords":
        return TangentCoords(self.lift, t * self.X, t * self.Y, self.check_tol)

    def ambient(self) -> Mat:
        """The n x k tangent vector v = A [X; Y]."""
        return self.lift.A.m @ kalg.vstack(self.X, self.Y)

    def ambient_group(self) -> Mat:
        """The n x n tangent vector A [[0, X], [-X*, Y]] at A in the group."""
        return self.lift.A.m @ SkewBlockTangent(self.X, self.Y).embed()


def rho(A: GroupElement, k: int) -> StiefelPoint:
    """Projection onto the last k columns of a group element."""
    return StiefelPoint(A.m.block(0, A.n, A.n - k, A.n))


def _mgs_project(v: np.ndarray, basis_cols: list[np.ndarray], S: np.ndarray) -> np.ndarray:
    # v <- v - u <u, v> for each orthonormal column u, in order (modified GS)
    for u in basis_cols:
        coeff = np.einsum("ia,ib,abc->c", _conj(u), v, S)
        v = v - np.einsum("ib,c,bcd->id", u, coeff, S)
    return v


def _conj(col: np.ndarray) -> np.ndarray:
    out = col.copy()
    out[:, 1:] *= -1.0
    return out


def complete_lift(x: StiefelPoint) -> Lift:
    """Complete a frame x to a group element A with last k columns equal to x.

    Modified Gram-Schmidt is run on the standard basis vectors against the
    columns of x and previously accepted survivors; each slot takes the
    candidate with the largest residual norm (ties broken by lowest index),
    which keeps the pivot bounded below by sqrt((n-k)/n) at every step.  At
    the base frame [0; I_k] this yields A = I_n exactly.
    """
    n, k = x.n, x.k
    S = kalg._STRUCTURE[x.field]
    xcols = [x.m.data[:, j] for j in range(k)]
    survivors: list[np.ndarray] = []
    while len(survivors) < n - k:
        best = None
        best_norm = 0.0
        for i in range(n):
            e = np.zeros((n, x.field.ncomp))
            e[i, 0] = 1.0
            v = _mgs_project(e, xcols + survivors, S)
            norm = float(np.linalg.norm(v))
            if norm > best_norm + 1e-12:
                best, best_norm = v, norm
        if best is None or best_norm < 1e-8:
            raise RuntimeError("frame completion lost rank; floating noise defeated Gram-Schmidt")
        survivors.append(best / best_norm)
    if survivors:
        left = np.stack(survivors, axis=1)
        data = np.concatenate([left, x.m.data], axis=1)
    else:
        data = x.m.data
    A = GroupElement(Mat(x.field, data), check_tol=1e-10)
    return Lift(x, A)


def tangent_from_ambient(lift: Lift, v: Mat, tol: float = POINT_CHECK_TOL) -> TangentCoords:
    """Coordinates (X, Y) of an ambient tangent vector v at x, via A*v = [X; Y]."""
    x = lift.point.m
    resid = kalg.frobenius_norm(v.H @ x + x.H @ v)
    if resid > tol * max(1.0, kalg.frobenius_norm(v)):
        raise InvalidTangent(f"v*x + x*v residual {resid:.3e}")
    B = lift.A.m.H @ v
    n, k = lift.n, lift.k
    X = B.block(0, n - k, 0, k)
    Y = B.block(n - k, n, 0, k)
    return TangentCoords(lift, X, Y, check_tol=tol)


def gamma(t: TangentCoords, tol: float = kalg.DEFAULT_TOL) -> StiefelPoint:
    """The Stiefel Cayley transform of the tangent vector with coordinates t.

    Evaluates 2 [-Xb; b] (beta X + P)* + [beta*; -P*] with
    b = (I + X*X + Y)^{-1}; only a k x k inversion is needed.
    """
    lift = t.lift
    b = group.b_matrix(t.X, t.Y, tol)
    right = (lift.beta @ t.X + lift.P).H
    top = -2.0 * ((t.X @ b) @ right) + lift.beta.H
    bot = 2.0 * (b @ right) - lift.P.H
    return StiefelPoint(kalg.vstack(top, bot))


def in_injectivity_domain(t: TangentCoords, tol: float = kalg.DEFAULT_TOL) -> bool:
    """Whether the tangent vector lies where the transform is injective.

    The criterion is invertibility of beta X + P; it does not depend on the
    choice of lift.
    """
    return kalg.is_invertible(t.lift.beta @ t.X + t.lift.P, tol)


def in_cayley_open(x: StiefelPoint, y: StiefelPoint, tol: float = kalg.DEFAULT_TOL) -> bool:
    """Whether y lies in the Cayley open subset attached to x.

    Membership means pi + P* is invertible, with pi the bottom block of y
    and P the bottom block of x.
    """
    if (x.n, x.k) != (y.n, y.k) or x.field is not y.field:
        raise ValueError("x and y must share shape and base ring")
    return kalg.is_invertible(y.P + x.P.H, tol)


def gamma_inverse(lift: Lift, y: StiefelPoint, tol: float = kalg.DEFAULT_TOL) -> TangentCoords:
    """Tangent coordinates mapping to y under the Stiefel Cayley transform.

    Uses X = -(tau - beta*)(pi + P*)^{-1}, then
    b = (1/2)(pi + P*)[(beta X + P)*]^{-1}, and Y as the skew-Hermitian
    part of b^{-1}.  Requires y in the Cayley open subset of the lift's
    base point.
    """
    tau, pi = y.T, y.P
    try:
        C_inv = kalg.mat_inverse(pi + lift.P.H, tol)
    except Singular as exc:
        raise OutsideCayleyOpen(f"pi + P* is singular: {exc}") from exc
    X = -((tau - lift.beta.H) @ C_inv)
    b = 0.5 * ((pi + lift.P.H) @ kalg.mat_inverse((lift.beta @ X + lift.P).H, tol))
    Y = kalg.skew_hermitian_part(kalg.mat_inverse(b, tol))
    return TangentCoords(lift, X, Y)


def gamma_differential(t: TangentCoords, M: Mat, N: Mat,
                       tol: float = kalg.DEFAULT_TOL) -> Mat:
    """Differential of the Stiefel Cayley transform at t, applied to (M, N).

    With xi = X*M + M*X + N the result is the stacked pair
    (-2MbX* + 2Xb xi bX* - 2XbM*) beta* + (-2Mb + 2Xb xi b) P* on top of
    (-2b xi bX* + 2bM*) beta* - 2b xi b P*.
    """
    lift = t.lift
    n, k = lift.n, lift.k
    if M.shape != (n - k, k) or N.shape != (k, k):
        raise ValueError("direction block shapes do not match the lift")
    resid = kalg.frobenius_norm(N + N.H)
    if resid > POINT_CHECK_TOL * max(1.0, kalg.frobenius_norm(N)):
        raise InvalidTangent(f"N + N* residual {resid:.3e}")
    X = t.X
    b = group.b_matrix(X, t.Y, tol)
    xi = X.H @ M + M.H @ X + N
    bXh = b @ X.H
    xib = xi @ b
    top = (-2.0 * (M @ bXh) + 2.0 * (X @ (b @ (xib @ X.H))) - 2.0 * ((X @ b) @ M.H)) @ lift.beta.H \
        + (-2.0 * (M @ b) + 2.0 * (X @ (b @ xib))) @ lift.P.H
    bot = (-2.0 * (b @ (xib @ X.H)) + 2.0 * (b @ M.H)) @ lift.beta.H \
        - 2.0 * ((b @ xib) @ lift.P.H)
    return kalg.vstack(top, bot)


def differential_is_injective(t: TangentCoords, tol: float = kalg.DEFAULT_TOL) -> bool:
    """Whether the differential at t is injective: invertibility of beta X + P."""
    return kalg.is_invertible(t.lift.beta @ t.X + t.lift.P, tol)


def kernel_witness(t: TangentCoords, tol: float = kalg.DEFAULT_TOL) -> Mat | None:
    """A nonzero skew-Hermitian N with the differential vanishing on (0, N).

    Such an N satisfies N b (beta X + P)* = 0; it is found by solving that
    linear condition over the real components of a skew-Hermitian basis.
    Returns None when no such direction exists (in particular whenever
    beta X + P is invertible, and over R with k = 1 where the only skew
    matrix is zero).
    """
    lift = t.lift
    k = lift.k
    b = group.b_matrix(t.X, t.Y, tol)
    K = b @ (lift.beta @ t.X + lift.P).H
    basis = kalg.skew_hermitian_basis(k, t.field)
    if not basis:
        return None
    cols = [np.ravel((B @ K).data) for B in basis]
    A = np.stack(cols, axis=1)
    _, s, vt = np.linalg.svd(A)
    if s.size and s[-1] > 1e-10 * max(1.0, s[0]):
        return None
    coeffs = vt[-1]
    N = kalg.zeros(k, k, t.field)
    for c, B in zip(coeffs, basis):
        N = N + float(c) * B
    norm = kalg.frobenius_norm(N)
    if norm == 0.0:
        return None
    return (1.0 / norm) * N


def differential_min_gain(t: TangentCoords, tol: float = kalg.DEFAULT_TOL) -> float:
    """Smallest singular value of the differential over unit tangent directions.

    The differential is assembled as a real linear operator over an
    orthonormal basis of the (M, N) parameter space; the value is the
    least achievable output norm over unit-norm inputs.
    """
    lift = t.lift
    n, k = lift.n, lift.k
    basis_M = kalg.unit_matrix_basis(n - k, k, t.field)
    basis_N = kalg.skew_hermitian_basis(k, t.field)
    zero_M = kalg.zeros(n - k, k, t.field)
    zero_N = kalg.zeros(k, k, t.field)
    cols = [np.ravel(gamma_differential(t, B, zero_N, tol).data) for B in basis_M]
    cols += [np.ravel(gamma_differential(t, zero_M, B, tol).data) for B in basis_N]
    A = np.stack(cols, axis=1)
    return float(np.linalg.svd(A, compute_uv=False)[-1])


def local_section(lift: Lift, y: StiefelPoint, tol: float = kalg.DEFAULT_TOL) -> GroupElement:
    """Local section of the projection over the Cayley open subset at x.

    Applies the group Cayley transform based at A to the ambient tangent
    recovered by gamma_inverse; the result is a group element whose last k
    columns agree with y.
    """
    coords = gamma_inverse(lift, y, tol)
    W = coords.ambient_group()
    return GroupElement(group.cayley_at(lift.A, W, tol))


def contraction(lift: Lift, y: StiefelPoint, t: float,
                tol: float = kalg.DEFAULT_TOL) -> StiefelPoint:
    """Contraction homotopy H(y, t) of the Cayley open subset at x.

    Evaluates the composition of the section, the inverse group transform,
    scaling by t and the forward group transform, then projects back to the
    manifold.  H(y, 0) is the transform of the zero tangent and H(y, 1) = y.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError("homotopy parameter must lie in [0, 1]")
    s = local_section(lift, y, tol)
    A_star = lift.A.inverse
    u = group.cayley_at(A_star, s.m, tol)
    try:
        out = group.cayley_at(lift.A, t * u, tol)
    except Singular as exc:
        raise Singular(f"intermediate Cayley domain check failed at t={t}: {exc}") from exc
    return rho(GroupElement(out), lift.k)


def lift_change_equivariance_check(lift: Lift, E: GroupElement, t: TangentCoords) -> float:
    """Residual of the lift-change identity for the Stiefel Cayley transform.

    Replacing the lift A by A * diag(E, I_k) multiplies the transform's
    value by diag(E*, I_k) on the left; this returns the Frobenius norm of
    the difference between the two sides.
    """
    n, k = lift.n, lift.k
    if E.n != n - k:
        raise ValueError("E must act on the first n - k columns")
    blk = kalg.vstack(
        kalg.hstack(E.m, kalg.zeros(n - k, k, lift.field)),
        kalg.hstack(kalg.zeros(k, n - k, lift.field), kalg.identity(k, lift.field)),
    )
    AE = GroupElement(lift.A.m @ blk)
    lift_E = Lift(lift.point, AE)
    t_E = TangentCoords(lift_E, E.m.H @ t.X, t.Y)
    lhs = gamma(t_E).m
    blk_star = kalg.vstack(
        kalg.hstack(E.m.H, kalg.zeros(n - k, k, lift.field)),
        kalg.hstack(kalg.zeros(k, n - k, lift.field), kalg.identity(k, lift.field)),
    )
    rhs = blk_star @ gamma(t).m
    return kalg.frobenius_norm(lhs - rhs)


def random_stiefel_point(n: int, k: int, field: Field, seed: int) -> StiefelPoint:
    """Random orthonormal frame: Gram-Schmidt applied to a Gaussian matrix."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    S = kalg._STRUCTURE[field]
    for attempt in range(3):
        raw = kalg.random_gaussian(n, k, field, seed + 1_000_003 * attempt)
        cols: list[np.ndarray] = []
        ok = True
        for j in range(k):
            v = _mgs_project(raw.data[:, j], cols, S)
            norm = float(np.linalg.norm(v))
            if norm < 1e-8:
                ok = False
                break
            cols.append(v / norm)
        if ok:
            data = np.stack(cols, axis=1) if cols else np.zeros((n, 0, field.ncomp))
            return StiefelPoint(Mat(field, data), check_tol=1e-12)
    raise RankDeficient(f"could not draw a full-rank {n}x{k} frame")


def point_to_json(x: StiefelPoint) -> dict:
    return {"n": x.n, "k": x.k, "matrix": kalg.mat_to_json(x.m)}


def point_from_json(obj: dict) -> StiefelPoint:
    m = kalg.mat_from_json(obj["matrix"])
    if m.shape != (int(obj["n"]), int(obj["k"])):
        raise ValueError("header dimensions disagree with the matrix payload")
    return StiefelPoint(m)


def lift_to_json(lift: Lift) -> dict:
    return {"n": lift.n, "k": lift.k, "point": point_to_json(lift.point),
            "A": kalg.mat_to_json(lift.A.m)}


def lift_from_json(obj: dict) -> Lift:
    point = point_from_json(obj["point"])
    return Lift(point, GroupElement(kalg.mat_from_json(obj["A"])))
