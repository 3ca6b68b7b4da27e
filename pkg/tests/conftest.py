import pytest

from cayley_stiefel import kalg, stiefel
from cayley_stiefel.kalg import Field
from cayley_stiefel.stiefel import TangentCoords

FIELDS = [Field.REAL, Field.COMPLEX, Field.QUATERNION]


@pytest.fixture(params=FIELDS, ids=[f.value for f in FIELDS])
def field(request):
    return request.param


def random_skew(k, fld, seed, scale=1.0):
    return kalg.skew_hermitian_part(scale * kalg.random_gaussian(k, k, fld, seed))


def random_lift_tangent(n, k, fld, seed, scale=1.0):
    """A random frame, its completion, and random tangent coordinates."""
    x = stiefel.random_stiefel_point(n, k, fld, seed)
    lift = stiefel.complete_lift(x)
    X = scale * kalg.random_gaussian(n - k, k, fld, seed + 7919)
    Y = random_skew(k, fld, seed + 104729, scale)
    return lift, TangentCoords(lift, X, Y)
