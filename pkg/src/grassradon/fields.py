"""Scalar algebra tables for the three normed division algebras.

Matrices over R, C or H are stored as float64 arrays whose trailing axis
holds the real components of each entry: shape (..., n, k, d) with
d = 1, 2, 4. Multiplication is encoded by index/sign tables so that

    (a * b)_idx[p][q] += sign[p][q] * a_p * b_q

which keeps one code path for all three fields and is directly usable
from jitted kernels.
"""

from dataclasses import dataclass

import numpy as np

# index/sign tables for the basis (1,), (1, i), (1, i, j, k)
_MULT_INDEX = {
    1: np.array([[0]], dtype=np.int64),
    2: np.array([[0, 1], [1, 0]], dtype=np.int64),
    4: np.array(
        [
            [0, 1, 2, 3],
            [1, 0, 3, 2],
            [2, 3, 0, 1],
            [3, 2, 1, 0],
        ],
        dtype=np.int64,
    ),
}

_MULT_SIGN = {
    1: np.array([[1.0]]),
    2: np.array([[1.0, 1.0], [1.0, -1.0]]),
    4: np.array(
        [
            [1.0, 1.0, 1.0, 1.0],
            [1.0, -1.0, 1.0, -1.0],
            [1.0, -1.0, -1.0, 1.0],
            [1.0, 1.0, -1.0, -1.0],
        ]
    ),
}


def _dense_tensor(d):
    t = np.zeros((d, d, d))
    idx, sgn = _MULT_INDEX[d], _MULT_SIGN[d]
    for a in range(d):
        for b in range(d):
            t[a, b, idx[a, b]] = sgn[a, b]
    return t


_MULT_TENSOR = {d: _dense_tensor(d) for d in (1, 2, 4)}

_NAMES = {1: "R", 2: "C", 4: "H"}


@dataclass(frozen=True)
class FieldTag:
    """Selects the base field and carries its real dimension d."""

    name: str
    d: int

    def __post_init__(self):
        if self.d not in (1, 2, 4) or _NAMES[self.d] != self.name:
            raise ValueError(f"inconsistent field tag ({self.name}, d={self.d})")

    @property
    def mult_index(self):
        return _MULT_INDEX[self.d]

    @property
    def mult_sign(self):
        return _MULT_SIGN[self.d]

    @property
    def mult_tensor(self):
        return _MULT_TENSOR[self.d]

    @property
    def conj_sign(self):
        s = np.ones(self.d)
        s[1:] = -1.0
        return s

    def __str__(self):
        return self.name


REAL = FieldTag("R", 1)
COMPLEX = FieldTag("C", 2)
QUATERNION = FieldTag("H", 4)

_ALIASES = {
    "r": REAL,
    "real": REAL,
    "c": COMPLEX,
    "complex": COMPLEX,
    "h": QUATERNION,
    "quaternion": QUATERNION,
}


def field_from_string(s):
    """Parse 'R' / 'C' / 'H' (case-insensitive, long names accepted)."""
    try:
        return _ALIASES[str(s).strip().lower()]
    except KeyError:
        raise ValueError(f"unknown field {s!r}; expected one of R, C, H") from None


ALL_FIELDS = (REAL, COMPLEX, QUATERNION)
