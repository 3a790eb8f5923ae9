"""The 24-element single-qubit Clifford group, represented symplectically.

Each element is stored by its conjugation action on the Pauli axes: the image
of X and the image of Z, each a signed Pauli.  That pair (a symplectic 2x2
over GF(2) plus two sign bits) identifies a Clifford uniquely up to global
phase, which is all the graph-state and tableau machinery needs.  The group
table is generated at import time from the H and S matrices so that sign
conventions are fixed by linear algebra rather than by hand.
"""

from __future__ import annotations

import numpy as np

# Pauli axis codes.
_AX_X, _AX_Y, _AX_Z = 0, 1, 2
_AXIS_NAMES = "XYZ"

_SQ2 = 1.0 / np.sqrt(2.0)
_MAT_I = np.eye(2, dtype=complex)
_MAT_H = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
_MAT_S = np.array([[1.0, 0.0], [0.0, 1.0j]], dtype=complex)
_MAT_PAULI = {
    _AX_X: np.array([[0, 1], [1, 0]], dtype=complex),
    _AX_Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    _AX_Z: np.array([[1, 0], [0, -1]], dtype=complex),
}


def _conj_image(mat: np.ndarray, axis: int) -> tuple[int, int]:
    """Return (axis, sign_bit) of mat P mat^dagger for Pauli axis P."""
    img = mat @ _MAT_PAULI[axis] @ mat.conj().T
    for ax, pm in _MAT_PAULI.items():
        if np.allclose(img, pm, atol=1e-9):
            return ax, 0
        if np.allclose(img, -pm, atol=1e-9):
            return ax, 1
    raise AssertionError("conjugation image is not a signed Pauli")


class Clifford1:
    """A single-qubit Clifford, identified by its action on X and Z.

    Attributes:
        x_axis, x_sign: image of X under conjugation, U X U^dag = (-1)^x_sign P.
        z_axis, z_sign: image of Z.
        word: a decomposition into "H"/"S" letters, leftmost applied last.
        name: short label ("I", "H", "S", "SDG", "X", ... or the word itself).
    """

    __slots__ = ("x_axis", "x_sign", "z_axis", "z_sign", "word", "name")

    def __init__(self, x_axis, x_sign, z_axis, z_sign, word="", name=""):
        self.x_axis = x_axis
        self.x_sign = x_sign
        self.z_axis = z_axis
        self.z_sign = z_sign
        self.word = word
        self.name = name

    def key(self) -> tuple[int, int, int, int]:
        return (self.x_axis, self.x_sign, self.z_axis, self.z_sign)

    def __eq__(self, other) -> bool:
        return isinstance(other, Clifford1) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"Clifford1({self.name or self.word or self.key()})"

    # -- group structure ---------------------------------------------------

    def conj_pauli(self, axis: int, sign: int = 0) -> tuple[int, int]:
        """Image (axis, sign) of a signed Pauli under U . U^dagger.

        Y images are derived from the X and Z images via Y = iXZ, which keeps
        every sign consistent with the generating matrices.
        """
        if axis == _AX_X:
            return self.x_axis, (self.x_sign + sign) & 1
        if axis == _AX_Z:
            return self.z_axis, (self.z_sign + sign) & 1
        # U Y U^dag = i (U X U^dag)(U Z U^dag)
        ax, s = _mul_pauli_axes(self.x_axis, self.z_axis)
        return ax, (s + self.x_sign + self.z_sign + sign) & 1

    def compose(self, other: "Clifford1") -> "Clifford1":
        """self o other: the Clifford applying `other` first, then `self`."""
        xa, xs = self.conj_pauli(other.x_axis, other.x_sign)
        za, zs = self.conj_pauli(other.z_axis, other.z_sign)
        return _ELEMENTS_BY_KEY[(xa, xs, za, zs)]

    def inverse(self) -> "Clifford1":
        return _INVERSES[self.key()]

    def is_identity(self) -> bool:
        return self.key() == (_AX_X, 0, _AX_Z, 0)

    def is_pauli(self) -> bool:
        """True for I, X, Y, Z (axes fixed, only signs flipped)."""
        return self.x_axis == _AX_X and self.z_axis == _AX_Z

    def pauli_factor(self) -> tuple[tuple[int, int], "Clifford1"]:
        """Factor U = P . C with P a Pauli and C the canonical coset rep.

        Returns ((x_bit, z_bit), rep): P = X^x_bit Z^z_bit up to phase, and
        rep is the unique element with the same axis images and zero signs.
        """
        rep = _ELEMENTS_BY_KEY[(self.x_axis, 0, self.z_axis, 0)]
        p = self.compose(rep.inverse())
        if not p.is_pauli():
            raise AssertionError("coset factor is not a Pauli")
        # P X P^dag sign flip <=> P contains Z; P Z P^dag flip <=> contains X.
        return (p.z_sign, p.x_sign), rep


def _mul_pauli_axes(a: int, b: int) -> tuple[int, int]:
    """Product of two Pauli axes: sigma_a sigma_b = (+-1 or +-i) sigma_c.

    Only ever called with a != b here (via Y = iXZ), where the i from the
    definition cancels the i from the product; return (axis, sign_bit) of
    i * sigma_a * sigma_b restricted to the cases used by conj_pauli.
    """
    if a == b:
        raise AssertionError("degenerate axis product")
    # i*X*Z = Y by definition; cyclic signs follow from the algebra.
    table = {
        (_AX_X, _AX_Z): (_AX_Y, 0),
        (_AX_Z, _AX_X): (_AX_Y, 1),
        (_AX_X, _AX_Y): (_AX_Z, 1),
        (_AX_Y, _AX_X): (_AX_Z, 0),
        (_AX_Y, _AX_Z): (_AX_X, 1),
        (_AX_Z, _AX_Y): (_AX_X, 0),
    }
    return table[(a, b)]


def _build_group() -> tuple[dict, list]:
    """BFS over <H, S> collecting all 24 actions with shortest words."""
    by_key: dict[tuple, Clifford1] = {}
    frontier = [(_MAT_I, "")]
    ident = Clifford1(*_conj_image(_MAT_I, _AX_X), *_conj_image(_MAT_I, _AX_Z), "", "I")
    by_key[ident.key()] = ident
    while frontier:
        nxt = []
        for mat, word in frontier:
            for gmat, letter in ((_MAT_H, "H"), (_MAT_S, "S")):
                m2 = gmat @ mat
                w2 = letter + word
                xa, xs = _conj_image(m2, _AX_X)
                za, zs = _conj_image(m2, _AX_Z)
                key = (xa, xs, za, zs)
                if key not in by_key:
                    by_key[key] = Clifford1(xa, xs, za, zs, w2, w2)
                    nxt.append((m2, w2))
        frontier = nxt
    assert len(by_key) == 24
    return by_key, list(by_key.values())


_ELEMENTS_BY_KEY, ELEMENTS = _build_group()

# Friendly names for the elements that have common ones.
_ALIASES = {
    "": "I",
    "S": "S",
    "SSS": "SDG",
    "H": "H",
    "SS": "Z",
    "HSSH": "X",
}
for _el in ELEMENTS:
    if _el.word in _ALIASES:
        _el.name = _ALIASES[_el.word]
    else:
        _el.name = _el.word
# Y = X.Z composed; tag it.
for _el in ELEMENTS:
    if _el.key() == (_AX_X, 1, _AX_Z, 1):
        _el.name = "Y"
        _el.word = _el.word or "SSHSSH"

_INVERSES = {}
for _a in ELEMENTS:
    for _b in ELEMENTS:
        if _a.compose(_b).is_identity():
            _INVERSES[_a.key()] = _b
            break

_BY_NAME = {el.name: el for el in ELEMENTS}
_BY_WORD = {el.word: el for el in ELEMENTS}

IDENTITY = _BY_NAME["I"]
H = _BY_NAME["H"]
S = _BY_NAME["S"]
SDG = _BY_NAME["SDG"]
X = _BY_NAME["X"]
Y = _BY_NAME["Y"]
Z = _BY_NAME["Z"]


def by_name(name: str) -> Clifford1:
    """Look up an element by its short name or H/S word."""
    if name in _BY_NAME:
        return _BY_NAME[name]
    if name in _BY_WORD:
        return _BY_WORD[name]
    raise KeyError(f"unknown Clifford name {name!r}")


def by_action(x_axis: str, x_sign: int, z_axis: str, z_sign: int) -> Clifford1:
    """Look up the element with the given conjugation action."""
    key = (_AXIS_NAMES.index(x_axis), x_sign, _AXIS_NAMES.index(z_axis), z_sign)
    return _ELEMENTS_BY_KEY[key]


def matrix_of(el: Clifford1) -> np.ndarray:
    """A 2x2 unitary realizing the element (global phase arbitrary)."""
    mat = _MAT_I
    for letter in reversed(el.word):
        mat = (_MAT_H if letter == "H" else _MAT_S) @ mat
    return mat


# Square-root Paulis used by local-complementation corrections.  Principal
# roots: sqrt(-iP) = exp(-i pi/4 P) and sqrt(+iP) = exp(+i pi/4 P).
# sqrt(-iX) = exp(-i pi/4 X): X -> X,  Z -> -Y.
SQRT_MINUS_IX = by_action("X", 0, "Y", 1)
SQRT_PLUS_IX = by_action("X", 0, "Y", 0)
# sqrt(+iZ) = exp(+i pi/4 Z) ~ SDG: X -> -Y; sqrt(-iZ) ~ S: X -> +Y.
SQRT_PLUS_IZ = by_action("Y", 1, "Z", 0)
SQRT_MINUS_IZ = by_action("Y", 0, "Z", 0)
# sqrt(+iY) = exp(+i pi/4 Y): X -> Z, Z -> -X.
SQRT_PLUS_IY = by_action("Z", 0, "X", 1)
SQRT_MINUS_IY = by_action("Z", 1, "X", 0)
