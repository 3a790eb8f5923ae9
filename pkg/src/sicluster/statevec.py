"""Dense state-vector backend: the brute-force oracle for everything else.

Capped at 22 qubits (64 MiB of complex amplitudes).  Qubit q is tensor axis
q of the amplitude array reshaped to [2]*n, i.e. basis index bit weight
2^(n-1-q).  Norm is maintained to 1e-9 and checked.
"""

from __future__ import annotations

import numpy as np

from sicluster import cliffords
from sicluster.graphstate import GraphState
from sicluster.rng import draw_sign_bit
from sicluster.tableau import Basis, PauliString, StabilizerTableau, tableau_from_stabilizers

MAX_QUBITS = 22
ATOL = 1e-9

_SQ2 = 1.0 / np.sqrt(2.0)
MAT_I = np.eye(2, dtype=complex)
MAT_X = np.array([[0, 1], [1, 0]], dtype=complex)
MAT_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
MAT_Z = np.array([[1, 0], [0, -1]], dtype=complex)
MAT_H = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
MAT_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_PAULI_MATS = {"X": MAT_X, "Y": MAT_Y, "Z": MAT_Z}

KET_PLUS = np.array([_SQ2, _SQ2], dtype=complex)
KET_MINUS = np.array([_SQ2, -_SQ2], dtype=complex)
KET_PLUS_I = np.array([_SQ2, 1j * _SQ2], dtype=complex)
KET_MINUS_I = np.array([_SQ2, -1j * _SQ2], dtype=complex)


def mat_rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


class SizeCapError(RuntimeError):
    """Raised when a dense simulation would exceed the qubit cap."""


class ZeroProbabilityError(RuntimeError):
    """Raised when projecting onto a zero-probability branch."""


class StateVector:
    """A pure state on n <= 22 qubits with in-place gate application."""

    def __init__(self, n: int, psi: np.ndarray | None = None):
        if n < 1:
            raise ValueError("need at least one qubit")
        if n > MAX_QUBITS:
            raise SizeCapError(f"{n} qubits exceeds the dense cap of {MAX_QUBITS}")
        self.n = n
        if psi is None:
            self.psi = np.zeros(1 << n, dtype=complex)
            self.psi[0] = 1.0
        else:
            psi = np.asarray(psi, dtype=complex).reshape(-1)
            if psi.shape[0] != 1 << n:
                raise ValueError("amplitude count does not match qubit count")
            self.psi = psi.copy()
            self._check_norm()

    @classmethod
    def all_plus(cls, n: int) -> "StateVector":
        sv = cls(n)
        sv.psi[:] = 1.0 / np.sqrt(1 << n)
        return sv

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.psi)

    def _check_norm(self) -> None:
        if abs(np.linalg.norm(self.psi) - 1.0) > 1e-7:
            raise AssertionError("state norm drifted")

    # -- gates ----------------------------------------------------------------

    def _axis_view(self, q: int) -> np.ndarray:
        return self.psi.reshape(1 << q, 2, 1 << (self.n - 1 - q))

    def apply_1q(self, mat: np.ndarray, q: int) -> "StateVector":
        view = self._axis_view(q)
        x0, x1 = view[:, 0, :], view[:, 1, :]
        if mat[0, 1] == 0 and mat[1, 0] == 0:  # diagonal: scale in place
            if mat[0, 0] != 1:
                x0 *= mat[0, 0]
            if mat[1, 1] != 1:
                x1 *= mat[1, 1]
            return self
        t0 = mat[0, 0] * x0 + mat[0, 1] * x1
        t1 = mat[1, 0] * x0 + mat[1, 1] * x1
        view[:, 0, :] = t0
        view[:, 1, :] = t1
        return self

    def apply_gate(self, name: str, q: int) -> "StateVector":
        mats = {"H": MAT_H, "S": MAT_S, "SDG": MAT_S.conj().T,
                "X": MAT_X, "Y": MAT_Y, "Z": MAT_Z}
        return self.apply_1q(mats[name.upper()], q)

    def apply_clifford1(self, el: cliffords.Clifford1, q: int) -> "StateVector":
        return self.apply_1q(cliffords.matrix_of(el), q)

    def apply_cz(self, a: int, b: int) -> "StateVector":
        if a == b:
            raise ValueError("CZ targets must differ")
        psi = self.psi.reshape([2] * self.n)
        idx = [slice(None)] * self.n
        idx[a] = 1
        idx[b] = 1
        psi[tuple(idx)] *= -1
        return self

    def apply_cphase(self, theta: float, a: int, b: int) -> "StateVector":
        psi = self.psi.reshape([2] * self.n)
        idx = [slice(None)] * self.n
        idx[a] = 1
        idx[b] = 1
        psi[tuple(idx)] *= np.exp(1j * theta)
        return self

    def apply_cnot(self, a: int, b: int) -> "StateVector":
        psi = self.psi.reshape([2] * self.n)
        psi = np.moveaxis(psi, (a, b), (0, 1))
        psi[1] = psi[1, ::-1]
        self.psi = np.moveaxis(psi, (0, 1), (a, b)).reshape(-1)
        return self

    def apply_pauli(self, p: PauliString) -> "StateVector":
        if p.n != self.n:
            raise ValueError("size mismatch")
        for q in p.support():
            q = int(q)
            name = "IXZY"[int(p.x[q]) + 2 * int(p.z[q])]
            self.apply_1q(_PAULI_MATS[name], q)
        self.psi *= p.phase
        return self

    # -- measurement ----------------------------------------------------------

    def prob_one(self, q: int) -> float:
        x1 = self._axis_view(q)[:, 1, :]
        return float(np.einsum("ij,ij->", x1.real, x1.real)
                     + np.einsum("ij,ij->", x1.imag, x1.imag))

    def project_z(self, q: int, bit: int, renormalize: bool = True,
                  prob: float | None = None) -> float:
        """Project qubit q onto |bit>; returns the branch probability."""
        if prob is None:
            p1 = self.prob_one(q)
            prob = p1 if bit else 1.0 - p1
        if prob < ATOL:
            raise ZeroProbabilityError(f"branch |{bit}> on qubit {q} has zero probability")
        self._axis_view(q)[:, 1 - bit, :] = 0.0
        if renormalize:
            self.psi *= 1.0 / np.sqrt(prob)
        return prob

    def _measure_eigvecs(self, q: int, v_plus: np.ndarray, v_minus: np.ndarray,
                         rng) -> tuple[int, bool]:
        """Measure the observable whose +-1 eigenvectors are given.

        Projects directly onto the eigenvector (one half-size contraction
        plus an expansion) instead of rotating the whole state into the Z
        frame and back.  The qubit is left in the observed eigenstate.
        """
        view = self._axis_view(q)
        x0, x1 = view[:, 0, :], view[:, 1, :]
        a_minus = np.conj(v_minus[0]) * x0 + np.conj(v_minus[1]) * x1
        p_minus = float(np.einsum("ij,ij->", a_minus.real, a_minus.real)
                        + np.einsum("ij,ij->", a_minus.imag, a_minus.imag))
        if p_minus < ATOL:
            outcome, det, bit = 1, True, 0
        elif p_minus > 1 - ATOL:
            outcome, det, bit = -1, True, 1
        else:
            bit = draw_sign_bit(rng, p_minus)
            outcome, det = (-1 if bit else 1), False
        if bit:
            amp = a_minus * (1.0 / np.sqrt(p_minus))
            vec = v_minus
        else:
            amp = np.conj(v_plus[0]) * x0 + np.conj(v_plus[1]) * x1
            amp *= 1.0 / np.sqrt(max(1.0 - p_minus, ATOL))
            vec = v_plus
        view[:, 0, :] = vec[0] * amp
        view[:, 1, :] = vec[1] * amp
        return outcome, det

    def measure(self, q: int, basis: Basis, rng) -> tuple[int, bool]:
        """Projective Pauli measurement; returns (outcome, deterministic).

        Mirrors the tableau backend's draw discipline: deterministic outcomes
        consume no randomness, random ones consume exactly one draw.
        """
        if basis == Basis.Z:
            p_minus = self.prob_one(q)
            if p_minus < ATOL:
                outcome, det, bit = 1, True, 0
            elif p_minus > 1 - ATOL:
                outcome, det, bit = -1, True, 1
            else:
                bit = draw_sign_bit(rng, p_minus)
                outcome, det = (-1 if bit else 1), False
            self.project_z(q, bit, prob=(p_minus if bit else 1.0 - p_minus))
            return outcome, det
        if basis == Basis.X:
            return self._measure_eigvecs(q, KET_PLUS, KET_MINUS, rng)
        return self._measure_eigvecs(q, KET_PLUS_I, KET_MINUS_I, rng)

    def measure_xy_angle(self, q: int, alpha: float, rng) -> tuple[int, bool]:
        """Measure cos(a) X + sin(a) Y; qubit left in the observed eigenstate."""
        frame = mat_rz(alpha) @ MAT_H
        return self._measure_eigvecs(q, frame[:, 0], frame[:, 1], rng)

    def contract(self, q: int, local: np.ndarray) -> "StateVector":
        """Remove qubit q by projecting onto the given normalized 1-qubit state."""
        psi = self.psi.reshape([2] * self.n)
        new = np.tensordot(np.conj(local), psi, axes=([0], [q]))
        norm = np.linalg.norm(new)
        if norm < 1 - 1e-6:
            raise ZeroProbabilityError(
                f"qubit {q} is not in the requested product state (norm {norm:.3g})")
        out = StateVector.__new__(StateVector)
        out.n = self.n - 1
        out.psi = (new / norm).reshape(-1)
        return out

    # -- queries ----------------------------------------------------------------

    def expectation(self, p: PauliString) -> complex:
        work = self.copy().apply_pauli(p)
        return complex(np.vdot(self.psi, work.psi))

    def fidelity(self, other: "StateVector") -> float:
        """|<self|other>|, insensitive to global phase."""
        if self.n != other.n:
            raise ValueError("size mismatch")
        return float(abs(np.vdot(self.psi, other.psi)))




def sv_run(source, operations, rng=None) -> tuple[StateVector, list[tuple[int, str, int]]]:
    """Convenience driver: prepare, apply a gate list, collect measurements.

    ``source`` is a qubit count (all-|+> register) or a GraphState.
    Operations are tuples: ("H"|"S"|"SDG"|"X"|"Y"|"Z", q), ("CZ"|"CNOT", a, b),
    ("CPHASE", theta, a, b), ("M", q, "X"|"Y"|"Z").  Returns the final state
    and the ordered (qubit, basis, outcome) measurement list.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if isinstance(source, GraphState):
        _, sv = graph_to_statevector(source)
    else:
        sv = StateVector.all_plus(int(source))
    outcomes: list[tuple[int, str, int]] = []
    for op in operations:
        name = op[0].upper()
        if name == "M":
            _, q, basis = op
            out, _ = sv.measure(q, Basis(basis), rng)
            outcomes.append((q, basis, out))
        elif name == "CZ":
            sv.apply_cz(op[1], op[2])
        elif name in ("CNOT", "CX"):
            sv.apply_cnot(op[1], op[2])
        elif name == "CPHASE":
            sv.apply_cphase(op[1], op[2], op[3])
        else:
            sv.apply_gate(name, op[1])
    return sv, outcomes


def graph_to_statevector(g: GraphState) -> tuple[list[int], StateVector]:
    """Dense state of a graph state incl. vertex operators.

    Returns (sorted vertex ids, state); qubit index = position in the id list.
    """
    ids = sorted(g.vertices())
    index = {v: i for i, v in enumerate(ids)}
    sv = StateVector.all_plus(len(ids))
    for u, v in g.edges():
        sv.apply_cz(index[u], index[v])
    for v in ids:
        op = g.op(v)
        if not op.is_identity():
            sv.apply_clifford1(op, index[v])
    return ids, sv


def tableau_to_statevector(t: StabilizerTableau) -> StateVector:
    """Render a tableau densely by projecting onto its stabilizer group."""
    n = t.n
    if n > MAX_QUBITS:
        raise SizeCapError("tableau too large for dense rendering")
    rows = t.stabilizer_rows()
    for start in range(1 << n):
        sv = StateVector(n)
        sv.psi[:] = 0
        sv.psi[start] = 1.0
        ok = True
        for row in rows:
            proj = sv.copy().apply_pauli(row)
            sv.psi = 0.5 * (sv.psi + proj.psi)
            norm = np.linalg.norm(sv.psi)
            if norm < 1e-12:
                ok = False
                break
            sv.psi /= norm
        if ok:
            return sv
    raise AssertionError("no basis state overlaps the stabilizer state")


def tableau_from_statevector(psi: np.ndarray, tol: float = 1e-8) -> StabilizerTableau:
    """Reconstruct the stabilizer tableau of a dense stabilizer state.

    Uses the affine-support normal form: a stabilizer state has uniform
    amplitude magnitude over an affine subspace of basis indices with phases
    i^(quadratic form).  Raises ValueError when the input is not a stabilizer
    state to tolerance.
    """
    psi = np.asarray(psi, complex).reshape(-1)
    dim = psi.shape[0]
    n = int(round(np.log2(dim)))
    if 1 << n != dim:
        raise ValueError("amplitude count is not a power of two")
    amax = np.abs(psi).max()
    if amax < tol:
        raise ValueError("zero state")
    support = np.flatnonzero(np.abs(psi) > 0.5 * amax)
    if np.any((np.abs(psi) > tol * amax) & (np.abs(psi) <= 0.5 * amax)):
        raise ValueError("amplitude magnitudes are not uniform on the support")
    d = support.size
    k = int(round(np.log2(d)))
    if 1 << k != d:
        raise ValueError("support size is not a power of two")

    t0 = int(support[0])
    cosets = set(int(s) ^ t0 for s in support)
    basis: list[int] = []
    span = {0}
    for v in sorted(cosets):
        if v not in span:
            basis.append(v)
            span |= {s ^ v for s in span}
    if len(basis) != k or span != cosets:
        raise ValueError("support is not an affine subspace")

    def coord_index(u: int) -> int:
        x = t0
        for j in range(k):
            if (u >> j) & 1:
                x ^= basis[j]
        return x

    base_amp = psi[t0]
    kappa = np.zeros(1 << k, np.int64)
    for u in range(1 << k):
        c = psi[coord_index(u)] / base_amp
        if abs(abs(c) - 1.0) > 1e-6:
            raise ValueError("non-uniform amplitude ratio")
        ang = np.angle(c) / (np.pi / 2)
        kr = int(np.round(ang)) & 3
        if abs(ang - np.round(ang)) > 1e-6:
            raise ValueError("amplitude phases are not powers of i")
        kappa[u] = kr
    cvec = [int(kappa[1 << j]) for j in range(k)]
    bmat = np.zeros((k, k), np.int64)
    for j in range(k):
        for l in range(j + 1, k):
            diff = (int(kappa[(1 << j) | (1 << l)]) - cvec[j] - cvec[l]) % 4
            if diff & 1:
                raise ValueError("phase function is not quadratic over GF(2)")
            bmat[j, l] = bmat[l, j] = diff >> 1
    # Verify the quadratic model on the whole support.
    for u in range(1 << k):
        ubits = [(u >> j) & 1 for j in range(k)]
        pred = sum(cvec[j] * ubits[j] for j in range(k))
        pred += 2 * sum(bmat[j, l] * ubits[j] * ubits[l]
                        for j in range(k) for l in range(j + 1, k))
        if (pred - kappa[u]) % 4:
            raise ValueError("phases do not fit a quadratic form")

    def int_bits(value: int) -> np.ndarray:
        return np.array([(value >> (n - 1 - q)) & 1 for q in range(n)], np.uint8)

    t0_bits = int_bits(t0)
    rmat = np.array([int_bits(b) for b in basis], np.uint8).reshape(k, n)

    gens: list[PauliString] = []
    # Z-type generators: Z^w for w in the null space of R, sign (-1)^(w.t0).
    null_basis = _gf2_nullspace(rmat)
    for w in null_basis:
        sign = int(np.dot(w, t0_bits)) & 1
        gens.append(PauliString(n, np.zeros(n, np.uint8), w, 2 if sign else 0))
    # X-type generators, one per support-basis vector.
    for j in range(k):
        target = np.zeros(k, np.uint8)
        for l in range(k):
            target[l] = (cvec[j] & 1) if l == j else (bmat[j, l] & 1)
        w = _gf2_solve_rt(rmat, target)
        r = rmat[j]
        overlap = int(np.sum(r & w))
        sign_bit = (cvec[j] + int(np.dot(w, t0_bits))) & 1
        exp = (-cvec[j] - overlap + 2 * sign_bit) % 4
        if exp & 1:
            raise ValueError("X-type generator has imaginary phase")
        gens.append(PauliString(n, r.copy(), w, exp))
    if len(gens) != n:
        raise AssertionError("generator count mismatch")
    return tableau_from_stabilizers(gens)


def _gf2_nullspace(rmat: np.ndarray) -> list[np.ndarray]:
    """Basis of {w : R w = 0} over GF(2); R is k x n."""
    k, n = rmat.shape if rmat.size else (0, rmat.shape[1])
    a = rmat.copy() % 2
    pivots = []
    r = 0
    for c in range(n):
        rows = [i for i in range(r, k) if a[i, c]]
        if not rows:
            continue
        p = rows[0]
        a[[r, p]] = a[[p, r]]
        for i in range(k):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    out = []
    for f in free:
        w = np.zeros(n, np.uint8)
        w[f] = 1
        for i, c in enumerate(pivots):
            if a[i, f]:
                w[c] = 1
        out.append(w)
    return out


def _gf2_solve_rt(rmat: np.ndarray, target: np.ndarray) -> np.ndarray:
    """One solution w of R w = target over GF(2) (R is k x n, rank k)."""
    k, n = rmat.shape
    a = np.concatenate([rmat % 2, target.reshape(k, 1) % 2], axis=1)
    pivots = []
    r = 0
    for c in range(n):
        rows = [i for i in range(r, k) if a[i, c]]
        if not rows:
            continue
        p = rows[0]
        a[[r, p]] = a[[p, r]]
        for i in range(k):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        pivots.append(c)
        r += 1
        if r == k:
            break
    if r < k:
        raise ValueError("support basis matrix is rank-deficient")
    w = np.zeros(n, np.uint8)
    for i, c in enumerate(pivots):
        w[c] = a[i, n]
    return w
