"""One-way-model execution: measurement patterns consuming cluster states.

A pattern lists single-qubit measurements (Pauli bases at any scale via the
tableau backend, arbitrary xy-plane angles at desk scale via the dense
backend) with outcome-adaptive angle sign flips, plus byproduct correction
sets that determine the final Pauli frame on the output vertices.  Arbitrary
angles are realized exactly as a pre-measurement Z rotation followed by a
sigma_z-frame readout.

Angle convention: measuring vertex v at angle a (basis cos(a) X + sin(a) Y)
with outcome bit m teleports X^m J(-a) onto the logical qubit, where
J(a) = H diag(1, e^{ia}).  The shipped chain builder uses this to realize
J-products; measuring at angles (0, -alpha, -beta, -gamma) along a 5-vertex
line gives Rx(gamma) Rz(beta) Rx(alpha) up to the tracked byproducts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from sicluster.graphstate import GraphState
from sicluster.lattice import PauliFrame
from sicluster.rng import substream
from sicluster.statevec import MAT_H, StateVector, mat_rz
from sicluster.tableau import Basis, from_graph_state, restricted_stab_graph

_HALF_PI = np.pi / 2


class PatternError(ValueError):
    """Malformed pattern or pattern/cluster mismatch."""


class NoPathError(RuntimeError):
    """carve_wire found no live route between the endpoints."""


@dataclass(frozen=True)
class MeasurementStep:
    """One measurement: Pauli basis ("X"/"Y"/"Z") or an xy-plane angle.

    ``s_adapt`` flips the angle sign on odd outcome parity of the listed
    vertices; ``t_adapt`` adds pi.  Z-basis steps take no adaptation.
    """

    vertex: int
    basis: str | None = None
    angle: float | None = None
    s_adapt: frozenset = field(default_factory=frozenset)
    t_adapt: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if (self.basis is None) == (self.angle is None):
            raise PatternError("step needs exactly one of basis/angle")
        if self.basis is not None and self.basis not in ("X", "Y", "Z"):
            raise PatternError(f"bad basis {self.basis!r}")
        if self.basis == "Z" and (self.s_adapt or self.t_adapt):
            raise PatternError("Z-basis steps take no adaptation sets")
        object.__setattr__(self, "s_adapt", frozenset(self.s_adapt))
        object.__setattr__(self, "t_adapt", frozenset(self.t_adapt))

    def nominal_angle(self) -> float | None:
        if self.angle is not None:
            return float(self.angle)
        if self.basis == "X":
            return 0.0
        if self.basis == "Y":
            return _HALF_PI
        return None  # Z


@dataclass
class MeasurementPattern:
    inputs: list[int]
    outputs: list[int]
    steps: list[MeasurementStep]
    corrections: dict[int, dict[str, frozenset]] = field(default_factory=dict)

    def validate(self, cluster: GraphState) -> None:
        verts = set(cluster.vertices())
        for v in self.inputs + self.outputs:
            if v not in verts:
                raise PatternError(f"pattern vertex {v} not in cluster")
        measured: set[int] = set()
        outs = set(self.outputs)
        for st in self.steps:
            if st.vertex not in verts:
                raise PatternError(f"measured vertex {st.vertex} not in cluster")
            if st.vertex in outs:
                raise PatternError(f"output vertex {st.vertex} cannot be measured")
            if st.vertex in measured:
                raise PatternError(f"vertex {st.vertex} measured twice")
            for dep in st.s_adapt | st.t_adapt:
                if dep not in measured:
                    raise PatternError(
                        f"step at {st.vertex} adapts on unmeasured vertex {dep}")
            measured.add(st.vertex)
        for out, sets in self.corrections.items():
            if out not in outs:
                raise PatternError(f"correction target {out} is not an output")
            for dep in set(sets.get("x", ())) | set(sets.get("z", ())):
                if dep not in measured:
                    raise PatternError(
                        f"correction for {out} references unmeasured vertex {dep}")

    # -- JSON wire format ---------------------------------------------------

    def to_json(self) -> str:
        steps = []
        for st in self.steps:
            d: dict = {"v": st.vertex}
            if st.basis is not None:
                d["basis"] = st.basis
            else:
                d["angle"] = st.angle
            if st.s_adapt:
                d["s"] = sorted(st.s_adapt)
            if st.t_adapt:
                d["t"] = sorted(st.t_adapt)
            steps.append(d)
        doc = {
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "steps": steps,
            "corrections": {
                str(out): {"x": sorted(sets.get("x", ())), "z": sorted(sets.get("z", ()))}
                for out, sets in sorted(self.corrections.items())
            },
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ": ")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "MeasurementPattern":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PatternError(f"invalid pattern JSON: {exc}") from exc
        try:
            steps = [
                MeasurementStep(
                    vertex=int(d["v"]),
                    basis=d.get("basis"),
                    angle=d.get("angle"),
                    s_adapt=frozenset(d.get("s", ())),
                    t_adapt=frozenset(d.get("t", ())),
                )
                for d in doc["steps"]
            ]
            corrections = {
                int(out): {"x": frozenset(sets.get("x", ())), "z": frozenset(sets.get("z", ()))}
                for out, sets in doc.get("corrections", {}).items()
            }
            return cls(list(map(int, doc["inputs"])), list(map(int, doc["outputs"])),
                       steps, corrections)
        except (KeyError, TypeError, ValueError) as exc:
            raise PatternError(f"malformed pattern document: {exc}") from exc


@dataclass
class PatternResult:
    outcomes: dict[int, int]
    order: list[int]
    frame: PauliFrame
    output_state: StateVector | None = None  # dense backend
    output_graph: GraphState | None = None  # stabilizer backend


def _outcome_parity(outcomes: dict[int, int], deps) -> int:
    return sum(1 for v in deps if outcomes[v] == -1) & 1


def _frame_from_corrections(pattern: MeasurementPattern, outcomes: dict[int, int]) -> PauliFrame:
    frame = PauliFrame()
    for out, sets in pattern.corrections.items():
        if _outcome_parity(outcomes, sets.get("x", ())):
            frame.flip_x(out)
        if _outcome_parity(outcomes, sets.get("z", ())):
            frame.flip_z(out)
    return frame


def execute_pattern(cluster: GraphState, pattern: MeasurementPattern,
                    input_state: StateVector | None = None,
                    backend: str = "statevector", rng=None) -> PatternResult:
    """Run a pattern on a cluster and return outcomes, frame, output state.

    The dense backend accepts any angles and an arbitrary ``input_state``
    over ``pattern.inputs`` (cluster qubits not listed as inputs start in
    |+>).  The stabilizer backend scales but is restricted to Pauli steps
    and |+> inputs; it returns the output as a graph state.
    """
    pattern.validate(cluster)
    for v in cluster.vertices():
        if not cluster.op(v).is_identity():
            raise PatternError("execute_pattern needs a canonical cluster "
                               f"(vertex {v} carries {cluster.op(v).name})")
    if rng is None:
        rng = np.random.default_rng(0)
    if backend == "statevector":
        return _execute_dense(cluster, pattern, input_state, rng)
    if backend == "stabilizer":
        if input_state is not None:
            raise PatternError("stabilizer backend supports |+> inputs only")
        return _execute_stabilizer(cluster, pattern, rng)
    raise PatternError(f"unknown backend {backend!r}")


def _effective_angle(st: MeasurementStep, outcomes: dict[int, int]) -> float:
    a = st.nominal_angle()
    if _outcome_parity(outcomes, st.s_adapt):
        a = -a
    if _outcome_parity(outcomes, st.t_adapt):
        a += np.pi
    return a


def _execute_dense(cluster, pattern, input_state, rng) -> PatternResult:
    ids = sorted(cluster.vertices())
    index = {v: i for i, v in enumerate(ids)}
    n = len(ids)
    if input_state is None:
        sv = StateVector.all_plus(n)
    else:
        if input_state.n != len(pattern.inputs):
            raise PatternError("input state size does not match pattern inputs")
        psi = input_state.psi.reshape([2] * input_state.n)
        rest = [v for v in ids if v not in set(pattern.inputs)]
        plus = np.full([2] * len(rest), (1 / np.sqrt(2)) ** len(rest), complex) \
            if rest else np.array(1.0, complex)
        full = np.multiply.outer(psi, plus)
        # Axis order is inputs (pattern order) then the rest; permute to ids.
        axis_of = {v: k for k, v in enumerate(list(pattern.inputs) + rest)}
        full = np.transpose(full, [axis_of[v] for v in ids])
        sv = StateVector(n, full.reshape(-1))
    for u, v in cluster.edges():
        sv.apply_cz(index[u], index[v])

    outcomes: dict[int, int] = {}
    order: list[int] = []
    eigvecs: dict[int, np.ndarray] = {}
    for st in pattern.steps:
        q = index[st.vertex]
        if st.basis == "Z":
            outcome, _ = sv.measure(q, Basis.Z, rng)
            eigvecs[st.vertex] = np.array([1.0, 0.0], complex) if outcome == 1 \
                else np.array([0.0, 1.0], complex)
        else:
            a = _effective_angle(st, outcomes)
            outcome, _ = sv.measure_xy_angle(q, a, rng)
            bit = 0 if outcome == 1 else 1
            eigvecs[st.vertex] = (mat_rz(a) @ MAT_H)[:, bit]
        outcomes[st.vertex] = outcome
        order.append(st.vertex)

    # Contract measured qubits (descending dense index keeps indices valid).
    out = sv
    for v in sorted(eigvecs, key=lambda v: index[v], reverse=True):
        out = out.contract(index[v], eigvecs[v])
    remaining = [v for v in ids if v not in eigvecs]
    stragglers = [v for v in remaining if v not in set(pattern.outputs)]
    pos = {v: i for i, v in enumerate(remaining)}
    if stragglers:
        # Unmeasured non-output vertices are tolerated only when the pattern
        # has disentangled them from the outputs (e.g. the far side of a
        # carved cluster); take the partial trace and demand a pure result.
        work = out.psi.reshape([2] * out.n)
        out_axes = [pos[v] for v in pattern.outputs]
        other_axes = [pos[v] for v in stragglers]
        work = np.transpose(work, out_axes + other_axes)
        dim = 1 << len(pattern.outputs)
        mat = work.reshape(dim, -1)
        rho = mat @ mat.conj().T
        purity = float(np.real(np.trace(rho @ rho)))
        if purity < 1 - 1e-9:
            raise PatternError(
                "pattern leaves unmeasured vertices entangled with the outputs: "
                f"{stragglers} (purity {purity:.6f})")
        vals, vecs = np.linalg.eigh(rho)
        psi = vecs[:, -1]
        result_state = StateVector(len(pattern.outputs), psi)
    else:
        perm = [pos[v] for v in pattern.outputs]
        psi = np.transpose(out.psi.reshape([2] * out.n), perm).reshape(-1)
        result_state = StateVector(len(pattern.outputs), psi)
    frame = _frame_from_corrections(pattern, outcomes)
    return PatternResult(outcomes, order, frame, output_state=result_state)


def _execute_stabilizer(cluster, pattern, rng) -> PatternResult:
    ids = sorted(cluster.vertices())
    index = {v: i for i, v in enumerate(ids)}
    t = from_graph_state(cluster)
    outcomes: dict[int, int] = {}
    order: list[int] = []
    gen_rows: dict[int, int] = {}
    for st in pattern.steps:
        q = index[st.vertex]
        if st.basis == "Z":
            outcome, _, p = t._measure_impl(q, Basis.Z, rng)
        else:
            a = _effective_angle(st, outcomes) % (2 * np.pi)
            quarter = a / _HALF_PI
            if abs(quarter - round(quarter)) > 1e-12:
                raise PatternError(
                    f"stabilizer backend needs Pauli angles, got {a:.6f} at "
                    f"vertex {st.vertex}")
            quarter = int(round(quarter)) % 4
            basis = Basis.X if quarter % 2 == 0 else Basis.Y
            negated = quarter >= 2
            # Measuring -X (or -Y) is measuring X (Y) conjugated by Z; doing
            # it that way keeps coin draws aligned with the dense backend.
            if negated:
                t.apply_gate("Z", q)
            outcome, _, p = t._measure_impl(q, basis, rng)
            if negated:
                t.apply_gate("Z", q)
        if p >= 0:
            gen_rows[q] = p
        outcomes[st.vertex] = outcome
        order.append(st.vertex)
    measured = set(outcomes)
    outs = set(pattern.outputs)
    stragglers = sorted(v for v in ids if v not in measured and v not in outs)
    kept_sorted = sorted(outs | set(stragglers))
    keep = [index[v] for v in kept_sorted]
    adj, ops = restricted_stab_graph(t, keep, gen_rows)
    # Keep Pauli byproducts inside the vertex operators: the graph is the
    # full post-measurement state, exactly like the dense lane's amplitudes;
    # the returned frame holds only the pattern's byproduct corrections.
    edges = [(kept_sorted[a], kept_sorted[b])
             for a, nbrs in adj.items() for b in nbrs if a < b]
    graph = GraphState(kept_sorted, edges,
                       {kept_sorted[i]: op for i, op in ops.items()})
    if stragglers:
        for v in stragglers:
            if graph.neighbors(v) & outs:
                raise PatternError(
                    f"pattern leaves vertex {v} entangled with the outputs")
        sub_edges = [(u, v) for u, v in graph.edges() if u in outs and v in outs]
        sub_ops = {v: op for v, op in graph.vertex_ops.items() if v in outs}
        graph = GraphState(sorted(outs), sub_edges, sub_ops)
    frame = _frame_from_corrections(pattern, outcomes)
    return PatternResult(outcomes, order, frame, output_graph=graph)


# -- pattern builders -----------------------------------------------------------


def chain_pattern(angles, vertices=None, pre_z=None) -> MeasurementPattern:
    """Pattern measuring a 1-D cluster wire at the given angles in order.

    Realizes J(-a_{k-1}) ... J(-a_0) on the teleported qubit; byproduct
    tracking follows the X^m J(-a) teleportation identity, so only angle
    sign adaptation (s sets) is ever needed.

    ``pre_z`` maps a wire vertex to the set of earlier-measured vertices
    whose Z-cut outcomes left a pending Z on it (the carving prefix); those
    dependencies are folded into the adaptation and correction sets.
    """
    angles = list(angles)
    k = len(angles)
    if vertices is None:
        vertices = list(range(k + 1))
    if len(vertices) != k + 1:
        raise PatternError("need one more vertex than angles")
    pre_z = {v: frozenset(deps) for v, deps in (pre_z or {}).items()}
    x_set: frozenset = frozenset()
    z_set: frozenset = frozenset()
    steps = []
    for j, a in enumerate(angles):
        v = vertices[j]
        z_set ^= pre_z.get(v, frozenset())
        if a == 0.0:
            steps.append(MeasurementStep(v, basis="X", s_adapt=frozenset(),
                                         t_adapt=frozenset()))
        else:
            steps.append(MeasurementStep(v, angle=float(a), s_adapt=x_set))
        x_set, z_set = frozenset({v}) ^ z_set, x_set
    out = vertices[-1]
    z_set ^= pre_z.get(out, frozenset())
    return MeasurementPattern(
        inputs=[vertices[0]], outputs=[out], steps=steps,
        corrections={out: {"x": x_set, "z": z_set}})


def wire_pattern(length: int, vertices=None) -> MeasurementPattern:
    """Identity wire on a line of ``length`` vertices (odd length)."""
    if length < 3 or length % 2 == 0:
        raise PatternError("identity wire needs an odd length >= 3")
    return chain_pattern([0.0] * (length - 1), vertices)


def rotation_chain_pattern(alpha: float, beta: float, gamma: float,
                           vertices=None) -> MeasurementPattern:
    """5-vertex chain realizing Rx(gamma) Rz(beta) Rx(alpha) up to frame."""
    return chain_pattern([0.0, -alpha, -beta, -gamma], vertices)


def rotation_chain_target(alpha: float, beta: float, gamma: float) -> np.ndarray:
    rx = lambda t: np.array([[np.cos(t / 2), -1j * np.sin(t / 2)],
                             [-1j * np.sin(t / 2), np.cos(t / 2)]])
    rz = lambda t: np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
    return rx(gamma) @ rz(beta) @ rx(alpha)


def cz_pattern() -> tuple[GraphState, MeasurementPattern]:
    """Graph-native CZ: two input/output vertices joined by one edge."""
    cluster = GraphState([0, 1], [(0, 1)])
    return cluster, MeasurementPattern(inputs=[0, 1], outputs=[0, 1], steps=[])


# -- wire carving -----------------------------------------------------------------


def canonical_adjacency(cluster: GraphState) -> GraphState:
    """Same adjacency, vertex operators dropped.

    Patterns are defined against the canonical cluster; a protocol-produced
    graph carries coset operators and a Pauli frame that stay byproduct
    bookkeeping (a device would fold them into its measurement bases), so
    simulation-level pattern runs use the bare adjacency.
    """
    return GraphState(cluster.vertices(), cluster.edges())


def carved_wire_pattern(cluster: GraphState, start: int, end: int,
                        forbidden=(), angles=None) -> tuple[MeasurementPattern, list[int]]:
    """Carve a path and build the full pattern: Z prefix plus wire measures.

    The Z cuts leave outcome-dependent Z marks on their path neighbors;
    these feed the chain's adaptation and correction sets so the combined
    pattern realizes the chain channel exactly.  ``angles`` defaults to an
    identity wire (all X measurements).
    """
    prefix, path = carve_wire(cluster, start, end, forbidden)
    if angles is None:
        angles = [0.0] * (len(path) - 1)
    elif len(angles) != len(path) - 1:
        raise PatternError(f"need {len(path) - 1} angles for this path")
    cut = [st.vertex for st in prefix]
    pre_z = {v: {u for u in cut if cluster.has_edge(u, v)} for v in path}
    pattern = chain_pattern(angles, vertices=path, pre_z=pre_z)
    pattern.steps = prefix + pattern.steps
    return pattern, path


def carve_wire(cluster: GraphState, start: int, end: int,
               forbidden=()) -> tuple[list[MeasurementStep], list[int]]:
    """Shortest live path start->end plus the Z-measurement prefix.

    Breadth-first search with deterministic lowest-id tie breaking; the
    prefix removes every off-path neighbor of the path so that the path
    vertices form a bare line graph.  Raises NoPathError when the dead set
    disconnects the endpoints.
    """
    forbidden = set(forbidden)
    verts = set(cluster.vertices())
    for v in (start, end):
        if v not in verts:
            raise PatternError(f"endpoint {v} not in cluster")
        if v in forbidden:
            raise NoPathError(f"endpoint {v} is forbidden")
    parent: dict[int, int | None] = {start: None}
    frontier = [start]
    while frontier and end not in parent:
        nxt = []
        for v in frontier:
            for u in sorted(cluster.neighbors(v)):
                if u in forbidden or u in parent:
                    continue
                parent[u] = v
                nxt.append(u)
        frontier = nxt
    if end not in parent:
        raise NoPathError(f"no live path from {start} to {end}")
    path = [end]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()
    on_path = set(path)
    trim = sorted({u for v in path for u in cluster.neighbors(v)}
                  - on_path - forbidden)
    prefix = [MeasurementStep(u, basis="Z") for u in trim]
    return prefix, path


# -- logical verification -----------------------------------------------------------


_BASIS_STATES = {
    "0": np.array([1, 0], complex),
    "1": np.array([0, 1], complex),
    "+": np.array([1, 1], complex) / np.sqrt(2),
    "+i": np.array([1, 1j], complex) / np.sqrt(2),
}


@dataclass
class LogicalChannelReport:
    distance: float
    per_input: dict[str, float]
    n_seeds: int
    target_shape: tuple

    def ok(self, tol: float = 1e-9) -> bool:
        return self.distance < tol


def verify_logical(cluster: GraphState, pattern: MeasurementPattern,
                   target: np.ndarray, seeds=range(5),
                   root_seed: int = 0) -> LogicalChannelReport:
    """Compare the frame-corrected pattern channel to a target unitary.

    Runs the dense backend on the spanning input set {|0>,|1>,|+>,|+i>}^k,
    applies the byproduct frame, and reports the worst infidelity
    1 - |<target psi|output>| over inputs and seeds.  (A sqrt-style trace
    distance would amplify double-precision roundoff to ~1e-8 and could
    never certify at the 1e-9 level; the fidelity gap is zero iff the
    channels coincide up to global phase, which is the property needed.)
    """
    k = len(pattern.inputs)
    if k > 2:
        raise PatternError("logical verification is limited to 2 logical qubits")
    dim = 1 << k
    target = np.asarray(target, complex)
    if target.shape != (dim, dim):
        raise PatternError(f"target must be {dim}x{dim}")
    labels = list(_BASIS_STATES)
    per_input: dict[str, float] = {}
    worst = 0.0
    import itertools
    for combo in itertools.product(labels, repeat=k):
        vec = np.array([1.0], complex)
        for lab in combo:
            vec = np.kron(vec, _BASIS_STATES[lab])
        expected = target @ vec
        name = "|" + ",".join(combo) + ">"
        dmax = 0.0
        for s in seeds:
            rng = substream(root_seed, "verify", int(s))
            res = execute_pattern(cluster, pattern, StateVector(k, vec),
                                  backend="statevector", rng=rng)
            out = res.output_state
            idx = {v: i for i, v in enumerate(pattern.outputs)}
            for v in res.frame.x:
                out.apply_gate("X", idx[v])
            for v in res.frame.z:
                out.apply_gate("Z", idx[v])
            fid = min(1.0, float(abs(np.vdot(expected, out.psi))))
            dmax = max(dmax, 1.0 - fid)
        per_input[name] = dmax
        worst = max(worst, dmax)
    return LogicalChannelReport(distance=worst, per_input=per_input,
                                n_seeds=len(list(seeds)), target_shape=target.shape)
