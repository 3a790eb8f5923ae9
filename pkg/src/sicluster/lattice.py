"""The donor-lattice machine model: global operations weaving nuclear clusters.

A 2D array of donor sites, each holding a nuclear spin qubit and (when live)
a shuttleable electron.  Protocols are scripts of global steps: prepare all
spins in |+>, apply a controlled-phase between every co-located
electron/nuclear pair, shuttle every electron one site in a common
direction, and measure all electrons in a Pauli basis.  The sigma_y electron
measurement fuses the nuclei the electron touched into a clique, which is
what turns three C-phase rounds plus two orthogonal shuttles into a
triangle-union cluster state on the nuclei.

Qubit numbering interleaves species per site (nuclear = 2*site,
electron = 2*site + 1) so the tableau backend's locality windows stay tight.
Output graphs are indexed by site id = i * ly + j for site (i, j).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from sicluster.graphstate import GraphState, MeasurementOutcomeRecord
from sicluster.statevec import (
    KET_MINUS,
    KET_MINUS_I,
    KET_PLUS,
    KET_PLUS_I,
    MAX_QUBITS,
    SizeCapError,
    StateVector,
    graph_to_statevector,
    tableau_from_statevector,
)
from sicluster.tableau import Basis, StabilizerTableau, new_plus_state, restricted_stab_graph


class ProtocolError(ValueError):
    """Invalid protocol script or lattice configuration."""


# -- protocol steps -----------------------------------------------------------


@dataclass(frozen=True)
class PrepareAllPlus:
    species: str = "both"  # electron | nuclear | both

    def __post_init__(self):
        if self.species not in ("electron", "nuclear", "both"):
            raise ProtocolError(f"bad species {self.species!r}")


@dataclass(frozen=True)
class GlobalCPhase:
    pass


_DIRECTIONS = {"+x": (1, 0), "-x": (-1, 0), "+y": (0, 1), "-y": (0, -1)}


@dataclass(frozen=True)
class Shuttle:
    direction: str

    def __post_init__(self):
        if self.direction not in _DIRECTIONS:
            raise ProtocolError(f"bad shuttle direction {self.direction!r}")

    @property
    def delta(self) -> tuple[int, int]:
        return _DIRECTIONS[self.direction]


@dataclass(frozen=True)
class MeasureElectrons:
    basis: Basis = Basis.Y


@dataclass(frozen=True)
class ReprepareElectronsPlus:
    pass


ProtocolStep = (PrepareAllPlus | GlobalCPhase | Shuttle | MeasureElectrons
                | ReprepareElectronsPlus)


def standard_protocol() -> list[ProtocolStep]:
    """Three global C-phases with two orthogonal shuttles, then sigma_y."""
    return [
        PrepareAllPlus("both"),
        GlobalCPhase(),
        Shuttle("+x"),
        GlobalCPhase(),
        Shuttle("+y"),
        GlobalCPhase(),
        MeasureElectrons(Basis.Y),
    ]


def square_lattice_protocol() -> list[ProtocolStep]:
    """Standard script with an extra sigma_y round and C-phase before the
    second shuttle, producing a square-lattice cluster on the nuclei."""
    return [
        PrepareAllPlus("both"),
        GlobalCPhase(),
        Shuttle("+x"),
        GlobalCPhase(),
        MeasureElectrons(Basis.Y),
        ReprepareElectronsPlus(),
        GlobalCPhase(),
        Shuttle("+y"),
        GlobalCPhase(),
        MeasureElectrons(Basis.Y),
    ]


CANONICAL_PROTOCOLS = {
    "standard": standard_protocol,
    "square": square_lattice_protocol,
}


# -- lattice ------------------------------------------------------------------


@dataclass
class DonorSite:
    coords: tuple[int, int]
    nuclear_qubit: int
    electron: int | None
    dead: bool = False


class DonorLattice:
    """An lx-by-ly open-boundary array of donor sites.

    Dead sites never hold an electron and their nuclei stay untouched
    (degree 0 in every output graph).
    """

    def __init__(self, lx: int, ly: int, dead=(), populate_electrons: bool = True):
        if lx < 1 or ly < 1:
            raise ProtocolError("lattice dimensions must be >= 1")
        self.lx = lx
        self.ly = ly
        self.dead: set[tuple[int, int]] = set()
        for i, j in dead:
            if not (0 <= i < lx and 0 <= j < ly):
                raise ProtocolError(f"dead site ({i},{j}) outside lattice")
            self.dead.add((int(i), int(j)))
        self.sites: list[DonorSite] = []
        for i in range(lx):
            for j in range(ly):
                s = self.site_id(i, j)
                is_dead = (i, j) in self.dead
                electron = None
                if populate_electrons and not is_dead:
                    electron = 2 * s + 1
                self.sites.append(DonorSite((i, j), 2 * s, electron, is_dead))

    def site_id(self, i: int, j: int) -> int:
        return i * self.ly + j

    def coords(self, s: int) -> tuple[int, int]:
        return divmod(s, self.ly)

    def in_bounds(self, i: int, j: int) -> bool:
        return 0 <= i < self.lx and 0 <= j < self.ly

    def is_live(self, i: int, j: int) -> bool:
        return self.in_bounds(i, j) and (i, j) not in self.dead

    @property
    def n_sites(self) -> int:
        return self.lx * self.ly

    def live_site_ids(self) -> list[int]:
        return [s.nuclear_qubit // 2 for s in self.sites if not s.dead]

    def initial_electrons(self) -> dict[int, int]:
        """site id -> electron qubit id for the initially populated sites."""
        return {s.nuclear_qubit // 2: s.electron
                for s in self.sites if s.electron is not None}


# -- Pauli frame --------------------------------------------------------------


class PauliFrame:
    """Pending per-qubit X/Z byproduct corrections; composition is XOR."""

    def __init__(self, x=(), z=()):
        self.x: set[int] = set(x)
        self.z: set[int] = set(z)

    def flip_x(self, v: int) -> None:
        self.x ^= {v}

    def flip_z(self, v: int) -> None:
        self.z ^= {v}

    def compose(self, other: "PauliFrame") -> "PauliFrame":
        return PauliFrame(self.x ^ other.x, self.z ^ other.z)

    def as_dict(self) -> dict:
        return {"x": sorted(self.x), "z": sorted(self.z)}

    def __eq__(self, other) -> bool:
        return isinstance(other, PauliFrame) and self.x == other.x and self.z == other.z

    def __repr__(self) -> str:
        return f"PauliFrame(x={sorted(self.x)}, z={sorted(self.z)})"


@dataclass
class RunResult:
    graph: GraphState
    outcomes: MeasurementOutcomeRecord
    frame: PauliFrame
    backend: str
    n_sites: int = 0
    reprep_mode: str = "pulse"


# -- simulation backends ------------------------------------------------------


_EIGENSTATES = {
    (Basis.X, 1): KET_PLUS, (Basis.X, -1): KET_MINUS,
    (Basis.Y, 1): KET_PLUS_I, (Basis.Y, -1): KET_MINUS_I,
    (Basis.Z, 1): np.array([1.0, 0.0], complex), (Basis.Z, -1): np.array([0.0, 1.0], complex),
}


class _TableauBackend:
    name = "stabilizer"

    def __init__(self, lattice: DonorLattice, rng):
        self.lattice = lattice
        self.rng = rng
        self.t: StabilizerTableau | None = None
        self.gen_rows: dict[int, int] = {}

    def prepare(self) -> None:
        self.t = new_plus_state(2 * self.lattice.n_sites)

    def cz(self, a: int, b: int) -> None:
        self.t.apply_gate("CZ", a, b)

    def gate(self, name: str, q: int) -> None:
        self.t.apply_gate(name, q)

    def measure(self, q: int, basis: Basis) -> tuple[int, bool]:
        outcome, det, p = self.t._measure_impl(q, basis, self.rng)
        if p >= 0:
            self.gen_rows[q] = p
        else:
            self.gen_rows.pop(q, None)
        return outcome, det

    def extract_nuclear_graph(self) -> tuple[GraphState, PauliFrame]:
        n_sites = self.lattice.n_sites
        try:
            adj, ops = restricted_stab_graph(
                self.t, [2 * s for s in range(n_sites)], self.gen_rows)
        except ValueError as exc:
            raise ProtocolError(str(exc)) from exc
        return _assemble_graph(n_sites, adj, ops)


class _StatevectorBackend:
    name = "statevector"

    def __init__(self, lattice: DonorLattice, rng):
        self.lattice = lattice
        self.rng = rng
        n_active = lattice.n_sites + len(lattice.initial_electrons())
        if n_active > MAX_QUBITS:
            raise SizeCapError(
                f"statevector backend needs {n_active} qubits, cap is {MAX_QUBITS}")
        # Qubit id -> dense index: nuclei first (site order), then electrons.
        self.index: dict[int, int] = {2 * s: s for s in range(lattice.n_sites)}
        for e in sorted(lattice.initial_electrons().values()):
            self.index[e] = len(self.index)
        self.sv: StateVector | None = None
        self.final_eigen: dict[int, tuple[Basis, int]] = {}

    def prepare(self) -> None:
        self.sv = StateVector.all_plus(len(self.index))

    def cz(self, a: int, b: int) -> None:
        self.sv.apply_cz(self.index[a], self.index[b])

    def gate(self, name: str, q: int) -> None:
        self.sv.apply_gate(name, self.index[q])

    def measure(self, q: int, basis: Basis) -> tuple[int, bool]:
        outcome, det = self.sv.measure(self.index[q], basis, self.rng)
        self.final_eigen[q] = (basis, outcome)
        return outcome, det

    def extract_nuclear_graph(self) -> tuple[GraphState, PauliFrame]:
        n_sites = self.lattice.n_sites
        sv = self.sv
        # Contract measured electrons (descending index keeps indices valid).
        electrons = sorted(self.final_eigen, key=lambda q: self.index[q], reverse=True)
        for q in electrons:
            basis, outcome = self.final_eigen[q]
            sv = sv.contract(self.index[q], _EIGENSTATES[(basis, outcome)])
        if sv.n != n_sites:
            raise ProtocolError("unmeasured electrons remain in the dense state")
        t = tableau_from_statevector(sv.psi)
        g = t.to_graph_state()
        adj = {v: g.neighbors(v) for v in g.vertices()}
        ops = dict(g.vertex_ops)
        return _assemble_graph(n_sites, adj, ops)


def _assemble_graph(n_sites: int, adj, ops) -> tuple[GraphState, PauliFrame]:
    """Split vertex operators into Pauli frame bits and coset representatives."""
    frame = PauliFrame()
    coset_ops = {}
    for v, op in ops.items():
        (xb, zb), rep = op.pauli_factor()
        if xb:
            frame.flip_x(v)
        if zb:
            frame.flip_z(v)
        if not rep.is_identity():
            coset_ops[v] = rep
    edges = [(v, u) for v, nbrs in adj.items() for u in nbrs if u > v]
    graph = GraphState(range(n_sites), edges, coset_ops)
    return graph, frame


# -- the protocol driver ------------------------------------------------------


def run_protocol(lattice: DonorLattice, steps, backend: str = "stabilizer",
                 rng=None, reprep_mode: str = "pulse", noise=None) -> RunResult:
    """Execute a protocol script and return the nuclear cluster state.

    Returns a RunResult whose graph is indexed by site id, whose outcome
    record holds every electron measurement (qubit id, basis, outcome), and
    whose PauliFrame carries the outcome-dependent byproduct corrections on
    the nuclei.  The graph topology and vertex operators are outcome
    independent; only the frame varies with the seed.

    ``noise`` is an optional injector (see sicluster.noise.NoiseInjector)
    whose hooks insert Pauli errors and corrupt recorded outcomes; the
    recorded (possibly corrupted) outcomes drive any feed-forward, while the
    quantum state always collapses on the true ones.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if reprep_mode not in ("pulse", "reload"):
        raise ProtocolError(f"unknown reprep mode {reprep_mode!r}")
    steps = list(steps)
    if not steps or not isinstance(steps[0], PrepareAllPlus):
        raise ProtocolError("protocol must start with PrepareAllPlus")
    if isinstance(steps[0], PrepareAllPlus) and steps[0].species != "both":
        raise ProtocolError("run_protocol prepares both species; see cool_and_prepare")

    if backend == "stabilizer":
        be = _TableauBackend(lattice, rng)
    elif backend == "statevector":
        be = _StatevectorBackend(lattice, rng)
    else:
        raise ProtocolError(f"unknown backend {backend!r}")

    positions: dict[int, int] = {}  # site id -> electron qubit
    parked: dict[int, int] = {}  # measured, awaiting re-preparation
    last_meas: dict[int, tuple[Basis, int]] = {}
    outcomes = MeasurementOutcomeRecord(allow_repeats=True)
    cphase_count = 0

    def measure_and_record(e: int, basis: Basis) -> None:
        outcome, _ = be.measure(e, basis)
        if noise is not None:
            outcome = noise.filter_outcome(e, basis, outcome)
        outcomes.append(e, basis, outcome)
        last_meas[e] = (basis, outcome)

    for step_no, step in enumerate(steps):
        if isinstance(step, PrepareAllPlus):
            if step_no != 0:
                raise ProtocolError("PrepareAllPlus is only supported as the first step")
            be.prepare()
            positions = dict(lattice.initial_electrons())
            if noise is not None:
                noise.after_prepare(be, lattice)
        elif isinstance(step, GlobalCPhase):
            for s in sorted(positions):
                be.cz(positions[s], 2 * s)
            cphase_count += 1
        elif isinstance(step, Shuttle):
            if noise is not None:
                noise.before_shuttle(be, [positions[s] for s in sorted(positions)])
            di, dj = step.delta
            new_positions: dict[int, int] = {}
            for s in sorted(positions):
                e = positions[s]
                i, j = lattice.coords(s)
                ni, nj = i + di, j + dj
                if lattice.is_live(ni, nj):
                    target = lattice.site_id(ni, nj)
                    if target in new_positions:
                        raise ProtocolError("shuttle collision: two electrons on one site")
                    new_positions[target] = e
                else:
                    measure_and_record(e, Basis.Z)
            collisions = set(new_positions) & set(parked)
            if collisions:
                raise ProtocolError("shuttle collision with a parked electron")
            positions = new_positions
        elif isinstance(step, MeasureElectrons):
            if cphase_count == 0:
                warnings.warn("measurement before any entangling gate is a no-op",
                              stacklevel=2)
            for s in sorted(positions):
                e = positions[s]
                measure_and_record(e, step.basis)
                parked[s] = e
            positions = {}
        elif isinstance(step, ReprepareElectronsPlus):
            unrotate = {Basis.X: (), Basis.Y: ("SDG",), Basis.Z: ("H",)}
            for s in sorted(parked):
                e = parked[s]
                basis, outcome = last_meas[e]
                for name in unrotate[basis]:
                    be.gate(name, e)
                if outcome == -1:
                    be.gate("Z", e)
                positions[s] = e
            parked = {}
        else:
            raise ProtocolError(f"unknown protocol step {step!r}")

    for s in sorted(positions):
        e = positions[s]
        warnings.warn("protocol ended with live electrons; measuring them out in Z",
                      stacklevel=2)
        measure_and_record(e, Basis.Z)

    if noise is not None:
        noise.before_extract(be, lattice)

    graph, frame = be.extract_nuclear_graph()
    return RunResult(graph=graph, outcomes=outcomes, frame=frame,
                     backend=be.name, n_sites=lattice.n_sites, reprep_mode=reprep_mode)


# -- predicted topology --------------------------------------------------------


def predicted_edge_set(lattice: DonorLattice, steps) -> set[tuple[int, int]]:
    """Combinatorial prediction of the output adjacency (site-id pairs).

    Walks the script tracking each electron's CZ partner parity set; a
    sigma_y electron measurement toggles the clique on its partners, a Z
    measurement (chosen for electrons shuttled off-lattice or into a dead
    site) contributes nothing.  Entirely independent of the quantum backends.
    """
    steps = list(steps)
    edges: set[tuple[int, int]] = set()
    positions: dict[int, int] = {}
    partners: dict[int, set[int]] = {}
    parked: dict[int, int] = {}

    def toggle(u: int, v: int) -> None:
        e = (u, v) if u < v else (v, u)
        edges.symmetric_difference_update({e})

    for step_no, step in enumerate(steps):
        if isinstance(step, PrepareAllPlus):
            if step_no != 0:
                raise ProtocolError("PrepareAllPlus is only supported as the first step")
            positions = dict(lattice.initial_electrons())
            partners = {e: set() for e in positions.values()}
        elif isinstance(step, GlobalCPhase):
            for s, e in positions.items():
                partners[e] ^= {s}
        elif isinstance(step, Shuttle):
            di, dj = step.delta
            new_positions = {}
            for s, e in positions.items():
                i, j = lattice.coords(s)
                ni, nj = i + di, j + dj
                if lattice.is_live(ni, nj):
                    new_positions[lattice.site_id(ni, nj)] = e
                else:
                    partners.pop(e, None)  # Z-measured: no edges
            positions = new_positions
        elif isinstance(step, MeasureElectrons):
            for s in sorted(positions):
                e = positions[s]
                if step.basis == Basis.Y:
                    plist = sorted(partners[e])
                    for a in range(len(plist)):
                        for b in range(a + 1, len(plist)):
                            toggle(plist[a], plist[b])
                elif step.basis != Basis.Z:
                    raise ProtocolError(
                        "predicted_edge_set supports Y and Z electron measurements only")
                partners[e] = set()
                parked[s] = e
            positions = {}
        elif isinstance(step, ReprepareElectronsPlus):
            for s, e in parked.items():
                positions[s] = e
                partners[e] = set()
            parked = {}
        else:
            raise ProtocolError(f"unknown protocol step {step!r}")
    return edges


def predicted_graph(lattice: DonorLattice, steps) -> GraphState:
    return GraphState(range(lattice.n_sites), predicted_edge_set(lattice, steps))


# -- initialization model -------------------------------------------------------


def cool_and_prepare(lattice: DonorLattice, p_electron: float = 1.0,
                     p_nuclear: float = 1.0, rng=None) -> dict:
    """Model SWAP-cooled initialization followed by global pi/2 pulses.

    With polarization p < 1 each spin independently starts flipped with
    probability (1 - p) / 2; the flips are reported as injected X errors on
    the pre-pulse state.  Dead sites host no donor and are skipped.
    """
    for name, p in (("electron", p_electron), ("nuclear", p_nuclear)):
        if not 0.0 < p <= 1.0:
            raise ValueError(f"{name} polarization must be in (0, 1], got {p}")
    if rng is None:
        rng = np.random.default_rng(0)
    report = {
        "electron_flip_prob": (1.0 - p_electron) / 2.0,
        "nuclear_flip_prob": (1.0 - p_nuclear) / 2.0,
        "electron_flips": [],
        "nuclear_flips": [],
    }
    live = [s for s in lattice.sites if not s.dead]
    for kind, prob, qubits in (
        ("nuclear_flips", report["nuclear_flip_prob"], [s.nuclear_qubit for s in live]),
        ("electron_flips", report["electron_flip_prob"],
         [s.electron for s in live if s.electron is not None]),
    ):
        if prob > 0.0 and qubits:
            draws = rng.random(len(qubits))
            report[kind] = [q for q, d in zip(qubits, draws) if d < prob]
    return report


def dense_state_of(result: RunResult) -> StateVector:
    """Render a run's (graph, frame) output as a dense state for comparison."""
    ids, sv = graph_to_statevector(result.graph)
    index = {v: i for i, v in enumerate(ids)}
    for v in result.frame.x:
        sv.apply_1q(np.array([[0, 1], [1, 0]], complex), index[v])
    for v in result.frame.z:
        sv.apply_1q(np.array([[1, 0], [0, -1]], complex), index[v])
    return sv
