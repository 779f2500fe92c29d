"""Layered hopping/interaction ansatz in the site register.

Each layer applies a half interaction step, the vertical matchings, the
horizontal matchings, then the second half interaction step.  Edges of the
same matching never share a site, so every matching exponential factorizes
exactly into two-qubit-pair rotations; one parameter drives each matching and
one drives the interaction of each layer.  The reference point is the Slater
determinant of the lowest real hopping orbitals, which makes the all-zero
parameter point an exact stationary state of the optimization.
"""

from dataclasses import dataclass

import numpy as np

from .core import AdamResult, VipsaConfig, adam_minimize
from .fermions import hopping_pair
from .hamiltonians import (
    GroundSpace,
    SectorHamiltonian,
    build_real,
    fidelity,
    ground_space,
    onsite_interaction,
)
from .lattice import DOWN, UP, GridSpec, default_filling, hopping_edges, qubit_index, real_orbital_basis
from .statevector import (
    AnsatzCircuit,
    DiagonalPhase,
    HoppingRotation,
    StateVector,
    expectation_and_gradient,
    slater_statevector,
)

Edge = tuple[int, int]

# The all-zero point is exactly stationary: the reference state is real, every
# generator is real, so each gradient component is the real part of a purely
# imaginary number.  Optimizers normally leave it anyway because rounding noise
# feeds ADAM's normalized step; this fixed offset plays that role without
# making the trajectory machine-dependent.
STATIONARY_KICK = 1e-2
STATIONARY_TOL = 1e-12


def edge_matchings(edges: list[Edge]) -> list[list[Edge]]:
    """Greedy partition into vertex-disjoint groups, in given edge order."""
    matchings: list[list[Edge]] = []
    used: list[set[int]] = []
    for edge in edges:
        i, j = edge
        for sites, group in zip(used, matchings):
            if i not in sites and j not in sites:
                group.append(edge)
                sites.update(edge)
                break
        else:
            matchings.append([edge])
            used.append({i, j})
    return matchings


@dataclass(frozen=True)
class HvaLayout:
    """Structure of the layered ansatz for one grid."""

    grid: GridSpec
    layers: int
    horizontal: tuple[tuple[Edge, ...], ...]
    vertical: tuple[tuple[Edge, ...], ...]

    @property
    def params_per_layer(self) -> int:
        return 1 + len(self.horizontal) + len(self.vertical)

    @property
    def n_params(self) -> int:
        return self.layers * self.params_per_layer


def build_layout(grid: GridSpec, layers: int = 10) -> HvaLayout:
    if layers < 1:
        raise ValueError("need at least one layer")
    horizontal, vertical = hopping_edges(grid)
    return HvaLayout(
        grid, layers,
        tuple(tuple(m) for m in edge_matchings(horizontal)),
        tuple(tuple(m) for m in edge_matchings(vertical)),
    )


class HvaAnsatz:
    """Gate expansion of a layout plus the shared-parameter bookkeeping.

    Gate angles are derived from the reduced parameter vector: hopping gates
    take -t * theta of their matching, and each of the two interaction gates
    per layer takes theta_U / 2 on the full U sum.  Gradients are folded back
    through the same map.
    """

    def __init__(self, grid: GridSpec, n_up: int, n_down: int, layers: int = 10):
        self.layout = build_layout(grid, layers)
        self.grid = grid
        energies, w, order = real_orbital_basis(grid)
        self.initial_energy = float(sum(energies[s] for s in order[:n_up])
                                    + sum(energies[s] for s in order[:n_down]))
        initial = slater_statevector(w, order[:n_up], order[:n_down])
        interaction = onsite_interaction(grid)

        gates = []
        self._map: list[tuple[int, float]] = []  # (parameter index, scale) per gate

        def add_interaction(param: int):
            gates.append(DiagonalPhase(interaction, 0.0))
            self._map.append((param, 0.5))

        def add_matching(param: int, matching: tuple[Edge, ...]):
            for i, j in matching:
                for spin in (UP, DOWN):
                    pair = hopping_pair(qubit_index(i, spin), qubit_index(j, spin))
                    gates.append(HoppingRotation(pair, 0.0))
                    self._map.append((param, -grid.t))

        per_layer = self.layout.params_per_layer
        for layer in range(self.layout.layers):
            base = layer * per_layer
            add_interaction(base)
            offset = 1
            for matching in self.layout.vertical:
                add_matching(base + offset, matching)
                offset += 1
            for matching in self.layout.horizontal:
                add_matching(base + offset, matching)
                offset += 1
            add_interaction(base)
        self.circuit = AnsatzCircuit(initial, gates)

    @property
    def n_params(self) -> int:
        return self.layout.n_params

    def set_parameters(self, params: np.ndarray) -> None:
        if len(params) != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {len(params)}")
        self.circuit.set_thetas([scale * params[idx] for idx, scale in self._map])

    def state(self, params: np.ndarray) -> StateVector:
        self.set_parameters(params)
        return self.circuit.run()

    def energy_and_gradient(self, params: np.ndarray, apply_h,
                            final: StateVector | None = None) -> tuple[float, np.ndarray]:
        self.set_parameters(params)
        energy, per_gate = expectation_and_gradient(self.circuit, apply_h, final=final)
        grads = np.zeros(self.n_params)
        for gate_grad, (idx, scale) in zip(per_gate, self._map):
            grads[idx] += scale * gate_grad
        return energy, grads


@dataclass(frozen=True)
class HvaStepRecord:
    step: int
    energy: float
    fidelity: float
    max_gradient: float


@dataclass
class HvaResult:
    grid: GridSpec
    n_up: int
    n_down: int
    layout: HvaLayout
    records: list[HvaStepRecord]
    status: str  # "converged" | "exhausted"
    final_energy: float
    final_fidelity: float
    ground: GroundSpace
    parameters: np.ndarray
    history: np.ndarray  # parameter vector per evaluation, aligned with records
    ansatz: HvaAnsatz


def hva_run(grid: GridSpec, n_up: int | None = None, n_down: int | None = None,
            config: VipsaConfig | None = None, layers: int = 10,
            reference: GroundSpace | None = None, progress=None) -> HvaResult:
    """Optimize all layer parameters from zero against the site-register model.

    The exact all-zero point is evaluated and recorded first; since it is
    stationary, the optimization proper starts from STATIONARY_KICK on every
    parameter.  Per-evaluation energy and fidelity are recorded, along with
    the parameter vector itself so any intermediate state can be
    reconstructed exactly.
    """
    config = config or VipsaConfig()
    if n_up is None or n_down is None:
        n_up, n_down = default_filling(grid)
    h = build_real(grid)
    sector = SectorHamiltonian(h, grid.n_qubits, n_up, n_down)
    if reference is None:
        reference = ground_space(h, grid.n_qubits, n_up, n_down)
    ansatz = HvaAnsatz(grid, n_up, n_down, layers)

    records: list[HvaStepRecord] = []

    def evaluate(params):
        ansatz.set_parameters(params)
        final = ansatz.circuit.run()
        fid = fidelity(final, reference)  # before the gradient sweep reuses the buffer
        energy, grads = ansatz.energy_and_gradient(params, sector.apply, final=final)
        record = HvaStepRecord(len(records), energy, fid, float(np.abs(grads).max()))
        records.append(record)
        if progress is not None:
            progress(record)
        return energy, grads

    start = np.zeros(ansatz.n_params)
    _, grads0 = evaluate(start)
    if np.abs(grads0).max() <= STATIONARY_TOL:
        start = np.full(ansatz.n_params, STATIONARY_KICK)
    outcome: AdamResult = adam_minimize(start, evaluate, config, keep_history=True)
    status = "converged" if outcome.converged else "exhausted"
    final_fid = fidelity(ansatz.state(outcome.thetas), reference)
    history = np.vstack([np.zeros(ansatz.n_params), outcome.history])
    return HvaResult(grid, n_up, n_down, ansatz.layout, records, status,
                     outcome.energy, final_fid, reference, outcome.thetas,
                     history, ansatz)
