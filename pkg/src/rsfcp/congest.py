"""Synchronous CONGEST simulation of the phase algorithm.

The network is the bipartite support graph of ``A``: one *set node* per column
(owning ``x_S``) and one *element node* per row (owning ``y_e``, ``s_e`` and
the death flag).  Each phase takes four rounds:

1. live element nodes send their requirement ``r_e``; set nodes sum ``rho_S``;
2. set nodes with ``rho_S > 0`` send it; element nodes take the max ``mu_e``;
3. element nodes with ``mu_e > 0`` send it back; set nodes take the max,
   i.e. the largest efficiency within distance two, and self-select;
4. selected set nodes announce ``rho_S``; element nodes update locally.

In every round each node first sends (from its own state only), the scheduler
delivers, and then each node processes its inbox in ascending sender order.
Node programs never see the network or any other node.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .engine import (
    Params,
    PhaseRecord,
    PhaseTrace,
    SolverState,
    make_record,
    requirement,
    scale_output,
    setup_params,
)
from .instances import NormalizedInstance, PrimalDualSolution

ROUNDS_PER_PHASE = 4
DEFAULT_BIT_BUDGET = 128
PAYLOAD_BITS = 64


class Tag(enum.IntEnum):
    REQ = 0
    RHO = 1
    MAX = 2
    SELECTED = 3


TAG_BITS = max(1, (len(Tag) - 1).bit_length())


class SimulationFault(RuntimeError):
    """A node program violated the model (bandwidth, topology, duplicates)."""


@dataclass(frozen=True, slots=True)
class Message:
    sender: int
    tag: Tag
    payload: float

    @property
    def bits(self) -> int:
        return PAYLOAD_BITS + TAG_BITS


class Node:
    """Base node program.  ``nbrs`` maps neighbour node id to ``A_eS``."""

    def __init__(self, node_id: int, nbrs: dict[int, float], params: Params) -> None:
        self.id = node_id
        self.nbrs = dict(sorted(nbrs.items()))
        self.alpha = params.alpha
        self.f = params.f

    def send(self, step: int) -> list[tuple[int, Message]]:
        raise NotImplementedError

    def receive(self, step: int, inbox: list[Message]) -> None:
        raise NotImplementedError

    def _broadcast(self, tag: Tag, value: float) -> list[tuple[int, Message]]:
        msg = Message(self.id, tag, value)
        return [(v, msg) for v in self.nbrs]


class SetNode(Node):
    """Left node: one covering variable ``x_S``."""

    def __init__(self, node_id: int, nbrs: dict[int, float], params: Params) -> None:
        super().__init__(node_id, nbrs, params)
        self.x = 0.0
        self.rho = 0.0
        self.nbr_max = 0.0
        self.selected = False

    def send(self, step: int) -> list[tuple[int, Message]]:
        if step == 1 and self.rho > 0.0:
            return self._broadcast(Tag.RHO, self.rho)
        if step == 3 and self.selected:
            return self._broadcast(Tag.SELECTED, self.rho)
        return []

    def receive(self, step: int, inbox: list[Message]) -> None:
        if step == 0:
            total = 0.0
            for msg in inbox:
                total += self.nbrs[msg.sender] * msg.payload
            self.rho = total
            self.selected = False
        elif step == 2:
            big = 0.0
            for msg in inbox:
                if msg.payload > big:
                    big = msg.payload
            self.nbr_max = big
            self.selected = self.rho > 0.0 and self.rho >= big / self.alpha
            if self.selected:
                self.x += 1.0


class ElementNode(Node):
    """Right node: one packing variable ``y_e`` and its requirement."""

    def __init__(self, node_id: int, nbrs: dict[int, float], params: Params) -> None:
        super().__init__(node_id, nbrs, params)
        self.y = 0.0
        self.s = 0.0
        self.r = 1.0
        self.dead = False
        self.mu = 0.0
        self.last_dy = 0.0

    def send(self, step: int) -> list[tuple[int, Message]]:
        if step == 0 and not self.dead:
            return self._broadcast(Tag.REQ, self.r)
        if step == 2 and self.mu > 0.0:
            return self._broadcast(Tag.MAX, self.mu)
        return []

    def receive(self, step: int, inbox: list[Message]) -> None:
        if step == 1:
            mu = 0.0
            for msg in inbox:
                if msg.payload > mu:
                    mu = msg.payload
            self.mu = mu
        elif step == 3:
            self.last_dy = 0.0
            if self.dead or not inbox:
                return
            dy = 0.0
            ds = 0.0
            for msg in inbox:
                a = self.nbrs[msg.sender]
                dy += a * self.r / msg.payload
                ds += a
            self.last_dy = dy
            self.y += dy
            self.s += ds
            if self.s >= self.f:
                self.dead = True
                self.r = 0.0
            else:
                self.r = requirement(self.alpha, self.s)


@dataclass
class RoundStats:
    phases: int = 0
    rounds: int = 0
    messages: int = 0
    payload_bits: int = 0
    max_payload_bits: int = 0
    max_messages_per_node_round: int = 0
    bound_L: int = 0
    params: Params | None = None
    gamma_p: float = 0.0
    gamma_d: float = 0.0
    a_max: float = 0.0

    @property
    def round_bound(self) -> int:
        return ROUNDS_PER_PHASE * self.bound_L

    def as_dict(self) -> dict:
        out = {
            "phases": self.phases,
            "rounds": self.rounds,
            "messages": self.messages,
            "payload_bits": self.payload_bits,
            "max_payload_bits": self.max_payload_bits,
            "max_messages_per_node_round": self.max_messages_per_node_round,
            "L": self.bound_L,
            "round_bound": self.round_bound,
            "gamma_p": self.gamma_p,
            "gamma_d": self.gamma_d,
            "a_max": self.a_max,
        }
        if self.params is not None:
            out.update({k: v for k, v in self.params.as_dict().items() if k not in out})
        return out


@dataclass
class CongestNetwork:
    """Bipartite network with lock-step delivery and bandwidth accounting.

    Node ids: element ``e`` is ``e``; set ``S`` is ``n_rows + S``.
    """

    n_rows: int
    n_cols: int
    params: Params
    nodes: list[Node]
    edges: frozenset[tuple[int, int]]
    bit_budget: int = DEFAULT_BIT_BUDGET
    round: int = 0
    mailboxes: list[list[Message]] = field(default_factory=list)
    stats: RoundStats = field(default_factory=RoundStats)
    round_messages: list[int] = field(default_factory=list)
    inbox_log: dict[int, list[tuple[int, list[Message]]]] | None = None

    @property
    def set_nodes(self) -> list[SetNode]:
        return self.nodes[self.n_rows :]  # type: ignore[return-value]

    @property
    def element_nodes(self) -> list[ElementNode]:
        return self.nodes[: self.n_rows]  # type: ignore[return-value]

    def set_node_id(self, j: int) -> int:
        return self.n_rows + j

    def neighbors(self, node_id: int) -> list[int]:
        return list(self.nodes[node_id].nbrs)

    def quiescent(self) -> bool:
        """True once no element node is live (observer-side termination check)."""
        return all(node.dead for node in self.element_nodes)

    def step(self) -> int:
        """Run one synchronous round; returns the number of messages sent."""
        sub = self.round % ROUNDS_PER_PHASE
        boxes: list[list[Message]] = [[] for _ in self.nodes]
        sent = 0
        for node in self.nodes:
            out = node.send(sub)
            if not out:
                continue
            targets = set()
            for dest, msg in out:
                if dest not in node.nbrs:
                    raise SimulationFault(f"node {node.id} sent to non-neighbour {dest}")
                if dest in targets:
                    raise SimulationFault(f"node {node.id} sent twice to {dest} in round {self.round}")
                if msg.sender != node.id:
                    raise SimulationFault(f"node {node.id} forged sender {msg.sender}")
                bits = msg.bits
                if bits > self.bit_budget:
                    raise SimulationFault(f"message of {bits} bits exceeds budget {self.bit_budget}")
                targets.add(dest)
                boxes[dest].append(msg)
                self.stats.payload_bits += bits
                self.stats.max_payload_bits = max(self.stats.max_payload_bits, bits)
            sent += len(out)
            self.stats.max_messages_per_node_round = max(self.stats.max_messages_per_node_round, len(out))
        for box in boxes:
            box.sort(key=lambda msg: msg.sender)
        self.mailboxes = boxes
        for node, box in zip(self.nodes, boxes):
            if self.inbox_log is not None:
                self.inbox_log.setdefault(node.id, []).append((sub, list(box)))
            node.receive(sub, box)
        self.round += 1
        self.stats.rounds += 1
        self.stats.messages += sent
        self.round_messages.append(sent)
        return sent

    def observe_state(self) -> SolverState:
        """Global view assembled by the observer (never by node programs)."""
        elems = self.element_nodes
        return SolverState(
            x=np.array([v.x for v in self.set_nodes], dtype=np.float64),
            y=np.array([v.y for v in elems], dtype=np.float64),
            s=np.array([v.s for v in elems], dtype=np.float64),
            dead=np.array([v.dead for v in elems], dtype=bool),
            r=np.array([v.r for v in elems], dtype=np.float64),
            phase_index=self.stats.phases,
        )


def build_network(
    inst: NormalizedInstance, params: Params | None = None, *, bit_budget: int = DEFAULT_BIT_BUDGET
) -> CongestNetwork:
    """One node per row and column of ``A``; an edge wherever ``A_eS > 0``.

    Each node is handed only its own row or column of ``A``.
    """
    if params is None:
        params = setup_params(1.0, inst)
    mat = inst.matrix
    n = mat.n_rows
    nodes: list[Node] = [ElementNode(e, {n + j: a for j, a in mat.row(e)}, params) for e in range(n)]
    nodes += [SetNode(n + j, {e: a for e, a in mat.col(j)}, params) for j in range(mat.n_cols)]
    edges = frozenset(zip(mat.rows.tolist(), mat.cols.tolist()))
    net = CongestNetwork(n, mat.n_cols, params, nodes, edges, bit_budget=bit_budget)
    net.stats.params = params
    net.stats.bound_L = params.L
    net.stats.gamma_p = inst.gamma_p
    net.stats.gamma_d = inst.gamma_d
    net.stats.a_max = inst.a_max
    return net


@dataclass
class PhaseOutcome:
    selected: np.ndarray
    rho_before: np.ndarray
    delta_y: np.ndarray
    rounds: int
    messages: int


def run_phase_protocol(net: CongestNetwork, params: Params | None = None) -> PhaseOutcome:
    """Run the four rounds of one phase."""
    messages = 0
    for sub in range(ROUNDS_PER_PHASE):
        messages += net.step()
        if sub == 0:
            rho_before = np.array([v.rho for v in net.set_nodes], dtype=np.float64)
    net.stats.phases += 1
    return PhaseOutcome(
        selected=np.array([j for j, v in enumerate(net.set_nodes) if v.selected], dtype=np.int64),
        rho_before=rho_before,
        delta_y=np.array([v.last_dy for v in net.element_nodes], dtype=np.float64),
        rounds=ROUNDS_PER_PHASE,
        messages=messages,
    )


def run_distributed(
    inst: NormalizedInstance,
    epsilon: float,
    *,
    bit_budget: int = DEFAULT_BIT_BUDGET,
    record: bool = True,
    params: Params | None = None,
) -> tuple[PrimalDualSolution, PhaseTrace, RoundStats]:
    """Simulate the algorithm until quiescence (at most ``L`` phases)."""
    if params is None:
        params = setup_params(epsilon, inst)
    net = build_network(inst, params, bit_budget=bit_budget)
    trace = PhaseTrace()
    while net.stats.phases < params.L and not net.quiescent():
        out = run_phase_protocol(net, params)
        if record:
            state = net.observe_state()
            rec: PhaseRecord = make_record(inst, out.selected, out.rho_before, out.delta_y, state)
            rec.rounds = out.rounds
            rec.messages = out.messages
            trace.records.append(rec)
    state = net.observe_state()
    trace.phases = net.stats.phases
    trace.final_s = state.s.copy()
    trace.final_dead = state.dead.copy()
    trace.final_rho = np.array([_rho_of(v, net) for v in net.set_nodes], dtype=np.float64)
    trace.final_load = inst.matrix.rmatvec(state.y)
    return scale_output(state, params), trace, net.stats


def _rho_of(node: SetNode, net: CongestNetwork) -> float:
    # observer-side evaluation for the terminal audit
    total = 0.0
    for e, a in node.nbrs.items():
        elem = net.nodes[e]
        if not elem.dead:
            total += a * elem.r
    return total
