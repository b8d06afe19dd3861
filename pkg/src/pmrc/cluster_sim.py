"""Deterministic event-loop simulation of a storage cluster running a PM code.

Nodes hold real share data (all stripes), fail, get repaired from ``d`` helpers chosen by
a pluggable policy, and serve data collectors. A passive adversary accumulates the
coefficient rows of everything it observes so its leakage can be computed exactly.

Scenario scripts are line-oriented::

    # comment
    FAIL 3
    REPAIR 3 POLICY random
    COLLECT 1,4,5
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import CollectImpossible, RepairImpossible, ScenarioError
from .pm_codes import Padding, stripe, unstripe
from .secrecy_audit import EavesdropperSpec, ObservationSystem, helper_rows, leakage, observation_rows
from .linalg import rank


@dataclass(frozen=True)
class TrafficRecord:
    tick: int
    event: str
    nodes: tuple[int, ...]
    symbols_per_stripe: int
    stripes: int

    @property
    def symbols(self) -> int:
        return self.symbols_per_stripe * self.stripes


class TrafficLog(list):
    def total(self, event: str | None = None) -> int:
        return sum(r.symbols for r in self if event is None or r.event == event)

    def per_stripe(self, event: str) -> list[int]:
        return [r.symbols_per_stripe for r in self if r.event == event]


@dataclass
class AdversaryState:
    spec: EavesdropperSpec
    system: ObservationSystem
    repairs_seen: int = 0

    @property
    def rank(self) -> int:
        return rank(self.system.combined)

    def leakage(self) -> int:
        return leakage(self.system)


# helper selection policies: (candidates, d, state) -> chosen helpers
Policy = Callable[[list, int, "ClusterState"], list]


def lowest_id(candidates, d, state):
    return sorted(candidates)[:d]


def random_helpers(candidates, d, state):
    return sorted(state.rng.sample(sorted(candidates), d))


def avoid_adversary(candidates, d, state):
    watched = state.adversary.spec.storage_nodes if state.adversary else frozenset()
    ordered = sorted(candidates, key=lambda h: (h in watched, h))
    return sorted(ordered[:d])


POLICIES: dict[str, Policy] = {
    "lowest-id": lowest_id,
    "random": random_helpers,
    "avoid-adversary": avoid_adversary,
}


@dataclass
class ClusterState:
    code: object
    shares: list                 # per node: alpha x S array, or None while failed
    canonical: np.ndarray        # n x alpha x S shares as first distributed
    padding: Padding
    adversary: AdversaryState | None = None
    clock: int = 0
    log: TrafficLog = field(default_factory=TrafficLog)
    pending: list = field(default_factory=list)
    rng: random.Random = field(default_factory=lambda: random.Random(0))

    @property
    def stripes(self) -> int:
        return self.canonical.shape[2]

    def alive(self) -> list[int]:
        return [i + 1 for i, s in enumerate(self.shares) if s is not None]

    def is_alive(self, node: int) -> bool:
        return self.shares[node - 1] is not None

    def _record(self, event, nodes, per_stripe):
        self.log.append(TrafficRecord(self.clock, event, tuple(nodes), per_stripe, self.stripes))
        self.clock += 1

    def _check_node(self, node):
        if not 1 <= node <= self.code.n:
            raise ScenarioError(f"node {node} outside 1..{self.code.n}")

    def fail(self, node: int):
        self._check_node(node)
        if not self.is_alive(node):
            raise ScenarioError(f"node {node} is already failed")
        self.shares[node - 1] = None
        self.pending.append(node)
        self._record("fail", [node], 0)

    def repair(self, node: int | None = None, policy: str | Policy = "lowest-id"):
        """Regenerate ``node`` (default: the oldest pending failure) from d alive helpers."""
        if node is None:
            if not self.pending:
                raise ScenarioError("no failed node to repair")
            node = self.pending[0]
        self._check_node(node)
        if self.is_alive(node):
            raise ScenarioError(f"node {node} is not failed")
        candidates = [h for h in self.alive() if h != node]
        d = self.code.d
        if len(candidates) < d:
            raise RepairImpossible(f"only {len(candidates)} alive helpers, repair needs {d}")
        choose = POLICIES[policy] if isinstance(policy, str) else policy
        helpers = list(choose(candidates, d, self))
        symbols = np.stack([self.code.helper_batch(self.shares[h - 1], node) for h in helpers])
        self.shares[node - 1] = self.code.repair_batch(node, helpers, symbols)
        self.pending.remove(node)
        if self.adversary and node in self.adversary.spec.repair_nodes:
            self.adversary.system = self.adversary.system.extend(helper_rows(self.code, node, helpers))
            self.adversary.repairs_seen += 1
        self._record("repair", [node, *helpers], d)
        return helpers

    def collect(self, nodes: Sequence[int]) -> list[int]:
        nodes = list(nodes)
        k = self.code.k
        if len(nodes) < k or len(set(nodes)) != len(nodes):
            raise CollectImpossible(f"collect needs {k} distinct nodes, got {nodes}")
        dead = [i for i in nodes if not self.is_alive(i)]
        if dead:
            raise CollectImpossible(f"nodes {dead} are not alive")
        nodes = nodes[:k]
        data = np.stack([self.shares[i - 1] for i in nodes])
        free = self.code.decode_batch(nodes, data)
        message = free[: self.code.secrecy.B_s].T  # S x B_s, stripe-major
        self._record("collect", nodes, k * self.code.alpha)
        return unstripe(message.tolist(), self.padding)

    def restored(self) -> bool:
        """Every alive node holds exactly the share it was first given."""
        return all(np.array_equal(self.shares[i - 1], self.canonical[i - 1]) for i in self.alive())


def _adversary(code, spec):
    if spec is None:
        return None
    rows = observation_rows(code, EavesdropperSpec(spec.storage_nodes))
    return AdversaryState(spec, ObservationSystem.from_rows(rows, code.secrecy.B_s, code.field))


def init(code, message: Sequence[int], spec: EavesdropperSpec | None = None, source=None,
         seed: int = 0) -> ClusterState:
    """Distribute ``message`` (striped) over all n nodes; seed the adversary's stored views."""
    message = list(message)
    if any(not 0 <= x < code.q for x in message):
        raise ValueError(f"message symbols must lie in GF({code.q})")
    stripes, padding = stripe(message, code.secrecy.B_s)
    block = np.array(stripes, dtype=np.int64).T  # B_s x S
    shares = code.encode_batch(code.draw_free(block, source))
    return from_shares(code, shares, padding, spec, seed)


def from_shares(code, shares: np.ndarray, padding: Padding, spec: EavesdropperSpec | None = None,
                seed: int = 0) -> ClusterState:
    shares = np.asarray(shares, dtype=np.int64)
    return ClusterState(
        code=code,
        shares=[shares[i].copy() for i in range(code.n)],
        canonical=shares.copy(),
        padding=padding,
        adversary=_adversary(code, spec),
        rng=random.Random(seed),
    )


# -- scenarios -----------------------------------------------------------------


def parse_script(text: str) -> list[tuple]:
    events = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        op = words[0].upper()
        try:
            if op == "FAIL" and len(words) == 2:
                events.append(("FAIL", int(words[1])))
            elif op == "REPAIR" and len(words) in (2, 4):
                policy = "lowest-id"
                if len(words) == 4:
                    if words[2].upper() != "POLICY":
                        raise ValueError
                    policy = words[3]
                    if policy not in POLICIES:
                        raise ScenarioError(f"line {lineno}: unknown policy {policy!r}")
                events.append(("REPAIR", int(words[1]), policy))
            elif op == "COLLECT" and len(words) == 2:
                events.append(("COLLECT", tuple(int(x) for x in words[1].split(","))))
            else:
                raise ValueError
        except ValueError:
            raise ScenarioError(f"line {lineno}: cannot parse {raw.strip()!r}") from None
    return events


@dataclass
class ScenarioResult:
    state: ClusterState
    log: TrafficLog
    collected: list[list[int]]
    leakage: int | None
    adversary_rank: int | None


def run_scenario(state: ClusterState, script) -> ScenarioResult:
    """Replay ``script`` (text or parsed events) against ``state``."""
    events = parse_script(script) if isinstance(script, str) else list(script)
    collected = []
    for ev in events:
        if ev[0] == "FAIL":
            state.fail(ev[1])
        elif ev[0] == "REPAIR":
            state.repair(ev[1], ev[2] if len(ev) > 2 else "lowest-id")
        elif ev[0] == "COLLECT":
            collected.append(state.collect(ev[1]))
        else:
            raise ScenarioError(f"unknown event {ev!r}")
    adv = state.adversary
    return ScenarioResult(state, state.log, collected,
                          adv.leakage() if adv else None, adv.rank if adv else None)
