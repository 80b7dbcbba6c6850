"""Discrete-time executor for automata networks.

Semantics: unit time ticks increment every clock by one; a binary channel
pairs one enabled sender with one enabled receiver; a broadcast fires from
an enabled sender alone and takes every automaton whose matching receive
edge is enabled at that moment (possibly none).  If any automaton sits in
a committed location, only steps involving a committed automaton may
fire, and time may not pass.  Time also may not pass while an urgent
location is occupied or an urgent channel has a matched enabled pair.

Unit delays are exact here because every constraint in scope compares a
clock against an integer constant and the only time-sensitive action is
the environment's tock broadcast, so no dense-time zone machinery is
needed.

Network traces record one entry (the channel name) per binary or
broadcast step; silent edges and time ticks are unrecorded.  The
coordinating channels can additionally be erased, which is the view
compared against the source process semantics.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

from .semantics import BoundExceeded, TraceSet
from .tamodel import ClockAtom, IntAtom, LocationKind, NetworkModel, erasure_set

__all__ = [
    "Configuration",
    "TimeTick",
    "Silent",
    "Binary",
    "Broadcast",
    "initial_configuration",
    "enabled_steps",
    "apply_step",
    "raw_network_traces",
    "network_traces",
    "reachable_configurations",
    "timelock_witnesses",
]


@dataclass(frozen=True, slots=True)
class Configuration:
    """Locations, integer variable values and clock values, in the fixed
    orders defined by the network (automata order, declaration order)."""

    locations: tuple[str, ...]
    ints: tuple[int, ...]
    clocks: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class TimeTick:
    """One unit delay: every clock advances by 1, nobody moves."""


@dataclass(frozen=True, slots=True)
class Silent:
    automaton: int
    edge: int


@dataclass(frozen=True, slots=True)
class Binary:
    channel: str
    sender: int
    sender_edge: int
    receiver: int
    receiver_edge: int


@dataclass(frozen=True, slots=True)
class Broadcast:
    channel: str
    sender: int
    sender_edge: int
    receivers: tuple[tuple[int, int], ...]  # (automaton, edge), ascending


class _Runtime:
    """Index structures for fast stepping of one network."""

    def __init__(self, net: NetworkModel):
        self.net = net
        self.var_pos = {name: i for i, (name, _) in enumerate(net.int_vars)}
        self.init_ints = tuple(value for _, value in net.int_vars)
        self.clock_pos: dict[tuple[int | None, str], int] = {}
        slots: list[int] = []
        for name in net.global_clocks:
            self.clock_pos[(None, name)] = len(slots)
            slots.append(0)
        for ai, ta in enumerate(net.automata):
            for name in ta.clocks:
                self.clock_pos[(ai, name)] = len(slots)
                slots.append(0)
        self.n_clocks = len(slots)
        self.channel_mode = {c.name: c.mode for c in net.channels}

        max_const = 1
        self.edges: list[list[dict]] = []
        self.out_edges: list[dict[str, list[int]]] = []
        self.loc_kind: list[dict[str, LocationKind]] = []
        self.invariants: list[dict[str, list[tuple[int, str, int]]]] = []
        for ai, ta in enumerate(net.automata):
            resolved = []
            outs: dict[str, list[int]] = {loc.id: [] for loc in ta.locations}
            kinds = {loc.id: loc.kind for loc in ta.locations}
            invs: dict[str, list[tuple[int, str, int]]] = {}
            for loc in ta.locations:
                if loc.invariant:
                    invs[loc.id] = [
                        (self._clock_slot(ai, atom.clock), atom.op, atom.const)
                        for atom in loc.invariant
                    ]
                    max_const = max([max_const] + [a.const for a in loc.invariant])
            for ei, edge in enumerate(ta.edges):
                clock_atoms = []
                int_atoms = []
                if edge.guard is not None:
                    for atom in edge.guard.atoms:
                        if isinstance(atom, ClockAtom):
                            clock_atoms.append((self._clock_slot(ai, atom.clock), atom.op, atom.const))
                            max_const = max(max_const, atom.const)
                        else:
                            int_atoms.append(
                                (tuple(self.var_pos[v] for v in atom.variables), atom.op, atom.const)
                            )
                updates = []
                for upd in edge.updates:
                    key = (ai, upd.target)
                    if key in self.clock_pos or (None, upd.target) in self.clock_pos:
                        slot = self.clock_pos.get(key, self.clock_pos.get((None, upd.target)))
                        updates.append(("clock", slot, upd.value))
                    else:
                        updates.append(("int", self.var_pos[upd.target], upd.value))
                resolved.append(
                    {
                        "source": edge.source,
                        "target": edge.target,
                        "clock_atoms": clock_atoms,
                        "int_atoms": int_atoms,
                        "sync": (edge.sync.channel, edge.sync.direction) if edge.sync else None,
                        "updates": updates,
                    }
                )
                outs[edge.source].append(ei)
            self.edges.append(resolved)
            self.out_edges.append(outs)
            self.loc_kind.append(kinds)
            self.invariants.append(invs)
        self.clock_cap = max_const + 1

    def _clock_slot(self, automaton: int, name: str) -> int:
        key = (automaton, name)
        if key in self.clock_pos:
            return self.clock_pos[key]
        return self.clock_pos[(None, name)]


@lru_cache(maxsize=64)
def _runtime(net: NetworkModel) -> _Runtime:
    return _Runtime(net)


def initial_configuration(net: NetworkModel) -> Configuration:
    rt = _runtime(net)
    return Configuration(
        locations=tuple(ta.initial for ta in net.automata),
        ints=rt.init_ints,
        clocks=(0,) * rt.n_clocks,
    )


def _holds(op: str, lhs: int, rhs: int) -> bool:
    if op == "<":
        return lhs < rhs
    if op == "<=":
        return lhs <= rhs
    if op == "==":
        return lhs == rhs
    if op == ">=":
        return lhs >= rhs
    return lhs > rhs


def _edge_enabled(rt: _Runtime, ai: int, ei: int, cfg: Configuration) -> bool:
    edge = rt.edges[ai][ei]
    for slot, op, const in edge["clock_atoms"]:
        if not _holds(op, cfg.clocks[slot], const):
            return False
    for positions, op, const in edge["int_atoms"]:
        if not _holds(op, sum(cfg.ints[p] for p in positions), const):
            return False
    inv = rt.invariants[ai].get(edge["target"])
    if inv:
        clocks = list(cfg.clocks)
        for kind, slot, value in edge["updates"]:
            if kind == "clock":
                clocks[slot] = value
        for slot, op, const in inv:
            if not _holds(op, clocks[slot], const):
                return False
    return True


def enabled_steps(net: NetworkModel, cfg: Configuration) -> frozenset:
    """All steps legal from ``cfg``; a pure function of its arguments."""
    rt = _runtime(net)
    n = len(net.automata)
    enabled: list[list[int]] = []
    committed = set()
    urgent_loc = False
    for ai in range(n):
        loc = cfg.locations[ai]
        kind = rt.loc_kind[ai][loc]
        if kind is LocationKind.COMMITTED:
            committed.add(ai)
        elif kind is LocationKind.URGENT:
            urgent_loc = True
        enabled.append([ei for ei in rt.out_edges[ai].get(loc, ()) if _edge_enabled(rt, ai, ei, cfg)])

    sends: dict[str, list[tuple[int, int]]] = {}
    receives: dict[str, list[tuple[int, int]]] = {}
    steps: list = []
    for ai in range(n):
        for ei in enabled[ai]:
            sync = rt.edges[ai][ei]["sync"]
            if sync is None:
                steps.append(Silent(ai, ei))
            elif sync[1] == "send":
                sends.setdefault(sync[0], []).append((ai, ei))
            else:
                receives.setdefault(sync[0], []).append((ai, ei))

    urgent_pair = False
    for channel, senders in sends.items():
        mode = rt.channel_mode.get(channel, "binary")
        if mode == "broadcast":
            for ai, ei in senders:
                by_auto: dict[int, list[int]] = {}
                for rj, re in receives.get(channel, ()):
                    if rj != ai:
                        by_auto.setdefault(rj, []).append(re)
                autos = sorted(by_auto)
                for combo in product(*(by_auto[a] for a in autos)):
                    steps.append(Broadcast(channel, ai, ei, tuple(zip(autos, combo))))
        else:
            for ai, ei in senders:
                for rj, re in receives.get(channel, ()):
                    if rj != ai:
                        steps.append(Binary(channel, ai, ei, rj, re))
                        if mode == "urgent-binary":
                            urgent_pair = True

    if committed:
        def involves_committed(step) -> bool:
            if isinstance(step, Silent):
                return step.automaton in committed
            if isinstance(step, Binary):
                return step.sender in committed or step.receiver in committed
            return step.sender in committed or any(a in committed for a, _ in step.receivers)

        steps = [s for s in steps if involves_committed(s)]
    elif not urgent_loc and not urgent_pair:
        ticked = [v + 1 for v in cfg.clocks]
        ok = True
        for ai in range(n):
            inv = rt.invariants[ai].get(cfg.locations[ai])
            if inv and not all(_holds(op, ticked[slot], const) for slot, op, const in inv):
                ok = False
                break
        if ok:
            steps.append(TimeTick())
    return frozenset(steps)


def apply_step(net: NetworkModel, cfg: Configuration, step) -> Configuration:
    """Advance the configuration; ``step`` must come from enabled_steps."""
    rt = _runtime(net)
    if isinstance(step, TimeTick):
        return Configuration(cfg.locations, cfg.ints, tuple(v + 1 for v in cfg.clocks))
    locations = list(cfg.locations)
    ints = list(cfg.ints)
    clocks = list(cfg.clocks)

    def move(ai: int, ei: int) -> None:
        edge = rt.edges[ai][ei]
        assert locations[ai] == edge["source"], "step not enabled in this configuration"
        locations[ai] = edge["target"]
        for kind, slot, value in edge["updates"]:
            if kind == "clock":
                clocks[slot] = value
            else:
                ints[slot] = value

    if isinstance(step, Silent):
        move(step.automaton, step.edge)
    elif isinstance(step, Binary):
        move(step.sender, step.sender_edge)
        move(step.receiver, step.receiver_edge)
    else:
        move(step.sender, step.sender_edge)
        for ai, ei in step.receivers:
            move(ai, ei)
    return Configuration(tuple(locations), tuple(ints), tuple(clocks))


def _normalise(rt: _Runtime, cfg: Configuration) -> Configuration:
    # Clock values beyond every constant are indistinguishable; capping them
    # keeps the reachable configuration space finite.
    cap = rt.clock_cap
    if all(v <= cap for v in cfg.clocks):
        return cfg
    return Configuration(cfg.locations, cfg.ints, tuple(min(v, cap) for v in cfg.clocks))


class _Explorer:
    """Label-annotated successor expansion with per-configuration caching."""

    def __init__(self, net: NetworkModel, state_cap: int):
        self.net = net
        self.rt = _runtime(net)
        self.state_cap = state_cap
        self.cache: dict[Configuration, tuple[tuple[str | None, Configuration], ...]] = {}

    def successors(self, cfg: Configuration) -> tuple[tuple[str | None, Configuration], ...]:
        cached = self.cache.get(cfg)
        if cached is not None:
            return cached
        out = []
        for step in enabled_steps(self.net, cfg):
            label = None
            if isinstance(step, (Binary, Broadcast)):
                label = step.channel
            out.append((label, _normalise(self.rt, apply_step(self.net, cfg, step))))
        result = tuple(out)
        self.cache[cfg] = result
        if len(self.cache) > self.state_cap:
            raise BoundExceeded(f"network exploration exceeded {self.state_cap} configurations")
        return result


def raw_network_traces(
    net: NetworkModel, depth: int, *, state_cap: int = 500_000
) -> TraceSet:
    """Bounded traces over *all* channel names, coordinating ones included."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    explorer = _Explorer(net, state_cap)
    start = _normalise(explorer.rt, initial_configuration(net))
    seen: set[tuple[Configuration, tuple[str, ...]]] = {(start, ())}
    traces: set[tuple[str, ...]] = {()}
    queue = deque([(start, ())])
    while queue:
        cfg, trace = queue.popleft()
        for label, succ in explorer.successors(cfg):
            if label is None:
                nxt = (succ, trace)
            elif len(trace) < depth:
                nxt = (succ, trace + (label,))
            else:
                continue
            if nxt not in seen:
                seen.add(nxt)
                traces.add(nxt[1])
                queue.append(nxt)
                if len(seen) > state_cap:
                    raise BoundExceeded(f"network exploration exceeded {state_cap} states")
    return TraceSet(frozenset(traces), depth)


def _coordinating_budget(net: NetworkModel, depth: int) -> int:
    # Guardedness of the source guarantees no coordinating-only cycle, so
    # between two observable actions each coordinating send edge fires at
    # most once; that bounds the raw length needed to see every erased
    # trace of the requested length.
    erased = erasure_set(net)
    per_gap = sum(
        1
        for ta in net.automata
        for edge in ta.edges
        if edge.sync is not None and edge.sync.direction == "send" and edge.sync.channel in erased
    )
    return depth * (1 + per_gap) + per_gap


def network_traces(
    net: NetworkModel, depth: int, *, state_cap: int = 500_000
) -> TraceSet:
    """Bounded traces with coordinating actions erased.

    Erasure shortens traces, so internally the exploration runs to a raw
    budget derived from the network structure; blowing the state cap is an
    explicit failure, never a silent truncation.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    erased = erasure_set(net)
    budget = _coordinating_budget(net, depth)
    explorer = _Explorer(net, state_cap)
    start = _normalise(explorer.rt, initial_configuration(net))
    # 0/1 breadth-first search ordered by raw recorded length, deduplicated
    # on (configuration, erased trace): the first visit uses the fewest
    # recorded actions, so the raw budget prunes soundly.
    seen: set[tuple[Configuration, tuple[str, ...]]] = {(start, ())}
    traces: set[tuple[str, ...]] = {()}
    queue = deque([(start, (), 0)])
    while queue:
        cfg, trace, raw = queue.popleft()
        for label, succ in explorer.successors(cfg):
            if label is None:
                nxt = (succ, trace, raw)
            elif raw >= budget:
                continue
            elif label in erased:
                nxt = (succ, trace, raw + 1)
            elif len(trace) < depth:
                nxt = (succ, trace + (label,), raw + 1)
            else:
                continue
            key = (nxt[0], nxt[1])
            if key not in seen:
                seen.add(key)
                traces.add(nxt[1])
                if nxt[2] == raw:
                    queue.appendleft(nxt)
                else:
                    queue.append(nxt)
                if len(seen) > state_cap:
                    raise BoundExceeded(f"network exploration exceeded {state_cap} states")
    return TraceSet(frozenset(traces), depth)


def reachable_configurations(
    net: NetworkModel, observable_depth: int, *, state_cap: int = 500_000
) -> frozenset[Configuration]:
    """Configurations reachable while recording at most ``observable_depth``
    non-coordinating actions."""
    erased = erasure_set(net)
    budget = _coordinating_budget(net, observable_depth)
    explorer = _Explorer(net, state_cap)
    start = _normalise(explorer.rt, initial_configuration(net))
    best: dict[Configuration, tuple[int, int]] = {start: (0, 0)}
    queue = deque([(start, 0, 0)])
    while queue:
        cfg, obs, raw = queue.popleft()
        for label, succ in explorer.successors(cfg):
            if label is None:
                nxt = (succ, obs, raw)
            elif label in erased:
                if raw >= budget:
                    continue
                nxt = (succ, obs, raw + 1)
            else:
                if obs >= observable_depth or raw >= budget:
                    continue
                nxt = (succ, obs + 1, raw + 1)
            prev = best.get(nxt[0])
            if prev is None or (nxt[1], nxt[2]) < prev:
                best[nxt[0]] = (nxt[1], nxt[2])
                queue.append(nxt)
                if len(best) > state_cap:
                    raise BoundExceeded(f"network exploration exceeded {state_cap} states")
    return frozenset(best)


def timelock_witnesses(
    net: NetworkModel,
    *,
    observable_depth: int = 4,
    search_depth: int = 20,
    state_cap: int = 500_000,
) -> list[Configuration]:
    """Reachable configurations from which no bounded step sequence
    re-enables the passage of time.  Empty on a healthy translation."""
    explorer = _Explorer(net, state_cap)
    witnesses = []
    can_tick: dict[Configuration, bool] = {}

    def ticks_here(cfg: Configuration) -> bool:
        cached = can_tick.get(cfg)
        if cached is None:
            cached = any(isinstance(s, TimeTick) for s in enabled_steps(net, cfg))
            can_tick[cfg] = cached
        return cached

    def can_tick_within(cfg: Configuration, bound: int) -> bool:
        frontier = {cfg}
        visited = set(frontier)
        for _ in range(bound + 1):
            if any(ticks_here(state) for state in frontier):
                return True
            nxt = set()
            for state in frontier:
                for _, succ in explorer.successors(state):
                    if succ not in visited:
                        visited.add(succ)
                        nxt.add(succ)
            if not nxt:
                return False
            frontier = nxt
        return False

    for cfg in sorted(
        reachable_configurations(net, observable_depth, state_cap=state_cap),
        key=lambda c: (c.locations, c.ints, c.clocks),
    ):
        if not can_tick_within(cfg, search_depth):
            witnesses.append(cfg)
    return witnesses
