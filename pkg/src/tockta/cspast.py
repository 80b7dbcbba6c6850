"""Abstract syntax for the supported discrete-time CSP dialect.

Processes are immutable trees.  The distinguished event name ``tock``
stands for the passage of one time unit and is therefore banned from
synchronisation sets, hiding sets and renaming maps: every process (and
every automaton the translator produces) synchronises on it implicitly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

__all__ = [
    "TOCK",
    "SpecError",
    "validate_event_name",
    "is_reserved_action_name",
    "CspProcess",
    "Stop",
    "Skip",
    "Prefix",
    "Seq",
    "ExtChoice",
    "IntChoice",
    "GenPar",
    "Interleave",
    "Interrupt",
    "Hide",
    "Rename",
    "Ref",
    "CspSpec",
    "alphabet",
    "format_process",
    "format_spec",
]

TOCK = "tock"

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

# Name shapes the translator reserves for generated coordination channels.
_RESERVED_PREFIXES = ("startID", "finishID", "extID", "intrpID", "excpID")
_RESERVED_SUFFIXES = ("___sync", "_exch", "_intrpt")


class SpecError(ValueError):
    """A structurally invalid process or specification."""


def is_reserved_action_name(name: str) -> bool:
    """True for names the translator may generate for coordination channels."""
    if name in ("tau", "itau") or name.startswith("itau_"):
        return True
    if any(name.startswith(p) for p in _RESERVED_PREFIXES):
        return True
    return any(name.endswith(s) for s in _RESERVED_SUFFIXES)


def validate_event_name(name: str, *, allow_tock: bool = False) -> str:
    """Check that ``name`` is usable as a user-level event.

    ``tock`` is only legal where explicitly permitted (prefixing); the
    invisible actions and every reserved coordination shape are rejected
    outright so that user events can never collide with generated channels.
    """
    if not _IDENT_RE.match(name):
        raise SpecError(f"invalid event name {name!r}")
    if name == TOCK:
        if not allow_tock:
            raise SpecError("'tock' is the time event; it cannot appear here")
        return name
    if is_reserved_action_name(name):
        raise SpecError(f"{name!r} is reserved for generated coordination actions")
    return name


class CspProcess:
    """Base class for process terms; all subclasses are frozen dataclasses."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Stop(CspProcess):
    """Deadlock: refuses everything but lets time pass."""


@dataclass(frozen=True, slots=True)
class Skip(CspProcess):
    """Successful termination."""


@dataclass(frozen=True, slots=True)
class Prefix(CspProcess):
    event: str
    cont: CspProcess

    def __post_init__(self) -> None:
        validate_event_name(self.event, allow_tock=True)


@dataclass(frozen=True, slots=True)
class Seq(CspProcess):
    left: CspProcess
    right: CspProcess


@dataclass(frozen=True, slots=True)
class ExtChoice(CspProcess):
    left: CspProcess
    right: CspProcess


@dataclass(frozen=True, slots=True)
class IntChoice(CspProcess):
    left: CspProcess
    right: CspProcess


@dataclass(frozen=True, slots=True)
class GenPar(CspProcess):
    """Parallel composition synchronising on ``sync_set`` (never on tock)."""

    left: CspProcess
    right: CspProcess
    sync_set: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "sync_set", frozenset(self.sync_set))
        for name in self.sync_set:
            if name == TOCK:
                raise SpecError("'tock' cannot appear in a synchronisation set")
            validate_event_name(name)


@dataclass(frozen=True, slots=True)
class Interleave(CspProcess):
    left: CspProcess
    right: CspProcess


@dataclass(frozen=True, slots=True)
class Interrupt(CspProcess):
    left: CspProcess
    right: CspProcess


@dataclass(frozen=True, slots=True)
class Hide(CspProcess):
    body: CspProcess
    hidden: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "hidden", frozenset(self.hidden))
        for name in self.hidden:
            if name == TOCK:
                raise SpecError("'tock' cannot be hidden")
            validate_event_name(name)


@dataclass(frozen=True, slots=True)
class Rename(CspProcess):
    """Event renaming; ``mapping`` is a function stored as sorted pairs."""

    body: CspProcess
    mapping: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        pairs = tuple(sorted(self.mapping))
        object.__setattr__(self, "mapping", pairs)
        seen: set[str] = set()
        for old, new in pairs:
            if old in seen:
                raise SpecError(f"event {old!r} renamed twice")
            seen.add(old)
            for name in (old, new):
                if name == TOCK:
                    raise SpecError("'tock' cannot take part in a renaming")
                validate_event_name(name)

    def as_dict(self) -> dict[str, str]:
        return dict(self.mapping)


@dataclass(frozen=True, slots=True)
class Ref(CspProcess):
    """Reference to a named definition."""

    name: str


_BINARY = (Seq, ExtChoice, IntChoice, GenPar, Interleave, Interrupt)


@dataclass
class CspSpec:
    """A closed set of named definitions with a distinguished main process."""

    definitions: dict[str, CspProcess]
    main: str
    positions: dict[str, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.main not in self.definitions:
            raise SpecError(f"main process {self.main!r} is not defined")
        for name, body in self.definitions.items():
            for ref in _collect_refs(body):
                if ref not in self.definitions:
                    pos = self.positions.get(name)
                    where = f" (defined at line {pos[0]})" if pos else ""
                    raise SpecError(f"unresolved reference {ref!r} in {name!r}{where}")
        self._check_guardedness()

    def _check_guardedness(self) -> None:
        # A cycle of definitions is legal only if it passes through a prefix;
        # otherwise bounded trace enumeration would not terminate.
        nullable = _nullable_map(self.definitions)
        edges = {
            name: _unguarded_refs(body, nullable)
            for name, body in self.definitions.items()
        }
        state: dict[str, int] = {}  # 0 = visiting, 1 = done

        def visit(name: str, stack: list[str]) -> None:
            if state.get(name) == 1:
                return
            if state.get(name) == 0:
                cycle = " -> ".join(stack[stack.index(name):] + [name])
                raise SpecError(f"unguarded recursion: {cycle}")
            state[name] = 0
            stack.append(name)
            for nxt in sorted(edges[name]):
                visit(nxt, stack)
            stack.pop()
            state[name] = 1

        for name in self.definitions:
            visit(name, [])

    def body(self) -> CspProcess:
        return self.definitions[self.main]


def _collect_refs(p: CspProcess) -> set[str]:
    if isinstance(p, Ref):
        return {p.name}
    if isinstance(p, Prefix):
        return _collect_refs(p.cont)
    if isinstance(p, (Hide, Rename)):
        return _collect_refs(p.body)
    if isinstance(p, _BINARY):
        return _collect_refs(p.left) | _collect_refs(p.right)
    return set()


def _nullable_map(defs: dict[str, CspProcess]) -> dict[str, bool]:
    """Which definitions can terminate without any visible event or tock."""
    result = {name: False for name in defs}
    changed = True
    while changed:
        changed = False
        for name, body in defs.items():
            val = _nullable(body, result)
            if val and not result[name]:
                result[name] = True
                changed = True
    return result


def _nullable(p: CspProcess, defs_nullable: dict[str, bool]) -> bool:
    if isinstance(p, Skip):
        return True
    if isinstance(p, (Stop, Prefix)):
        return False
    if isinstance(p, Seq):
        return _nullable(p.left, defs_nullable) and _nullable(p.right, defs_nullable)
    if isinstance(p, (ExtChoice, IntChoice)):
        return _nullable(p.left, defs_nullable) or _nullable(p.right, defs_nullable)
    if isinstance(p, (GenPar, Interleave)):
        return _nullable(p.left, defs_nullable) and _nullable(p.right, defs_nullable)
    if isinstance(p, Interrupt):
        return _nullable(p.left, defs_nullable)
    if isinstance(p, (Hide, Rename)):
        return _nullable(p.body, defs_nullable)
    if isinstance(p, Ref):
        return defs_nullable.get(p.name, False)
    raise TypeError(f"unknown process node {p!r}")


def _unguarded_refs(p: CspProcess, nullable: dict[str, bool]) -> set[str]:
    """References reachable without first passing through a prefix."""
    if isinstance(p, Ref):
        return {p.name}
    if isinstance(p, (Stop, Skip, Prefix)):
        return set()
    if isinstance(p, Seq):
        out = _unguarded_refs(p.left, nullable)
        if _nullable(p.left, nullable):
            out |= _unguarded_refs(p.right, nullable)
        return out
    if isinstance(p, (Hide, Rename)):
        return _unguarded_refs(p.body, nullable)
    if isinstance(p, _BINARY):
        return _unguarded_refs(p.left, nullable) | _unguarded_refs(p.right, nullable)
    raise TypeError(f"unknown process node {p!r}")


# --- alphabet -------------------------------------------------------------

def event_universe(definitions: dict[str, CspProcess]) -> frozenset[str]:
    """Every event name appearing syntactically anywhere in the spec."""
    out: set[str] = set()

    def walk(p: CspProcess) -> None:
        if isinstance(p, Prefix):
            if p.event != TOCK:
                out.add(p.event)
            walk(p.cont)
        elif isinstance(p, Hide):
            out.update(p.hidden)
            walk(p.body)
        elif isinstance(p, Rename):
            for old, new in p.mapping:
                out.update((old, new))
            walk(p.body)
        elif isinstance(p, GenPar):
            out.update(p.sync_set)
            walk(p.left)
            walk(p.right)
        elif isinstance(p, _BINARY):
            walk(p.left)
            walk(p.right)

    for body in definitions.values():
        walk(body)
    return frozenset(out)


def alphabet(spec: CspSpec) -> frozenset[str]:
    """All visible user events reachable from main, after renaming and hiding.

    Hidden occurrences are invisible and excluded; tock is never included.
    """
    out: set[str] = set()
    seen: set[tuple] = set()
    universe = sorted(event_universe(spec.definitions))

    def resolve(name: str, wrappers: tuple) -> str | None:
        for kind, payload in wrappers:
            if kind == "rename":
                name = payload.get(name, name)
            elif name in payload:  # hide
                return None
        return name

    def fingerprint(wrappers: tuple) -> tuple:
        # Wrapper stacks inducing the same resolution are interchangeable,
        # which keeps unfolding finite even when recursion re-enters a
        # definition under ever-deeper (but convergent) renamings.
        return tuple(resolve(name, wrappers) for name in universe)

    def walk(p: CspProcess, wrappers: tuple, defs: dict[str, CspProcess]) -> None:
        if isinstance(p, Prefix):
            if p.event != TOCK:
                resolved = resolve(p.event, wrappers)
                if resolved is not None:
                    out.add(resolved)
            walk(p.cont, wrappers, defs)
        elif isinstance(p, Hide):
            walk(p.body, (("hide", p.hidden),) + wrappers, defs)
        elif isinstance(p, Rename):
            walk(p.body, (("rename", p.as_dict()),) + wrappers, defs)
        elif isinstance(p, _BINARY):
            walk(p.left, wrappers, defs)
            walk(p.right, wrappers, defs)
        elif isinstance(p, Ref):
            key = (p.name, fingerprint(wrappers))
            if key not in seen:
                seen.add(key)
                walk(defs[p.name], wrappers, defs)

    walk(spec.body(), (), spec.definitions)
    return frozenset(out)


# --- pretty printer -------------------------------------------------------

def format_process(p: CspProcess) -> str:
    """Render a process in the concrete syntax accepted by the parser."""
    if isinstance(p, Stop):
        return "STOP"
    if isinstance(p, Skip):
        return "SKIP"
    if isinstance(p, Prefix):
        cont = format_process(p.cont)
        if isinstance(p.cont, (Stop, Skip, Prefix, Ref)):
            return f"{p.event} -> {cont}"
        return f"{p.event} -> ({cont})"
    if isinstance(p, Seq):
        return f"({format_process(p.left)}) ; ({format_process(p.right)})"
    if isinstance(p, ExtChoice):
        return f"({format_process(p.left)}) [] ({format_process(p.right)})"
    if isinstance(p, IntChoice):
        return f"({format_process(p.left)}) |~| ({format_process(p.right)})"
    if isinstance(p, GenPar):
        events = ", ".join(sorted(p.sync_set))
        return f"({format_process(p.left)}) [|{{{events}}}|] ({format_process(p.right)})"
    if isinstance(p, Interleave):
        return f"({format_process(p.left)}) ||| ({format_process(p.right)})"
    if isinstance(p, Interrupt):
        return f"({format_process(p.left)}) /\\ ({format_process(p.right)})"
    if isinstance(p, Hide):
        events = ", ".join(sorted(p.hidden))
        return f"({format_process(p.body)}) \\ {{{events}}}"
    if isinstance(p, Rename):
        pairs = ", ".join(f"{old} <- {new}" for old, new in p.mapping)
        return f"({format_process(p.body)}) [[{pairs}]]"
    if isinstance(p, Ref):
        return p.name
    raise TypeError(f"unknown process node {p!r}")


def format_spec(spec: CspSpec) -> str:
    lines = [f"{spec.main} = {format_process(spec.definitions[spec.main])}"]
    for name, body in spec.definitions.items():
        if name != spec.main:
            lines.append(f"{name} = {format_process(body)}")
    return "\n".join(lines) + "\n"
