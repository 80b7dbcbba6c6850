"""End-to-end trace equality on the delicate corners of the translation,
plus the shapes that must be rejected because no finite network exists."""

import pytest

from tockta.parser import parse
from tockta.semantics import csp_traces
from tockta.taexec import network_traces
from tockta.translate import TranslationError, assemble


def equal_up_to(source: str, depth: int) -> bool:
    spec = parse(source)
    net = assemble(spec)
    return all(
        csp_traces(spec, n).traces == network_traces(net, n).traces
        for n in range(depth + 1)
    )


@pytest.mark.parametrize(
    "source",
    [
        # an armed interrupt must still fire after its branch won the choice
        "P = STOP [] ((c -> STOP) /\\ (a -> SKIP))",
        # both branches can terminate; only one may claim the shared finish
        "P = (SKIP [] SKIP) ; (a -> STOP)",
        "P = (SKIP [] (b -> SKIP)) ; (a -> STOP)",
        # interrupting a side that is itself compound retires all of it
        "P = ((STOP) /\\ (c -> SKIP)) /\\ ((a -> SKIP) |~| STOP)",
        "P = ((b -> STOP) ||| (d -> STOP)) /\\ (c -> STOP)",
        # re-entering a compound construct resets its stale branches
        "P = (c -> d -> c -> STOP) [] (tock -> P)",
        "P = (b -> P) [] (c -> STOP)",
        "P = ((a -> SKIP) [] (b -> SKIP)) ; P",
        "MAIN = Q /\\ (b -> STOP)\nQ = a -> Q",
        # choice through time, internal choice and hidden events
        "P = (tock -> a -> STOP) [] (b -> STOP)",
        "P = ((a -> STOP) |~| (b -> STOP)) [] (c -> STOP)",
        "P = ((a -> b -> STOP) \\ {a}) [] (c -> STOP)",
        # parallelism inside a choice branch
        "P = ((a -> STOP) ||| (b -> STOP)) [] (c -> STOP)",
        # synchronisation under choice and interrupt
        "P = ((a -> STOP) [|{a}|] (a -> STOP)) [] (c -> STOP)",
        "P = ((a -> STOP) [|{a}|] (a -> STOP)) /\\ (c -> STOP)",
        "P = (c -> STOP) /\\ ((a -> STOP) [|{a}|] (a -> STOP))",
        # hidden synchronised event ticks over invisibly
        "P = ((a -> SKIP) [|{a}|] (a -> SKIP)) \\ {a}",
    ],
)
def test_delicate_shapes_preserve_traces(source):
    assert equal_up_to(source, 5), source


@pytest.mark.parametrize(
    "source, why",
    [
        # several occurrences of a synchronised event on one side
        ("P = (a -> STOP) [|{a}|] (a -> a -> STOP)", "occurrences"),
        # nested synchronisation on the same event folds into one side too
        ("P = ((a -> STOP) [|{a}|] (a -> STOP)) [|{a}|] (a -> STOP)", "occurrences"),
        # recursion stacking sequential continuations
        ("P = (a -> P) ; (b -> STOP)", "recursion"),
        # recursion stacking armed interrupts
        ("P = (d -> P) /\\ (b -> STOP)", "recursion"),
        # recursion spawning parallel copies
        ("P = a -> ((b -> SKIP) ||| P)", "recursion"),
    ],
)
def test_untranslatable_shapes_are_rejected(source, why):
    with pytest.raises(TranslationError, match=why):
        assemble(parse(source))
