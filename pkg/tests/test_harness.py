import json

import pytest

from tockta.cspast import ExtChoice, GenPar, Prefix, Skip, Stop
from tockta.harness import (
    ACCEPTED_AT_STAGE2,
    EQUAL_AT_STAGE1,
    MISMATCH,
    check_spec,
    compare_traces,
    control_states,
    generate_corpus,
    prove_stop_base,
)
from tockta.parser import parse
from tockta.semantics import TraceSet
from tockta.tamodel import NetworkModel, TimedAutomaton
from tockta.translate import assemble


def ts(*traces, depth):
    return TraceSet(frozenset(traces), depth)


def test_identical_sets_are_equal_at_stage_one():
    sets = ts((), ("a",), depth=1)
    report = compare_traces(sets, sets)
    assert report.verdict == EQUAL_AT_STAGE1
    assert report.witnesses == ()


def test_extra_network_trace_is_a_mismatch_with_witness():
    csp = ts((), ("a",), ("a", "b"), depth=2)
    ta = ts((), ("a",), ("a", "b"), ("a", "c"), depth=2)
    report = compare_traces(csp, ta)
    assert report.verdict == MISMATCH
    assert ("ta", "a,c") in report.witnesses


def test_mismatch_reports_witnesses_from_both_directions():
    csp = ts((), ("x",), depth=1)
    ta = ts((), ("y",), depth=1)
    report = compare_traces(csp, ta)
    assert ("csp", "x") in report.witnesses
    assert ("ta", "y") in report.witnesses


def test_permutation_only_difference_is_accepted_at_stage_two():
    csp = ts((), ("a",), ("a", "b"), depth=2)
    ta = ts((), ("a",), ("a", "b"), ("b", "a"), depth=2)
    report = compare_traces(csp, ta)
    assert report.verdict == ACCEPTED_AT_STAGE2


def test_storage_order_is_irrelevant():
    csp = ts(("a",), (), depth=1)
    ta = ts((), ("a",), depth=1)
    assert compare_traces(csp, ta).verdict == EQUAL_AT_STAGE1


def test_depth_mismatch_is_an_error():
    with pytest.raises(ValueError, match="depth mismatch"):
        compare_traces(ts((), depth=1), ts((), depth=2))


def test_report_json_schema():
    report = check_spec(parse("P = a -> STOP"), 2, spec_id="demo")
    data = json.loads(report.to_json())
    assert set(data) == {"id", "depth", "verdict", "witnesses", "millis"}
    assert data["id"] == "demo" and data["depth"] == 2
    assert data["verdict"] == EQUAL_AT_STAGE1


def test_corpus_is_large_deduplicated_and_small_state():
    corpus = generate_corpus()
    assert len(corpus) >= 111
    bodies = [entry.spec.body() for entry in corpus]
    assert len(bodies) == len(set(bodies))
    assert all(control_states(entry.spec) <= 5 for entry in corpus)
    # stable ids, deterministic regeneration
    again = generate_corpus()
    assert [e.id for e in corpus] == [e.id for e in again]
    assert bodies == [e.spec.body() for e in again]


def test_corpus_contains_the_promised_shapes():
    bodies = {entry.spec.body() for entry in generate_corpus()}
    assert ExtChoice(Prefix("a", Stop()), Prefix("b", Stop())) in bodies
    assert GenPar(Prefix("a", Skip()), Prefix("a", Skip()), frozenset({"a"})) in bodies


def test_check_spec_examples():
    assert check_spec(parse("P = STOP"), 5).verdict == EQUAL_AT_STAGE1
    ads = parse(
        "ADS = Controller [|{close}|] Lighting\n"
        "Controller = open -> tock -> close -> Controller\n"
        "Lighting = close -> offLight -> Lighting\n"
    )
    assert check_spec(ads, 4).verdict == EQUAL_AT_STAGE1


def test_check_spec_reports_are_reproducible():
    spec = parse("Pe = (left->STOP)[](right->STOP)")
    a = check_spec(spec, 3, spec_id="pe")
    b = check_spec(spec, 3, spec_id="pe")
    assert (a.spec_id, a.depth, a.verdict, a.witnesses) == (
        b.spec_id,
        b.depth,
        b.verdict,
        b.witnesses,
    )


def test_corpus_verdicts_do_not_depend_on_order():
    corpus = generate_corpus()
    sample = [corpus[3], corpus[40], corpus[77]]
    forward = [check_spec(e.spec, 3, spec_id=e.id).verdict for e in sample]
    backward = [check_spec(e.spec, 3, spec_id=e.id).verdict for e in reversed(sample)]
    assert forward == backward[::-1]


def test_prove_stop_base_trivial_and_deep():
    trivial = prove_stop_base(0)
    assert trivial.passed
    deep = prove_stop_base(20)
    assert deep.passed
    assert "result: all laws hold up to depth 20" in deep.text()


def test_prove_stop_base_catches_a_removed_tock_loop():
    net = assemble(Stop())
    stop_ta = net.automata[0]
    mutated = TimedAutomaton(
        stop_ta.name,
        stop_ta.locations,
        stop_ta.initial,
        stop_ta.clocks,
        tuple(e for e in stop_ta.edges if not (e.source == e.target == "s1")),
    )
    broken = NetworkModel(
        (mutated,) + net.automata[1:],
        net.channels,
        net.int_vars,
        net.global_clocks,
        net.environment_index,
    )
    report = prove_stop_base(3, net=broken)
    assert not report.passed
    assert report.failures[0] == (1, "erased-equality")
