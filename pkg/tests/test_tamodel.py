from tockta.cspast import Stop
from tockta.parser import parse
from tockta.tamodel import (
    ChannelDecl,
    ChannelKind,
    Edge,
    Location,
    NetworkModel,
    SyncLabel,
    TimedAutomaton,
    erasure_set,
    kind_from_name,
    validate,
)
from tockta.translate import assemble

ADS = parse(
    "ADS = Controller [|{close}|] Lighting\n"
    "Controller = open -> tock -> close -> Controller\n"
    "Lighting = close -> offLight -> Lighting\n"
)


def tiny_ta(name="T", edges=(), locations=None):
    locations = locations or (Location("s0", "s0"),)
    return TimedAutomaton(name, locations, "s0", (), tuple(edges))


def test_translated_ads_validates_cleanly():
    assert validate(assemble(ADS)) == []


def test_unresolved_channel_is_reported():
    ta = tiny_ta(edges=[Edge("s0", "s0", sync=SyncLabel("ghost", "send"))])
    net = NetworkModel((ta,), (), (), (), environment_index=0)
    messages = [str(d) for d in validate(net)]
    assert any("unresolved channel" in m for m in messages)


def test_duplicate_channel_is_reported():
    chans = (
        ChannelDecl("close___sync", "broadcast", ChannelKind.SYNCHRONISATION),
        ChannelDecl("close___sync", "broadcast", ChannelKind.SYNCHRONISATION),
    )
    net = NetworkModel((tiny_ta(),), chans, (), (), environment_index=0)
    messages = [str(d) for d in validate(net)]
    assert any("duplicate channel" in m for m in messages)


def test_validate_is_idempotent_and_pure():
    net = assemble(ADS)
    first = validate(net)
    second = validate(net)
    assert first == second == []


def test_erasure_set_of_translated_stop():
    net = assemble(Stop())  # bare process: numbered root start
    assert erasure_set(net) == frozenset({"startID0_0", "finishID0"})


def test_erasure_set_of_translated_ads():
    names = erasure_set(assemble(ADS))
    assert "close___sync" in names
    assert "finishID0" in names
    assert {n for n in names if n.startswith("startID")} >= {
        "startIDADS",
        "startID00_1",
        "startID01_2",
    }
    assert names.isdisjoint({"open", "close", "offLight", "tock"})


def test_erasure_set_empty_without_coordination():
    chans = (
        ChannelDecl("tock", "broadcast", ChannelKind.TOCK),
        ChannelDecl("open", "binary", ChannelKind.USER_EVENT),
    )
    net = NetworkModel((tiny_ta(),), chans, (), (), environment_index=0)
    assert erasure_set(net) == frozenset()


def test_kind_metadata_agrees_with_reserved_name_patterns():
    for spec in (ADS, parse("Pe = (left->STOP)[](right->STOP)"),
                 parse("Pi = (open->STOP)/\\(fire->close->STOP)"),
                 parse("P = (a -> STOP) \\ {a}")):
        net = assemble(spec)
        erased = erasure_set(net)
        for decl in net.channels:
            inferred = kind_from_name(decl.name)
            assert (decl.name in erased) == (
                inferred not in (ChannelKind.USER_EVENT, ChannelKind.TOCK)
            ), decl


def test_erasure_never_contains_user_events():
    from tockta.harness import generate_corpus
    from tockta.cspast import alphabet

    for entry in generate_corpus()[::5]:
        net = assemble(entry.spec)
        assert erasure_set(net).isdisjoint(alphabet(entry.spec))
