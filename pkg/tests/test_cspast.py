import pytest

from tockta.cspast import (
    ExtChoice,
    GenPar,
    Hide,
    Interleave,
    Prefix,
    Rename,
    Skip,
    SpecError,
    Stop,
    alphabet,
    validate_event_name,
)
from tockta.parser import parse

ADS = parse(
    "ADS = Controller [|{close}|] Lighting\n"
    "Controller = open -> tock -> close -> Controller\n"
    "Lighting = close -> offLight -> Lighting\n"
)


def test_alphabet_ads():
    assert alphabet(ADS) == frozenset({"open", "close", "offLight"})


def test_alphabet_empty_for_stop():
    assert alphabet(parse("P = STOP")) == frozenset()


def test_alphabet_applies_renaming():
    assert alphabet(parse("P = (a->STOP)[[a <- b]]")) == frozenset({"b"})


def test_alphabet_excludes_hidden_events():
    assert alphabet(parse("P = (a -> b -> STOP) \\ {b}")) == frozenset({"a"})


def test_alphabet_invariant_under_reassociation():
    # same leaves, different association
    a, b, c = (Prefix(x, Stop()) for x in "abc")
    left = ExtChoice(ExtChoice(a, b), c)
    right = ExtChoice(a, ExtChoice(b, c))
    from tockta.cspast import CspSpec

    assert alphabet(CspSpec({"P": left}, "P")) == alphabet(CspSpec({"P": right}, "P"))
    ileft = Interleave(Interleave(a, b), c)
    iright = Interleave(a, Interleave(b, c))
    assert alphabet(CspSpec({"P": ileft}, "P")) == alphabet(CspSpec({"P": iright}, "P"))


@pytest.mark.parametrize("name", ["a", "open", "offLight", "x_1", "Z9"])
def test_valid_event_names(name):
    assert validate_event_name(name) == name


@pytest.mark.parametrize(
    "name",
    ["", "1a", "a-b", "tau", "itau", "itau_x", "startID1", "finishID0",
     "extID2", "intrpID3", "excpID4", "close___sync", "left_exch", "fire_intrpt"],
)
def test_reserved_or_malformed_event_names(name):
    with pytest.raises(SpecError):
        validate_event_name(name)


def test_tock_only_allowed_as_prefix():
    assert validate_event_name("tock", allow_tock=True) == "tock"
    with pytest.raises(SpecError):
        validate_event_name("tock")
    with pytest.raises(SpecError):
        GenPar(Stop(), Stop(), frozenset({"tock"}))
    with pytest.raises(SpecError):
        Hide(Stop(), frozenset({"tock"}))
    with pytest.raises(SpecError):
        Rename(Stop(), (("tock", "a"),))


def test_rename_must_be_a_function():
    with pytest.raises(SpecError):
        Rename(Skip(), (("a", "b"), ("a", "c")))
