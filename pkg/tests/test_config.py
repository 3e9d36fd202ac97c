import re
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwalk import ConfigError, load, parse, serialize, validate
from qwalk.config import MAIN_KEYWORDS, SECTIONS, SimulationConfig, errors

DATA = Path(__file__).parent / "data"
CORPUS_2D = ["double_slit.in", "detector.in", "box.in", "fourier_decoherent.in", "minimal.in"]
CORPUS_1D = ["custom_1d.in", "line_1d.in", "line_1d_decoherent.in", "cycle_1d.in"]
CORPUS = [(f, 2) for f in CORPUS_2D] + [(f, 1) for f in CORPUS_1D]


def _read(name):
    return (DATA / name).read_text()


def test_double_slit_listing():
    c = parse(_read("double_slit.in"))
    assert (c.coin, c.state, c.steps, c.lattice) == ("HADAMARD", "HADAMARD", 100, "DIAGONAL")
    assert c.blpermanent
    assert c.screen == (60, -100, 60, 100)
    assert c.geometry == (("LINE", 20, 100, 20, 7), ("LINE", 20, 5, 20, -5),
                          ("LINE", 20, -7, 20, -100))
    assert c.lattice_spec().half_size == 101


def test_detector_listing():
    c = parse(_read("detector.in"))
    assert c.detectors == ((15, -27),)
    assert c.experiments == 10
    assert c.coin == "GROVER"


def test_box_listing():
    c = parse(_read("box.in"))
    assert (c.mixtime, c.steps, c.lattsize) == (5000, 2000, 59)
    assert len(c.geometry) == 4
    assert c.lattice_spec().half_size == 59


def test_custom_coin_and_state_listing():
    c = parse(_read("custom_1d.in"), 1)
    s = 0.707106781186
    assert c.coin_entries == (complex(s, 0), complex(0, s), complex(0, s), complex(s, 0))
    assert c.state_entries == (((1,), (0,), 1j),)
    assert abs(c.coin_operator().matrix[0, 1] - 1j / 2 ** 0.5) < 1e-11


def test_minimal_defaults():
    c = parse("BEGIN STEPS 10 END")
    assert c.lattice == "NATURAL"
    assert c.experiments == 1
    assert c.extra == 1
    assert c.lattice_spec().half_size == 11
    assert parse("BEGIN STEPS 10 END", 1).lattice == "LINE"


def test_keywords_outside_main_section_are_comments():
    c = parse("COIN GROVER STEPS 99 BEGIN STEPS 3 END LATTYPE DIAGONAL")
    assert c.steps == 3
    assert c.coin == "HADAMARD"
    assert c.lattice == "NATURAL"


def test_fourier_decoherent_listing():
    c = parse(_read("fourier_decoherent.in"))
    assert c.blprob == (0.0, 0.2)


@pytest.mark.parametrize("name,dim", CORPUS)
def test_corpus_validates_cleanly(name, dim):
    c = parse(_read(name), dim)
    assert errors(validate(c)) == []


@pytest.mark.parametrize("name,dim", CORPUS)
def test_corpus_round_trip(name, dim):
    c = parse(_read(name), dim)
    assert parse(serialize(c), dim) == c


@pytest.mark.parametrize("name,dim", CORPUS)
def test_corpus_reflow(name, dim):
    text = _read(name)
    c = parse(text, dim)
    tokens = text.split()
    assert parse(" ".join(tokens), dim) == c
    assert parse("\n".join(tokens), dim) == c
    assert parse("\n\n  ".join(" \t".join(tokens[i:i + 3]) for i in range(0, len(tokens), 3)),
                 dim) == c


@pytest.mark.parametrize("text", [
    "BEGIN SCREEN 1 2 3 4 END", "BEGIN BLPERMANENT END", "BEGIN DETECTORS 1 3 END",
    "BEGIN COIN FOURIER END", "BEGIN COIN GROVER END", "BEGIN STATE GROVER END",
    "BEGIN LATTYPE DIAGONAL END", "BEGIN LATTYPE NATURAL END",
])
def test_qw1d_rejects_2d_keywords(text):
    with pytest.raises(ConfigError, match="not recognized by qw1d"):
        parse(text, 1)


@pytest.mark.parametrize("text", ["BEGIN LATTYPE CYCLE END", "BEGIN LATTYPE SEGMENT END"])
def test_qw2d_rejects_1d_lattices(text):
    with pytest.raises(ConfigError, match="not recognized by qw2d"):
        parse(text, 2)


def test_unknown_keyword_reports_token_position():
    with pytest.raises(ConfigError, match="token 3") as info:
        parse("BEGIN STEPS 10 FOO END")
    assert info.value.position == 3


@pytest.mark.parametrize("text,match", [
    ("BEGIN STEPS ten END", "integer"),
    ("BEGIN STEPS 10", "missing END"),
    ("STEPS 10", "no BEGIN"),
    ("BEGIN STEPS 1 END BEGIN STEPS 2 END", "more than one"),
    ("BEGIN END BEGINBL LINE 0 0 1 1", "missing ENDBL"),
    ("BEGIN END BEGINCOIN 1 0 0", "missing ENDCOIN"),
    ("BEGIN END BEGINSTATE 0 0 0 0 1 0", "missing ENDSTATE"),
    ("BEGIN LATTSIZE 10 STEPS 20 END", "after the STEPS"),
    ("BEGIN STEPS 20 LATTEXTRA 2 LATTSIZE 10 END", "LATTEXTRA, STEPS and LATTSIZE"),
    ("BEGIN BLPROB 0.1 END", "number"),
    ("BEGIN END BEGINBL LINE 0 0 2 1 ENDBL", "45 degrees"),
    ("BEGIN END BEGINBL CIRCLE 0 0 ENDBL", "LINE, POINT"),
    ("BEGIN CHECK NOTHING END", "CHECK option"),
    ("BEGIN DTPROB nan END", "finite"),
    ("BEGIN END BEGINCOIN 1 0 0 ENDCOIN", "real and an imaginary"),
])
def test_parse_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse(text)


def test_lattextra_order_accepted():
    c = parse("BEGIN LATTEXTRA 3 STEPS 20 LATTSIZE 10 END")
    assert (c.extra, c.steps, c.lattsize) == (3, 20, 10)
    c = parse("BEGIN STEPS 20 LATTEXTRA 3 END")
    assert c.lattice_spec().half_size == 23


def test_duplicate_keyword_last_wins_with_warning():
    c = parse("BEGIN STEPS 5 STEPS 7 END")
    assert c.steps == 7
    assert any("more than once" in str(d) for d in validate(c))


def test_checks_accumulate():
    c = parse("BEGIN CHECK STATEPROB CHECK XSYMMETRY END")
    assert c.checks == {"STATEPROB", "XSYMMETRY"}
    with pytest.raises(ConfigError):
        parse("BEGIN CHECK XSYMMETRY END", 1)


def test_1d_blprob_single_value():
    assert parse("BEGIN BLPROB 0.01 END", 1).blprob == (0.01,)
    assert parse("BEGIN BLPROB 0.1 0.3 END").blprob == (0.1, 0.3)


@pytest.mark.parametrize("text,match", [
    ("BEGIN STEPS 2000 MIXTIME 100 END", "MIXTIME must be ≥ STEPS"),
    ("BEGIN BLPROB 1.5 0 END", "BLPROB"),
    ("BEGIN DTPROB -0.1 END", "DTPROB"),
    ("BEGIN EXPERIMENTS 0 END", "EXPERIMENTS"),
    ("BEGIN STEPS -3 END", "STEPS"),
    ("BEGIN STEPS 5 DETECTORS 1 9 9 END", "outside"),
    ("BEGIN STEPS 5 DETECTORS 2 1 1 1 1 END", "twice"),
    ("BEGIN STEPS 5 SCREEN 40 0 50 0 END", "entirely outside"),
    ("BEGIN COIN CUSTOM END BEGINCOIN 1 0 1 0 0 0 1 0 ENDCOIN", "requires|needs"),
    ("BEGIN STATE CUSTOM STEPS 2 END BEGINSTATE 0 0 0 0 0.5 0 ENDSTATE", "normalized"),
])
def test_validate_errors(text, match):
    diags = errors(validate(parse(text)))
    assert diags
    assert any(re.search(match, d.message) for d in diags), diags


def test_validate_cycle_needs_lattsize():
    diags = errors(validate(parse("BEGIN LATTYPE CYCLE STEPS 10 END", 1)))
    assert any("LATTSIZE" in d.message for d in diags)


def test_validate_warnings_are_not_errors():
    c = parse("BEGIN STEPS 10 MIXTIME 20 END")
    diags = validate(c)
    assert errors(diags) == []
    assert any(d.level == "warning" and "closed boundary" in d.message for d in diags)


def test_load_raises_on_errors():
    with pytest.raises(ConfigError, match="MIXTIME"):
        load("BEGIN STEPS 2000 MIXTIME 100 END")
    assert isinstance(load("BEGIN STEPS 1 END"), SimulationConfig)


VOCAB = list(MAIN_KEYWORDS) + list(SECTIONS) + list(SECTIONS.values()) + [
    "BEGIN", "END", "LINE", "POINT", "HADAMARD", "GROVER", "FOURIER", "CUSTOM", "DIAGONAL",
    "NATURAL", "CYCLE", "STATEPROB", "0", "1", "-1", "2", "0.5", "1e3", "x", "nan", "-0.0",
]


@given(st.lists(st.sampled_from(VOCAB), max_size=30), st.sampled_from([1, 2]))
@settings(max_examples=300, deadline=None)
def test_parsing_is_total(tokens, dim):
    text = " ".join(tokens)
    try:
        c = parse(text, dim)
    except ConfigError:
        return
    validate(c)


@given(st.text(max_size=80))
@settings(max_examples=200, deadline=None)
def test_parsing_arbitrary_text_is_total(text):
    try:
        validate(parse("BEGIN " + text + " END"))
    except ConfigError:
        pass
