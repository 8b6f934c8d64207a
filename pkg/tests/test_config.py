import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from g2kit.config import SCHEMA, WarpSpec, parse_config, serialize
from g2kit.errors import ConfigError

MINIMAL_SPECTRUM = """\
seed = 7
[spectrum]
epsilon_grid = 0.1
twist = 0.5
"""


def test_minimal_spectrum_defaults():
    cfg = parse_config(MINIMAL_SPECTRUM, "spectrum")
    assert cfg.command == "spectrum" and cfg.seed == 7
    assert cfg["epsilon_grid"] == (0.1,) and cfg["twist"] == 0.5
    assert cfg["n1"] == 32 and cfg["warp"].is_flat
    assert set(cfg.defaulted) == {"warp", "n1", "n2", "n3"}
    assert cfg.echo()["defaulted"] == list(cfg.defaulted)


def test_alpha_out_of_range_names_the_interval():
    text = "seed = 1\ncommand = scaling\n[scaling]\nalpha = 1.2\n"
    with pytest.raises(ConfigError, match=r"alpha ∈ \(0,1\)") as info:
        parse_config(text)
    assert info.value.line == 4 and info.value.key == "alpha"


@pytest.mark.parametrize(
    "text, line, key",
    [
        ("seed = 1\ncommand = spectrum\n[spectrum]\nbogus = 3\n", 4, "bogus"),
        ("seed = 1\nfoo = 2\n", 2, "foo"),
        ("seed = x\ncommand = spectrum\n", 1, "seed"),
        ("seed = 1\ncommand = spectrum\n[spectrum]\nn2 = 7\n", 4, "n2"),
        ("seed = 1\ncommand = spectrum\n[spectrum]\nn1 = 3\n", 4, "n1"),
        ("seed = 1\ncommand = scaling\n[scaling]\np = 3\n", 4, "p"),
        ("seed = 1\ncommand = spectrum\n[spectrum]\nepsilon_grid = 0.1, -2\n", 4, "epsilon_grid"),
        ("seed = 1\ncommand = spectrum\n[spectrum]\ntwist = 1+zz\n", 4, "twist"),
        ("seed = 1\ncommand = spectrum\n[spectrum]\nwarp = 2sin(x2)\n", 4, "warp"),
        ("seed = 1\ncommand = sweep\n[sweep]\ngamma = spiral\n", 4, "gamma"),
        ("seed = 1\nseed = 2\n", 2, "seed"),
    ],
)
def test_precise_diagnostics(text, line, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert (info.value.line, info.value.key) == (line, key)
    assert f"line {line}" in str(info.value)


def test_seed_is_mandatory():
    with pytest.raises(ConfigError, match="seed is mandatory"):
        parse_config("command = spectrum\n")


def test_command_conflict_and_unknown_section():
    with pytest.raises(ConfigError):
        parse_config("seed = 1\ncommand = sweep\n", "spectrum")
    with pytest.raises(ConfigError):
        parse_config("seed = 1\n[nope]\n", "spectrum")
    with pytest.raises(ConfigError):
        parse_config("seed = 1\n")


def test_comments_and_blank_lines():
    cfg = parse_config("# header\nseed = 3  # trailing\n\n[algebra-check]\nsamples = 10\n", "algebra-check")
    assert cfg["samples"] == 10


def test_warp_spec():
    w = WarpSpec.parse("1 + 0.3 sin(x2)")
    assert (w.amplitude, w.fn, w.var) == (0.3, "sin", "x2")
    assert WarpSpec.parse(str(w)) == w
    assert WarpSpec.parse("1").is_flat
    with pytest.raises(ValueError):
        WarpSpec.parse("1+1.5sin(x2)")


def test_complex_twist_forms():
    cfg = parse_config("seed = 1\n[spectrum]\ntwist = 0.5+0.5i\n", "spectrum")
    assert cfg["twist"] == 0.5 + 0.5j


eps = st.floats(1e-3, 10, allow_nan=False)


@st.composite
def configs(draw):
    command = draw(st.sampled_from(sorted(SCHEMA)))
    lines = [f"seed = {draw(st.integers(0, 2**31))}", f"command = {command}", f"[{command}]"]
    if "epsilon_grid" in SCHEMA[command]:
        lines.append("epsilon_grid = " + ", ".join(repr(x) for x in draw(st.lists(eps, min_size=1, max_size=4))))
    if "twist" in SCHEMA[command]:
        z = complex(draw(st.floats(-2, 2)), draw(st.floats(-2, 2)))
        lines.append(f"twist = {z.real!r}{z.imag:+}i")
    if "warp" in SCHEMA[command] and draw(st.booleans()):
        lines.append(f"warp = 1+{draw(st.floats(-0.9, 0.9))!r}cos(x3)")
    if "alpha" in SCHEMA[command]:
        lines.append(f"alpha = {draw(st.floats(0.01, 0.99))!r}")
    if "n2" in SCHEMA[command]:
        lines.append(f"n2 = {2 * draw(st.integers(2, 40))}")
    return "\n".join(lines) + "\n"


@settings(max_examples=100)
@given(configs())
def test_round_trip(text):
    cfg = parse_config(text)
    again = parse_config(serialize(cfg))
    assert again == cfg
    assert serialize(again) == serialize(cfg)
