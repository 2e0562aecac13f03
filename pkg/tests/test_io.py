import numpy as np
import pytest

from hbwave.errors import (
    ConfigError,
    ConfigSyntaxError,
    TypeMismatch,
    UnknownKey,
)
from hbwave.io import (
    apply_overrides,
    build_setup,
    parse_config,
    read_solution_csv,
    write_csv,
    write_solution_csv,
)
from hbwave.model import Grid, HarmonicField

MINIMAL = """\
[domain]
L = 1.0
Nx = 17

[time]
T = 6.283185307179586
M = 3

[physics]
tau = 0.1
taubar = 0.5
b = 1.0
c2 = 1.0

[bc.left]
kind = dirichlet

[bc.right]
kind = dirichlet

[forcing]
profile = sine
amplitude_1 = 0.01
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(MINIMAL)
    return str(path)


def test_minimal_config_builds_model(config_path):
    setup = build_setup(parse_config(config_path), config_path)
    assert setup.model.grid.nx == 17
    assert setup.M == 3
    assert setup.solver_kind == "linear"
    assert np.max(np.abs(setup.f.coeffs[1])) == pytest.approx(0.005)


def test_misspelled_key_rejected(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text(MINIMAL + "\n[solver]\ngama = 1.0\n")
    with pytest.raises(UnknownKey) as exc:
        parse_config(str(path))
    assert "gama" in str(exc.value)


def test_unknown_section_rejected(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text(MINIMAL + "\n[extras]\nfoo = 1\n")
    with pytest.raises(UnknownKey):
        parse_config(str(path))


def test_syntax_error_carries_line_number(tmp_path):
    path = tmp_path / "broken.ini"
    path.write_text("[domain]\nL = 1\nNx 33\n")
    with pytest.raises(ConfigSyntaxError) as exc:
        parse_config(str(path))
    assert exc.value.line == 3


def test_missing_section_rejected(tmp_path):
    path = tmp_path / "nosec.ini"
    path.write_text("[domain]\nL = 1\nNx = 9\n")
    with pytest.raises(ConfigError):
        parse_config(str(path))


def test_coefficient_file_loaded_relative_to_config(tmp_path):
    nodes = np.linspace(0, 1, 17)
    np.savetxt(tmp_path / "bfield.txt", 1.0 + 0.1 * nodes)
    path = tmp_path / "run.ini"
    path.write_text(MINIMAL.replace("b = 1.0", "b = bfield.txt"))
    setup = build_setup(parse_config(str(path)), str(path))
    np.testing.assert_allclose(setup.model.params.b, 1.0 + 0.1 * nodes)


def test_coefficient_file_wrong_length(tmp_path):
    np.savetxt(tmp_path / "bfield.txt", np.ones(9))
    path = tmp_path / "run.ini"
    path.write_text(MINIMAL.replace("b = 1.0", "b = bfield.txt"))
    with pytest.raises(TypeMismatch) as exc:
        build_setup(parse_config(str(path)), str(path))
    assert "17" in str(exc.value)


def test_overrides_replace_values(config_path):
    raw = apply_overrides(parse_config(config_path), ["domain.Nx=33"])
    setup = build_setup(raw, config_path)
    assert setup.model.grid.nx == 33


def test_override_unknown_key_rejected(config_path):
    with pytest.raises(UnknownKey):
        apply_overrides(parse_config(config_path), ["domain.nz=33"])


def test_malformed_override_rejected(config_path):
    with pytest.raises(ConfigError):
        apply_overrides(parse_config(config_path), ["just-a-token"])


def test_forcing_harmonic_outside_range_rejected(config_path):
    raw = apply_overrides(parse_config(config_path), ["forcing.amplitude_9=1"])
    with pytest.raises(TypeMismatch):
        build_setup(raw, config_path)


def test_solution_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(2)
    grid = Grid(1.0, 13)
    u = HarmonicField(rng.normal(size=(4, 13)) + 1j * rng.normal(size=(4, 13)))
    u.coeffs[0] = u.coeffs[0].real
    path = tmp_path / "solution.csv"
    write_solution_csv(str(path), u, grid)
    back = read_solution_csv(str(path))
    assert np.array_equal(back.coeffs, u.coeffs)


def test_csv_has_header_and_lf_endings(tmp_path):
    path = tmp_path / "out.csv"
    write_csv(str(path), ("a", "b"), [(1, 2.5)])
    data = path.read_bytes()
    assert data == b"a,b\n1,2.5\n"


def test_empty_rows_give_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    write_csv(str(path), ("x", "y"), [])
    assert path.read_text() == "x,y\n"


def test_none_serialized_as_empty_cell(tmp_path):
    path = tmp_path / "out.csv"
    write_csv(str(path), ("a", "b"), [(None, 1)])
    assert path.read_text() == "a,b\n,1\n"


def test_seventeen_digit_round_trip(tmp_path):
    value = 1.0 / 3.0
    path = tmp_path / "out.csv"
    write_csv(str(path), ("v",), [(value,)])
    text = path.read_text().splitlines()[1]
    assert float(text) == value
