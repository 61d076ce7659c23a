import numpy as np
import pytest

from hopfcontact.errors import ConfigError
from hopfcontact.s2maps import (
    Circle,
    Composition,
    Constant,
    ConstantDeformation,
    Rotation,
    RotationFamily,
    SampledLoop,
    Squeeze,
    StreamFamily,
    StreamFlow,
)
from hopfcontact.s3core import FrameField
from hopfcontact.specs import parse_deformation, parse_field, parse_loop, parse_map


def test_parse_map_kinds():
    assert isinstance(parse_map({"type": "rotation", "axis": [0, 0, 1], "angle": 1.0}), Rotation)
    f = parse_map({"type": "stream", "coeffs": [[1, 0, 1.0]], "time": 0.5})
    assert isinstance(f, StreamFlow) and f.dt == 1e-3
    c = parse_map({"type": "compose", "maps": [{"type": "squeeze"}, {"type": "rotation", "axis": [1, 0, 0],
                                                                        "angle": 0.2}]})
    assert isinstance(c, Composition) and isinstance(c.maps[0], Squeeze)


def test_map_round_trips_through_spec():
    f = parse_map({"type": "rotation", "axis": [0, 0, 2], "angle": 0.7})
    n = np.array([1.0, 0, 0])
    assert np.allclose(parse_map(f.to_spec())(n), f(n))


@pytest.mark.parametrize(
    "spec",
    [
        {"type": "rotation", "axis": [0, 0, 1]},
        {"type": "rotation", "axis": [0, 0], "angle": 1.0},
        {"type": "stream", "coeffs": [[1, 2, 1.0]], "time": 1.0},
        {"type": "stream", "coeffs": [[1, 0, 1.0]], "time": 1.0, "dt": 0},
        {"type": "squeeze", "factors": [1, 1, -2]},
        {"kind": "rotation"},
        "rotation",
    ],
)
def test_parse_map_rejects(spec):
    with pytest.raises(ConfigError):
        parse_map(spec)


def test_parse_loop_kinds():
    assert isinstance(parse_loop({"type": "circle", "colatitude": 0.4}), Circle)
    pts = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]]
    assert isinstance(parse_loop({"type": "samples", "points": pts}), SampledLoop)
    point = parse_loop({"type": "samples", "points": [[0, 0, 2]] * 3})
    assert isinstance(point, Constant) and np.allclose(point(0.3), [0, 0, 1])


def test_random_stream_loop_is_seeded():
    a = parse_loop({"type": "random_stream", "seed": 3})
    b = parse_loop({"type": "random_stream"}, seed=3)
    t = np.linspace(0, 1, 7)
    assert np.array_equal(a(t), b(t))
    assert np.allclose(a(0.0), a(1.0))


@pytest.mark.parametrize(
    "spec",
    [
        {"type": "circle", "colatitude": 4.0},
        {"type": "samples", "points": [[1, 0, 0], [0, 1, 0]]},
        {"type": "samples", "points": [[0, 0, 0], [0, 1, 0], [1, 0, 0]]},
        {"type": "samples", "points": [[1, 0, 0], [1, 0, 0], [0, 1, 0], [0, 1, 0]]},
        {"type": "random_stream", "lmax": 9},
    ],
)
def test_parse_loop_rejects(spec):
    with pytest.raises(ConfigError):
        parse_loop(spec)


def test_parse_deformation_kinds():
    assert isinstance(parse_deformation({"type": "rotation", "axis": [1, 0, 0], "angle": 1.0}), RotationFamily)
    assert isinstance(parse_deformation({"type": "stream", "coeffs": [[1, 0, 1.0]], "time": 1.0}), StreamFamily)
    assert isinstance(parse_deformation({"type": "constant"}), ConstantDeformation)
    with pytest.raises(ConfigError):
        parse_deformation({"type": "constant", "angle": 1.0})


def test_parse_field_kinds():
    X, f = parse_field({"type": "contact", "coeffs": [[1, 0, 1.0]]})
    assert isinstance(X, FrameField) and f is not None
    Y, g = parse_field({"type": "frame", "f": "coord:x"})
    assert g is None
    with pytest.raises(ConfigError):
        parse_field({"type": "frame", "f": "coord:u"})
