import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polarongp.model import (
    CouplingPoint,
    ModelParams,
    from_dimensionless,
    model_kind,
    params_from_dict,
    params_to_dict,
    to_dimensionless,
)


def test_to_dimensionless_examples():
    c = to_dimensionless(ModelParams(t=1, omega=2, alpha_ssh=1, alpha_h=0))
    assert c.lambda_ssh == pytest.approx(1.0)
    assert c.lambda_h == 0
    assert c.adiabaticity == pytest.approx(0.5)
    c = to_dimensionless(ModelParams(t=1, omega=4))
    assert (c.lambda_ssh, c.lambda_h, c.adiabaticity) == (0, 0, 1.0)


def test_inversion_of_fig8_coupling():
    p = from_dimensionless(CouplingPoint(lambda_ssh=1.117), t=1, omega=0.5)
    assert p.alpha_ssh == pytest.approx(math.sqrt(1.117 * 0.5 / 2), rel=1e-15)
    assert p.alpha_ssh == pytest.approx(0.52845, abs=1e-5)
    assert to_dimensionless(p).lambda_ssh == pytest.approx(1.117, rel=1e-14)


def test_from_dimensionless_examples():
    p = from_dimensionless({"lambda_ssh": 0, "lambda_h": 0}, t=1, omega=1)
    assert p.alpha_ssh == 0 and p.alpha_h == 0
    assert from_dimensionless({"lambda_ssh": 1}, t=1, omega=2).alpha_ssh == pytest.approx(1.0)
    p = from_dimensionless({"lambda_h": 0.5}, t=1, omega=3.7)
    assert p.alpha_h == pytest.approx(1.92354, abs=5e-6)


def test_errors():
    with pytest.raises(ZeroDivisionError, match="atomic limit"):
        to_dimensionless(ModelParams(t=0, omega=1, alpha_h=1))
    with pytest.raises(ValueError):
        from_dimensionless({"lambda_ssh": -0.1})
    with pytest.raises(ValueError):
        ModelParams(omega=0)
    with pytest.raises(ValueError):
        ModelParams(ring_size=7)
    with pytest.raises(ValueError):
        ModelParams(ring_size=2)


def test_model_kind():
    assert model_kind(ModelParams(alpha_ssh=1)) == "ssh"
    assert model_kind(ModelParams(alpha_h=1)) == "holstein"
    assert model_kind(ModelParams(alpha_ssh=1, alpha_h=1)) == "mixed"


def test_round_trip_randomized():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        t, om = rng.uniform(0.1, 3), rng.uniform(0.01, 6)
        p = ModelParams(t=t, omega=om, alpha_ssh=rng.uniform(0, 3), alpha_h=rng.uniform(0, 3))
        q = from_dimensionless(to_dimensionless(p), t=t, omega=om, ring_size=p.ring_size)
        assert q.alpha_ssh == pytest.approx(p.alpha_ssh, rel=1e-14, abs=1e-300)
        assert q.alpha_h == pytest.approx(p.alpha_h, rel=1e-14, abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 5), st.floats(0.0, 3), st.floats(1e-3, 1.0))
def test_lambda_ssh_strictly_increasing(omega, a, da):
    lo = to_dimensionless(ModelParams(omega=omega, alpha_ssh=a)).lambda_ssh
    hi = to_dimensionless(ModelParams(omega=omega, alpha_ssh=a + da)).lambda_ssh
    assert hi > lo


def test_json_schema_round_trip():
    d = {"t": 1.0, "omega": 0.5, "lambda_ssh": 1.1, "lambda_h": 0.5, "ring_size": 16}
    out = params_to_dict(params_from_dict(d))
    assert out.keys() == d.keys()
    for key in d:
        assert out[key] == pytest.approx(d[key], rel=1e-14)
