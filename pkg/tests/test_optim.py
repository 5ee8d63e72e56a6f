import math

import numpy as np

from disentext.optim import Adam, RMSProp, adam_step, clip_by_global_norm, global_norm, rmsprop_step


def _p(x):
    return {"g": {"w": np.array(x, dtype=float)}}


def test_adam_zero_gradient_keeps_params_and_decays_moments():
    opt = Adam()
    params = _p([1.0, -2.0])
    adam_step(opt, params, _p([0.5, 0.5]))
    m_before = opt.state["m"]["g"]["w"].copy()
    before = params["g"]["w"].copy()
    adam_step(opt, params, _p([0.0, 0.0]))
    assert np.allclose(opt.state["m"]["g"]["w"], 0.9 * m_before)
    # with zero gradient the update is m_hat / sqrt(v_hat); exact no-op from a zero state
    fresh, p0 = Adam(), _p([1.0, -2.0])
    adam_step(fresh, p0, _p([0.0, 0.0]))
    assert np.array_equal(p0["g"]["w"], [1.0, -2.0])
    assert not np.array_equal(params["g"]["w"], before)


def test_adam_first_step_closed_form():
    opt, params = Adam(lr=1e-3), _p([0.0])
    adam_step(opt, params, _p([1.0]))
    m, v = 0.1 * 1.0, 0.001 * 1.0
    mhat, vhat = m / (1 - 0.9), v / (1 - 0.999)
    assert math.isclose(params["g"]["w"][0], -1e-3 * mhat / (math.sqrt(vhat) + 1e-8), rel_tol=1e-12)
    assert math.isclose(params["g"]["w"][0], -1e-3, rel_tol=1e-7)


def test_adam_deterministic():
    rng = np.random.default_rng(0)
    grads = [rng.normal(size=3) for _ in range(20)]
    out = []
    for _ in range(2):
        opt, p = Adam(), _p([0.1, 0.2, 0.3])
        for g in grads:
            adam_step(opt, p, _p(g))
        out.append(p["g"]["w"])
    assert np.array_equal(*out)


def test_rmsprop_zero_gradient():
    opt, p = RMSProp(), _p([3.0])
    rmsprop_step(opt, p, _p([0.0]))
    assert p["g"]["w"][0] == 3.0


def test_rmsprop_single_step_closed_form():
    opt, p = RMSProp(lr=1e-3, decay=0.9), _p([0.0])
    rmsprop_step(opt, p, _p([2.0]))
    v = 0.9 * 0.0 + 0.1 * 4.0
    assert math.isclose(p["g"]["w"][0], -1e-3 * 2.0 / (math.sqrt(v) + 1e-8), rel_tol=1e-12)


def test_rmsprop_constant_gradient_step_tends_to_lr():
    opt, p = RMSProp(lr=1e-3), _p([0.0])
    for _ in range(300):
        prev = p["g"]["w"][0]
        rmsprop_step(opt, p, _p([0.37]))
    assert math.isclose(prev - p["g"]["w"][0], 1e-3, rel_tol=1e-6)


def test_nonfinite_gradient_skips_step():
    opt, p = Adam(), _p([1.0])
    assert opt.step(p, _p([np.nan])) is False
    assert p["g"]["w"][0] == 1.0 and opt.t == 0 and opt.skipped == 1


def test_group_selection():
    opt = RMSProp()
    p = {"a": {"w": np.zeros(1)}, "b": {"w": np.zeros(1)}}
    g = {"a": {"w": np.ones(1)}, "b": {"w": np.ones(1)}}
    opt.step(p, g, ["a"])
    assert p["a"]["w"][0] != 0 and p["b"]["w"][0] == 0


def test_clip_by_global_norm():
    g = {"a": {"x": np.array([3.0])}, "b": {"y": np.array([4.0])}}
    assert global_norm(g) == 5.0
    clip_by_global_norm(g, 1.0)
    assert math.isclose(global_norm(g), 1.0) and math.isclose(g["a"]["x"][0], 0.6)
    small = {"a": {"x": np.array([0.1])}}
    clip_by_global_norm(small, 1.0)
    assert small["a"]["x"][0] == 0.1


def test_state_round_trip():
    opt, p = Adam(), _p([1.0, 2.0])
    opt.step(p, _p([0.3, -0.1]))
    clone = Adam()
    clone.load_arrays({k: v.copy() for k, v in opt.arrays().items()})
    clone.t = opt.t
    a, b = _p([1.0, 2.0]), _p([1.0, 2.0])
    opt.step(a, _p([0.2, 0.2]))
    clone.step(b, _p([0.2, 0.2]))
    assert np.array_equal(a["g"]["w"], b["g"]["w"])
