"""Smoke test for the cascade_bandits extension module.

Build and run:
    cargo build --release -p cascade-py
    cp target/release/libcascade_bandits.so python/cascade_bandits.so
    python3 python/smoke_test.py
"""
import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import cascade_bandits as cb


def main():
    m = cb.AttractionModel([0.9, 0.5, 0.1])
    assert abs(m.expected_reward([0, 1]) - 0.95) < 1e-12
    assert abs(cb.optimal_value([0.9, 0.5, 0.1], 2) - 0.95) < 1e-12
    assert m.optimal_list(2) == [0, 1]
    assert m.target() == 2

    r = cb.radius_fast(100, 500, 10**6, 0.01)
    assert abs(r - math.sqrt(math.log(8 * 500 * 10**6 / 0.01) / 100)) < 1e-12
    assert math.isinf(cb.radius_slow(0, 500, 10**6, 0.01))
    assert cb.radius_layer(100, 500, 10**6, 0.01) > 0

    assert cb.schedule_active("periodic", 0, t1=10000, t2=90000)
    assert not cb.schedule_active("periodic", 10000, t1=10000, t2=90000)
    assert cb.schedule_active("early", 99999, t_attack=100000)

    # drive a policy by hand against an attacked environment
    model = cb.AttractionModel.synthetic(10, seed=3)
    env = cb.Environment(model, seed=3, schedule_kind="periodic", t1=50, t2=150)
    policy = cb.Policy("rkc", 10, 2, 2000, seed=1, corruption=500.0)
    best = model.optimal_value(2)
    regret = 0.0
    for t in range(2000):
        items, instance = policy.select()
        assert instance in ("F", "S")
        _, _, _, click = env.step(t, items)
        policy.observe(click)
        regret += best - model.expected_reward(items)
    assert env.corruption_used > 0
    assert regret >= 0

    spec = {
        "environment": {
            "items": 8,
            "positions": 2,
            "horizon": 2000,
            "seed": 5,
            "source": {"kind": "synthetic", "low": 0.0, "high": 0.5},
        },
        "adversary": {"schedule": {"kind": "periodic", "t1": 100, "t2": 900}},
        "policies": [{"algorithm": "rkc"}, {"algorithm": "ucb1"}],
        "trials": 2,
        "log_every": 500,
    }
    text = json.dumps(spec)
    cb.validate_spec(text)
    one = cb.run_experiment_json(text, threads=1)
    two = cb.run_experiment_json(text, threads=4)
    assert one == two
    lines = one.strip().split("\n")
    assert lines[0] == cb.CSV_HEADER
    assert len(lines) == 1 + 2 * 2 * 5

    try:
        cb.validate_spec(json.dumps({**spec, "trials": 0}))
    except ValueError:
        pass
    else:
        raise AssertionError("trials=0 accepted")

    print("smoke test ok:", len(lines) - 1, "rows, hand-driven rkc regret %.1f" % regret)


if __name__ == "__main__":
    main()
