use std::ffi::CString;

use cascade_bandits::cascade_bandits;
use pyo3::prelude::*;

fn run(code: &str) {
    Python::attach(|py| {
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, None, None) {
            e.print(py);
            panic!("python snippet failed");
        }
    });
}

#[test]
fn module_round_trips_through_python() {
    pyo3::append_to_inittab!(cascade_bandits);
    Python::initialize();
    run(r#"
import json, math
import cascade_bandits as cb

m = cb.AttractionModel([0.9, 0.5, 0.1])
assert abs(m.expected_reward([0, 1]) - 0.95) < 1e-12
assert m.optimal_list(2) == [0, 1] and m.target() == 2
assert len(m) == 3
try:
    cb.AttractionModel([0.5])
    raise AssertionError("single item accepted")
except ValueError:
    pass

assert math.isinf(cb.radius_fast(0, 10, 100, 0.01))
assert cb.schedule_active("early", 4, t_attack=5) and not cb.schedule_active("none", 0)

env = cb.Environment(m, seed=1, schedule_kind="periodic", t1=1, t2=0)
true, click, corrupted, cclick = env.step(0, [0, 2])
if click is not None and click == 0:
    assert corrupted[0] is False

p = cb.Policy("rac", 3, 2, 100, seed=4)
items, inst = p.select()
assert inst.startswith("layer")
try:
    p.select()
    raise AssertionError("select twice accepted")
except RuntimeError:
    pass
p.observe(None)
try:
    cb.Policy("nope", 3, 2, 100)
    raise AssertionError("unknown algorithm accepted")
except ValueError:
    pass

spec = {"environment": {"items": 5, "positions": 2, "horizon": 500, "seed": 1,
        "source": {"kind": "weights", "values": [0.5, 0.4, 0.3, 0.2, 0.1]}},
        "policies": [{"algorithm": "pbe"}], "log_every": 250}
csv = cb.run_experiment_json(json.dumps(spec), threads=1)
assert csv.splitlines()[0] == cb.CSV_HEADER and len(csv.splitlines()) == 4
"#);
}
