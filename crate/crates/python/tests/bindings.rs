use pyo3::prelude::*;
use pyo3::types::PyDict;

use collapse_lab::collapse_lab;

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyDict>)>(f: F) {
    Python::initialize();
    Python::attach(|py| {
        let module = pyo3::wrap_pymodule!(collapse_lab)(py);
        let locals = PyDict::new(py);
        locals.set_item("cl", module).unwrap();
        f(py, &locals);
    });
}

#[test]
fn module_round_trip() {
    with_module(|py, locals| {
        py.run(
            c"
import math
cfg = cl.TwoStateConfig(0.5, 0.5, 1.0)
q = cfg.q_of_t('+-', 10.0)
assert abs(q - 0.9960417809823833) < 1e-15, q
assert cl.coupling_rates('-+') == (-1, 1)
assert cl.chsh_value() == 2.8284271247461903
assert abs(cl.chsh_value((0.0, 90.0, 45.0, -45.0)) - 2 * math.sqrt(2)) < 1e-12
traj = cl.trajectory(cfg, '+-', t_end_over_tau=1.0, step_over_tau=0.5, closed_form=True)
assert traj['t'] == [0.0, 0.5, 1.0]
stats = cl.run_ensemble(cl.TwoStateConfig(0.7, 0.3, 1.0), 2000, 1, threads=2)
assert sum(stats['counts'].values()) == 2000
assert stats['csv'].startswith('event,count,frequency')
",
            Some(locals),
            None,
        )
        .unwrap();
    });
}

#[test]
fn errors_become_python_exceptions() {
    with_module(|py, locals| {
        py.run(
            c"
for bad in [lambda: cl.TwoStateConfig(0.6, 0.6, 1.0),
            lambda: cl.malus_expectation(0.0, 1.0, 1.0),
            lambda: cl.coupling_rates('+?'),
            lambda: cl.interference_pattern([], [], 1.0, 5e-7, [0.0])]:
    try:
        bad()
    except ValueError:
        pass
    else:
        raise AssertionError('expected ValueError')
",
            Some(locals),
            None,
        )
        .unwrap();
    });
}
