use std::ffi::CString;
use std::sync::Once;

use pyo3::prelude::*;
use telecert_py::telecert_py;

static INIT: Once = Once::new();

fn run(code: &str) {
    INIT.call_once(|| pyo3::append_to_inittab!(telecert_py));
    Python::attach(|py| {
        let code = CString::new(format!("import telecert_py as tc\n{code}")).unwrap();
        if let Err(e) = py.run(&code, None, None) {
            e.print(py);
            panic!("python snippet failed");
        }
    });
}

#[test]
fn bound_and_ideal_process() {
    run(r#"
f = tc.classical_bound()
assert abs(f - 0.6830127) < 1e-6
ideal = tc.chi_ideal()
r = tc.certify(ideal)
assert r.gqt and abs(r.alpha - 1) < 1e-6 and abs(r.beta - 0.464) < 1e-3
assert abs(r.f_avg_state - 1) < 1e-12
"#);
}

#[test]
fn matrices_round_trip() {
    run(r#"
chi = tc.resource_to_process(tc.werner(0.5))
m = chi.matrix()
assert len(m) == 4 and abs(m[0][0] - 0.375) < 1e-12 and abs(m[0][3] - 0.25) < 1e-12
again = tc.ProcessMatrix(m)
assert abs(tc.process_fidelity(tc.chi_ideal(), again) - 0.625) < 1e-12
assert tc.find_recipe(again) is not None
out = tc.chi_ideal().apply([[0.5, 0.5j], [-0.5j, 0.5]])
assert abs(out[0][1] - 0.5j) < 1e-12
"#);
}

#[test]
fn errors_map_to_value_error() {
    run(r#"
for bad in (lambda: tc.werner(-1), lambda: tc.ProcessMatrix([[0.5, 0], [0, 0.5]]), lambda: tc.ProcessMatrix([[1], [0, 1]]), lambda: tc.werner_sweep("0:2:0.1")):
    try:
        bad()
    except ValueError:
        pass
    else:
        raise AssertionError("no error")
"#);
}
