"""Smoke test for the telecert_py extension module."""

import math

import telecert_py as tc


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    f_ct = tc.classical_bound()
    close(f_ct, (1 + math.sqrt(3)) / 4, 1e-6)
    close(tc.avg_state_fidelity(f_ct), 0.788675, 1e-6)

    ideal = tc.chi_ideal()
    close(ideal.fidelity(), 1.0, 1e-12)
    close(tc.quantum_composition(ideal), 1.0, 1e-6)
    close(tc.quantum_robustness(ideal), 0.464, 1e-3)
    report = tc.certify(ideal)
    assert report.gqt and report.flags == []

    mp = tc.mp_process()
    close(tc.process_fidelity(ideal, mp), 0.5, 1e-10)
    assert not tc.certify(mp).gqt
    zero_out = mp.apply([[1, 0], [0, 0]])
    close(zero_out[0][0].real, 2 / 3, 1e-12)

    rho = tc.werner(0.5)
    chi = tc.resource_to_process(rho)
    close(chi.matrix()[0][3].real, 0.25, 1e-12)
    recipe = tc.find_recipe(chi)
    assert recipe is not None and len(recipe) == 8
    assert tc.find_recipe(ideal) is None
    close(tc.negativity(rho), 0.125, 1e-8)
    close(tc.steerable_weight(tc.werner(0.0)), 1.0, 1e-4)

    noisy = tc.simulate_tomography(tc.resource_to_process(tc.werner(0.2)), 100_000, seed=3)
    close(noisy.fidelity(), 0.85, 0.01)

    csv = tc.werner_sweep("0:1:0.5")
    lines = csv.strip().splitlines()
    assert lines[0] == "p_noise,f_expt,f_avg_state,alpha,beta,negativity,steerable_weight,gqt"
    assert len(lines) == 4 and lines[1].endswith("true") and lines[2].endswith("false")

    for bad in (lambda: tc.werner(1.5), lambda: tc.ProcessMatrix([[1, 0], [0, 0]])):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print(f"telecert_py smoke test passed (F_CT = {f_ct:.6f})")


if __name__ == "__main__":
    main()
