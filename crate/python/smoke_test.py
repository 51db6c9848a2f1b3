"""Smoke test for the Python extension. Run after `maturin develop` or
`pip install --no-build-isolation ./crates/python`."""

import json
import math

import quantum_resolvent as qr


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    g = qr.layer_resolvent(2.25, 1.0, 2.0, 0.3, 0.7)
    assert isinstance(g, complex)
    assert g == qr.layer_resolvent(2.25, 1.0, 2.0, 0.7, 0.3)

    poles = qr.layer_poles(4.0, 1.0, -2, 2)
    assert len(poles) == 5
    for n, k, residual in poles:
        assert close(k.imag, -math.log(3.0) / 2.0, 1e-10), (n, k)
        assert residual < 1e-10

    value, reference, _ = qr.layer_noise_integral(1.0, 1.0, 0.4, 0.6, 200.0, 0.2)
    assert value == 0 and reference > 0

    assert qr.cylinder_wn(1.0, 1.0, 2.0, 3) == 0
    assert qr.cylinder_resolvent(2.25, 1.0, 2.0, (0.3, 0.0), (0.6, 1.0)) == qr.cylinder_resolvent(
        2.25, 1.0, 2.0, (0.6, 1.0), (0.3, 0.0)
    )

    h = 1.0 / math.sqrt(2.0)
    matched = (0j, 0j, complex(h, 0), complex(0, -h))
    assert qr.smatrix_violations(*matched) == []
    assert qr.smatrix_violations(0.5, 0.5, 0.5, 0.5)
    try:
        qr.transform_state(0.5, 0.5, 0.5, 0.5, [1, 1, 0, 0])
    except ValueError:
        pass
    else:
        raise AssertionError("non-unitary matrix accepted")

    state = dict((tuple(o), a) for o, a in qr.transform_state(*matched, [1, 1, 0, 0]))
    assert set(state) == {(0, 0, 2, 0), (0, 0, 0, 2)}
    assert all(close(a, 1j * h, 1e-15) for a in state.values())

    theta, g1, g2 = qr.angular_pattern(*matched, [1, 1, 0, 0], math.pi)
    assert len(theta) == 721
    for t, a, b in zip(theta, g1, g2):
        s = math.sin(t)
        assert close(a, 2 * s * s, 1e-12)
        assert close(b, 4 * s**4 * math.cos(0.5 * math.pi * math.cos(t)) ** 2, 1e-12)

    report = json.loads(qr.run_verify())
    assert all(s["status"] == "PASS" for s in report["suites"])
    print("smoke test passed:", len(report["suites"]), "verify suites PASS")


if __name__ == "__main__":
    main()
