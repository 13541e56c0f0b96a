"""Shared test utilities: random stable systems and reference fixtures."""

import numpy as np

from twindisc.lti import DiscretePolynomial, DiscreteTransferFunction, SimoModel
from twindisc.sysid import BoxJenkinsModel


def random_stable_poly(rng, degree, max_radius=0.9):
    """Monic delay-operator polynomial with all roots inside max_radius."""
    roots = []
    remaining = degree
    while remaining > 0:
        if remaining >= 2 and rng.random() < 0.5:
            rad = rng.uniform(0.1, max_radius)
            ang = rng.uniform(0.0, np.pi)
            root = rad * np.exp(1j * ang)
            roots += [root, np.conj(root)]
            remaining -= 2
        else:
            roots.append(rng.uniform(-max_radius, max_radius))
            remaining -= 1
    coeffs = np.real(np.poly(roots))
    coeffs[0] = 1.0
    return DiscretePolynomial(coeffs)


def random_stable_tf(rng, degree=2, sample_time=1.0, max_radius=0.9):
    den = random_stable_poly(rng, degree, max_radius)
    num = np.concatenate([[0.0], rng.normal(0.0, 0.5, size=degree)])
    return DiscreteTransferFunction(num, den, sample_time)


def random_simo(rng, degree=2, sample_time=1.0, label=""):
    return SimoModel(
        tf_y=random_stable_tf(rng, degree, sample_time),
        tf_u=random_stable_tf(rng, degree, sample_time),
        label=label,
    )


def static_gain_model(gain, sample_time=1.0):
    return DiscreteTransferFunction([float(gain)], [1.0], sample_time)


def bj_from_rows(rows, sample_time=1.0, delay=1):
    """Build a BoxJenkinsModel from raw coefficient rows {b, c, d, f}."""
    return BoxJenkinsModel(
        b=DiscretePolynomial(rows["b"]),
        c=DiscretePolynomial(rows["c"]),
        d=DiscretePolynomial(rows["d"]),
        f=DiscretePolynomial(rows["f"]),
        delay=delay,
        sample_time=sample_time,
    )


# Bundled reference coefficients for the 50C operating point, exactly as
# printed; row lengths are taken as-is rather than derived from the order
# labels.
REFERENCE_FAMILY_50C = {
    "22221": {
        "y": {
            "b": [0, 0.03, -0.028],
            "c": [1, -0.817, 0.002],
            "d": [1, -1.772, 0.786],
            "f": [1, -1.997, 0.999],
        },
        "u": {
            "b": [0, 0, 0],
            "c": [1, 0.003, 0],
            "d": [1, -0.995, -0.006],
            "f": [1, -1.978, 0.978],
        },
    },
    "33331": {
        "y": {
            "b": [0, -0.001, 0.002, 0],
            "c": [1, 1.235, 0.609, -0.016],
            "d": [1, 0.247, -0.613, -0.634],
            "f": [1, -2.949, 2.899, -0.95],
        },
        "u": {
            "b": [0, 0, 0, 0],
            "c": [1, 0.127, -0.077, -0.001],
            "d": [1, -0.87, -0.204, 0.074],
            "f": [1, -2.219, 1.455, -0.237],
        },
    },
    "44441": {
        "y": {
            "b": [0, -0.011, 0.01, 0, 0],
            "c": [1, -0.048, -0.007, -0.695, -0.001],
            "d": [1, -1.035, 0.041, -0.689, 0.683],
            "f": [1, -1.806, -0.158, 1.735, -0.77],
        },
        "u": {
            "b": [0, -0.006, 0.011, -0.006, 0.002],
            "c": [1, 0.142, -0.372, -0.297, -0.02],
            "d": [1, -0.84, -0.563, 0.121, 0.282],
            "f": [1, -2.264, 1.117, 0.557, -0.41],
        },
    },
    "55551": {
        "y": {
            "b": [0, -0.045, -0.603, 1.245, -0.601, -0.01],
            "c": [1, 2.098, 1.155, -0.075, -0.085, 0.047],
            "d": [1, 1.094, -0.966, -1.31, -0.033, 0.214],
            "f": [1, -1.776, 1.612, -1.067, 0.392, -0.125],
        },
        "u": {
            "b": [0, 0.089, -0.217, 0.144, 0.013, -0.029],
            "c": [1, -0.161, 0.017, 0.607, -0.233, -0.057],
            "d": [1, -1.156, 0.971, -1.34, 0.716, -0.186],
            "f": [1, -2.365, 2.259, -2.21, 2.148, -0.832],
        },
    },
}

# Matched physical parameter sets per setpoint (alpha V/K, K W/K, C J/K);
# the shared measured resistance is 3.3 ohm.
MATCHED_SETS = {
    30.0: (0.0963, 0.30, 34.9),
    50.0: (0.0825, 0.35, 31.93),
    70.0: (0.0211, 0.286, 11.1),
    90.0: (0.0295, 0.38, 13.7),
}
