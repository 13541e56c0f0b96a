"""Box-Jenkins model identification from recorded step tests.

The deterministic part B/F of each channel is fitted by simulation-error
(output-error) minimization: damped Gauss-Newton with finite-difference
Jacobians, started from a matching-order ARX least-squares estimate plus
seeded perturbations.  The noise part C/D is then fitted on the simulation
residuals in the Hannan-Rissanen style (long AR for innovations, then
linear least squares).  Everything downstream that scores models uses only
B/F, so the two stages never need a joint search.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.signal

from .lti import DiscretePolynomial, DiscreteTransferFunction, SimoModel

DEFAULT_ORDER_LABELS = ("22221", "33331", "44441", "55551")
_STABILITY_MARGIN = 1e-6


class FitFailureError(RuntimeError):
    """No stable iterate could be produced; carries the best attempt if any."""

    def __init__(self, message: str, best=None):
        self.best = best
        super().__init__(message)


@dataclass(frozen=True)
class OrderSpec:
    """Polynomial orders (nb, nc, nd, nf) and input delay nk of one model."""

    nb: int
    nc: int
    nd: int
    nf: int
    nk: int = 1

    def __post_init__(self):
        for name in ("nb", "nc", "nd", "nf"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.nk < 0:
            raise ValueError("nk must be >= 0")

    @property
    def label(self) -> str:
        return f"{self.nb}{self.nc}{self.nd}{self.nf}{self.nk}"

    @classmethod
    def from_label(cls, label: str) -> "OrderSpec":
        label = str(label)
        if len(label) != 5 or not label.isdigit():
            raise ValueError(f"order label must be 5 digits like '22221', got {label!r}")
        nb, nc, nd, nf, nk = (int(ch) for ch in label)
        return cls(nb=nb, nc=nc, nd=nd, nf=nf, nk=nk)


def _coerce_order(order) -> OrderSpec:
    return order if isinstance(order, OrderSpec) else OrderSpec.from_label(order)


@dataclass(frozen=True)
class BoxJenkinsModel:
    """y = (B/F) u + (C/D) e with monic C, D, F and nk leading zeros in B."""

    b: DiscretePolynomial
    c: DiscretePolynomial
    d: DiscretePolynomial
    f: DiscretePolynomial
    delay: int
    sample_time: float

    def __post_init__(self):
        for name in ("c", "d", "f"):
            poly = getattr(self, name)
            if poly.coeffs[0] != 1.0:
                raise ValueError(f"{name} polynomial must be monic at z^0")
        if self.delay < 0:
            raise ValueError("delay must be >= 0")
        if len(self.b.coeffs) <= self.delay:
            raise ValueError("b must have coefficients beyond the delay zeros")
        if any(self.b.coeffs[k] != 0.0 for k in range(self.delay)):
            raise ValueError(f"b must start with {self.delay} zero coefficients")
        if self.sample_time <= 0.0:
            raise ValueError("sample_time must be > 0")

    @property
    def n_params(self) -> int:
        """Estimated coefficients: all of B, C, D, F minus fixed 1s and delay zeros."""
        return (
            (len(self.b.coeffs) - self.delay)
            + (len(self.c.coeffs) - 1)
            + (len(self.d.coeffs) - 1)
            + (len(self.f.coeffs) - 1)
        )

    @property
    def deterministic_tf(self) -> DiscreteTransferFunction:
        return DiscreteTransferFunction(self.b, self.f, self.sample_time)

    @property
    def noise_tf(self) -> DiscreteTransferFunction:
        return DiscreteTransferFunction(self.c, self.d, self.sample_time)


@dataclass(frozen=True)
class FitOptions:
    max_iter: int = 200
    tol: float = 1e-10
    n_starts: int = 5
    seed: int = 0
    perturbation: float = 0.2
    max_lambda: float = 1e12
    extra_starts: tuple = ()


@dataclass(frozen=True, eq=False)
class FitResult:
    model: BoxJenkinsModel
    sim_residuals: np.ndarray
    pred_residuals: np.ndarray
    converged: bool
    iterations: int
    cost: float

    def __post_init__(self):
        for name in ("sim_residuals", "pred_residuals"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _max_root_magnitude(monic: np.ndarray) -> float:
    if monic.size < 2:
        return 0.0
    return float(np.max(np.abs(np.roots(monic))))


def _project_stable(monic: np.ndarray, radius: float = 1.0 - _STABILITY_MARGIN) -> np.ndarray:
    """Radially contract the roots of a monic polynomial into the unit disk."""
    if monic.size < 2:
        return monic
    roots = np.roots(monic)
    rho = float(np.max(np.abs(roots))) if roots.size else 0.0
    if rho < radius:
        return monic
    out = np.real(np.poly(roots * (radius / rho)))
    out[0] = 1.0
    return out


def _simulate_bf(theta: np.ndarray, u: np.ndarray, nk: int, nb: int) -> np.ndarray:
    b = np.concatenate([np.zeros(nk), theta[:nb]])
    f = np.concatenate([[1.0], theta[nb:]])
    return scipy.signal.lfilter(b, f, u)


def _oe_residual(theta: np.ndarray, u: np.ndarray, y: np.ndarray, nk: int, nb: int):
    """Simulation residual, or None when F is unstable / the run blew up."""
    f = np.concatenate([[1.0], theta[nb:]])
    if _max_root_magnitude(f) >= 1.0:
        return None
    r = y - _simulate_bf(theta, u, nk, nb)
    if not np.all(np.isfinite(r)):
        return None
    return r


def _arx_start(u: np.ndarray, y: np.ndarray, order: OrderSpec) -> np.ndarray:
    nb, nf, nk = order.nb, order.nf, order.nk
    t0 = max(nb + nk - 1, nf)
    n = y.size
    phi = np.empty((n - t0, nb + nf))
    for i in range(nb):
        phi[:, i] = u[t0 - nk - i : n - nk - i]
    for j in range(nf):
        phi[:, nb + j] = -y[t0 - 1 - j : n - 1 - j]
    theta, *_ = np.linalg.lstsq(phi, y[t0:], rcond=None)
    f = _project_stable(np.concatenate([[1.0], theta[nb:]]), radius=0.99)
    return np.concatenate([theta[:nb], f[1:]])


def _gauss_newton_oe(theta0, u, y, order: OrderSpec, opts: FitOptions):
    """Damped Gauss-Newton on the simulation error; rejects unstable steps."""
    nb, nk = order.nb, order.nk
    theta = np.asarray(theta0, dtype=float).copy()
    r = _oe_residual(theta, u, y, nk, nb)
    if r is None:
        return None
    cost = float(r @ r)
    lam = 1e-3
    iterations = 0
    converged = False
    for iterations in range(1, opts.max_iter + 1):
        if cost == 0.0:
            converged = True
            break
        jac = np.empty((y.size, theta.size))
        for i in range(theta.size):
            h = 1e-6 * (1.0 + abs(theta[i]))
            up = theta.copy()
            up[i] += h
            dn = theta.copy()
            dn[i] -= h
            rp = _oe_residual(up, u, y, nk, nb)
            rm = _oe_residual(dn, u, y, nk, nb)
            if rp is not None and rm is not None:
                jac[:, i] = (rp - rm) / (2.0 * h)
            elif rp is not None:
                jac[:, i] = (rp - r) / h
            elif rm is not None:
                jac[:, i] = (r - rm) / h
            else:
                jac[:, i] = 0.0
        jtj = jac.T @ jac
        jtr = jac.T @ r
        scale = np.clip(np.diag(jtj), 1e-12, None)
        stepped = False
        while lam <= opts.max_lambda:
            try:
                delta = np.linalg.solve(jtj + lam * np.diag(scale), -jtr)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            cand = theta + delta
            rc = _oe_residual(cand, u, y, nk, nb)
            if rc is not None:
                new_cost = float(rc @ rc)
                if new_cost < cost:
                    rel_drop = (cost - new_cost) / cost
                    theta, r, cost = cand, rc, new_cost
                    lam = max(lam / 10.0, 1e-12)
                    stepped = True
                    if rel_drop < opts.tol:
                        converged = True
                    break
            lam *= 10.0
        if not stepped:
            converged = True  # no damping level improves: at a (local) optimum
            break
        if converged:
            break
    return theta, cost, iterations, converged


def fit_output_error(input, output, order, opts: FitOptions = FitOptions()) -> FitResult:
    """Fit the deterministic channel B/F by simulation-error minimization.

    Runs a seeded multistart around the ARX initializer (plus any
    ``opts.extra_starts``) and returns the best iterate even when not
    converged.  C and D come back as identity; see
    :func:`fit_noise_model` for the noise half.  Raw sequences carry no
    time base, so the returned model is stamped with a unit sample time
    (:func:`identify_family` restamps it from the dataset).
    """
    order = _coerce_order(order)
    u = np.asarray(input, dtype=float).ravel()
    y = np.asarray(output, dtype=float).ravel()
    if u.size != y.size:
        raise ValueError("input and output must have the same length")
    min_len = 10 * (order.nb + order.nf)
    if y.size < min_len:
        raise ValueError(
            f"need at least {min_len} samples for orders nb={order.nb}, nf={order.nf}, "
            f"got {y.size}"
        )

    theta0 = _arx_start(u, y, order)
    rng = np.random.default_rng(opts.seed)
    starts = [theta0]
    scale = opts.perturbation * (1.0 + np.abs(theta0))
    for _ in range(max(opts.n_starts - 1, 0)):
        cand = theta0 + scale * rng.standard_normal(theta0.size)
        f = _project_stable(np.concatenate([[1.0], cand[order.nb:]]), radius=0.95)
        starts.append(np.concatenate([cand[: order.nb], f[1:]]))
    for extra in opts.extra_starts:
        extra = np.asarray(extra, dtype=float)
        if extra.size == theta0.size:
            starts.append(extra)

    best = None
    for idx, start in enumerate(starts):
        outcome = _gauss_newton_oe(start, u, y, order, opts)
        if outcome is None:
            continue
        theta, cost, iterations, converged = outcome
        if best is None or cost < best[0]:
            best = (cost, idx, theta, iterations, converged)
    if best is None:
        raise FitFailureError(
            f"no stable iterate found for order {order.label} on {y.size} samples"
        )

    cost, _, theta, iterations, converged = best
    model = BoxJenkinsModel(
        b=DiscretePolynomial(np.concatenate([np.zeros(order.nk), theta[: order.nb]])),
        c=DiscretePolynomial([1.0]),
        d=DiscretePolynomial([1.0]),
        f=DiscretePolynomial(np.concatenate([[1.0], theta[order.nb :]])),
        delay=order.nk,
        sample_time=1.0,
    )
    residuals = y - _simulate_bf(theta, u, order.nk, order.nb)
    return FitResult(
        model=model,
        sim_residuals=residuals,
        pred_residuals=residuals.copy(),
        converged=converged,
        iterations=iterations,
        cost=cost,
    )


def fit_noise_model(residuals, nc: int, nd: int):
    """Fit monic noise polynomials (C, D) to a residual sequence.

    Hannan-Rissanen two-stage: a long AR regression reconstructs the
    innovations, then one linear least-squares pass gives the C and D
    coefficients.  Both polynomials are radially projected inside the unit
    circle when needed (C as well, so the one-step predictor stays
    invertible).  Zero-variance residuals yield the identity model.
    """
    if nc < 1 or nd < 1:
        raise ValueError("nc and nd must be >= 1")
    v = np.asarray(residuals, dtype=float).ravel()
    identity = (DiscretePolynomial([1.0]), DiscretePolynomial([1.0]))
    if v.size == 0 or float(np.max(np.abs(v))) < 1e-300:
        return identity
    if v.size < 10 * (nc + nd):
        raise ValueError(
            f"need at least {10 * (nc + nd)} residuals for nc={nc}, nd={nd}, got {v.size}"
        )

    p_ar = min(max(10, 2 * (nc + nd)), v.size // 5)
    phi = np.empty((v.size - p_ar, p_ar))
    for i in range(p_ar):
        phi[:, i] = v[p_ar - 1 - i : v.size - 1 - i]
    a, *_ = np.linalg.lstsq(phi, v[p_ar:], rcond=None)
    e = np.zeros_like(v)
    e[p_ar:] = v[p_ar:] - phi @ a

    t0 = p_ar + max(nc, nd)
    rows = v.size - t0
    reg = np.empty((rows, nd + nc))
    for i in range(nd):
        reg[:, i] = -v[t0 - 1 - i : v.size - 1 - i]
    for j in range(nc):
        reg[:, nd + j] = e[t0 - 1 - j : v.size - 1 - j]
    theta, *_ = np.linalg.lstsq(reg, v[t0:], rcond=None)

    d = _project_stable(np.concatenate([[1.0], theta[:nd]]))
    c = _project_stable(np.concatenate([[1.0], theta[nd:]]))
    return DiscretePolynomial(c), DiscretePolynomial(d)


def one_step_residuals(model: BoxJenkinsModel, u, y) -> np.ndarray:
    """One-step prediction errors of the full BJ model: e = (D/C)(y - (B/F)u)."""
    u = np.asarray(u, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    v = y - scipy.signal.lfilter(model.b.as_array(), model.f.as_array(), u)
    return scipy.signal.lfilter(model.d.as_array(), model.c.as_array(), v)


@dataclass(frozen=True)
class FamilyResult:
    """Identified SIMO family: models per order plus per-channel fit records."""

    models: dict
    fits: dict
    errors: tuple

    def simo(self, label: str) -> SimoModel:
        return self.models[label]


def identify_family(
    dataset, order_labels=DEFAULT_ORDER_LABELS, opts: FitOptions = FitOptions()
) -> FamilyResult:
    """Fit both channels (r -> y, r -> u) for every requested order.

    Orders are processed ascending and each fit warm-starts from the
    previous order's zero-padded solution, which makes the best simulation
    cost non-increasing with order.  Per-channel failures are recorded
    without aborting the remaining orders.
    """
    orders = sorted(
        (_coerce_order(lbl) for lbl in order_labels),
        key=lambda s: (s.nb + s.nf, s.label),
    )
    r = np.asarray(dataset.r, dtype=float)
    channels = {"y": np.asarray(dataset.y, dtype=float), "u": np.asarray(dataset.u, dtype=float)}
    ts = dataset.sample_time

    models: dict = {}
    fits: dict = {}
    errors: list = []
    prev_theta: dict = {"y": None, "u": None}
    prev_order: dict = {"y": None, "u": None}

    for order in orders:
        per_channel = {}
        for ch, signal_out in channels.items():
            extras = []
            prev = prev_theta[ch]
            if prev is not None:
                ps = prev_order[ch]
                if ps.nk == order.nk and ps.nb <= order.nb and ps.nf <= order.nf:
                    extras.append(
                        np.concatenate(
                            [
                                prev[: ps.nb],
                                np.zeros(order.nb - ps.nb),
                                prev[ps.nb :],
                                np.zeros(order.nf - ps.nf),
                            ]
                        )
                    )
            try:
                fit = fit_output_error(
                    r, signal_out, order, replace(opts, extra_starts=tuple(extras))
                )
                c, d = fit_noise_model(fit.sim_residuals, order.nc, order.nd)
                model = replace(fit.model, c=c, d=d, sample_time=ts)
                fit = replace(
                    fit,
                    model=model,
                    pred_residuals=one_step_residuals(model, r, signal_out),
                )
            except Exception as exc:  # noqa: BLE001 - per-order isolation of fit failures
                errors.append((order.label, ch, f"{type(exc).__name__}: {exc}"))
                continue
            fits[(order.label, ch)] = fit
            per_channel[ch] = fit
            theta = np.concatenate(
                [fit.model.b.as_array()[order.nk :], fit.model.f.as_array()[1:]]
            )
            prev_theta[ch] = theta
            prev_order[ch] = order
        if "y" in per_channel and "u" in per_channel:
            models[order.label] = SimoModel(
                tf_y=per_channel["y"].model.deterministic_tf,
                tf_u=per_channel["u"].model.deterministic_tf,
                label=order.label,
            )
    return FamilyResult(models=models, fits=fits, errors=tuple(errors))
