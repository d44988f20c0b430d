"""Node models with semi-passivity data, and a sampling certifier.

Every model carries a quadratic storage ``V(x) = |x - c|^2 / 2`` around a
fixed center ``c`` (zero except for Lorenz), so ``grad V(x) = x - c`` and the
coupling input enters ``dV/dt`` as ``u . (x - c)``. Diffusive coupling only
sees state differences, so a common center shifts out of the network.

Semi-passivity is checked as

    grad V(x) . f(x) <= -H(x)                 everywhere
    H(x) >= psi(|x - c|)                      for |x - c| >= rho

with ``psi`` positive on ``r > 0``.

Models are encoded as plain numbers (``kind`` + ``params``) so the
integration kernel can evaluate them without Python callbacks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .errors import InvalidBox, UnknownModel

KIND_POLY = 0
KIND_LORENZ = 1

CERT_TOL = 1e-9


@dataclass(frozen=True)
class NodeModel:
    """Node vector field plus storage / dissipation data.

    ``params`` holds ascending polynomial coefficients of ``f`` for scalar
    polynomial nodes, or ``(sigma, r, b)`` for Lorenz. ``dissipation`` and
    ``bound`` are ascending coefficients of ``H(x)`` and ``psi(r)``; Lorenz
    uses its closed-form ``H`` and ignores ``dissipation``.
    """

    name: str
    state_dim: int
    kind: int
    params: tuple[float, ...]
    dissipation: tuple[float, ...]
    bound: tuple[float, ...]
    rho: float
    center: tuple[float, ...] = (0.0,)
    semipassive: bool = True

    def f(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == KIND_POLY:
            return np.polynomial.polynomial.polyval(x, self.params)
        sigma, r, b = self.params
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        return np.stack(
            [sigma * (x2 - x1), r * x1 - x2 - x1 * x3, x1 * x2 - b * x3], axis=-1
        )

    def shifted(self, x):
        return np.asarray(x, dtype=float) - np.asarray(self.center)

    def storage(self, x):
        w = self.shifted(x)
        if self.state_dim == 1:
            return 0.5 * w * w
        return 0.5 * np.sum(w * w, axis=-1)

    def storage_grad(self, x):
        return self.shifted(x)

    def radius(self, x):
        w = self.shifted(x)
        return np.abs(w) if self.state_dim == 1 else np.linalg.norm(w, axis=-1)

    def H(self, x):
        if self.kind == KIND_POLY:
            return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.dissipation)
        sigma, r, b = self.params
        w = self.shifted(x)
        w1, w2, w3 = w[..., 0], w[..., 1], w[..., 2]
        return sigma * w1 * w1 + w2 * w2 + b * w3 * w3 + b * (sigma + r) * w3

    def psi(self, r):
        return np.polynomial.polynomial.polyval(np.asarray(r, dtype=float), self.bound)

    def supply_rate(self, x):
        """``grad V(x) . f(x)``, the uncoupled storage derivative."""
        prod = self.storage_grad(x) * self.f(x)
        return prod if self.state_dim == 1 else np.sum(prod, axis=-1)

    def kernel_params(self, width: int) -> np.ndarray:
        out = np.zeros(width)
        out[: len(self.params)] = self.params
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "state_dim": self.state_dim,
            "kind": "polynomial" if self.kind == KIND_POLY else "lorenz",
            "params": list(self.params),
            "H": list(self.dissipation),
            "psi": list(self.bound),
            "rho": self.rho,
            "center": list(self.center),
        }


LORENZ_SIGMA, LORENZ_R, LORENZ_B = 10.0, 28.0, 8.0 / 3.0

# On the sphere |w| = R the Lorenz H has minimum R^2 - (b (sigma+r))^2 / (4 (b-1))
# once R >= b (sigma+r) / (2 (b-1)); psi(r) = r^2/4 stays below it for R >= 46.
_CATALOG = {
    "cubic": dict(
        state_dim=1, kind=KIND_POLY, params=(0.0, 1.0, 0.0, -1.0),
        dissipation=(0.0, 0.0, -1.0, 0.0, 1.0), bound=(0.0, 0.0, 0.0, 0.0, 0.5),
        rho=float(np.sqrt(2.0)),
    ),
    "linear_stable": dict(
        state_dim=1, kind=KIND_POLY, params=(0.0, -1.0),
        dissipation=(0.0, 0.0, 1.0), bound=(0.0, 0.0, 1.0), rho=1.0,
    ),
    "lorenz": dict(
        state_dim=3, kind=KIND_LORENZ, params=(LORENZ_SIGMA, LORENZ_R, LORENZ_B),
        dissipation=(), bound=(0.0, 0.0, 0.25), rho=46.0,
        center=(0.0, 0.0, LORENZ_SIGMA + LORENZ_R),
    ),
    # negative control: x f(x) = x^2 > 0, so no admissible H exists
    "unstable_linear": dict(
        state_dim=1, kind=KIND_POLY, params=(0.0, 1.0),
        dissipation=(0.0, 0.0, -1.0), bound=(0.0, 0.0, 1.0), rho=1.0,
        semipassive=False,
    ),
}

CATALOG_NAMES = tuple(_CATALOG)
SEMIPASSIVE_SCALAR = ("cubic", "linear_stable")


def builtin_model(name: str) -> NodeModel:
    try:
        data = _CATALOG[name]
    except KeyError:
        raise UnknownModel(f"unknown model {name!r}; known: {', '.join(_CATALOG)}") from None
    data = dict(data)
    data.setdefault("center", (0.0,) * data["state_dim"])
    return NodeModel(name=name, **data)


def polynomial_model(f, H, psi, rho, name="polynomial") -> NodeModel:
    """Scalar ``dx/dt = sum_k f[k] x^k`` with explicit ``H`` and ``psi`` coefficients."""
    f, H, psi = (tuple(float(c) for c in seq) for seq in (f, H, psi))
    if not f or not H or not psi:
        raise ValueError("polynomial model needs non-empty f, H and psi coefficient lists")
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho!r}")
    return NodeModel(name, 1, KIND_POLY, f, H, psi, float(rho))


def model_from_config(spec) -> NodeModel:
    """Catalog name, ``{"model": name}`` or ``{"type": "polynomial", ...}``."""
    if isinstance(spec, str):
        return builtin_model(spec)
    if isinstance(spec, dict):
        if "model" in spec:
            return builtin_model(spec["model"])
        if spec.get("type") == "polynomial":
            try:
                return polynomial_model(
                    spec["f"], spec["H"], spec["psi"], spec["rho"],
                    name=spec.get("name", "polynomial"),
                )
            except KeyError as exc:
                raise ValueError(f"polynomial model missing field {exc}") from None
    raise UnknownModel(f"cannot build a node model from {spec!r}")


@dataclass(frozen=True)
class Certificate:
    passed: bool
    worst_violation: float
    worst_check: str
    worst_location: tuple[float, ...]
    sample_count: int
    box_radius: float
    checks: dict

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "worst_violation": self.worst_violation,
            "worst_check": self.worst_check,
            "worst_location": list(self.worst_location),
            "sample_count": self.sample_count,
            "box_radius": self.box_radius,
            "tolerance": CERT_TOL,
            "checks": self.checks,
        }


def _relative(lhs, rhs):
    # violation of lhs <= rhs, scaled so large-state samples are judged fairly
    return (lhs - rhs) / np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))


def certify_semipassivity(model: NodeModel, box_radius: float, samples: int = 10_000) -> Certificate:
    """Sample ``[-box_radius, box_radius]^n`` on a Halton sequence and test the
    dissipation inequality, the ``psi`` bound, positivity of ``psi`` and
    radial growth of ``V``.
    """
    if not np.isfinite(box_radius) or box_radius <= model.rho:
        raise InvalidBox(f"box radius {box_radius!r} must exceed rho = {model.rho}")
    if samples < 1000:
        raise InvalidBox(f"need at least 1000 samples, got {samples}")
    n = model.state_dim
    unit = qmc.Halton(d=n, scramble=False).random(samples)
    pts = (2.0 * unit - 1.0) * box_radius
    x = pts[:, 0] if n == 1 else pts

    supply = model.supply_rate(x)
    h = model.H(x)
    radius = model.radius(x)
    psi = model.psi(radius)

    per_check = {}
    # grad V . f <= -H
    per_check["dissipation"] = _relative(supply, -h)
    # psi(|x|) <= H outside the rho-ball
    outside = radius >= model.rho
    per_check["bound"] = np.where(outside, _relative(psi, h), -np.inf)
    # psi(r) > 0 for r > 0
    per_check["psi_positive"] = np.where(radius > 0, np.where(psi > 0, -np.inf, 1.0), -np.inf)
    # V strictly increases along the ray from the storage center
    half = np.asarray(model.center) + 0.5 * model.shifted(x)
    grow = model.storage(half) - model.storage(x)
    per_check["storage_growth"] = np.where(radius > 0, np.where(grow < 0, -np.inf, 1.0), -np.inf)

    worst_name, worst_val, worst_idx = "", -np.inf, 0
    summary = {}
    for name, vals in per_check.items():
        k = int(np.argmax(vals))
        summary[name] = {
            "worst": float(vals[k]) if np.isfinite(vals[k]) else None,
            "violations": int(np.sum(vals > CERT_TOL)),
        }
        if vals[k] > worst_val:
            worst_name, worst_val, worst_idx = name, float(vals[k]), k
    return Certificate(
        passed=worst_val <= CERT_TOL,
        worst_violation=worst_val,
        worst_check=worst_name,
        worst_location=tuple(float(v) for v in np.atleast_1d(pts[worst_idx])),
        sample_count=samples,
        box_radius=float(box_radius),
        checks=summary,
    )
