"""Sampling-capable distribution families for the Monte Carlo engine.

Each family exposes the same small surface:

    dim                       ambient dimension
    sample(rng, n)            (n, dim) array of i.i.d. draws
    norm_bound(space)         a.s. bound on ||X|| (math.inf if unbounded)
    truncated_cov(t, space)   analytic E[X X^T 1{||X|| <= t}], or None
    tail_prob_norm(t, space)  P{||X|| > t} when known in closed form, or None
    is_centered               True when E X exists and equals 0
    describe()                round-trippable text form
    scaled(c)                 the law of c X

Families without an analytic truncated covariance return None and the
caller falls back to the empirical estimator in `spaces`.
"""
from __future__ import annotations

import math

import numpy as np

from .spaces import SpaceSpec, norm

_SCALAR = SpaceSpec(1, 2.0)


def _vec_text(v: np.ndarray) -> str:
    return ";".join(repr(float(x)).rstrip("0").rstrip(".") if "." in repr(float(x)) else repr(float(x)) for x in v)


def _fmt_num(x: float) -> str:
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


class Gaussian:
    """Centered Gaussian with a given covariance.

    `cov` may be a scalar variance, a vector of per-coordinate variances,
    or a full covariance matrix; it must be symmetric PSD.
    """

    def __init__(self, cov):
        arr = np.atleast_1d(np.asarray(cov, dtype=float))
        if arr.ndim == 1:
            arr = np.diag(arr)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("covariance must be scalar, vector, or square matrix")
        sym = 0.5 * (arr + arr.T)
        if not np.allclose(arr, sym, rtol=1e-9, atol=1e-12):
            raise ValueError("covariance must be symmetric")
        # Cholesky with a diagonal nudge covers the strictly-PSD case and
        # rejects indefinite input; semidefinite input falls back to an
        # eigen square root.
        try:
            self._root = np.linalg.cholesky(sym)
        except np.linalg.LinAlgError:
            w, v = np.linalg.eigh(sym)
            if w.min() < -1e-10 * max(1.0, w.max()):
                raise ValueError("covariance is not positive semidefinite") from None
            self._root = v * np.sqrt(np.clip(w, 0.0, None))
        self.cov = sym
        self.dim = sym.shape[0]

    is_centered = True

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.standard_normal((n, self.dim)) @ self._root.T

    def norm_bound(self, space: SpaceSpec) -> float:
        return math.inf

    def truncated_cov(self, t: float, space: SpaceSpec):
        if self.dim != 1:
            return None
        sigma2 = float(self.cov[0, 0])
        if sigma2 == 0.0:
            return np.zeros((1, 1))
        u = t / math.sqrt(sigma2)
        val = sigma2 * (math.erf(u / math.sqrt(2)) - u * math.sqrt(2 / math.pi) * math.exp(-0.5 * u * u))
        return np.array([[max(val, 0.0)]])

    def tail_prob_norm(self, t: float, space: SpaceSpec):
        if self.dim != 1:
            return None
        sigma2 = float(self.cov[0, 0])
        if sigma2 == 0.0:
            return 0.0
        return math.erfc(t / math.sqrt(2 * sigma2))

    def describe(self) -> str:
        d = np.diag(self.cov)
        if np.allclose(self.cov, np.diag(d)):
            if np.all(d == d[0]):
                return f"gauss:dim={self.dim},var={_fmt_num(d[0])}"
            return f"gauss:diag={_vec_text(d)}"
        rows = "/".join(_vec_text(row) for row in self.cov)
        return f"gauss:cov={rows}"

    def scaled(self, c: float) -> "Gaussian":
        return Gaussian(self.cov * c * c)


class RademacherProduct:
    """Independent signs times fixed per-coordinate scales.

    Every draw has |X_j| = scales_j exactly, so ||X||_p is the constant
    ||scales||_p and the truncated covariance is a step function of t.
    """

    def __init__(self, scales):
        arr = np.atleast_1d(np.asarray(scales, dtype=float))
        if arr.ndim != 1 or arr.size == 0 or np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("scales must be a nonempty finite nonnegative vector")
        self.scales = arr
        self.dim = arr.size

    is_centered = True

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        signs = rng.integers(0, 2, size=(n, self.dim)) * 2 - 1
        return signs * self.scales

    def norm_bound(self, space: SpaceSpec) -> float:
        return norm(self.scales, space)

    def truncated_cov(self, t: float, space: SpaceSpec) -> np.ndarray:
        if t >= self.norm_bound(space):
            return np.diag(self.scales**2)
        return np.zeros((self.dim, self.dim))

    def tail_prob_norm(self, t: float, space: SpaceSpec) -> float:
        return 1.0 if t < self.norm_bound(space) else 0.0

    def describe(self) -> str:
        if np.all(self.scales == 1.0):
            return f"rademacher:dim={self.dim}"
        return f"rademacher:scales={_vec_text(self.scales)}"

    def scaled(self, c: float) -> "RademacherProduct":
        return RademacherProduct(self.scales * c)


class RadialPareto:
    """Heavy-tailed radial law: X = scale * R * sign * U.

    R = V^{-1/a} for uniform V, so P{R > r} = r^{-a} for r >= 1; U is
    uniform on the unit sphere and an extra independent sign symmetrizes
    the law (relevant for d = 1, harmless otherwise).  The mean exists
    only for tail index a > 1, in which case it is 0 by symmetry.
    """

    def __init__(self, a: float, dim: int = 1, scale: float = 1.0):
        if not (a > 0 and math.isfinite(a)):
            raise ValueError("tail index a must be positive and finite")
        if dim < 1 or scale <= 0:
            raise ValueError("need dim >= 1 and scale > 0")
        self.a = float(a)
        self.dim = int(dim)
        self.scale = float(scale)

    @property
    def is_centered(self) -> bool:
        return self.a > 1

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        r = rng.random(n) ** (-1.0 / self.a)
        g = rng.standard_normal((n, self.dim))
        u = g / np.linalg.norm(g, axis=1, keepdims=True)
        eps = rng.integers(0, 2, size=n) * 2 - 1
        return self.scale * (r * eps)[:, None] * u

    def norm_bound(self, space: SpaceSpec) -> float:
        return math.inf

    def truncated_cov(self, t: float, space: SpaceSpec):
        if space.norm_p != 2.0:
            return None
        r = t / self.scale
        if r < 1.0:
            return np.zeros((self.dim, self.dim))
        if self.a == 2.0:
            m2 = 2.0 * math.log(r)
        else:
            m2 = self.a / (2.0 - self.a) * (r ** (2.0 - self.a) - 1.0)
        return (self.scale**2 * m2 / self.dim) * np.eye(self.dim)

    def tail_prob_norm(self, t: float, space: SpaceSpec):
        if space.norm_p != 2.0:
            return None
        return min(1.0, (t / self.scale) ** (-self.a)) if t > 0 else 1.0

    def describe(self) -> str:
        return f"pareto:a={_fmt_num(self.a)},dim={self.dim},scale={_fmt_num(self.scale)}"

    def scaled(self, c: float) -> "RadialPareto":
        return RadialPareto(self.a, self.dim, self.scale * c)


class PointMass:
    """Deterministic X = v.  Mostly a degenerate test fixture."""

    def __init__(self, vector):
        self.vector = np.atleast_1d(np.asarray(vector, dtype=float))
        self.dim = self.vector.size

    @property
    def is_centered(self) -> bool:
        return bool(np.all(self.vector == 0.0))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.tile(self.vector, (n, 1))

    def norm_bound(self, space: SpaceSpec) -> float:
        return norm(self.vector, space)

    def truncated_cov(self, t: float, space: SpaceSpec) -> np.ndarray:
        if norm(self.vector, space) <= t:
            return np.outer(self.vector, self.vector)
        return np.zeros((self.dim, self.dim))

    def tail_prob_norm(self, t: float, space: SpaceSpec) -> float:
        return 1.0 if norm(self.vector, space) > t else 0.0

    def describe(self) -> str:
        return f"point:v={_vec_text(self.vector)}"

    def scaled(self, c: float) -> "PointMass":
        return PointMass(self.vector * c)


class ScalarEmbedded:
    """A one-dimensional law placed on one axis of R^d, zeros elsewhere."""

    def __init__(self, inner, axis: int, dim: int):
        if getattr(inner, "dim", None) != 1:
            raise ValueError("inner law must be one-dimensional")
        if not (0 <= axis < dim):
            raise ValueError("axis out of range")
        self.inner = inner
        self.axis = int(axis)
        self.dim = int(dim)

    @property
    def is_centered(self) -> bool:
        return self.inner.is_centered

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        out = np.zeros((n, self.dim))
        out[:, self.axis] = self.inner.sample(rng, n)[:, 0]
        return out

    def norm_bound(self, space: SpaceSpec) -> float:
        # every l^p norm of (0,..,x,..,0) is |x|
        return self.inner.norm_bound(_SCALAR)

    def truncated_cov(self, t: float, space: SpaceSpec):
        m = self.inner.truncated_cov(t, _SCALAR)
        if m is None:
            return None
        out = np.zeros((self.dim, self.dim))
        out[self.axis, self.axis] = m[0, 0]
        return out

    def tail_prob_norm(self, t: float, space: SpaceSpec):
        return self.inner.tail_prob_norm(t, _SCALAR)

    def describe(self) -> str:
        return f"embed:dim={self.dim},axis={self.axis},inner=({self.inner.describe()})"

    def scaled(self, c: float) -> "ScalarEmbedded":
        return ScalarEmbedded(self.inner.scaled(c), self.axis, self.dim)


# ---------------------------------------------------------------------------
# Text form: "family:key=value,key=value".  Vector values use ';' between
# entries; a nested law is wrapped in parentheses.
# ---------------------------------------------------------------------------


def _split_pairs(body: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    depth, cur, chunks = 0, [], []
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ValueError(f"unbalanced parentheses in {body!r}")
        if ch == "," and depth == 0:
            chunks.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise ValueError(f"unbalanced parentheses in {body!r}")
    chunks.append("".join(cur))
    for chunk in chunks:
        if not chunk:
            continue
        key, sep, val = chunk.partition("=")
        if not sep or not key:
            raise ValueError(f"expected key=value, got {chunk!r}")
        if key in pairs:
            raise ValueError(f"duplicate key {key!r}")
        pairs[key] = val
    return pairs


def _vec(val: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in val.split(";")])
    except ValueError:
        raise ValueError(f"cannot parse vector {val!r}") from None


def parse_dist(text: str):
    """Parse a distribution spec such as "gauss:dim=2,var=1".

    Families: gauss (dim/var, diag, or cov rows split by '/'),
    rademacher (dim or scales), pareto (a, dim, scale), point (v),
    embed (dim, axis, inner=(...)).
    """
    squeezed = text.strip().replace(" ", "")
    name, sep, body = squeezed.partition(":")
    if not sep and name not in ():
        raise ValueError(f"distribution spec needs 'family:args', got {text!r}")
    pairs = _split_pairs(body)

    def take(key, default=None):
        return pairs.pop(key, default)

    try:
        if name == "gauss":
            if "cov" in pairs:
                rows = [_vec(r) for r in take("cov").split("/")]
                made = Gaussian(np.vstack(rows))
            elif "diag" in pairs:
                made = Gaussian(_vec(take("diag")))
            else:
                dim = int(take("dim", "1"))
                var = float(take("var", "1"))
                made = Gaussian(var * np.eye(dim))
        elif name == "rademacher":
            if "scales" in pairs:
                made = RademacherProduct(_vec(take("scales")))
            else:
                made = RademacherProduct(np.ones(int(take("dim", "1"))))
        elif name == "pareto":
            made = RadialPareto(
                a=float(take("a", "2.5")), dim=int(take("dim", "1")), scale=float(take("scale", "1"))
            )
        elif name == "point":
            made = PointMass(_vec(take("v", "0")))
        elif name == "embed":
            inner_text = take("inner")
            if not inner_text or not (inner_text.startswith("(") and inner_text.endswith(")")):
                raise ValueError("embed needs inner=(<dist spec>)")
            made = ScalarEmbedded(
                parse_dist(inner_text[1:-1]), axis=int(take("axis", "0")), dim=int(take("dim"))
            )
        else:
            raise ValueError(f"unknown distribution family {name!r}")
    except (TypeError, KeyError) as exc:
        raise ValueError(f"bad distribution spec {text!r}: {exc}") from None
    if pairs:
        raise ValueError(f"unknown keys {sorted(pairs)} for family {name!r}")
    return made
