"""Instance files, builtin objectives and synthetic generators.

Instance files are JSON documents (``schema_version`` 1)::

    {
      "schema_version": 1,
      "name": "example_3_1",
      "n": 3, "m": 1, "p": 0, "kappa": 2,
      "objective": {"quadratic": {"Q": [[...], ...], "c": [...], "const": 0.0}},
      "constraints": [
        {"kind": "ineq", "form": "quadratic", "Q": [[...], ...], "a": [...], "b": 0.0},
        {"kind": "eq", "form": "affine", "a": [...], "b": -1.0}
      ],
      "generator": {"type": "portfolio", "seed": 42, "n": 10, "kappa": 3, "params": {}}
    }

Quadratic pieces use the halved convention: the objective is
``0.5 x'Qx + c'x + const`` and a quadratic row is ``0.5 x'Qx + a'x + b``.
``Q`` may be given as a list of rows or as a flat row-major list.
Constraint rows read ``row(x) <= 0`` (``ineq``) or ``row(x) = 0`` (``eq``);
variable bounds are ordinary inequality rows.  The objective may instead
be ``{"builtin": {"name": ..., "params": {...}}}``, see :data:`BUILTINS`.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import serialize
from .problem import CcopProblem

__all__ = [
    "BUILTINS",
    "InstanceSpec",
    "SchemaError",
    "build_problem",
    "bundled_instances",
    "generate_portfolio",
    "generate_sparse_lsq",
    "load_instance",
    "read_instance",
    "resolve_instance_path",
    "write_instance",
]

SCHEMA_VERSION = 1

_NUMBER_LIST = {"type": "array", "items": {"type": "number"}}
_MATRIX = {
    "oneOf": [
        {"type": "array", "items": _NUMBER_LIST},
        _NUMBER_LIST,
    ]
}

INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "name", "n", "m", "p", "kappa", "objective"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "n": {"type": "integer", "minimum": 1},
        "m": {"type": "integer", "minimum": 0},
        "p": {"type": "integer", "minimum": 0},
        "kappa": {"type": "integer"},
        "objective": {
            "type": "object",
            "oneOf": [
                {
                    "required": ["quadratic"],
                    "additionalProperties": False,
                    "properties": {
                        "quadratic": {
                            "type": "object",
                            "required": ["Q", "c"],
                            "additionalProperties": False,
                            "properties": {"Q": _MATRIX, "c": _NUMBER_LIST, "const": {"type": "number"}},
                        }
                    },
                },
                {
                    "required": ["builtin"],
                    "additionalProperties": False,
                    "properties": {
                        "builtin": {
                            "type": "object",
                            "required": ["name"],
                            "additionalProperties": False,
                            "properties": {"name": {"type": "string"}, "params": {"type": "object"}},
                        }
                    },
                },
            ],
        },
        "constraints": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["kind", "form", "a", "b"],
                "additionalProperties": False,
                "properties": {
                    "kind": {"enum": ["ineq", "eq"]},
                    "form": {"enum": ["affine", "quadratic"]},
                    "a": _NUMBER_LIST,
                    "b": {"type": "number"},
                    "Q": _MATRIX,
                },
            },
        },
        "generator": {"type": "object"},
    },
}


class SchemaError(ValueError):
    """An instance document violates the schema or its invariants."""


@dataclass
class InstanceSpec:
    name: str
    n: int
    m: int
    p: int
    kappa: int
    objective: dict
    constraints: list = field(default_factory=list)
    generator: dict | None = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        out = {
            "schema_version": self.schema_version,
            "name": self.name,
            "n": self.n,
            "m": self.m,
            "p": self.p,
            "kappa": self.kappa,
            "objective": self.objective,
            "constraints": self.constraints,
        }
        if self.generator is not None:
            out["generator"] = self.generator
        return out

    def dumps(self) -> str:
        return serialize.dumps(self.to_dict(), indent=2) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()

    @classmethod
    def from_dict(cls, doc: dict, source: str = "<instance>") -> "InstanceSpec":
        validator = jsonschema.Draft202012Validator(INSTANCE_SCHEMA)
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
        if errors:
            err = errors[0]
            where = _field_path(err.absolute_path) or "<root>"
            raise SchemaError(f"{source}: {where}: {err.message}")
        spec = cls(
            name=doc["name"],
            n=doc["n"],
            m=doc["m"],
            p=doc["p"],
            kappa=doc["kappa"],
            objective=doc["objective"],
            constraints=list(doc.get("constraints", [])),
            generator=doc.get("generator"),
            schema_version=doc["schema_version"],
        )
        spec._check(source)
        return spec

    def _check(self, source):
        n = self.n
        if not 0 < self.kappa < n:
            raise SchemaError(f"{source}: kappa: must satisfy 0 < kappa < n (got kappa={self.kappa}, n={n})")
        kinds = [row["kind"] for row in self.constraints]
        if kinds.count("ineq") != self.m:
            raise SchemaError(f"{source}: m: declares {self.m} inequality rows, found {kinds.count('ineq')}")
        if kinds.count("eq") != self.p:
            raise SchemaError(f"{source}: p: declares {self.p} equality rows, found {kinds.count('eq')}")
        if "quadratic" in self.objective:
            quad = self.objective["quadratic"]
            _matrix(quad["Q"], n, f"{source}: objective.quadratic.Q")
            _vector(quad["c"], n, f"{source}: objective.quadratic.c")
        else:
            name = self.objective["builtin"]["name"]
            if name not in BUILTINS:
                raise SchemaError(f"{source}: objective.builtin.name: unknown builtin {name!r}")
        for i, row in enumerate(self.constraints):
            where = f"{source}: constraints[{i}]"
            _vector(row["a"], n, where + ".a")
            if row["form"] == "quadratic":
                if "Q" not in row:
                    raise SchemaError(f"{where}.Q: quadratic rows need Q")
                _matrix(row["Q"], n, where + ".Q")
            elif "Q" in row:
                raise SchemaError(f"{where}.Q: affine rows take no Q")


def _field_path(path) -> str:
    out = ""
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out


def _vector(v, n, where) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (n,):
        raise SchemaError(f"{where}: expected {n} entries, got {arr.size}")
    return arr


def _matrix(q, n, where) -> np.ndarray:
    arr = np.asarray(q, dtype=float)
    if arr.ndim == 1 and arr.size == n * n:
        arr = arr.reshape(n, n)
    if arr.shape != (n, n):
        raise SchemaError(f"{where}: expected an {n}x{n} matrix, got shape {arr.shape}")
    asym = float(np.max(np.abs(arr - arr.T), initial=0.0))
    if asym > 1e-12:
        warnings.warn(f"{where}: asymmetry {asym:.3g} > 1e-12, symmetrizing", stacklevel=3)
    if asym > 0:
        arr = 0.5 * (arr + arr.T)
    return arr


# -- builtin objectives ---------------------------------------------------------


def _rosenbrock(n, params):
    a = float(params.get("a", 1.0))
    b = float(params.get("b", 100.0))

    def f(x):
        return float(np.sum(b * (x[1:] - x[:-1] ** 2) ** 2 + (a - x[:-1]) ** 2))

    def grad(x):
        out = np.zeros_like(x)
        t = x[1:] - x[:-1] ** 2
        out[:-1] = -4.0 * b * x[:-1] * t - 2.0 * (a - x[:-1])
        out[1:] += 2.0 * b * t
        return out

    return f, grad


def _distance_squared(n, params):
    target = np.asarray(params.get("target", np.ones(n)), dtype=float)
    weights = np.asarray(params.get("weights", np.ones(n)), dtype=float)
    if target.shape != (n,) or weights.shape != (n,):
        raise SchemaError("objective.builtin.params: target/weights must have n entries")

    def f(x):
        d = x - target
        return 0.5 * float(d @ (weights * d))

    def grad(x):
        return weights * (x - target)

    return f, grad


def _quartic_well(n, params):
    # sum of (x_i^2 - s)^2 plus a linear tilt; nonconvex with 2^n wells
    s = float(params.get("s", 1.0))
    tilt = np.asarray(params.get("tilt", np.zeros(n)), dtype=float)

    def f(x):
        return float(np.sum((x**2 - s) ** 2) + tilt @ x)

    def grad(x):
        return 4.0 * x * (x**2 - s) + tilt

    return f, grad


BUILTINS = {
    "rosenbrock": _rosenbrock,
    "distance_squared": _distance_squared,
    "quartic_well": _quartic_well,
}


# -- problem construction -------------------------------------------------------


def _rows(constraints, kind, n):
    rows = [r for r in constraints if r["kind"] == kind]
    A = np.array([r["a"] for r in rows], dtype=float).reshape(len(rows), n)
    b = np.array([r["b"] for r in rows], dtype=float)
    quad = [(i, _matrix(r["Q"], n, f"{kind}[{i}].Q")) for i, r in enumerate(rows) if r["form"] == "quadratic"]
    return A, b, quad


def _row_functions(A, b, quad):
    def values(x):
        out = A @ x + b
        for i, Q in quad:
            out[i] += 0.5 * float(x @ Q @ x)
        return out

    def jac(x):
        J = A.copy()
        for i, Q in quad:
            J[i] += Q @ x
        return J.T

    return values, jac


def build_problem(spec: InstanceSpec) -> CcopProblem:
    """Callbacks with exact derivatives synthesized from the instance forms."""
    n = spec.n
    if "quadratic" in spec.objective:
        quad = spec.objective["quadratic"]
        Q = _matrix(quad["Q"], n, "objective.quadratic.Q")
        c = np.asarray(quad["c"], dtype=float)
        const = float(quad.get("const", 0.0))

        def f(x):
            return 0.5 * float(x @ Q @ x) + float(c @ x) + const

        def grad(x):
            return Q @ x + c

    else:
        builtin = spec.objective["builtin"]
        f, grad = BUILTINS[builtin["name"]](n, builtin.get("params", {}))

    kw = {}
    if spec.m:
        kw["eval_g"], kw["jac_g"] = _row_functions(*_rows(spec.constraints, "ineq", n))
    if spec.p:
        kw["eval_h"], kw["jac_h"] = _row_functions(*_rows(spec.constraints, "eq", n))
    return CcopProblem(
        n=n,
        kappa=spec.kappa,
        m=spec.m,
        p=spec.p,
        eval_f=f,
        grad_f=grad,
        name=spec.name,
        meta={"generator": spec.generator},
        **kw,
    )


def bundled_instances() -> list[str]:
    root = resources.files("ccsalm") / "instances"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def resolve_instance_path(path) -> Path:
    """Use ``path`` if it exists, else look it up among the bundled instances."""
    p = Path(path)
    if p.exists():
        return p
    name = p.name if p.name.endswith(".json") else p.name + ".json"
    bundled = resources.files("ccsalm") / "instances" / name
    if bundled.is_file():
        return Path(str(bundled))
    raise FileNotFoundError(f"no instance file {path!s} (bundled: {', '.join(bundled_instances())})")


def read_instance(path) -> InstanceSpec:
    p = resolve_instance_path(path)
    text = p.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise SchemaError(f"{p}: line {err.lineno} column {err.colno}: {err.msg}") from None
    return InstanceSpec.from_dict(doc, source=str(p))


def write_instance(spec: InstanceSpec, path) -> None:
    Path(path).write_text(spec.dumps())


def load_instance(path) -> CcopProblem:
    return build_problem(read_instance(path))


# -- generators -----------------------------------------------------------------


def _affine(kind, a, b):
    return {"kind": kind, "form": "affine", "a": [float(v) for v in a], "b": float(b)}


def generate_portfolio(seed: int, n: int, kappa: int, params: dict | None = None) -> InstanceSpec:
    """Sparse minimum-variance portfolio with a return floor.

    ``min x'Cx`` with ``C = AA'/n + jitter*I`` (``A`` seeded standard
    normal), subject to ``sum(x) = 1``, ``x >= 0``, optional ``x <= upper``
    and ``mu'x >= r`` where ``mu`` is seeded uniform on ``[mu_low, mu_high]`` (default ``[0, 1]``)
    and ``r`` is the median of ``mu``.
    """
    if n < 3 or not 1 <= kappa < n:
        raise ValueError("need n >= 3 and 1 <= kappa < n")
    params = dict(params or {})
    jitter = float(params.get("jitter", 1e-2))
    mu_low = float(params.get("mu_low", 0.0))
    mu_high = float(params.get("mu_high", 1.0))
    upper = params.get("upper")

    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    cov = A @ A.T / n + jitter * np.eye(n)
    cov = 0.5 * (cov + cov.T)
    mu = rng.uniform(mu_low, mu_high, n)
    r = float(np.median(mu))

    eye = np.eye(n)
    rows = [_affine("eq", np.ones(n), -1.0)]
    rows += [_affine("ineq", -eye[i], 0.0) for i in range(n)]
    if upper is not None:
        rows += [_affine("ineq", eye[i], -float(upper)) for i in range(n)]
    rows.append(_affine("ineq", -mu, r))
    m = sum(row["kind"] == "ineq" for row in rows)
    return InstanceSpec(
        name=f"portfolio_seed{seed}_n{n}_k{kappa}",
        n=n,
        m=m,
        p=1,
        kappa=kappa,
        objective={"quadratic": {"Q": (2.0 * cov).tolist(), "c": [0.0] * n, "const": 0.0}},
        constraints=rows,
        generator={"type": "portfolio", "seed": seed, "n": n, "kappa": kappa, "params": params},
    )


def generate_sparse_lsq(seed: int, n: int, kappa: int, params: dict | None = None) -> InstanceSpec:
    """``min 0.5 |Ax - b|^2`` with ``b = A x_true + noise`` and ``x_true`` kappa-sparse."""
    if not 1 <= kappa < n:
        raise ValueError("need 1 <= kappa < n")
    params = dict(params or {})
    n_obs = int(params.get("n_obs", 2 * n))
    noise = float(params.get("noise", 1e-2))

    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n_obs, n))
    x_true = np.zeros(n)
    support = np.sort(rng.choice(n, size=kappa, replace=False))
    x_true[support] = rng.choice([-1.0, 1.0], size=kappa) * rng.uniform(1.0, 2.0, size=kappa)
    b = A @ x_true + noise * rng.standard_normal(n_obs)
    Q = A.T @ A
    Q = 0.5 * (Q + Q.T)
    return InstanceSpec(
        name=f"sparse_lsq_seed{seed}_n{n}_k{kappa}",
        n=n,
        m=0,
        p=0,
        kappa=kappa,
        objective={"quadratic": {"Q": Q.tolist(), "c": (-(A.T @ b)).tolist(), "const": 0.5 * float(b @ b)}},
        constraints=[],
        generator={
            "type": "sparse_lsq",
            "seed": seed,
            "n": n,
            "kappa": kappa,
            "params": params,
            "x_true": x_true.tolist(),
        },
    )


GENERATORS = {"portfolio": generate_portfolio, "sparse_lsq": generate_sparse_lsq}
