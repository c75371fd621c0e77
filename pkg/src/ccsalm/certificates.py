"""Stationarity certificates for cardinality-constrained programs.

``ccm_residual`` measures Mordukhovich-type (CC-M) stationarity of a point
by fitting multipliers; ``ccs_from_ccm`` lifts a CC-M point to a strongly
stationary pair ``(x, z)`` of the relaxation; ``sequence_diagnostics``
checks a finite multiplier sequence against the approximate (CC-AM) and
positive approximate (CC-PAM) sequential conditions.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .nnls import nnls
from .problem import DEFAULT_TOL_ACTIVE, CcopProblem, IndexSets, classify_indices

__all__ = [
    "Certificate",
    "CcmResidualReport",
    "SequenceDiagnostics",
    "Verdict",
    "ccm_residual",
    "ccs_from_ccm",
    "certify",
    "constant_sequence",
    "sequence_diagnostics",
]


class Verdict(str, enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class CcmResidualReport:
    residual: float
    lam: np.ndarray
    mu: np.ndarray
    gam: np.ndarray
    sets: IndexSets


def ccm_residual(
    prob: CcopProblem,
    x,
    tol_active: float = DEFAULT_TOL_ACTIVE,
    tol_feas: float = 1e-6,
) -> CcmResidualReport:
    """Smallest stationarity residual over CC-M admissible multipliers.

    Minimizes ``|grad f + Jg lam + Jh mu + gam|`` with ``lam >= 0``
    supported on the active inequalities and ``gam`` vanishing on the
    support of ``x``.  Rows on the zero set are cancelled exactly by
    ``gam``, leaving a sign-constrained least-squares problem on the
    support rows.
    """
    x = prob.check_x(x)
    sets = classify_indices(prob, x, tol_active)
    g = prob.g(x)
    h = prob.h(x)
    if (
        np.max(g, initial=-np.inf) > tol_feas
        or np.max(np.abs(h), initial=0.0) > tol_feas
        or len(sets.nonzero_x) > prob.kappa
    ):
        warnings.warn(f"{prob.name}: certifying a point that is not feasible", stacklevel=2)

    grad = prob.df(x)
    jg = prob.dg(x)
    jh = prob.dh(x)
    act = list(sets.active_g)
    rows = list(sets.nonzero_x)
    A = np.hstack([jg[np.ix_(rows, act)], jh[rows, :]])
    nonneg = np.r_[np.ones(len(act), dtype=bool), np.zeros(prob.p, dtype=bool)]
    coef, residual = nnls(A, -grad[rows], nonneg=nonneg)

    lam = np.zeros(prob.m)
    lam[act] = coef[: len(act)]
    mu = coef[len(act):]
    gam = np.zeros(prob.n)
    zero = list(sets.zero_x)
    gam[zero] = -(grad + jg @ lam + jh @ mu)[zero]
    return CcmResidualReport(residual=residual, lam=lam, mu=mu, gam=gam, sets=sets)


def ccs_from_ccm(prob: CcopProblem, x, report: CcmResidualReport, kappa=None, tol_opt: float = 1e-6):
    """Auxiliary ``z`` making ``(x, z)`` CC-S stationary, or ``None``.

    Taking ``z`` as the indicator of the zero set keeps ``x * z = 0`` and
    ``z <= 1``, covers every slot where ``gam`` may be nonzero, and meets
    ``sum(z) >= n - kappa`` whenever ``x`` has at most ``kappa`` nonzeros.
    """
    kappa = prob.kappa if kappa is None else kappa
    if report.residual > tol_opt:
        return None
    z = np.zeros(prob.n)
    z[list(report.sets.zero_x)] = 1.0
    if z.sum() < prob.n - kappa:
        return None
    # gam must vanish wherever z does
    if np.any(report.gam[z == 0.0] != 0.0):
        return None
    return z


@dataclass
class SequenceDiagnostics:
    """Per-element measures of a multiplier sequence and the verdicts they imply.

    Arrays are indexed ``[k, component]``; ``tail_start`` marks where the
    window used as a proxy for "sufficiently large k" begins.
    """

    pi: np.ndarray
    lam_scaled: np.ndarray
    mu_scaled: np.ndarray
    gam_scaled: np.ndarray
    lam_prod: np.ndarray
    mu_prod: np.ndarray
    gam_prod: np.ndarray
    distance: np.ndarray
    stationarity: np.ndarray
    tail_start: int
    verdicts: dict[str, Verdict]
    triggered: dict[str, list[int]] = field(default_factory=dict)
    worst_product: dict[str, float | None] = field(default_factory=dict)

    @property
    def ccam(self) -> Verdict:
        if self.verdicts["a"] is Verdict.PASS and self.verdicts["b"] is Verdict.PASS:
            return Verdict.PASS
        return Verdict.INCONCLUSIVE

    @property
    def ccpam(self) -> Verdict:
        if any(self.verdicts[c] is Verdict.FAIL for c in "cde"):
            return Verdict.FAIL
        if all(v is Verdict.PASS for v in self.verdicts.values()):
            return Verdict.PASS
        return Verdict.INCONCLUSIVE

    def summary(self) -> dict:
        return {
            "ccam": self.ccam.value,
            "ccpam": self.ccpam.value,
            "conditions": {k: v.value for k, v in self.verdicts.items()},
            "triggered": {k: list(v) for k, v in self.triggered.items()},
            "worst_product": dict(self.worst_product),
            "final_distance": float(self.distance[-1]),
            "final_stationarity": float(self.stationarity[-1]),
        }


def _as_vec(v, size):
    if v is None:
        return np.zeros(size)
    return np.asarray(v, dtype=float).reshape(size)


def sequence_diagnostics(
    prob: CcopProblem,
    seq,
    x_star,
    tol_active: float = DEFAULT_TOL_ACTIVE,
    beta_tol: float = 1e-3,
    alpha_tol: float = 1e-12,
    tail_window: int | None = None,
    conv_tol: float = 1e-2,
) -> SequenceDiagnostics:
    """Check a finite sequence ``[(x, lam, mu, gam), ...]`` against conditions (a)-(e).

    The limits in the sequential conditions are replaced by a tail window
    (default: last quarter of the sequence, at least 10 elements).  A
    multiplier component is *triggered* when its magnitude relative to
    ``pi_k = |(1, lam, mu, gam)|_inf`` stays at or above ``beta_tol`` on
    the whole tail; triggered components must then have a sign product
    not below ``-alpha_tol`` (products inside ``(-alpha_tol, alpha_tol)``
    are the zero-margin limit case reached at exact stationary points).
    Any triggered product at or below ``-alpha_tol`` is a Fail.

    Condition (a) passes when, over the tail, both the distance to
    ``x_star`` and the stationarity residual end no larger than they
    started and finish below ``conv_tol``.
    """
    if len(seq) == 0:
        raise ValueError("sequence must be nonempty")
    n, m, p = prob.n, prob.m, prob.p
    x_star = prob.check_x(x_star)
    sets = classify_indices(prob, x_star, tol_active)
    K = len(seq)
    if tail_window is None:
        tail_window = max(K // 4, 10)
    tail_start = max(K - tail_window, 0)

    X = np.empty((K, n))
    LAM = np.empty((K, m))
    MU = np.empty((K, p))
    GAM = np.empty((K, n))
    G = np.empty((K, m))
    H = np.empty((K, p))
    stat = np.empty(K)
    for k, item in enumerate(seq):
        x, lam, mu, gam = item
        x = prob.check_x(x)
        X[k], LAM[k], MU[k], GAM[k] = x, _as_vec(lam, m), _as_vec(mu, p), _as_vec(gam, n)
        G[k], H[k] = prob.g(x), prob.h(x)
        r = prob.df(x) + prob.dg(x) @ LAM[k] + prob.dh(x) @ MU[k] + GAM[k]
        stat[k] = np.linalg.norm(r)

    pi = np.maximum.reduce(
        [
            np.ones(K),
            np.max(np.abs(LAM), axis=1, initial=0.0),
            np.max(np.abs(MU), axis=1, initial=0.0),
            np.max(np.abs(GAM), axis=1, initial=0.0),
        ]
    )
    lam_scaled = LAM / pi[:, None]
    mu_scaled = np.abs(MU) / pi[:, None]
    gam_scaled = np.abs(GAM) / pi[:, None]
    lam_prod, mu_prod, gam_prod = LAM * G, MU * H, GAM * X
    dist = np.linalg.norm(X - x_star, axis=1)

    tail = slice(tail_start, K)
    verdicts: dict[str, Verdict] = {}

    def settles(v):
        t = v[tail]
        return t[-1] <= t[0] + 1e-15 and t[-1] <= conv_tol

    verdicts["a"] = Verdict.PASS if settles(dist) and settles(stat) else Verdict.INCONCLUSIVE

    inactive_g = [i for i in range(m) if i not in sets.active_g]
    support = list(sets.nonzero_x)
    ok_b = (
        np.all(LAM[tail] >= -tol_active)
        and np.all(np.abs(LAM[tail][:, inactive_g]) <= tol_active)
        and np.all(np.abs(GAM[tail][:, support]) <= tol_active)
    )
    verdicts["b"] = Verdict.PASS if ok_b else Verdict.INCONCLUSIVE

    triggered: dict[str, list[int]] = {}
    worst: dict[str, float | None] = {}
    for cond, scaled, prod in (("c", lam_scaled, lam_prod), ("d", mu_scaled, mu_prod), ("e", gam_scaled, gam_prod)):
        hot = [int(i) for i in np.flatnonzero(np.all(scaled[tail] >= beta_tol, axis=0))]
        triggered[cond] = hot
        if not hot:
            worst[cond] = None
            verdicts[cond] = Verdict.PASS
            continue
        low = float(np.min(prod[tail][:, hot]))
        worst[cond] = low
        verdicts[cond] = Verdict.FAIL if low <= -alpha_tol else Verdict.PASS

    return SequenceDiagnostics(
        pi=pi,
        lam_scaled=lam_scaled,
        mu_scaled=mu_scaled,
        gam_scaled=gam_scaled,
        lam_prod=lam_prod,
        mu_prod=mu_prod,
        gam_prod=gam_prod,
        distance=dist,
        stationarity=stat,
        tail_start=tail_start,
        verdicts=verdicts,
        triggered=triggered,
        worst_product=worst,
    )


def constant_sequence(x, report: CcmResidualReport, length: int = 10):
    x = np.asarray(x, dtype=float)
    return [(x, report.lam, report.mu, report.gam)] * length


@dataclass
class Certificate:
    ccm: CcmResidualReport
    ccs_pair: np.ndarray | None
    ccam_ok: Verdict
    ccpam_ok: Verdict
    diagnostics: SequenceDiagnostics | None = None

    def is_ccm(self, tol_opt: float) -> bool:
        return self.ccm.residual <= tol_opt

    def to_dict(self) -> dict:
        return {
            "ccm_residual": self.ccm.residual,
            "lam": self.ccm.lam.tolist(),
            "mu": self.ccm.mu.tolist(),
            "gam": self.ccm.gam.tolist(),
            "active_g": list(self.ccm.sets.active_g),
            "zero_x": list(self.ccm.sets.zero_x),
            "nonzero_x": list(self.ccm.sets.nonzero_x),
            "ccs_pair": None if self.ccs_pair is None else self.ccs_pair.tolist(),
            "ccam": self.ccam_ok.value,
            "ccpam": self.ccpam_ok.value,
            "diagnostics": None if self.diagnostics is None else self.diagnostics.summary(),
        }


def certify(
    prob: CcopProblem,
    x,
    seq=None,
    tol_active: float = DEFAULT_TOL_ACTIVE,
    tol_opt: float = 1e-6,
    **diag_kwargs,
) -> Certificate:
    """Full certificate at ``x``.

    Without a sequence, the sequential verdicts are taken on the constant
    sequence carrying the fitted CC-M multipliers.
    """
    x = prob.check_x(x)
    report = ccm_residual(prob, x, tol_active)
    z = ccs_from_ccm(prob, x, report, tol_opt=tol_opt)
    if seq is None:
        seq = constant_sequence(x, report)
    diag = sequence_diagnostics(prob, seq, x, tol_active=tol_active, **diag_kwargs)
    return Certificate(ccm=report, ccs_pair=z, ccam_ok=diag.ccam, ccpam_ok=diag.ccpam, diagnostics=diag)
