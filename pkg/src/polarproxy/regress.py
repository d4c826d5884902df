"""OLS with region fixed effects, VIF and auxiliary omitted-variable checks.

Estimation goes through a Householder QR factorization of the
column-equilibrated design, never the normal equations. Standard errors are
classical (homoskedastic) ones.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy import linalg, special

from .errors import (
    BaselineLevelAbsent,
    EmptyAfterFiltering,
    InvalidConfig,
    MissingColumn,
    RankDeficient,
)
from .provinces import REGIONS

DEFAULT_REGRESSORS = (
    "NRP_vs_RP", "NRP_vs_NRP", "num_mosques", "gdp_per_capita",
    "economic_sophistication_proxy", "daynight", "is_summer",
)
OUTCOMES = ("h_unweighted", "h_religiosity", "h_political")
INTERCEPT = "const"
RANK_TOL = 1e-10
VIF_R2_CEILING = 1.0 - 1e-12
STAR_LEVELS = ((0.01, "***"), (0.05, "**"), (0.1, "*"))


@dataclass(frozen=True)
class ModelSpec:
    """One regression model.

    ``categorical`` names a column expanded into L-1 dummies omitting
    ``baseline``; set it to ``None`` for no fixed effects. ``extra`` is the
    column appended by :func:`auxiliary_ovb`. With ``time_effects`` the
    ``year`` column is also dummy-encoded (earliest year as baseline), for
    pooled multi-year tables.
    """

    outcome: str
    regressors: tuple = DEFAULT_REGRESSORS
    categorical: Optional[str] = "region"
    baseline: str = "central"
    include_intercept: bool = True
    extra: Optional[str] = None
    time_effects: bool = False
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "regressors", tuple(self.regressors))
        if self.outcome in self.regressors:
            raise InvalidConfig(f"outcome {self.outcome!r} is also a regressor")
        if len(set(self.regressors)) != len(self.regressors):
            raise InvalidConfig(f"repeated regressor in {self.regressors}")

    @property
    def label(self):
        return self.name or self.outcome


def standard_models(years=(2018, 2019), baseline="central"):
    """The six headline models: three entropy outcomes per year."""
    return [
        ModelSpec(outcome=o, baseline=baseline, name=f"{o}_{y}")
        for y in years for o in OUTCOMES
    ]


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    X: np.ndarray
    y: np.ndarray
    columns: tuple
    outcome: str = "y"
    has_intercept: bool = True
    dummy_columns: tuple = ()
    dummy_groups: tuple = ()  # ((categorical, (column, ...)), ...)
    row_index: Optional[np.ndarray] = None
    n_dropped: int = 0
    baseline: Optional[str] = None

    @property
    def N(self):
        return self.X.shape[0]

    @property
    def k(self):
        return self.X.shape[1]

    def column(self, name):
        return self.X[:, self.columns.index(name)]


def _levels(values, categorical):
    present = sorted(set(values))
    if categorical == "region":
        known = [r for r in REGIONS if r in present]
        return known + [v for v in present if v not in REGIONS]
    return present


def build_design(table, spec: ModelSpec, require: Sequence[str] = ()) -> DesignMatrix:
    """Design matrix for ``spec`` after listwise deletion.

    Column order is intercept, continuous regressors in spec order,
    categorical dummies in level order, then year dummies. Only columns the
    spec uses (plus ``require``) take part in the missing-value filter.
    """
    frame = table.frame if hasattr(table, "frame") else table
    extra = (spec.extra,) if spec.extra else ()
    cats = []
    if spec.categorical:
        cats.append(spec.categorical)
    if spec.time_effects:
        cats.append("year")
    used = [spec.outcome, *spec.regressors, *extra, *cats, *require]
    missing = [c for c in dict.fromkeys(used) if c not in frame.columns]
    if missing:
        raise MissingColumn(f"column(s) {missing} not in table")
    sub = frame[list(dict.fromkeys(used))]
    keep = sub.notna().all(axis=1).to_numpy()
    n_dropped = int((~keep).sum())
    if not keep.any():
        raise EmptyAfterFiltering(
            f"no complete rows for {spec.label}; {n_dropped} rows dropped")
    sub = sub[keep]
    idx = np.flatnonzero(keep)

    names, cols = [], []
    n = len(sub)
    if spec.include_intercept:
        names.append(INTERCEPT)
        cols.append(np.ones(n))
    for c in (*spec.regressors, *extra):
        names.append(c)
        cols.append(sub[c].to_numpy(dtype=float))
    dummies = []
    groups = []
    if spec.categorical:
        vals = sub[spec.categorical].astype(str).to_numpy()
        levels = _levels(vals, spec.categorical)
        if spec.baseline not in levels:
            raise BaselineLevelAbsent(
                f"baseline {spec.baseline!r} not among {spec.categorical} "
                f"levels {levels}")
        for lev in levels:
            if lev == spec.baseline:
                continue
            name = f"{spec.categorical}_{lev}"
            names.append(name)
            dummies.append(name)
            cols.append((vals == lev).astype(float))
        groups.append((spec.categorical, tuple(dummies)))
    if spec.time_effects:
        yrs = sub["year"].to_numpy()
        for yr in sorted(set(yrs.tolist()))[1:]:
            name = f"year_{int(yr)}"
            names.append(name)
            dummies.append(name)
            cols.append((yrs == yr).astype(float))
        groups.append(("year", tuple(n for n in dummies if n.startswith("year_"))))
    if len(set(names)) != len(names):
        raise InvalidConfig(f"duplicate design column names {names}")
    X = np.column_stack(cols) if cols else np.empty((n, 0))
    y = sub[spec.outcome].to_numpy(dtype=float)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise EmptyAfterFiltering("design contains non-finite values")
    return DesignMatrix(
        X=X, y=y, columns=tuple(names), outcome=spec.outcome,
        has_intercept=spec.include_intercept, dummy_columns=tuple(dummies),
        dummy_groups=tuple((g, b) for g, b in groups if b), row_index=idx, n_dropped=n_dropped,
        baseline=spec.baseline if spec.categorical else None,
    )


# -- least squares core --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _QR:
    R: np.ndarray
    Q: np.ndarray
    scale: np.ndarray


def _factor(X: np.ndarray, names: Sequence[str]) -> _QR:
    scale = np.sqrt(np.einsum("ij,ij->j", X, X))
    zero = [names[j] for j in np.flatnonzero(scale == 0.0)]
    if zero:
        raise RankDeficient(f"all-zero column(s) {zero}", columns=zero)
    Xs = X / scale
    Q, R = np.linalg.qr(Xs, mode="reduced")
    d = np.abs(np.diag(R))
    bad = np.flatnonzero(d <= RANK_TOL * d.max())
    if bad.size:
        involved = []
        good = [j for j in range(X.shape[1]) if j not in set(bad)]
        for j in bad:
            prev = [i for i in good if i < j]
            coef = np.linalg.lstsq(Xs[:, prev], Xs[:, j], rcond=None)[0] if prev else []
            big = max((abs(c) for c in coef), default=0.0)
            for i, c in zip(prev, coef):
                if abs(c) > 1e-6 * big and names[i] not in involved:
                    involved.append(names[i])
            involved.append(names[j])
        raise RankDeficient(
            f"design is rank deficient; dependent columns {involved}",
            columns=involved)
    return _QR(R=R, Q=Q, scale=scale)


def _solve(qr: _QR, y: np.ndarray) -> np.ndarray:
    return linalg.solve_triangular(qr.R, qr.Q.T @ y) / qr.scale


def _xtx_inv(qr: _QR) -> np.ndarray:
    Rinv = linalg.solve_triangular(qr.R, np.eye(qr.R.shape[0]))
    return (Rinv @ Rinv.T) / np.outer(qr.scale, qr.scale)


def t_pvalue(t, df):
    """Two-sided p-value of Student's t via the regularized incomplete beta."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = df / (df + t * t)
    return special.betainc(df / 2.0, 0.5, x)


def f_pvalue(f, df1, df2):
    """Upper-tail probability of the F distribution."""
    if not np.isfinite(f):
        return 0.0 if f > 0 else float("nan")
    return float(special.betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f)))


def stars(p) -> str:
    if p is None or not np.isfinite(p):
        return ""
    for level, mark in STAR_LEVELS:
        if p < level:
            return mark
    return ""


@dataclass(frozen=True, eq=False)
class RegressionResult:
    names: tuple
    beta: np.ndarray
    se: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray
    rss: float
    tss: float
    r2: float
    adj_r2: float
    f_stat: float
    f_pvalue: float
    N: int
    k: int
    has_intercept: bool = True
    outcome: str = "y"
    dummy_columns: tuple = ()
    n_dropped: int = 0
    baseline: Optional[str] = None
    label: str = ""

    @property
    def df_resid(self) -> int:
        return self.N - self.k

    @property
    def sigma2(self) -> float:
        return self.rss / self.df_resid

    def __getitem__(self, name):
        return self.beta[self.names.index(name)]

    def coef(self, name):
        """``(beta, se, t, p)`` for one column."""
        i = self.names.index(name)
        return self.beta[i], self.se[i], self.t_stats[i], self.p_values[i]

    def conf_int(self, alpha: float = 0.05) -> np.ndarray:
        q = special.stdtrit(self.df_resid, 1.0 - alpha / 2.0)
        return np.column_stack([self.beta - q * self.se, self.beta + q * self.se])

    def as_records(self):
        return [
            {"name": n, "coef": float(b), "se": float(s), "t": float(t),
             "p": float(p), "stars": stars(p)}
            for n, b, s, t, p in zip(self.names, self.beta, self.se,
                                     self.t_stats, self.p_values)
        ]

    def summary_dict(self):
        return {
            "label": self.label, "outcome": self.outcome,
            "observations": self.N, "k": self.k, "dropped_rows": self.n_dropped,
            "r2": self.r2, "adj_r2": self.adj_r2,
            "f_stat": self.f_stat, "f_pvalue": self.f_pvalue,
            "rss": self.rss, "tss": self.tss, "baseline": self.baseline,
            "coefficients": self.as_records(),
        }


def ols_fit(d: DesignMatrix, label: str = "") -> RegressionResult:
    """Least-squares fit of ``d.y`` on ``d.X``.

    Raises
    ------
    RankDeficient
        A diagonal entry of the triangular factor falls below
        ``1e-10 * max|R_jj|``; the exception names the dependent columns.
    """
    N, k = d.X.shape
    if N <= k:
        raise RankDeficient(f"N={N} observations for k={k} columns",
                            columns=d.columns)
    qr = _factor(d.X, d.columns)
    beta = _solve(qr, d.y)
    fitted = d.X @ beta
    resid = d.y - fitted
    rss = math.fsum(resid * resid)
    if d.has_intercept:
        dev = d.y - d.y.mean()
        tss = math.fsum(dev * dev)
        df_model = k - 1
    else:
        tss = math.fsum(d.y * d.y)
        df_model = k
    df_resid = N - k
    sigma2 = rss / df_resid
    se = np.sqrt(sigma2 * np.diag(_xtx_inv(qr)))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = beta / se
        r2 = 1.0 - rss / tss if tss > 0 else float("nan")
        adj = 1.0 - (1.0 - r2) * (N - 1) / df_resid if d.has_intercept \
            else 1.0 - (1.0 - r2) * N / df_resid
        if df_model > 0:
            f = ((tss - rss) / df_model) / (rss / df_resid) if rss > 0 else math.inf
            fp = f_pvalue(f, df_model, df_resid)
        else:
            f, fp = float("nan"), float("nan")
    return RegressionResult(
        names=d.columns, beta=beta, se=se, t_stats=t,
        p_values=t_pvalue(t, df_resid), residuals=resid, fitted=fitted,
        rss=rss, tss=tss, r2=float(r2), adj_r2=float(adj),
        f_stat=float(f), f_pvalue=fp, N=N, k=k,
        has_intercept=d.has_intercept, outcome=d.outcome,
        dummy_columns=d.dummy_columns, n_dropped=d.n_dropped,
        baseline=d.baseline, label=label,
    )


def fit(table, spec: ModelSpec) -> RegressionResult:
    return ols_fit(build_design(table, spec), label=spec.label)


# -- VIF -----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VifReport:
    names: tuple
    values: np.ndarray
    groups: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(zip(self.names, self.values))

    def __getitem__(self, name):
        return float(self.values[self.names.index(name)])

    @property
    def infinite(self):
        return tuple(n for n, v in self if not np.isfinite(v))

    def as_dict(self):
        return {n: float(v) for n, v in self}


def _check_vif_design(d: DesignMatrix):
    if not d.has_intercept or INTERCEPT not in d.columns:
        raise InvalidConfig("VIF needs a design with an intercept")
    if len(d.columns) - 1 < 2:
        raise InvalidConfig("VIF needs at least two non-intercept regressors")


def _group_vif(block: Sequence[str], corr: np.ndarray, names: Sequence[str]):
    # generalized VIF: det(R11) det(R22) / det(R)
    idx = [names.index(c) for c in block]
    rest = [i for i in range(len(names)) if i not in idx]
    sign, logdet = np.linalg.slogdet(corr)
    if sign <= 0:
        return math.inf
    s1, l1 = np.linalg.slogdet(corr[np.ix_(idx, idx)])
    s2, l2 = np.linalg.slogdet(corr[np.ix_(rest, rest)]) if rest else (1.0, 0.0)
    return float(np.exp(l1 + l2 - logdet))


def vif(d: DesignMatrix) -> VifReport:
    """Variance inflation factors from auxiliary regressions.

    Each non-intercept column is regressed on every other column (intercept
    included). ``R_j^2 >= 1 - 1e-12``, or a rank-deficient auxiliary design,
    is reported as ``inf``. Dummy columns from the categorical encoding also
    get a joint generalized VIF in ``groups``.
    """
    _check_vif_design(d)
    names = [c for c in d.columns if c != INTERCEPT]
    out = []
    for name in names:
        j = d.columns.index(name)
        target = d.X[:, j]
        others = [i for i in range(d.k) if i != j]
        try:
            qr = _factor(d.X[:, others], [d.columns[i] for i in others])
        except RankDeficient:
            out.append(math.inf)
            continue
        b = _solve(qr, target)
        resid = target - d.X[:, others] @ b
        dev = target - target.mean()
        tss = math.fsum(dev * dev)
        if tss == 0.0:
            out.append(math.inf)
            continue
        r2 = 1.0 - math.fsum(resid * resid) / tss
        out.append(math.inf if r2 >= VIF_R2_CEILING else 1.0 / (1.0 - r2))
    groups = {}
    if d.dummy_groups:
        corr = _corr(d, names)
        for group, block in d.dummy_groups:
            groups[group] = (_group_vif(block, corr, names)
                             if corr is not None else math.inf)
    return VifReport(names=tuple(names), values=np.array(out), groups=groups)


def _corr(d: DesignMatrix, names):
    Z = np.column_stack([d.column(n) for n in names])
    Z = Z - Z.mean(axis=0)
    sd = np.sqrt(np.einsum("ij,ij->j", Z, Z))
    if np.any(sd == 0):
        return None
    Z = Z / sd
    return Z.T @ Z


def vif_correlation(d: DesignMatrix) -> VifReport:
    """VIF as the diagonal of the inverse correlation matrix.

    Independent of :func:`vif`; the two agree for any full-rank design with
    an intercept.
    """
    _check_vif_design(d)
    names = [c for c in d.columns if c != INTERCEPT]
    corr = _corr(d, names)
    if corr is None or np.linalg.cond(corr) > 1e14:
        return VifReport(names=tuple(names), values=np.full(len(names), math.inf))
    return VifReport(names=tuple(names), values=np.diag(np.linalg.inv(corr)).copy())


# -- omitted-variable check --------------------------------------------------

@dataclass(frozen=True, eq=False)
class OvbComparison:
    base: RegressionResult
    auxiliary: RegressionResult
    added: str

    @property
    def deltas(self) -> dict:
        """Auxiliary minus base coefficient, for columns in both models."""
        return {n: float(self.auxiliary[n] - self.base[n]) for n in self.base.names}

    @property
    def shifts_in_se(self) -> dict:
        """Coefficient change measured in base-model standard errors."""
        return {n: float((self.auxiliary[n] - self.base[n]) / s)
                for n, s in zip(self.base.names, self.base.se)}

    def as_dict(self):
        return {
            "added": self.added,
            "base": self.base.summary_dict(),
            "auxiliary": self.auxiliary.summary_dict(),
            "deltas": self.deltas,
        }


def auxiliary_ovb(table, spec: ModelSpec, extra: Optional[str] = None) -> OvbComparison:
    """Refit ``spec`` with an extra regressor (poverty rate by default).

    Both fits use the same rows: listwise deletion covers the extra column in
    the base model too, so coefficient deltas reflect only the added term.
    """
    extra = extra or spec.extra or "poverty_rate"
    base_spec = replace(spec, extra=None)
    aux_spec = replace(spec, extra=extra, name=spec.name and f"{spec.name}+{extra}")
    base = ols_fit(build_design(table, base_spec, require=(extra,)),
                   label=base_spec.label)
    aux = ols_fit(build_design(table, aux_spec), label=aux_spec.label)
    return OvbComparison(base=base, auxiliary=aux, added=extra)


def pool_tables(tables) -> pd.DataFrame:
    """Stack per-year analysis tables for a pooled fit with ``time_effects``."""
    frames = [t.frame if hasattr(t, "frame") else t for t in tables]
    return pd.concat(frames, ignore_index=True)
