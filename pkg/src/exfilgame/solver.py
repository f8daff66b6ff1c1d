"""Nash equilibria of the attacker/defender bimatrix game.

Lemke-Howson is the workhorse; support enumeration is an exhaustive solver
for small games and serves as a cross-check.  Every equilibrium handed out
is certified by best-response regret.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .analytics import EconomicParams
from .game import PayoffMatrices, build_payoffs, strategy_symmetries
from .model import DEFAULT_MAX_DEFENDER_STRATEGIES, NetworkSpec, build_strategy_spaces

log = logging.getLogger(__name__)

MAX_PIVOTS = 1_000_000
REGRET_TOL = 1e-8
DEDUP_TOL = 1e-6
DEFAULT_MAX_DIM = 12

_PIVOT_EPS = 1e-11
_RATIO_TIE = 1e-10
_LEX_TIE = 1e-9


class SolverError(RuntimeError):
    pass


class PivotLimitError(SolverError):
    def __init__(self, label: int, limit: int) -> None:
        super().__init__(f"Lemke-Howson from label {label} exceeded {limit} pivots")
        self.label = label


@dataclass(frozen=True)
class RegretReport:
    attacker_regret: float
    defender_regret: float
    tolerance: float

    @property
    def epsilon(self) -> float:
        return max(self.attacker_regret, self.defender_regret, 0.0)

    @property
    def passed(self) -> bool:
        return self.attacker_regret <= self.tolerance and self.defender_regret <= self.tolerance


@dataclass(frozen=True)
class MixedEquilibrium:
    attacker_mix: np.ndarray
    defender_mix: np.ndarray
    attacker_value: float
    defender_cost_value: float
    epsilon: float
    labels: tuple[int, ...] = field(default=(), compare=False)

    def support(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return tuple(np.flatnonzero(self.attacker_mix).tolist()), tuple(np.flatnonzero(self.defender_mix).tolist())

    def close_to(self, other: MixedEquilibrium, tol: float = DEDUP_TOL) -> bool:
        return bool(
            np.max(np.abs(self.attacker_mix - other.attacker_mix)) <= tol
            and np.max(np.abs(self.defender_mix - other.defender_mix)) <= tol
        )


def _regrets(matrices: PayoffMatrices, x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    row_values = matrices.attacker_reward @ y
    col_costs = x @ matrices.defender_cost
    att = float(x @ row_values)
    cost = float(col_costs @ y)
    return att, cost, float(row_values.max() - att), float(cost - col_costs.min())


def verify_equilibrium(matrices: PayoffMatrices, eq: MixedEquilibrium, tolerance: float = REGRET_TOL) -> RegretReport:
    """Regret of each player against its best pure deviation."""
    x = np.asarray(eq.attacker_mix, dtype=float)
    y = np.asarray(eq.defender_mix, dtype=float)
    if x.shape != (matrices.shape[0],) or y.shape != (matrices.shape[1],):
        raise ValueError("mixture dimensions do not match the payoff matrices")
    _, _, att_regret, def_regret = _regrets(matrices, x, y)
    return RegretReport(att_regret, def_regret, tolerance)


def make_equilibrium(matrices: PayoffMatrices, x, y, labels: Sequence[int] = ()) -> MixedEquilibrium:
    """Normalize two nonnegative weight vectors and attach values and regret."""
    x = _normalize(np.asarray(x, dtype=float))
    y = _normalize(np.asarray(y, dtype=float))
    att, cost, att_regret, def_regret = _regrets(matrices, x, y)
    eps = max(att_regret, def_regret, 0.0)
    x.setflags(write=False)
    y.setflags(write=False)
    return MixedEquilibrium(x, y, att, cost, eps, tuple(labels))


def _normalize(v: np.ndarray) -> np.ndarray:
    v = np.where(v > 0, v, 0.0)
    total = v.sum()
    if not total > 0:
        raise SolverError("degenerate mixture with zero total weight")
    return v / total


def pure_equilibria(matrices: PayoffMatrices) -> list[tuple[int, int]]:
    """Cells that are mutual best responses, ties included, in row-major order."""
    a, c = matrices.attacker_reward, matrices.defender_cost
    row_best = a >= a.max(axis=0, keepdims=True)
    col_best = c <= c.min(axis=1, keepdims=True)
    return [(int(i), int(j)) for i, j in np.argwhere(row_best & col_best)]


def _positive(payoff: np.ndarray) -> np.ndarray:
    """Affine map into [1, 2] in extended precision; equilibria are invariant under it."""
    payoff = np.asarray(payoff, dtype=np.longdouble)
    lo, hi = payoff.min(), payoff.max()
    span = hi - lo
    return (payoff - lo) / (span if span > 0 else 1) + 1


class _Tableau:
    """The polytope {z >= 0 : G z <= 1} in slack form, held implicitly by its basis.

    Variables ``0..V-1`` are structural, ``V + r`` is the slack of row ``r``.
    The basis matrix is identity columns plus at most ``min(R, V)`` columns of
    ``G``, so every solve reduces to a k-by-k system on the rows whose slack
    has left the basis.  Values are recomputed from scratch after each pivot,
    so rounding does not accumulate along long paths.
    """

    def __init__(self, g_exact: np.ndarray) -> None:
        self.g_exact = g_exact
        self.g = np.asarray(g_exact, dtype=float)
        self.rows, self.vars = self.g.shape
        self.basis = np.arange(self.vars, self.vars + self.rows)
        self._refresh()

    def _refresh(self) -> None:
        v = self.vars
        structural = self.basis < v
        self.px = np.flatnonzero(structural)
        self.xvars = self.basis[self.px]
        self.ps = np.flatnonzero(~structural)
        self.srows = self.basis[self.ps] - v
        free = np.ones(self.rows, dtype=bool)
        free[self.srows] = False
        self.nrows = np.flatnonzero(free)
        if len(self.px):
            self.k_exact = self.g_exact[np.ix_(self.nrows, self.xvars)]
            self.kinv = np.linalg.inv(self.k_exact.astype(float))
            self.gsx = self.g[np.ix_(self.srows, self.xvars)]
        self.values = self.solve(np.ones(self.rows, dtype=np.longdouble))

    def _solve_small(self, rhs: np.ndarray, refine_steps: int) -> np.ndarray:
        # residual correction in extended precision makes the error independent of cond(K)
        w = (self.kinv @ rhs.astype(float)).astype(np.longdouble)
        for _ in range(refine_steps):
            w += (self.kinv @ (rhs - self.k_exact @ w).astype(float)).astype(np.longdouble)
        return w

    def solve(self, a: np.ndarray, refine_steps: int = 2) -> np.ndarray:
        """Basis-ordered solution of ``M w = a``; ``a`` may be extended precision."""
        w = np.empty(self.rows)
        if len(self.px):
            wx = self._solve_small(np.asarray(a[self.nrows], dtype=np.longdouble), refine_steps).astype(float)
            w[self.px] = wx
            w[self.ps] = np.asarray(a[self.srows], dtype=float) - self.gsx @ wx
        else:
            w[self.ps] = np.asarray(a[self.srows], dtype=float)
        return w

    def column(self, var: int) -> np.ndarray:
        if var < self.vars:
            return self.solve(self.g_exact[:, var])
        e = np.zeros(self.rows)
        e[var - self.vars] = 1.0
        return self.solve(e)

    def inverse_rows(self, positions: np.ndarray) -> np.ndarray:
        """Rows of the inverse basis matrix for the given basis positions."""
        out = np.zeros((len(positions), self.rows))
        t_of = {int(p): t for t, p in enumerate(self.px)}
        s_of = {int(p): t for t, p in enumerate(self.ps)}
        for r, p in enumerate(positions):
            p = int(p)
            if p in t_of:
                out[r, self.nrows] = self.kinv[t_of[p]]
            else:
                t = s_of[p]
                out[r, self.srows[t]] = 1.0
                if len(self.px):
                    out[r, self.nrows] = -self.gsx[t] @ self.kinv
        return out

    def pivot(self, enter: int) -> int:
        """Bring ``enter`` into the basis by the lexicographic minimum-ratio rule; return the leaving variable."""
        d = self.column(enter)
        cand = np.flatnonzero(d > _PIVOT_EPS)
        if not len(cand):
            raise SolverError(f"unbounded pivot column for variable {enter}")
        ratios = np.maximum(self.values[cand], 0.0) / d[cand]
        best = ratios.min()
        tied = cand[ratios <= best + _RATIO_TIE * max(1.0, best)]
        if len(tied) > 1:
            lex = self.inverse_rows(tied) / d[tied, None]
            for c in np.flatnonzero(np.any(lex != 0.0, axis=0)):
                col = lex[:, c]
                low = col.min()
                keep = col <= low + _LEX_TIE * max(1.0, abs(low))
                tied, lex = tied[keep], lex[keep]
                if len(tied) == 1:
                    break
        pos = int(tied[0])
        leaving = int(self.basis[pos])
        self.basis[pos] = enter
        self._refresh()
        return leaving

    def structural_values(self) -> np.ndarray:
        """Values of the basic structural variables; zero for the rest."""
        z = np.zeros(self.vars)
        if len(self.px):
            rhs = np.ones(len(self.nrows), dtype=np.longdouble)
            z[self.xvars] = self._solve_small(rhs, refine_steps=4).astype(float)
        return z


def lemke_howson(matrices: PayoffMatrices, initial_label: int = 0, max_pivots: int = MAX_PIVOTS) -> MixedEquilibrium:
    """One equilibrium by complementary pivoting from the artificial equilibrium.

    Labels ``0..m-1`` are attacker rows and ``m..m+n-1`` defender columns.
    Degenerate games are handled by the lexicographic ratio test, so the path
    is finite for every label.  Raises :class:`PivotLimitError` if the path
    is longer than ``max_pivots``.
    """
    m, n = matrices.shape
    if not 0 <= initial_label < m + n:
        raise ValueError(f"initial label must be in [0, {m + n}), got {initial_label}")
    # attacker polytope: rows are defender columns; defender polytope: rows are attacker rows
    p_tab = _Tableau(_positive(-matrices.defender_cost).T)
    q_tab = _Tableau(_positive(matrices.attacker_reward))

    k0 = initial_label
    tab, enter = (p_tab, k0) if k0 < m else (q_tab, k0 - m)
    for _ in range(max_pivots):
        leaving = tab.pivot(enter)
        if tab is p_tab:
            label = leaving
        else:
            label = m + leaving if leaving < n else leaving - n
        if label == k0:
            break
        if tab is p_tab:
            tab, enter = q_tab, (label - m if label >= m else n + label)
        else:
            tab, enter = p_tab, label
    else:
        raise PivotLimitError(k0, max_pivots)

    return make_equilibrium(matrices, p_tab.structural_values(), q_tab.structural_values(), (k0,))


def _indifference(sub: np.ndarray) -> np.ndarray | None:
    """Weights w >= 0 summing to 1 with ``sub @ w`` constant; ``None`` if singular or negative."""
    k = sub.shape[0]
    lhs = np.zeros((k + 1, k + 1))
    lhs[:k, :k] = sub
    lhs[:k, k] = -1.0
    lhs[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError:
        return None
    w = sol[:k]
    if not np.all(np.isfinite(w)) or np.any(w < -1e-12):
        return None
    return w


def support_enumeration(matrices: PayoffMatrices, max_dim: int = DEFAULT_MAX_DIM) -> list[MixedEquilibrium]:
    """All equilibria with equal-size supports, found via the indifference systems."""
    m, n = matrices.shape
    if m > max_dim or n > max_dim:
        raise SolverError(
            f"support enumeration limited to {max_dim}x{max_dim} games, got {m}x{n}; use lemke_howson"
        )
    a = matrices.attacker_reward
    u = -matrices.defender_cost
    tol_a = 1e-9 * max(1.0, float(np.abs(a).max()))
    tol_u = 1e-9 * max(1.0, float(np.abs(u).max()))
    found: list[MixedEquilibrium] = []
    for k in range(1, min(m, n) + 1):
        for rows in itertools.combinations(range(m), k):
            ri = list(rows)
            for cols in itertools.combinations(range(n), k):
                ci = list(cols)
                wy = _indifference(a[np.ix_(ri, ci)])
                if wy is None:
                    continue
                wx = _indifference(u[np.ix_(ri, ci)].T)
                if wx is None:
                    continue
                x = np.zeros(m)
                y = np.zeros(n)
                x[ri] = np.maximum(wx, 0.0)
                y[ci] = np.maximum(wy, 0.0)
                row_values = a @ y
                col_values = x @ u
                if row_values.max() > x @ row_values + tol_a or col_values.max() > col_values @ y + tol_u:
                    continue
                eq = make_equilibrium(matrices, x, y)
                if eq.epsilon <= REGRET_TOL and not any(eq.close_to(f) for f in found):
                    found.append(eq)
    return found


def dedupe(equilibria: Iterable[MixedEquilibrium], tol: float = DEDUP_TOL) -> list[MixedEquilibrium]:
    """Merge equilibria within ``tol`` per component, keeping the first and pooling labels."""
    kept: list[MixedEquilibrium] = []
    for eq in equilibria:
        for k, prior in enumerate(kept):
            if eq.close_to(prior, tol):
                merged = tuple(sorted(set(prior.labels) | set(eq.labels)))
                kept[k] = MixedEquilibrium(
                    prior.attacker_mix, prior.defender_mix, prior.attacker_value,
                    prior.defender_cost_value, prior.epsilon, merged,
                )
                break
        else:
            kept.append(eq)
    return kept


def canonical_equilibrium(equilibria: Sequence[MixedEquilibrium]) -> MixedEquilibrium:
    """Minimal defender cost, then minimal attacker reward, then lexicographically smallest mixture."""
    if not equilibria:
        raise SolverError("no equilibria to choose from")

    def near_min(pool: list[MixedEquilibrium], key) -> list[MixedEquilibrium]:
        low = min(key(e) for e in pool)
        return [e for e in pool if key(e) <= low + 1e-9 * max(1.0, abs(low))]

    pool = near_min(list(equilibria), lambda e: e.defender_cost_value)
    pool = near_min(pool, lambda e: e.attacker_value)
    return min(pool, key=lambda e: (tuple(e.attacker_mix), tuple(e.defender_mix)))


def _orbits(size: int, perms: Sequence[np.ndarray]) -> np.ndarray:
    """Orbit id of every index under the group generated by ``perms`` (ids ordered by smallest member)."""
    parent = list(range(size))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for perm in perms:
        for i, j in enumerate(perm):
            a, b = find(i), find(int(j))
            if a != b:
                parent[max(a, b)] = min(a, b)
    roots = [find(i) for i in range(size)]
    ids = {r: k for k, r in enumerate(sorted(set(roots)))}
    return np.array([ids[r] for r in roots])


def symmetric_equilibria(
    matrices: PayoffMatrices,
    symmetries: Sequence[tuple[np.ndarray, np.ndarray]],
    labels: Iterable[int] | None = None,
) -> list[MixedEquilibrium]:
    """Equilibria invariant under the given row/column permutations.

    Strategies are grouped into orbits and each orbit is played uniformly.
    Against an orbit-uniform opponent, every member of an orbit earns the
    orbit's payoff in the quotient game.  Equilibria of the quotient game
    therefore lift to symmetric equilibria of the full game.
    """
    m, n = matrices.shape
    row_orbit = _orbits(m, [r for r, _ in symmetries])
    col_orbit = _orbits(n, [c for _, c in symmetries])
    mo, no = row_orbit.max() + 1, col_orbit.max() + 1
    row_sizes = np.bincount(row_orbit, minlength=mo)
    col_sizes = np.bincount(col_orbit, minlength=no)
    row_rep = np.array([np.flatnonzero(row_orbit == k)[0] for k in range(mo)])
    col_rep = np.array([np.flatnonzero(col_orbit == k)[0] for k in range(no)])

    # attacker averages over the column orbit, defender over the row orbit
    col_avg = np.zeros((n, no))
    col_avg[np.arange(n), col_orbit] = 1.0 / col_sizes[col_orbit]
    row_avg = np.zeros((mo, m))
    row_avg[row_orbit, np.arange(m)] = 1.0 / row_sizes[row_orbit]
    reduced = PayoffMatrices(
        matrices.attacker_reward[row_rep] @ col_avg,
        row_avg @ matrices.defender_cost[:, col_rep],
    )
    quotient = solve_matrices(reduced, labels=labels)
    lifted = []
    for eq in quotient.equilibria:
        x = eq.attacker_mix[row_orbit] / row_sizes[row_orbit]
        y = eq.defender_mix[col_orbit] / col_sizes[col_orbit]
        lifted.append(make_equilibrium(matrices, x, y, eq.labels))
    return [eq for eq in lifted if eq.epsilon <= REGRET_TOL]


@dataclass(frozen=True)
class ScenarioSolution:
    matrices: PayoffMatrices
    pure: list[tuple[int, int]]
    equilibria: list[MixedEquilibrium]
    canonical: MixedEquilibrium
    failures: dict[int, str] = field(default_factory=dict)
    symmetric: list[MixedEquilibrium] = field(default_factory=list)


def solve_matrices(
    matrices: PayoffMatrices,
    solver: str = "lemke-howson",
    labels: Iterable[int] | None = None,
    symmetries: Sequence[tuple[np.ndarray, np.ndarray]] = (),
) -> ScenarioSolution:
    """Pure cells plus Lemke-Howson from every requested label, deduplicated and certified.

    ``solver="support-enum"`` replaces the pivoting runs with full support
    enumeration; ``"auto"`` picks it when both dimensions are within
    :data:`DEFAULT_MAX_DIM`.  With ``symmetries`` the symmetric equilibria
    are computed as well, and the canonical one is picked among them.
    """
    m, n = matrices.shape
    if solver == "auto":
        solver = "support-enum" if max(m, n) <= DEFAULT_MAX_DIM else "lemke-howson"
    if solver not in ("lemke-howson", "support-enum"):
        raise ValueError(f"unknown solver {solver!r}")

    pure = pure_equilibria(matrices)
    found = []
    for i, j in pure:
        x = np.zeros(m)
        y = np.zeros(n)
        x[i] = 1.0
        y[j] = 1.0
        found.append(make_equilibrium(matrices, x, y))

    failures: dict[int, str] = {}
    if solver == "support-enum":
        found.extend(support_enumeration(matrices))
    else:
        for label in range(m + n) if labels is None else labels:
            try:
                found.append(lemke_howson(matrices, label))
            except SolverError as exc:
                failures[label] = str(exc)
                log.warning("label %d failed: %s", label, exc)

    certified = []
    for eq in found:
        if eq.epsilon <= REGRET_TOL:
            certified.append(eq)
        else:
            log.warning("discarding equilibrium from labels %s with regret %.3g", eq.labels, eq.epsilon)
    symmetric = dedupe(symmetric_equilibria(matrices, symmetries)) if symmetries else []
    equilibria = dedupe(certified + symmetric)
    if not equilibria:
        raise SolverError(f"no certified equilibrium found; failures: {failures}")
    canonical = canonical_equilibrium(symmetric or equilibria)
    return ScenarioSolution(matrices, pure, equilibria, canonical, failures, symmetric)


def solve_scenario(
    network: NetworkSpec,
    econ: EconomicParams,
    durations: Sequence[int],
    solver: str = "lemke-howson",
    labels: Iterable[int] | None = None,
    max_defender_strategies: int = DEFAULT_MAX_DEFENDER_STRATEGIES,
    use_symmetry: bool = True,
) -> ScenarioSolution:
    """Build the game for a scenario and solve it.

    When the network has automorphisms the canonical equilibrium is taken
    from the symmetric ones.
    """
    attacker, defender = build_strategy_spaces(network, durations, max_defender_strategies)
    matrices = build_payoffs(network, econ, attacker, defender)
    symmetries = strategy_symmetries(network, matrices) if use_symmetry else []
    return solve_matrices(matrices, solver=solver, labels=labels, symmetries=symmetries)
