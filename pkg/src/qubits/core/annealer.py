"""
QUBO minimization: simulated annealing with restarts, plus an exhaustive
oracle for small models
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from numba import njit

from ..utils.errors import SolverError
from ..utils.helpers import Timer, resolve_threads
from ..utils.logger import LoggerMixin, get_logger
from .qubo import QuboModel, energy

logger = get_logger(__name__)

SCHEDULES = ("geometric",)
MOVE_SETS = ("flip", "reassign")
MAX_SWEEPS = 1_000_000
SWEEPS_PER_VARIABLE = 100
MIN_SWEEPS = 100
DEFAULT_RESTARTS = 4
# proposals per default run, summed over restarts
WORK_BUDGET = 400_000_000
# the default schedule spans at most this many decades of temperature
SCHEDULE_DECADES = 4
POLISH_TOLERANCE = 1e-9
POLISH_MAX_PASSES = 10_000
FALLBACK_TEMPERATURES = (1.0, 1e-3)
BRUTE_FORCE_LIMIT = 24
ENERGY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class AnnealParams:
    """Simulated annealing schedule and restart settings"""
    sweeps: int
    restarts: int
    t_initial: float
    t_final: float
    seed: int = 0
    schedule: str = "geometric"
    # "reassign" adds point moves and swaps to the single-bit flips of
    # clustering models; "flip" is plain single-bit-flip Metropolis
    move_set: str = "reassign"
    threads: Optional[int] = None
    # recompute the energy from scratch every N accepted flips (0 = never)
    check_interval: int = 0
    record_history: bool = False

    def __post_init__(self):
        if int(self.sweeps) < 1:
            raise SolverError(f"sweeps must be at least 1, got {self.sweeps}", sweeps=self.sweeps)
        if int(self.restarts) < 1:
            raise SolverError(f"restarts must be at least 1, got {self.restarts}", restarts=self.restarts)
        if not (self.t_initial > 0 and self.t_final > 0):
            raise SolverError("temperatures must be positive",
                              t_initial=self.t_initial, t_final=self.t_final)
        if not self.t_final < self.t_initial:
            raise SolverError("t_final must be below t_initial",
                              t_initial=self.t_initial, t_final=self.t_final)
        if not 0 <= int(self.seed) < 2 ** 64:
            raise SolverError("seed must be a 64-bit unsigned integer", seed=self.seed)
        if self.schedule not in SCHEDULES:
            raise SolverError(f"unknown schedule {self.schedule!r}", schedule=self.schedule)
        if self.move_set not in MOVE_SETS:
            raise SolverError(f"unknown move set {self.move_set!r}", move_set=self.move_set)
        if self.check_interval < 0:
            raise SolverError("check_interval must be non-negative", check_interval=self.check_interval)

    def betas(self) -> np.ndarray:
        """Inverse temperatures, one per sweep"""
        return 1.0 / np.geomspace(self.t_initial, self.t_final, int(self.sweeps))

    def restart_seeds(self) -> np.ndarray:
        """Independent 32-bit kernel seeds, one per restart"""
        children = np.random.SeedSequence(int(self.seed)).spawn(int(self.restarts))
        return np.array(
            [child.generate_state(1, dtype=np.uint32)[0] for child in children],
            dtype=np.int64,
        )

    def to_dict(self):
        return {
            "sweeps": int(self.sweeps),
            "restarts": int(self.restarts),
            "t_initial": float(self.t_initial),
            "t_final": float(self.t_final),
            "seed": int(self.seed),
            "schedule": self.schedule,
            "move_set": self.move_set,
        }


@dataclass
class SolveResult:
    """Best bitstring over all restarts"""
    best_bits: np.ndarray
    best_energy: float
    energy_trace: List[float]
    restarts_hitting_best: int
    solver: str = "anneal"
    elapsed: float = 0.0
    # per-restart best-so-far energy after each sweep, when requested
    history: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self):
        return {
            "solver": self.solver,
            "best_energy": self.best_energy,
            "energy_trace": list(self.energy_trace),
            "restarts_hitting_best": self.restarts_hitting_best,
        }


@njit(cache=True)
def _energy_from_scratch(indptr, indices, weights, linear, bits):
    value = 0.0
    for v in range(linear.shape[0]):
        if bits[v]:
            value += linear[v]
            for p in range(indptr[v], indptr[v + 1]):
                u = indices[p]
                if u > v and bits[u]:
                    value += weights[p]
    return value


@njit(cache=True)
def _coupling(indptr, indices, weights, u, v):
    """w_uv by binary search in the sorted CSR row of u (0 if absent)"""
    lo = indptr[u]
    hi = indptr[u + 1]
    while lo < hi:
        mid = (lo + hi) // 2
        w = indices[mid]
        if w < v:
            lo = mid + 1
        elif w > v:
            hi = mid
        else:
            return weights[mid]
    return 0.0


@njit(cache=True)
def _flip(indptr, indices, weights, bits, local, v):
    if bits[v] == 0:
        bits[v] = 1
        sign = 1.0
    else:
        bits[v] = 0
        sign = -1.0
    for p in range(indptr[v], indptr[v + 1]):
        local[indices[p]] += sign * weights[p]


@njit(cache=True)
def _cluster_of(bits, i, n_points, n_clusters):
    """Cluster of point i when exactly one of its bits is set, else -1"""
    found = -1
    for c in range(n_clusters):
        if bits[c * n_points + i]:
            if found >= 0:
                return -1
            found = c
    return found


@njit(cache=True)
def _reassign_delta(indptr, indices, weights, local, u, v):
    # u: 1 -> 0, v: 0 -> 1
    return local[v] - local[u] - _coupling(indptr, indices, weights, u, v)


@njit(cache=True)
def _swap_delta(indptr, indices, weights, local, u1, v1, u2, v2):
    # u1, u2: 1 -> 0; v1, v2: 0 -> 1
    delta = local[v1] + local[v2] - local[u1] - local[u2]
    delta += _coupling(indptr, indices, weights, u1, u2)
    delta += _coupling(indptr, indices, weights, v1, v2)
    delta -= _coupling(indptr, indices, weights, u1, v1)
    delta -= _coupling(indptr, indices, weights, u1, v2)
    delta -= _coupling(indptr, indices, weights, u2, v1)
    delta -= _coupling(indptr, indices, weights, u2, v2)
    return delta


@njit(cache=True)
def _polish(indptr, indices, weights, linear, bits, local, n_points, n_clusters, cluster_moves):
    """Greedy descent until no single flip or reassignment lowers the energy"""
    n_vars = linear.shape[0]
    improved = True
    passes = 0
    while improved and passes < POLISH_MAX_PASSES:
        improved = False
        passes += 1
        for v in range(n_vars):
            delta = local[v] if bits[v] == 0 else -local[v]
            if delta < -POLISH_TOLERANCE:
                _flip(indptr, indices, weights, bits, local, v)
                improved = True
        if not cluster_moves:
            continue
        for i in range(n_points):
            a = _cluster_of(bits, i, n_points, n_clusters)
            if a < 0:
                continue
            u = a * n_points + i
            best_delta = -POLISH_TOLERANCE
            target = -1
            for b in range(n_clusters):
                if b == a:
                    continue
                delta = _reassign_delta(indptr, indices, weights, local, u, b * n_points + i)
                if delta < best_delta:
                    best_delta = delta
                    target = b
            if target >= 0:
                _flip(indptr, indices, weights, bits, local, u)
                _flip(indptr, indices, weights, bits, local, target * n_points + i)
                improved = True


@njit(nogil=True, cache=True)
def _anneal_kernel(indptr, indices, weights, linear, betas, seed, check_interval,
                   n_points, n_clusters, cluster_moves):
    """
    One restart of Metropolis annealing

    field[v] = linear[v] + sum_u w_vu * bits[u], so flipping v changes the
    energy by field[v] (0 -> 1) or -field[v] (1 -> 0). Each sweep proposes
    every single-bit flip; with cluster moves it also proposes n point
    reassignments (two bits) and n membership swaps (four bits), whose
    deltas come from the same fields plus the couplings among the flipped
    bits. The best state seen is polished by greedy descent at the end.
    """
    np.random.seed(seed)
    n_vars = linear.shape[0]
    n_sweeps = betas.shape[0]

    bits = np.zeros(n_vars, dtype=np.int8)
    if cluster_moves:
        for i in range(n_points):
            bits[np.random.randint(n_clusters) * n_points + i] = 1
    else:
        for v in range(n_vars):
            if np.random.random() < 0.5:
                bits[v] = 1

    local = linear.copy()
    for v in range(n_vars):
        if bits[v]:
            for p in range(indptr[v], indptr[v + 1]):
                local[indices[p]] += weights[p]

    current = _energy_from_scratch(indptr, indices, weights, linear, bits)
    best = current
    best_bits = bits.copy()
    history = np.empty(n_sweeps)
    max_drift = 0.0
    accepted = 0

    for s in range(n_sweeps):
        beta = betas[s]
        for step in range(n_vars + 2 * n_points if cluster_moves else n_vars):
            if step < n_vars:
                v = step
                delta = local[v] if bits[v] == 0 else -local[v]
                if not (delta <= 0.0 or np.random.random() < np.exp(-beta * delta)):
                    continue
                _flip(indptr, indices, weights, bits, local, v)
            elif step < n_vars + n_points:
                i = np.random.randint(n_points)
                a = _cluster_of(bits, i, n_points, n_clusters)
                if a < 0:
                    continue
                b = np.random.randint(n_clusters - 1)
                if b >= a:
                    b += 1
                u = a * n_points + i
                v = b * n_points + i
                delta = _reassign_delta(indptr, indices, weights, local, u, v)
                if not (delta <= 0.0 or np.random.random() < np.exp(-beta * delta)):
                    continue
                _flip(indptr, indices, weights, bits, local, u)
                _flip(indptr, indices, weights, bits, local, v)
            else:
                i = np.random.randint(n_points)
                j = np.random.randint(n_points)
                a = _cluster_of(bits, i, n_points, n_clusters)
                b = _cluster_of(bits, j, n_points, n_clusters)
                if i == j or a < 0 or b < 0 or a == b:
                    continue
                u1 = a * n_points + i
                v1 = b * n_points + i
                u2 = b * n_points + j
                v2 = a * n_points + j
                delta = _swap_delta(indptr, indices, weights, local, u1, v1, u2, v2)
                if not (delta <= 0.0 or np.random.random() < np.exp(-beta * delta)):
                    continue
                _flip(indptr, indices, weights, bits, local, u1)
                _flip(indptr, indices, weights, bits, local, v1)
                _flip(indptr, indices, weights, bits, local, u2)
                _flip(indptr, indices, weights, bits, local, v2)

            current += delta
            accepted += 1
            if check_interval > 0 and accepted % check_interval == 0:
                exact = _energy_from_scratch(indptr, indices, weights, linear, bits)
                drift = abs(exact - current)
                if drift > max_drift:
                    max_drift = drift
                current = exact

            if current < best:
                best = current
                best_bits[:] = bits
        history[s] = best

    # greedy descent from the best state; never raises the energy
    local = linear.copy()
    for v in range(n_vars):
        if best_bits[v]:
            for p in range(indptr[v], indptr[v + 1]):
                local[indices[p]] += weights[p]
    _polish(indptr, indices, weights, linear, best_bits, local, n_points, n_clusters, cluster_moves)
    polished = _energy_from_scratch(indptr, indices, weights, linear, best_bits)
    if polished < best:
        best = polished
        if n_sweeps > 0:
            history[n_sweeps - 1] = best

    return best_bits, best, history, max_drift


class SimulatedAnnealer(LoggerMixin):
    """Runs independent restarts on a thread pool and keeps the best"""

    def __init__(self, threads: Optional[int] = None):
        self.threads = resolve_threads(threads)

    def solve(self, m: QuboModel, p: AnnealParams) -> SolveResult:
        indptr, indices, weights = m.adjacency()
        linear = np.ascontiguousarray(m.linear)
        betas = p.betas()
        seeds = p.restart_seeds()
        workers = min(self.threads, int(p.restarts))
        cluster_moves = p.move_set == "reassign" and supports_cluster_moves(m)

        self.logger.info(
            f"Annealing {m.n_vars} variables: {p.restarts} restarts x {p.sweeps} sweeps, "
            f"T {p.t_initial:.4g} -> {p.t_final:.4g}, "
            f"{'reassign' if cluster_moves else 'flip'} moves, {workers} thread(s)"
        )

        def run(seed):
            return _anneal_kernel(indptr, indices, weights, linear, betas,
                                  int(seed), int(p.check_interval),
                                  int(m.n), int(m.k), cluster_moves)

        with Timer("anneal") as timer:
            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    outcomes = list(pool.map(run, seeds))
            else:
                outcomes = [run(seed) for seed in seeds]

        tolerance = ENERGY_TOLERANCE * max(1.0, float(np.max(m.coefficient_magnitudes(), initial=0.0)))
        trace = []
        for restart, (bits, tracked, _, drift) in enumerate(outcomes):
            exact = energy(m, bits)
            if p.check_interval > 0:
                self.logger.debug(f"restart {restart}: max incremental drift {drift:.3e}")
                if drift > tolerance * max(1.0, abs(exact)):
                    raise SolverError(
                        f"incremental energy drifted by {drift:.3e} in restart {restart}",
                        restart=restart, drift=drift,
                    )
            trace.append(exact)

        # ties go to the lowest restart index, independent of thread count
        best_index = int(np.argmin(trace))
        best_energy = trace[best_index]
        hits = sum(1 for e in trace if abs(e - best_energy) <= tolerance)

        history = None
        if p.record_history:
            history = np.vstack([outcome[2] for outcome in outcomes])

        self.logger.info(
            f"Best energy {best_energy:.10g} (restart {best_index}, "
            f"{hits}/{p.restarts} restarts at best) in {timer.elapsed:.2f}s"
        )
        return SolveResult(
            best_bits=outcomes[best_index][0].astype(np.int8),
            best_energy=best_energy,
            energy_trace=trace,
            restarts_hitting_best=hits,
            solver="anneal",
            elapsed=timer.elapsed,
            history=history,
        )


def solve(m: QuboModel, p: AnnealParams) -> SolveResult:
    """Minimize ``m`` by simulated annealing; deterministic for a fixed seed"""
    return SimulatedAnnealer(threads=p.threads).solve(m, p)


def brute_force(m: QuboModel, chunk_size: int = 1 << 16) -> SolveResult:
    """
    Exact minimum by enumerating all 2^n_vars bitstrings

    bits[0] is the most significant bit of the enumeration counter, so the
    first minimum met is the lexicographically smallest one.
    """
    n_vars = m.n_vars
    if n_vars > BRUTE_FORCE_LIMIT:
        raise SolverError(
            f"brute force limited to {BRUTE_FORCE_LIMIT} variables, model has {n_vars}",
            n_vars=n_vars, limit=BRUTE_FORCE_LIMIT,
        )

    upper = np.zeros((n_vars, n_vars))
    upper[m.rows, m.cols] = m.coefs
    shifts = np.arange(n_vars - 1, -1, -1, dtype=np.int64)
    tolerance = ENERGY_TOLERANCE * max(1.0, float(np.max(m.coefficient_magnitudes(), initial=0.0)))

    total = 1 << n_vars
    best_state, best_value = 0, np.inf
    with Timer("brute force") as timer:
        for start in range(0, total, chunk_size):
            states = np.arange(start, min(total, start + chunk_size), dtype=np.int64)
            batch = ((states[:, None] >> shifts) & 1).astype(np.float64)
            values = m.offset + batch @ m.linear + np.einsum("ij,ij->i", batch @ upper, batch)
            chunk_min = float(values.min())
            if chunk_min < best_value - tolerance:
                first = int(np.flatnonzero(values <= chunk_min + tolerance)[0])
                best_state, best_value = int(states[first]), chunk_min

    bits = ((best_state >> shifts) & 1).astype(np.int8)
    exact = energy(m, bits)
    logger.info(f"Brute force over {total} states: energy {exact:.10g} in {timer.elapsed:.2f}s")
    return SolveResult(
        best_bits=bits,
        best_energy=exact,
        energy_trace=[exact],
        restarts_hitting_best=1,
        solver="brute-force",
        elapsed=timer.elapsed,
    )


def supports_cluster_moves(m: QuboModel) -> bool:
    """True when ``m`` has the point-by-cluster layout v = c*n + i with k >= 2"""
    return m.k >= 2 and m.n >= 2 and m.n * m.k == m.n_vars


def default_params(
    m: QuboModel,
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
    work_budget: int = WORK_BUDGET,
    sweeps_per_variable: int = SWEEPS_PER_VARIABLE,
    max_sweeps: int = MAX_SWEEPS,
) -> AnnealParams:
    """
    Schedule derived from the coefficient range of ``m``

    t_initial is the largest |coefficient|; t_final is 1e-3 of the smallest
    nonzero one, raised if needed so the run spans at most SCHEDULE_DECADES
    decades. Sweeps are sweeps_per_variable * n_vars, capped at max_sweeps
    and at work_budget single-bit proposals over all restarts (never below
    MIN_SWEEPS).
    """
    magnitudes = m.coefficient_magnitudes()
    nonzero = magnitudes[magnitudes > 0]
    if nonzero.size == 0:
        t_initial, t_final = FALLBACK_TEMPERATURES
    else:
        t_initial = float(nonzero.max())
        t_final = max(1e-3 * float(nonzero.min()), t_initial * 10.0 ** -SCHEDULE_DECADES)

    n_vars = max(1, m.n_vars)
    budgeted = max(MIN_SWEEPS, int(work_budget) // (n_vars * int(restarts)))
    sweeps = min(sweeps_per_variable * n_vars, max_sweeps, budgeted)

    return AnnealParams(
        sweeps=max(1, sweeps),
        restarts=restarts,
        t_initial=t_initial,
        t_final=t_final,
        seed=seed,
    )


def with_overrides(p: AnnealParams, **overrides) -> Tuple[AnnealParams, dict]:
    """Copy of ``p`` with non-None overrides applied; returns the applied subset"""
    applied = {key: value for key, value in overrides.items() if value is not None}
    values = {**p.__dict__, **applied}
    return AnnealParams(**values), applied
