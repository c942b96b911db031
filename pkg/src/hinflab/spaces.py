"""Finite-dimensional l_p^n contexts, randomized sum norms and R-/gamma-bound estimation.

Conventions used throughout:

* complex Rademacher variables are uniform on {1, i, -1, -i} (enumeration base 4);
* complex standard Gaussians have independent N(0, 1/2) real and imaginary
  parts, so E|g|^2 = 1;
* every randomized quantity is reported as a `BoundEstimate` whose exact paths
  (p = 2 closed form, full sign enumeration) carry stderr 0.

Ratio maximization in `bound_estimate` yields a certified *lower* bound of the
R-/gamma-bound; only the p = 2 path returns the exact value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BudgetTooSmall, ViolationFound

EXACT_METHODS = ("exact-hilbert", "rademacher-enum")
DEFAULT_MC_BUDGET = 20000
JACKKNIFE_BATCHES = 20
ENUM_LIMIT = 10  # complex Rademacher enumeration up to 4^(m-1) patterns


def conjugate_exponent(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class SpaceSpec:
    """The Banach context l_p^n; p = 2 is the exact Hilbert path."""

    p: float
    n: int

    def __post_init__(self):
        if not (self.p >= 1):
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.n < 1:
            raise ValueError("dimension must be positive")
        self._probe_norm_axioms()

    @property
    def dual_p(self) -> float:
        return conjugate_exponent(self.p)

    @property
    def is_hilbert(self) -> bool:
        return self.p == 2

    def norm(self, x) -> np.ndarray | float:
        """p-norm over the last axis; accepts stacked inputs."""
        a = np.abs(np.asarray(x, dtype=complex))
        if math.isinf(self.p):
            return a.max(axis=-1)
        if self.p == 1:
            return a.sum(axis=-1)
        if self.p == 2:
            return np.sqrt((a * a).sum(axis=-1))
        return (a ** self.p).sum(axis=-1) ** (1.0 / self.p)

    def dual_norming(self, y: np.ndarray) -> np.ndarray:
        """Vector z with ||z||_{p'} = 1 and <z, conj(y)> = ||y||_p (norming functional)."""
        y = np.asarray(y, dtype=complex)
        a = np.abs(y)
        if not a.any():
            z = np.zeros_like(y)
            z[0] = 1.0
            return z
        phase = np.where(a > 0, y / np.where(a > 0, a, 1.0), 0.0)
        if math.isinf(self.p):
            z = np.zeros_like(y)
            k = int(np.argmax(a))
            z[k] = phase[k]
            return z
        if self.p == 1:
            return phase
        w = a ** (self.p - 1.0)
        w /= self.norm_dual(w)
        return w * phase

    def norm_dual(self, x) -> float:
        q = self.dual_p
        a = np.abs(np.asarray(x, dtype=complex))
        if math.isinf(q):
            return float(a.max(axis=-1))
        return float((a ** q).sum(axis=-1) ** (1.0 / q))

    def random_unit(self, rng: np.random.Generator) -> np.ndarray:
        v = rng.standard_normal(self.n) + 1j * rng.standard_normal(self.n)
        return v / self.norm(v)

    def _probe_norm_axioms(self):
        # homogeneity and triangle inequality on a fixed random probe set
        rng = np.random.default_rng(12345)
        for _ in range(8):
            x = rng.standard_normal(self.n) + 1j * rng.standard_normal(self.n)
            y = rng.standard_normal(self.n) + 1j * rng.standard_normal(self.n)
            c = complex(rng.standard_normal(), rng.standard_normal())
            nx, ny = self.norm(x), self.norm(y)
            scale = max(nx, ny, 1.0)
            if abs(self.norm(c * x) - abs(c) * nx) > 1e-12 * max(abs(c) * nx, 1.0):
                raise ValueError("norm fails positive homogeneity probe")
            if self.norm(x + y) > nx + ny + 1e-12 * scale:
                raise ValueError("norm fails triangle inequality probe")

    def to_json(self) -> dict:
        return {"p": None if math.isinf(self.p) else self.p, "n": self.n}

    @staticmethod
    def from_json(doc: dict) -> "SpaceSpec":
        p = doc["p"]
        return SpaceSpec(p=math.inf if p in (None, "inf") else float(p), n=int(doc["n"]))


@dataclass(frozen=True)
class BoundEstimate:
    """Value + uncertainty + method tag for every randomized quantity."""

    value: float
    stderr: float
    method: str
    samples: int
    seed: int
    witnesses: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("estimate value must be nonnegative")
        if self.method not in EXACT_METHODS + ("gaussian-mc", "randomized-search"):
            raise ValueError(f"unknown method tag {self.method!r}")
        if (self.stderr == 0.0) != (self.method in EXACT_METHODS):
            raise ValueError("stderr must vanish exactly on the exact paths")

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "stderr": self.stderr,
            "method": self.method,
            "samples": self.samples,
            "seed": self.seed,
            "witnesses": list(self.witnesses),
        }


@lru_cache(maxsize=16)
def _rademacher_patterns(m: int) -> np.ndarray:
    """All 4^(m-1) complex sign patterns with the global phase fixed to +1."""
    if m == 1:
        return np.ones((1, 1), dtype=complex)
    count = 4 ** (m - 1)
    idx = np.arange(count)
    cols = [np.ones(count, dtype=complex)]
    for j in range(m - 1):
        cols.append(1j ** ((idx // (4 ** j)) % 4))
    out = np.stack(cols, axis=1)
    out.setflags(write=False)
    return out


def _jackknife_sqrt_mean(sample_sq: np.ndarray, batches: int = JACKKNIFE_BATCHES):
    """sqrt(mean) of per-sample squared norms with jackknife stderr over batches."""
    n = sample_sq.size - (sample_sq.size % batches)
    chunks = sample_sq[:n].reshape(batches, -1)
    batch_means = chunks.mean(axis=1)
    total = math.fsum(batch_means.tolist())
    value = math.sqrt(max(total / batches, 0.0))
    leave_out = np.sqrt(np.maximum((total - batch_means) / (batches - 1), 0.0))
    stderr = math.sqrt((batches - 1) / batches * float(((leave_out - leave_out.mean()) ** 2).sum()))
    if stderr == 0.0:
        stderr = max(value, 1.0) * 1e-15  # degenerate draw; keep the MC tag honest
    return value, stderr


def _mc_draws(kind: str, shape: tuple, rng: np.random.Generator) -> np.ndarray:
    if kind == "gaussian":
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
    if kind == "real-gaussian":
        return rng.standard_normal(shape).astype(complex)
    if kind == "rademacher":
        return 1j ** rng.integers(0, 4, size=shape)
    raise ValueError(f"unknown kind {kind!r}")


def randomized_sum_norm(vectors, space: SpaceSpec, kind: str = "gaussian",
                        budget: int = DEFAULT_MC_BUDGET, seed: int = 0) -> BoundEstimate:
    """(E || sum_k eps_k x_k ||^2)^(1/2) over the requested random signs.

    Exact paths: p = 2 closed form (any standard kind), single vectors, and
    full enumeration of complex Rademacher patterns for m <= 10.  The
    `real-gaussian` kind is a diagnostic and always estimates by Monte Carlo.
    """
    X = np.atleast_2d(np.asarray(vectors, dtype=complex))
    if X.shape[1] != space.n:
        raise ValueError(f"vectors live in C^{X.shape[1]}, space has n={space.n}")
    m = X.shape[0]

    if kind in ("gaussian", "rademacher"):
        if space.p == 2:
            value = float(np.sqrt((np.abs(X) ** 2).sum()))
            return BoundEstimate(value, 0.0, "exact-hilbert", 0, seed)
        if m == 1:
            # E|eps|^2 = 1 makes the single-vector case exact in any norm
            return BoundEstimate(float(space.norm(X[0])), 0.0, "exact-hilbert", 0, seed)
        if kind == "rademacher" and m <= ENUM_LIMIT:
            sums = _rademacher_patterns(m) @ X
            value = float(np.sqrt((space.norm(sums) ** 2).mean()))
            return BoundEstimate(value, 0.0, "rademacher-enum", sums.shape[0], seed)

    if budget < 100:
        raise BudgetTooSmall(f"Monte-Carlo path needs budget >= 100, got {budget}")
    rng = np.random.default_rng(seed)
    draws = _mc_draws(kind, (budget, m), rng)
    sample_sq = space.norm(draws @ X) ** 2
    value, stderr = _jackknife_sqrt_mean(sample_sq)
    return BoundEstimate(value, stderr, "gaussian-mc", budget, seed,
                         witnesses=({"kind": kind, "batches": JACKKNIFE_BATCHES},))


def _ratio_exact_possible(kind: str, m: int) -> bool:
    return kind == "r" and m <= ENUM_LIMIT


def _tuple_ratio(ops, X, space: SpaceSpec, kind: str, budget: int, seed: int):
    """Ratio of randomized sum norms for the tuple (T_k x_k) against (x_k).

    Returns (ratio, stderr, exact_flag).  Monte-Carlo paths use common random
    numbers for numerator and denominator.
    """
    TX = np.stack([T @ x for T, x in zip(ops, X)])
    m = len(X)
    if _ratio_exact_possible(kind, m) or m == 1:
        if m == 1:
            num = float(space.norm(TX[0]))
            den = float(space.norm(X[0]))
        else:
            pats = _rademacher_patterns(m)
            num = float(np.sqrt((space.norm(pats @ TX) ** 2).mean()))
            den = float(np.sqrt((space.norm(pats @ np.asarray(X)) ** 2).mean()))
        return (num / den if den > 0 else 0.0), 0.0, True
    rng = np.random.default_rng(seed)
    draws = _mc_draws("gaussian" if kind == "gamma" else "rademacher", (budget, m), rng)
    num_sq = space.norm(draws @ TX) ** 2
    den_sq = space.norm(draws @ np.asarray(X)) ** 2
    batches = JACKKNIFE_BATCHES
    n = num_sq.size - (num_sq.size % batches)
    num_b = num_sq[:n].reshape(batches, -1).mean(axis=1)
    den_b = den_sq[:n].reshape(batches, -1).mean(axis=1)
    if den_b.sum() <= 0:
        return 0.0, 0.0, True
    full = math.sqrt(num_b.sum() / den_b.sum())
    loo = np.sqrt((num_b.sum() - num_b) / np.maximum(den_b.sum() - den_b, 1e-300))
    stderr = math.sqrt((batches - 1) / batches * float(((loo - loo.mean()) ** 2).sum()))
    return full, max(stderr, full * 1e-15), False


def _boyd_ratio(T: np.ndarray, space: SpaceSpec, iters: int = 40) -> tuple[float, np.ndarray]:
    """Ascent on ||Tx||_p / ||x||_p (generalized power iteration); best ratio found."""
    n = space.n
    x = np.ones(n, dtype=complex) / space.norm(np.ones(n))
    best, best_x = 0.0, x
    for _ in range(iters):
        y = T @ x
        ny = float(space.norm(y))
        if ny > best:
            best, best_x = ny / max(float(space.norm(x)), 1e-300), x.copy()
        z = T.conj().T @ space.dual_norming(y)
        nz = np.abs(z)
        if not nz.any():
            break
        q = space.dual_p
        dual_space_norm = SpaceSpec.__new__(SpaceSpec)  # avoid probe cost in hot loop
        object.__setattr__(dual_space_norm, "p", q)
        object.__setattr__(dual_space_norm, "n", n)
        x_new = dual_space_norm.dual_norming(z)
        if np.allclose(x_new, x, atol=1e-14):
            x = x_new
            break
        x = x_new
    y = T @ x
    nx = float(space.norm(x))
    if nx > 0 and float(space.norm(y)) / nx > best:
        best, best_x = float(space.norm(y)) / nx, x
    return best, best_x


def _exact_hilbert_bound(family) -> float:
    return max(float(np.linalg.svd(np.asarray(T, dtype=complex), compute_uv=False)[0])
               for T in family)


def bound_estimate(family, space: SpaceSpec, kind: str = "r", m_max: int = 4,
                   restarts: int = 8, seed: int = 0, budget: int = 4000,
                   witness_vectors=None) -> BoundEstimate:
    """Certified lower bound on the R-bound (kind='r') or gamma-bound (kind='gamma').

    Maximizes the ratio of randomized sum norms over operator tuples drawn from
    the family (with repetition) and unit vectors, via random restarts plus
    coordinate ascent.  On p = 2 the exact value sup_k ||T_k|| is returned
    (Hilbert identity) and the search result is asserted consistent with it.

    `witness_vectors`, when given, must align one vector per family member and
    is evaluated as an additional full-length candidate tuple (used by the
    pointwise-multiplier check to keep its assertion sound).
    """
    fam = [np.asarray(T, dtype=complex) for T in family]
    if not fam:
        raise ValueError("family must be nonempty")
    if any(T.shape != (space.n, space.n) for T in fam):
        raise ValueError("all family members must be n x n on the given space")
    if kind not in ("r", "gamma"):
        raise ValueError("kind must be 'r' or 'gamma'")
    rng = np.random.default_rng(seed)

    candidates = []  # (value, stderr, exact_flag, note)
    for i, T in enumerate(fam):
        val, _x = _boyd_ratio(T, space)
        candidates.append((val, 0.0, True, f"single:{i}"))

    for r in range(restarts):
        m = int(rng.integers(1, m_max + 1))
        ks = rng.integers(0, len(fam), size=m)
        ops = [fam[k] for k in ks]
        X = [space.random_unit(rng) for _ in range(m)]
        eval_seed = seed * 1000003 + r
        ratio, err, exact = _tuple_ratio(ops, X, space, kind, budget, eval_seed)
        for step in (0.5, 0.2, 0.08):
            for k in range(m):
                for _ in range(2):
                    trial = list(X)
                    v = X[k] + step * (rng.standard_normal(space.n)
                                       + 1j * rng.standard_normal(space.n))
                    trial[k] = v / space.norm(v)
                    r2, e2, ex2 = _tuple_ratio(ops, trial, space, kind, budget, eval_seed)
                    if r2 > ratio:
                        X, ratio, err, exact = trial, r2, e2, ex2
        candidates.append((ratio, err, exact, f"tuple:m={m}"))

    if witness_vectors is not None:
        W = [np.asarray(w, dtype=complex) for w in witness_vectors]
        if len(W) != len(fam):
            raise ValueError("witness_vectors must align with the family")
        keep = [i for i, w in enumerate(W) if float(space.norm(w)) > 0]
        if keep:
            ratio, err, exact = _tuple_ratio([fam[i] for i in keep], [W[i] for i in keep],
                                             space, kind, budget, seed * 1000003 + 999)
            candidates.append((ratio, err, exact, "witness"))

    best = max(candidates, key=lambda c: c[0])
    samples = 0 if best[2] else budget

    if space.p == 2:
        exact_value = _exact_hilbert_bound(fam)
        if best[0] > exact_value * (1 + 1e-6) + 3 * best[1] + 1e-12:
            raise ViolationFound(
                f"search ratio {best[0]:.6g} exceeds exact Hilbert bound {exact_value:.6g}",
                witness=best)
        return BoundEstimate(exact_value, 0.0, "exact-hilbert", 0, seed,
                             witnesses=({"search_value": best[0], "note": best[3]},))

    if best[2]:
        return BoundEstimate(best[0], 0.0, "rademacher-enum", samples, seed,
                             witnesses=({"note": best[3]},))
    return BoundEstimate(best[0], best[1], "randomized-search", samples, seed,
                         witnesses=({"note": best[3]},))


def contraction_principle_check(space: SpaceSpec, trials: int = 1000, seed: int = 0,
                                m: int = 6, scalar_mode: str = "complex-disk") -> dict:
    """Verify (E||sum a_k eps_k x_k||^2)^(1/2) <= 2 (E||sum eps_k x_k||^2)^(1/2).

    Scalars are drawn with |a_k| <= 1 (`complex-disk`) or in [0, 1]
    (`real-unit`).  Raises ViolationFound with the witness instance on any
    trial exceeding the complex constant 2; reports the max observed ratio.
    """
    if m > 8:
        raise ValueError("enumeration check limited to m <= 8")
    rng = np.random.default_rng(seed)
    pats = _rademacher_patterns(m)
    max_ratio, worst = 0.0, None
    for t in range(trials):
        X = rng.standard_normal((m, space.n)) + 1j * rng.standard_normal((m, space.n))
        if scalar_mode == "complex-disk":
            a = np.sqrt(rng.uniform(0, 1, m)) * np.exp(2j * np.pi * rng.uniform(0, 1, m))
        elif scalar_mode == "real-unit":
            a = rng.uniform(0, 1, m).astype(complex)
        else:
            raise ValueError(f"unknown scalar_mode {scalar_mode!r}")
        den = float(np.sqrt((space.norm(pats @ X) ** 2).mean()))
        num = float(np.sqrt((space.norm(pats @ (a[:, None] * X)) ** 2).mean()))
        ratio = num / den if den > 0 else 0.0
        if ratio > max_ratio:
            max_ratio, worst = ratio, {"trial": t, "a": a.tolist()}
        if ratio > 2.0 * (1 + 1e-9):
            raise ViolationFound(f"contraction ratio {ratio:.6g} > 2 at trial {t}",
                                 witness={"a": a, "X": X})
    return {"max_ratio": max_ratio, "trials": trials, "m": m,
            "scalar_mode": scalar_mode, "worst": worst, "seed": seed}


def convex_average_check(family, weights, space: SpaceSpec, profile: str = "l1",
                         input_bound: float | None = None, draws: int = 12,
                         probes: int = 8, seed: int = 0, budget: int = 2000) -> dict:
    """Check the averaged families N_h inherit the bound 2C.

    profile='l1'  : h ranges over the L1(w) unit ball       (Lemma-5.8 shape);
    profile='linf': h ranges over the sup-norm unit ball and C is the measured
                    strong-integrability constant             (Lemma-5.9 shape).
    """
    fam = [np.asarray(T, dtype=complex) for T in family]
    w = np.asarray(weights, dtype=float)
    if len(fam) != w.size:
        raise ValueError("one weight per family member required")
    rng = np.random.default_rng(seed)

    if profile == "l1":
        if input_bound is None:
            input_bound = bound_estimate(fam, space, kind="r", seed=seed,
                                         budget=budget).value
        averaged = [fam[int(rng.integers(0, len(fam)))]]  # an extreme point
        for _ in range(draws):
            h = rng.standard_normal(w.size) + 1j * rng.standard_normal(w.size)
            h /= float(np.abs(h * w).sum())
            averaged.append(np.tensordot(h * w, np.stack(fam), axes=1))
    elif profile == "linf":
        c_probe = 0.0
        for _ in range(probes):
            x = space.random_unit(rng)
            c_probe = max(c_probe, float(sum(wj * space.norm(T @ x)
                                             for wj, T in zip(w, fam))))
        input_bound = c_probe
        stack = np.stack(fam)
        averaged = [np.tensordot(np.ones(w.size) * w, stack, axes=1)]
        for _ in range(draws):
            h = np.exp(2j * np.pi * rng.uniform(0, 1, w.size)) * rng.uniform(0, 1, w.size)
            averaged.append(np.tensordot(h * w, stack, axes=1))
    else:
        raise ValueError(f"unknown profile {profile!r}")

    est = bound_estimate(averaged, space, kind="r", seed=seed + 1, budget=budget)
    limit = 2.0 * input_bound + 3.0 * est.stderr + 1e-9 * max(input_bound, 1.0)
    if est.value > limit:
        raise ViolationFound(
            f"averaged family bound {est.value:.6g} exceeds 2C = {2 * input_bound:.6g}",
            witness={"estimate": est.to_json(), "input_bound": input_bound})
    return {"profile": profile, "input_bound": input_bound,
            "averaged_estimate": est.to_json(), "passed": True, "seed": seed}
