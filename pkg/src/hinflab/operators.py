"""Dense complex operator algebra: resolvents, spectra, sectoriality and strip profiles.

All operations are pure functions of immutable inputs; the eigendecomposition
is computed once at construction and cached only when its reconstruction error
certifies it.  Sampled suprema over rays/lines are lower bounds of the true
sup and are labeled as such in the profiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NotSectorial, SpectrumHit
from .spaces import BoundEstimate, SpaceSpec, bound_estimate

RESOLVENT_MARGIN = 1e-12          # pseudospectral safety margin on solves
NORMALITY_TOL = 1e-12             # ||A*A - AA*||_F <= tol * ||A||_F^2
EIG_RECONSTRUCTION_TOL = 1e-10    # ||V L V^-1 - A||_F <= tol * ||A||_F


@dataclass(frozen=True)
class EigData:
    values: np.ndarray
    vectors: np.ndarray
    inverse: np.ndarray


class Operator:
    """Square complex matrix with cached spectral metadata."""

    def __init__(self, entries):
        a = np.array(entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("operator entries must be a square matrix")
        if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
            raise ValueError("operator entries must be finite")
        a.setflags(write=False)
        self.entries = a
        self.dim = a.shape[0]
        self.norm_fro = float(np.linalg.norm(a))
        comm = a.conj().T @ a - a @ a.conj().T
        self.normality_flag = bool(
            np.linalg.norm(comm) <= NORMALITY_TOL * max(self.norm_fro ** 2, 1e-300))
        self.eigenvalues, self.eig = self._decompose(a)
        self._singular_values = np.linalg.svd(a, compute_uv=False)

    def _decompose(self, a):
        if self.normality_flag:
            # Schur vectors of a normal matrix form a unitary eigenbasis
            tri, z = scipy.linalg.schur(a, output="complex")
            values = np.diag(tri).copy()
            eig = EigData(values, z, z.conj().T)
        else:
            values, v = np.linalg.eig(a)
            try:
                vinv = np.linalg.inv(v)
            except np.linalg.LinAlgError:
                return values, None
            eig = EigData(values, v, vinv)
        recon = eig.vectors @ (eig.values[:, None] * eig.inverse)
        if np.linalg.norm(recon - a) > EIG_RECONSTRUCTION_TOL * max(self.norm_fro, 1e-300):
            return values, None
        return values, eig

    @property
    def min_singular_value(self) -> float:
        return float(self._singular_values[-1])

    @property
    def is_injective(self) -> bool:
        return self.min_singular_value > 0.0

    def spectral_window(self) -> tuple[float, float]:
        """(min, max) of nonzero eigenvalue moduli; falls back to norm scales."""
        mags = np.abs(self.eigenvalues)
        nz = mags[mags > 1e-14 * max(mags.max(initial=0.0), 1.0)]
        if nz.size == 0:
            return 1.0, max(1.0, self.norm_fro)
        return float(nz.min()), float(nz.max())

    def omega_spec(self, ignore_zero: bool = False) -> float:
        """Largest |arg| over the spectrum; pi for spectra meeting (-oo, 0].

        With ``ignore_zero`` eigenvalues within rounding of 0 are skipped
        (semigroup generators may have a kernel; sectorial calculus may not).
        """
        tol = 1e-14 * max(float(np.abs(self.eigenvalues).max()), 1.0)
        args = [0.0]
        for lam in self.eigenvalues:
            if abs(lam) <= tol:
                if ignore_zero:
                    continue
                return math.pi
            args.append(abs(math.atan2(lam.imag, lam.real)))
        return max(args)

    def w_spec(self) -> float:
        return float(np.abs(self.eigenvalues.real).max())

    def apply_function(self, fn) -> np.ndarray:
        """Eigendecomposition functional calculus fn(A); needs a cached basis."""
        if self.eig is None:
            raise np.linalg.LinAlgError(
                "eigendecomposition not certified for this operator")
        fvals = np.asarray([fn(lam) for lam in self.eig.values], dtype=complex)
        return self.eig.vectors @ (fvals[:, None] * self.eig.inverse)

    def to_json(self) -> dict:
        return {"dim": self.dim,
                "re": self.entries.real.tolist(),
                "im": self.entries.imag.tolist()}

    def __repr__(self):
        return f"Operator(dim={self.dim}, normal={self.normality_flag})"


def operator_from_json(doc: dict) -> Operator:
    """Load from {'dim', 're', 'im'} or {'diag_re', 'diag_im'} documents."""
    if "diag_re" in doc:
        re = np.asarray(doc["diag_re"], dtype=float)
        im = np.asarray(doc.get("diag_im", np.zeros_like(re)), dtype=float)
        return Operator(np.diag(re + 1j * im))
    re = np.asarray(doc["re"], dtype=float)
    im = np.asarray(doc.get("im", np.zeros_like(re)), dtype=float)
    mat = re + 1j * im
    if "dim" in doc and mat.shape != (doc["dim"], doc["dim"]):
        raise ValueError("declared dim does not match matrix shape")
    return Operator(mat)


def require_injective(a: Operator, context: str = "sectorial operator"):
    if not a.is_injective:
        raise NotSectorial(f"{context} must be injective "
                           f"(min singular value {a.min_singular_value:.3g})")


def resolvent(a: Operator, lam: complex) -> np.ndarray:
    """R(lam, A) = (lam I - A)^{-1} with a pseudospectral safety check."""
    shifted = lam * np.eye(a.dim) - a.entries
    smin = np.linalg.svd(shifted, compute_uv=False)[-1]
    scale = abs(lam) + float(np.linalg.norm(a.entries, 2))
    if smin <= RESOLVENT_MARGIN * max(scale, 1e-300):
        raise SpectrumHit(f"lambda={lam:.6g} within margin of the spectrum "
                          f"(sigma_min={smin:.3g})")
    return np.linalg.solve(shifted, np.eye(a.dim, dtype=complex))


def resolvent_stack(a: Operator, lambdas) -> np.ndarray:
    """Batched resolvents, shape (m, n, n); skips the per-point SVD check."""
    lam = np.asarray(lambdas, dtype=complex)
    eye = np.eye(a.dim, dtype=complex)
    shifted = lam[:, None, None] * eye - a.entries
    return np.linalg.solve(shifted, np.broadcast_to(eye, shifted.shape))


def _ray_lambdas(a: Operator, angle: float, per_decade: int, decades: int) -> np.ndarray:
    s_min, s_max = a.spectral_window()
    half = decades / 2.0
    lo = s_min * 10.0 ** (-half)
    hi = s_max * 10.0 ** (half)
    count = max(int(round(math.log10(hi / lo) * per_decade)) + 1, 8)
    t = np.geomspace(lo, hi, count)
    return t * np.exp(1j * angle)


@dataclass(frozen=True)
class SectorProfile:
    omega_spec: float
    M: dict                 # angle -> sampled sup ||lam R(lam, A)|| (lower bound)
    r_bound_profile: dict   # angle -> BoundEstimate for {lam R(lam, A)}
    almost_r_profile: dict  # angle -> BoundEstimate for {lam A R(lam, A)^2}

    def __post_init__(self):
        angles = sorted(self.M)
        for lo, hi in zip(angles, angles[1:]):
            if self.M[hi] > self.M[lo] * (1 + 1e-9):
                raise ValueError("M(sigma) must be nonincreasing in sigma")
        if not (0 <= self.omega_spec < math.pi):
            raise ValueError("omega_spec must lie in [0, pi)")


@dataclass(frozen=True)
class StripProfile:
    w_spec: float
    C: dict  # width -> sampled sup ||R(lam, B)|| over Re lam = +-width

    def __post_init__(self):
        widths = sorted(self.C)
        for lo, hi in zip(widths, widths[1:]):
            if self.C[hi] > self.C[lo] * (1 + 1e-9):
                raise ValueError("C(b) must be nonincreasing in b")


def sector_profile(a: Operator, angles, rays_per_angle: int = 16,
                   space: SpaceSpec | None = None, seed: int = 0,
                   per_decade: int = 40, decades: int = 12) -> SectorProfile:
    """Sampled sectoriality profile of A.

    For each requested angle sigma > omega_spec, M(sigma) is the max of
    ||lam R(lam, A)|| over log-spaced |lam| on both boundary rays
    (a lower bound of the true sup).  R-bound entries are estimated on
    ``rays_per_angle`` nodes per ray via `bound_estimate`.
    """
    require_injective(a)
    omega = a.omega_spec()
    if omega >= math.pi:
        raise NotSectorial("spectrum meets the closed negative real axis")
    if space is None:
        space = SpaceSpec(p=2, n=a.dim)
    M: dict = {}
    r_prof: dict = {}
    almost_prof: dict = {}
    for sigma in angles:
        if sigma <= omega:
            raise NotSectorial(f"requested angle {sigma:.4g} not above "
                               f"spectral angle {omega:.4g}")
        sup = 0.0
        fams = {"r": [], "almost": []}
        for sgn in (+1, -1):
            lams = _ray_lambdas(a, sgn * sigma, per_decade, decades)
            stack = resolvent_stack(a, lams)
            scaled = lams[:, None, None] * stack
            sup = max(sup, float(max(np.linalg.norm(s, 2) for s in scaled)))
            pick = np.linspace(0, lams.size - 1, rays_per_angle // 2).astype(int)
            for j in pick:
                fams["r"].append(scaled[j])
                fams["almost"].append(lams[j] * a.entries @ stack[j] @ stack[j])
        M[sigma] = sup
        r_prof[sigma] = bound_estimate(fams["r"], space, kind="r", seed=seed)
        almost_prof[sigma] = bound_estimate(fams["almost"], space, kind="r", seed=seed + 1)
    return SectorProfile(omega, M, r_prof, almost_prof)


def strip_profile(b: Operator, widths, per_decade: int = 40) -> StripProfile:
    """Sampled strip profile: C(b) over vertical lines Re lam = +-b."""
    w_spec = b.w_spec()
    cap = 1e6 * (1.0 + float(np.linalg.norm(b.entries, 2)))
    C: dict = {}
    for width in widths:
        if width <= w_spec:
            raise NotSectorial(f"requested width {width:.4g} not above "
                               f"spectral width {w_spec:.4g}")
        sup = 0.0
        ts = np.geomspace(1e-6, cap, max(int(math.log10(cap / 1e-6) * per_decade), 8))
        ts = np.concatenate([-ts[::-1], ts])
        for side in (+1, -1):
            stack = resolvent_stack(b, side * width + 1j * ts)
            sup = max(sup, float(max(np.linalg.norm(s, 2) for s in stack)))
        C[width] = sup
    return StripProfile(w_spec, C)


def principal_sqrt(a: Operator) -> np.ndarray:
    """A^{1/2} with the principal branch (spectrum off (-oo, 0])."""
    require_injective(a, "square root")
    if a.omega_spec() >= math.pi:
        raise NotSectorial("principal square root needs spectrum off (-oo, 0]")
    if a.eig is not None:
        return a.apply_function(np.sqrt)
    return np.asarray(scipy.linalg.sqrtm(np.asarray(a.entries)), dtype=complex)
