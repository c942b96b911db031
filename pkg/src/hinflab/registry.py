"""Named holomorphic-function families and seeded, versioned test packs.

Configs refer to functions by registry name plus parameters; arbitrary
user-supplied closures are deliberately not accepted from config files.
Packs are deterministic in (seed, size) so reported calculus constants are
reproducible.
"""

from __future__ import annotations

import math

import numpy as np

from .calculus import HFunction

PACK_VERSION = 1


def frac_power(alpha: float, beta: float, sigma: float = math.pi * 0.999) -> HFunction:
    """lambda^alpha / (1 + lambda)^beta on a sector."""
    if not (0 < alpha < beta):
        raise ValueError("need 0 < alpha < beta for two-sided decay")

    def ev(lam, a=alpha, b=beta):
        return np.exp(a * np.log(lam)) / (1.0 + lam) ** b

    return HFunction(f"frac_power({alpha:g},{beta:g})", ev, ("sector", sigma),
                     cls="H0", decay=(alpha, beta - alpha))


def rational_bump(scale: float = 1.0, sigma: float = math.pi * 0.999) -> HFunction:
    """lambda scale / (scale + lambda)^2, the workhorse regularizing bump."""
    def ev(lam, s=scale):
        return lam * s / (s + lam) ** 2

    return HFunction(f"rational_bump({scale:g})", ev, ("sector", sigma),
                     cls="H0", decay=(1.0, 1.0))


def g_beta(beta: float, sigma: float = math.pi / 2 * 0.999) -> HFunction:
    """lambda^beta e^{-lambda}, the Paley-Littlewood symbol (sector < pi/2)."""
    if beta <= 0:
        raise ValueError("beta must be positive")

    def ev(lam, b=beta):
        return np.exp(b * np.log(lam)) * np.exp(-lam)

    return HFunction(f"g_beta({beta:g})", ev, ("sector", sigma),
                     cls="H0", decay=(beta, 1.0))


def exp_group(t: float, half_width: float) -> HFunction:
    """e^{t lambda} on a strip: the group symbol, sup norm e^{|t| a}."""
    def ev(lam, t=t):
        return np.exp(t * lam)

    return HFunction(f"exp_group({t:g})", ev, ("strip", half_width),
                     cls="Hinf", decay=(0.0, 0.0))


def strip_rational(poles, half_width: float, gain: complex = 1.0) -> HFunction:
    """gain / prod (lambda - p_j) with poles off the strip; decay >= 2 needs >= 2 poles."""
    poles = [complex(p) for p in poles]
    if len(poles) < 2:
        raise ValueError("need at least two poles for H0 decay on a strip")
    for p in poles:
        if abs(p.real) <= half_width:
            raise ValueError(f"pole {p} lies inside the strip")

    def ev(lam, ps=tuple(poles), g=gain):
        out = np.full_like(np.asarray(lam, dtype=complex), g)
        for p in ps:
            out = out / (lam - p)
        return out

    return HFunction(f"strip_rational(deg={len(poles)})", ev,
                     ("strip", half_width), cls="H0",
                     decay=(float(len(poles)), float(len(poles))))


def imag_power(s: float, sigma: float) -> HFunction:
    """lambda^{is}: bounded on the sector with sup norm e^{|s| sigma}."""
    def ev(lam, s=s):
        return np.exp(1j * s * np.log(lam))

    return HFunction(f"imag_power({s:g})", ev, ("sector", sigma),
                     cls="Hinf", decay=(0.0, 0.0))


def sector_blaschke(z0: complex, sigma: float, taper: float = 0.08,
                    taper_scale: float = 1.0) -> HFunction:
    """Conformal Blaschke factor of the sector vanishing at z0, softly tapered.

    Modulus ~1 on the boundary while the derivative near z0 scales like
    pi/(4 sigma); the extremal shape for derivative-stressed calculus
    constants (nilpotent parts of non-normal operators).
    """
    k = math.pi / (2.0 * sigma)

    def cayley(lam):
        w = np.exp(k * np.log(lam))
        return (w - 1.0) / (w + 1.0)

    c0 = complex(cayley(np.asarray([z0], dtype=complex))[0])

    def ev(lam, c0=c0, e=taper, r=taper_scale):
        b = (cayley(lam) - c0) / (1.0 - np.conj(c0) * cayley(lam))
        soft = np.exp(e * (np.log(lam) + math.log(r) - 2.0 * np.log(lam + r)))
        return b * soft

    return HFunction(f"blaschke(z0={z0:.3g})", ev, ("sector", sigma),
                     cls="H0", decay=(taper, taper))


def strip_h1_from_frac_power(alpha: float, beta: float,
                             half_width: float) -> HFunction:
    """The strip transplant of lambda^alpha (1+lambda)^{-beta}: evaluated at
    e^{i mu} through a branch-stable log1p, so huge |Im mu| underflows to 0
    instead of overflowing."""
    if not (0 < alpha < beta):
        raise ValueError("need 0 < alpha < beta")

    def stable_log1p_exp(z):
        # log(1 + e^z) without overflow for Re z >> 0
        out = np.empty_like(z)
        big = z.real > 30.0
        out[big] = z[big] + np.log1p(np.exp(-z[big]))
        out[~big] = np.log1p(np.exp(z[~big]))
        return out

    def ev(mu, a=alpha, b=beta):
        z = 1j * np.asarray(mu, dtype=complex)
        return np.exp(a * z - b * stable_log1p_exp(z))

    return HFunction(f"strip_frac_power({alpha:g},{beta:g})", ev,
                     ("strip", half_width), cls="H1", decay=(1.0, 1.0))


_REGISTRY = {
    "frac_power": frac_power,
    "rational_bump": rational_bump,
    "g_beta": g_beta,
    "exp_group": exp_group,
    "strip_rational": strip_rational,
    "imag_power": imag_power,
}


def make(name: str, **params) -> HFunction:
    if name not in _REGISTRY:
        raise KeyError(f"unknown registry function {name!r}; "
                       f"known: {sorted(_REGISTRY)}")
    return _REGISTRY[name](**params)


def sector_test_pack(sigma: float, size: int = 50, seed: int = 0,
                     radius_window: tuple = (0.05, 20.0),
                     min_decay: float = 0.05, max_degree: int = 6,
                     pole_clearance: float = 0.1) -> list[HFunction]:
    """Seeded H0 pack on the sector |arg| < sigma.

    Three member shapes: soft peaks (lambda r)^eps / (lambda + r)^{2 eps} whose
    small exponent makes the boundary sup nearly attained on the positive
    axis; rational functions lambda^m prod(lambda - zero) / prod(lambda +
    pole) with poles reflected outside the sector; and pole-stressed members
    whose poles approach the sector boundary within ``pole_clearance`` (in
    angle), exercising derivative growth.
    """
    rng = np.random.default_rng(seed)
    pack: list[HFunction] = []
    r_lo, r_hi = radius_window

    def soft_peak(r, eps):
        def ev(lam, r=r, e=eps):
            return np.exp(e * (np.log(lam) + math.log(r) - 2.0 * np.log(lam + r)))
        return HFunction(f"soft_peak(r={r:.3g},eps={eps:.3g})", ev,
                         ("sector", sigma), cls="H0", decay=(eps, eps))

    def rational(m, zeros, poles):
        def ev(lam, m=m, zs=tuple(zeros), ps=tuple(poles)):
            out = np.exp(m * np.log(lam))
            for z in zs:
                out = out * (lam - z) / (abs(z) + 1.0)
            for p in ps:
                out = out / (lam + p)
            return out
        q = len(poles)
        return HFunction(f"rational(m={m},q={q})", ev, ("sector", sigma),
                         cls="H0", decay=(float(m), float(q - m - len(zeros))))

    while len(pack) < size:
        shape = len(pack) % 4
        if shape == 0:
            r = float(rng.uniform(r_lo, r_hi))
            eps = float(rng.uniform(min_decay, 4 * min_decay))
            pack.append(soft_peak(r, eps))
        elif shape == 1:
            q = int(rng.integers(2, max_degree + 1))
            m = int(rng.integers(1, q))
            n_zeros = int(rng.integers(0, max(min(q - m - 1, max_degree - q), 0) + 1))
            # pole at -p with |arg p| < pi - sigma keeps -p outside the sector
            phis = rng.uniform(-(math.pi - sigma) * 0.9, (math.pi - sigma) * 0.9, q)
            rads = np.exp(rng.uniform(math.log(r_lo), math.log(r_hi), q))
            poles = rads * np.exp(1j * phis)
            zeros = (np.exp(rng.uniform(math.log(r_lo), math.log(r_hi), n_zeros))
                     * np.exp(1j * rng.uniform(-sigma, sigma, n_zeros)))
            pack.append(rational(m, zeros, poles))
        elif shape == 2:
            # derivative stress: double pole just outside the boundary ray
            r = float(rng.uniform(r_lo, r_hi))
            gap = pole_clearance * (1.0 + float(rng.uniform(0, 1)))
            ang = math.pi - min(sigma + gap, math.pi * 0.999)
            pole = r * np.exp(1j * ang * float(rng.choice([-1.0, 1.0])))
            pack.append(rational(1, [], [pole, pole.conjugate()]))
        else:
            r = float(np.exp(rng.uniform(math.log(r_lo), math.log(r_hi))))
            z0 = r * np.exp(1j * rng.uniform(-0.5, 0.5) * sigma)
            pack.append(sector_blaschke(complex(z0), sigma,
                                        taper=min_decay, taper_scale=r))
    return pack[:size]


def strip_test_pack(half_width: float, size: int = 50, seed: int = 0,
                    pole_clearance: float = 0.1, max_degree: int = 6,
                    group_times: tuple = ()) -> list[HFunction]:
    """Seeded H0 pack on the strip |Re| < half_width, plus optional e^{t lambda}
    members tying the calculus back to the group."""
    rng = np.random.default_rng(seed)
    pack: list[HFunction] = [exp_group(t, half_width) for t in group_times]
    while len(pack) < size:
        q = int(rng.integers(2, max_degree + 1))
        side = rng.choice([-1.0, 1.0], size=q)
        re = side * (half_width + pole_clearance
                     + np.exp(rng.uniform(math.log(0.2), math.log(5.0), q)))
        im = rng.uniform(-8.0, 8.0, q)
        gain = np.prod(np.abs(re + 1j * im)) * complex(np.exp(2j * math.pi * rng.uniform()))
        pack.append(strip_rational(re + 1j * im, half_width, gain=gain))
    return pack[:size]
