"""Numerical substrate: constants, thermal factors, roots, exponential sums, quadrature.

Every causal kernel in the package is carried as an :class:`ExpSum`,
``f(t) = sum_j c_j t**k_j exp(s_j t)`` for ``t >= 0``.  Poles are stored as
``s_j = 1j*carrier_j + offset_j`` so that kernels whose poles sit within a
few ulp of a large imaginary frequency (the weakly damped internal mode)
keep their damping rate to full relative precision.  Whenever a frequency
is supplied as ``carrier + offset`` the carrier cancels exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import constants as _sc
from scipy import integrate

__all__ = [
    "PhysConstants",
    "CONST",
    "DomainError",
    "NumericalError",
    "QuadratureError",
    "ExpSum",
    "QuadratureSpec",
    "roots",
    "exp_sum_eval",
    "convolve",
    "windowed_fourier",
    "windowed_fourier_parts",
    "quad_adaptive",
    "thermal_coth",
    "bose_occupation",
]


class DomainError(ValueError):
    """Argument outside the documented domain of an operation."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed; carries whatever it managed to compute."""

    def __init__(self, message: str, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class QuadratureError(NumericalError):
    pass


@dataclass(frozen=True)
class PhysConstants:
    hbar: float = _sc.hbar
    c: float = _sc.c
    eps0: float = _sc.epsilon_0
    kB: float = _sc.k


CONST = PhysConstants()


# --------------------------------------------------------------------------
# thermal factors


def thermal_coth(beta, omega, hbar: float = CONST.hbar):
    """coth(beta*hbar*omega/2), written as 1 + 2/expm1(beta*hbar*omega)."""
    beta = np.asarray(beta, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0) or np.any(beta <= 0):
        raise DomainError("thermal_coth needs omega > 0 and beta > 0")
    x = beta * hbar * omega
    with np.errstate(over="ignore"):
        out = 1.0 + 2.0 / np.expm1(x)
    return out if out.ndim else float(out)


def bose_occupation(T, omega, hbar: float = CONST.hbar, kB: float = CONST.kB):
    """Mean occupation 1/(exp(hbar*omega/kB*T) - 1)."""
    T = np.asarray(T, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if np.any(T <= 0):
        raise DomainError("temperature must be positive")
    if np.any(omega <= 0):
        raise DomainError("bose_occupation needs omega > 0")
    x = hbar * omega / (kB * T)
    with np.errstate(over="ignore"):
        out = 1.0 / np.expm1(x)
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# polynomial roots


def roots(coeffs: Sequence[float], polish_steps: int = 8) -> np.ndarray:
    """Roots of ``coeffs[0]*s**n + ... + coeffs[n]`` (highest power first).

    Companion-matrix eigenvalues, each polished by a few Newton steps.
    Returns exactly ``n`` roots counted with multiplicity.
    """
    a = np.trim_zeros(np.asarray(coeffs, dtype=complex), "f")
    if a.size == 0:
        raise DomainError("empty polynomial")
    n = a.size - 1
    if n == 0:
        return np.zeros(0, dtype=complex)
    a = a / a[0]
    comp = np.zeros((n, n), dtype=complex)
    comp[0, :] = -a[1:]
    comp[1:, :-1] = np.eye(n - 1)
    r = np.linalg.eigvals(comp)
    da = np.polyder(a)
    for i in range(n):
        z = r[i]
        for _ in range(polish_steps):
            p = np.polyval(a, z)
            dp = np.polyval(da, z)
            if dp == 0 or p == 0:
                break
            step = p / dp
            z_new = z - step
            if abs(np.polyval(a, z_new)) >= abs(p):
                break
            z = z_new
        r[i] = z
    # a multiple root splits into a cluster of size ~eps**(1/m); collapse it
    for i in range(n):
        for j in range(i + 1, n):
            if abs(r[i] - r[j]) < 1e-6 * max(1.0, abs(r[i])):
                r[i] = r[j] = 0.5 * (r[i] + r[j])
    return r[np.lexsort((r.imag, r.real))]


# --------------------------------------------------------------------------
# exponential sums


def _as_array(x, dtype) -> np.ndarray:
    arr = np.array(x, dtype=dtype).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ExpSum:
    """Causal kernel sum_j c_j t**k_j exp((1j*carrier_j + offset_j) t)."""

    residues: np.ndarray
    offsets: np.ndarray
    carriers: np.ndarray = field(default=None)
    powers: np.ndarray = field(default=None)
    runaway: bool = False

    def __post_init__(self):
        res = _as_array(self.residues, complex)
        off = _as_array(self.offsets, complex)
        car = np.zeros(off.size) if self.carriers is None else self.carriers
        pw = np.zeros(off.size, dtype=int) if self.powers is None else self.powers
        car = _as_array(car, float)
        pw = _as_array(pw, int)
        if not (res.size == off.size == car.size == pw.size):
            raise DomainError("ExpSum arrays must have equal length")
        if res.size == 0:
            raise DomainError("ExpSum needs at least one term")
        object.__setattr__(self, "residues", res)
        object.__setattr__(self, "offsets", off)
        object.__setattr__(self, "carriers", car)
        object.__setattr__(self, "powers", pw)
        if not self.runaway and np.any(off.real > 0):
            raise DomainError("unstable pole in a kernel not flagged as runaway")

    @classmethod
    def from_poles(cls, residues, poles, powers=None, runaway=False) -> "ExpSum":
        return cls(residues, poles, None, powers, runaway)

    @property
    def poles(self) -> np.ndarray:
        return self.offsets + 1j * self.carriers

    def __len__(self) -> int:
        return self.residues.size

    def scaled(self, factor: complex) -> "ExpSum":
        return ExpSum(self.residues * factor, self.offsets, self.carriers, self.powers, self.runaway)

    def derivative(self) -> "ExpSum":
        """Pointwise derivative for t > 0 (no delta from the jump at t = 0)."""
        res, off, car, pw = [], [], [], []
        s = self.poles
        for c, o, v, k, p in zip(self.residues, self.offsets, self.carriers, self.powers, s):
            res.append(c * p)
            off.append(o)
            car.append(v)
            pw.append(k)
            if k > 0:
                res.append(c * k)
                off.append(o)
                car.append(v)
                pw.append(k - 1)
        return _collect(res, off, car, pw, self.runaway)

    def __add__(self, other: "ExpSum") -> "ExpSum":
        return _collect(
            np.concatenate([self.residues, other.residues]),
            np.concatenate([self.offsets, other.offsets]),
            np.concatenate([self.carriers, other.carriers]),
            np.concatenate([self.powers, other.powers]),
            self.runaway or other.runaway,
        )

    def slowest_rate(self) -> float:
        """Magnitude of the largest (least negative) real part among the poles."""
        return float(abs(np.max(self.offsets.real)))


def _collect(res, off, car, pw, runaway=False) -> ExpSum:
    """Merge terms sharing the exact same pole and power."""
    acc: dict = {}
    for c, o, v, k in zip(res, off, car, pw):
        key = (complex(o), float(v), int(k))
        acc[key] = acc.get(key, 0j) + complex(c)
    keys = list(acc)
    return ExpSum(
        [acc[k] for k in keys],
        [k[0] for k in keys],
        [k[1] for k in keys],
        [k[2] for k in keys],
        runaway,
    )


def _phase(offsets, carriers, t):
    return np.exp(offsets * t) * np.exp(1j * (carriers * t))


def exp_sum_eval(f: ExpSum, t, deriv_order: int = 0):
    """Value (or 1st/2nd derivative) of an ExpSum; zero for t < 0."""
    if deriv_order not in (0, 1, 2):
        raise DomainError("deriv_order must be 0, 1 or 2")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros(t_arr.shape)
    pos = t_arr >= 0
    if np.any(pos):
        tt = t_arr[pos][:, None]
        s = f.poles[None, :]
        k = f.powers[None, :]
        e = _phase(f.offsets[None, :], f.carriers[None, :], tt)
        total = np.zeros_like(e)
        # d^n/dt^n [t^k e^{st}] = sum_m C(n,m) k!/(k-m)! t^{k-m} s^{n-m} e^{st}
        for m in range(deriv_order + 1):
            ff = np.ones_like(k, dtype=float)
            for j in range(m):
                ff = ff * (k - j)
            tk = np.where(k - m >= 0, tt ** np.maximum(k - m, 0), 0.0)
            total = total + math.comb(deriv_order, m) * ff * tk * s ** (deriv_order - m)
        vals = (f.residues[None, :] * total * e).sum(axis=1)
        out[pos] = vals.real
    return out if np.ndim(t) else float(out[0])


def _pf_coeffs(a: int, b: int, d: complex):
    """Partial fractions of 1/((s-p)^a (s-q)^b) with d = p - q.

    Returns (A, B): A[m-1] multiplies 1/(s-p)^m, B[n-1] multiplies 1/(s-q)^n.
    """
    A = []
    for m in range(1, a + 1):
        j = a - m
        rising = math.prod(range(b, b + j)) if j else 1
        A.append((-1) ** j * rising / math.factorial(j) * d ** (-b - j))
    B = []
    for n in range(1, b + 1):
        j = b - n
        rising = math.prod(range(a, a + j)) if j else 1
        B.append((-1) ** j * rising / math.factorial(j) * (-d) ** (-a - j))
    return A, B


def convolve(f: ExpSum, g: ExpSum, rtol: float = 1e-9) -> ExpSum:
    """Closed-form (f*g)(t) = int_0^t f(t-u) g(u) du.

    Pole pairs closer than ``rtol*max(|p|,|q|)`` are treated as one pole of
    the combined order (secular t**k terms).
    """
    res, off, car, pw = [], [], [], []
    fp, gp = f.poles, g.poles
    for ci, oi, vi, ki, pi in zip(f.residues, f.offsets, f.carriers, f.powers, fp):
        for dj, oj, vj, kj, qj in zip(g.residues, g.offsets, g.carriers, g.powers, gp):
            a, b = int(ki) + 1, int(kj) + 1
            w = ci * dj * math.factorial(a - 1) * math.factorial(b - 1)
            diff = 1j * (vi - vj) + (oi - oj)
            scale = max(abs(pi), abs(qj), 1e-300)
            if abs(diff) <= rtol * scale:
                n = a + b
                res.append(w / math.factorial(n - 1))
                off.append(oi)
                car.append(vi)
                pw.append(n - 1)
                continue
            A, B = _pf_coeffs(a, b, diff)
            for m, coef in enumerate(A, start=1):
                res.append(w * coef / math.factorial(m - 1))
                off.append(oi)
                car.append(vi)
                pw.append(m - 1)
            for n, coef in enumerate(B, start=1):
                res.append(w * coef / math.factorial(n - 1))
                off.append(oj)
                car.append(vj)
                pw.append(n - 1)
    return _collect(res, off, car, pw, f.runaway or g.runaway)


def _sigma(f: ExpSum, omega, carrier: float):
    # s_j + i*omega_total with omega_total = carrier + omega; carriers cancel exactly
    omega = np.asarray(omega, dtype=float)[..., None]
    return f.offsets + 1j * ((f.carriers + carrier) + omega)


def _window_integral(sig, k, t):
    """int_0^t u^k exp(sig*u) du, stable for small |sig*t|."""
    z = sig * t
    small = np.abs(z) < 0.5
    out = np.empty(np.broadcast(sig, k).shape, dtype=complex)
    zs = np.where(small, z, 0.0)
    # series t^{k+1} sum_n z^n / (n! (n+k+1))
    ser = np.zeros_like(out)
    term = np.ones_like(out)
    for n in range(30):
        ser = ser + term / (n + k + 1)
        term = term * zs / (n + 1)
    ser = ser * t ** (k + 1)
    zl = np.where(small, 1.0, z)
    sl = np.where(small, 1.0, sig)
    big = np.where(k == 0, np.expm1(zl) / sl, 0.0 + 0j)
    kmax = int(np.max(k)) if np.size(k) else 0
    if kmax > 0:
        A, B = _parts_poly(sl, k, t)
        big = np.where(k == 0, big, np.exp(zl) * A - B)
    return np.where(small, ser, big)


def _parts_poly(sig, k, t):
    # int_0^t u^k e^{su} du = e^{st} sum_m (-1)^m k!/(k-m)! t^{k-m}/s^{m+1} - (-1)^k k!/s^{k+1}
    k = np.broadcast_to(k, np.broadcast(sig, k).shape)
    A = np.zeros(k.shape, dtype=complex)
    kmax = int(np.max(k)) if k.size else 0
    for m in range(kmax + 1):
        valid = k >= m
        fall = np.ones(k.shape)
        for j in range(m):
            fall = fall * (k - j)
        tk = t ** np.maximum(k - m, 0)
        A = A + np.where(valid, (-1) ** m * fall * tk / sig ** (m + 1), 0.0)
    fact = np.array([math.factorial(int(x)) for x in k.reshape(-1)], dtype=float).reshape(k.shape)
    B = (-1.0) ** k * fact / sig ** (k + 1)
    return A, B


def windowed_fourier(f: ExpSum, omega, t: float, carrier: float = 0.0):
    """Phi(omega, t) = int_0^t f(u) exp(i*omega_total*u) du, omega_total = carrier + omega."""
    if t < 0:
        raise DomainError("window length must be non-negative")
    sig = _sigma(f, omega, carrier)
    if t == 0:
        return np.zeros(sig.shape[:-1], dtype=complex) if sig.ndim > 1 else 0j
    vals = _window_integral(sig, f.powers, t)
    out = (f.residues * vals).sum(axis=-1)
    return out if np.ndim(omega) else complex(out)


def windowed_fourier_parts(f: ExpSum, omega, t: float, carrier: float = 0.0):
    """Split Phi = exp(1j*omega*t) * A - B with A, B free of the exp(1j*omega*t) oscillation.

    Only the offset ``omega`` is factored out; the carrier phase is folded into ``A``.
    Loses relative precision where |s_j + i*omega_total| * t is small.
    """
    sig = _sigma(f, omega, carrier)
    A, B = _parts_poly(sig, f.powers, t)
    pref = np.exp(f.offsets * t) * np.exp(1j * ((f.carriers + carrier) * t))
    Asum = (f.residues * pref * A).sum(axis=-1)
    Bsum = (f.residues * B).sum(axis=-1)
    return Asum, Bsum


# --------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_subdivisions: int = 500
    split_points: tuple = ()

    def __post_init__(self):
        if not (0 < self.rel_tol <= 1e-2):
            raise DomainError("rel_tol must lie in (0, 1e-2]")
        if self.abs_tol < 0:
            raise DomainError("abs_tol must be non-negative")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be positive")
        pts = tuple(float(p) for p in self.split_points)
        if list(pts) != sorted(pts):
            raise DomainError("split_points must be sorted ascending")
        object.__setattr__(self, "split_points", pts)


def _quad_piece(fun, a, b, spec, **kw):
    val, err, *info = integrate.quad(
        fun, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_subdivisions,
        full_output=1, **kw,
    )
    ier = 0
    if len(info) >= 2 and isinstance(info[1], str):
        ier = 1
    return val, err, ier


def quad_adaptive(
    integrand: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec = QuadratureSpec(),
    scale: float | None = None,
) -> float:
    """Adaptive Gauss-Kronrod integral of a real function over [a, b].

    Finite ranges are pre-split at ``spec.split_points``.  For ``b = inf``
    the tail beyond the last split point is mapped through
    ``w = w0 - scale*ln(1-x)`` onto [0, 1); ``scale`` defaults to the largest
    split point (or 1).
    """
    if not b > a:
        if b == a:
            return 0.0
        raise DomainError("need b > a")
    inner = [p for p in spec.split_points if a < p < b]
    edges = [a, *inner] if math.isinf(b) else [a, *inner, b]
    total, err, bad = 0.0, 0.0, False
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e, ier = _quad_piece(integrand, lo, hi, spec)
        total, err, bad = total + v, err + e, bad or ier
    if math.isinf(b):
        w0 = edges[-1]
        lam = scale if scale is not None else (max(spec.split_points) if spec.split_points else 1.0)
        lam = lam if lam > 0 else 1.0

        def mapped(x):
            if x >= 1.0:
                return 0.0
            return integrand(w0 - lam * math.log1p(-x)) * lam / (1.0 - x)

        v, e, ier = _quad_piece(mapped, 0.0, 1.0, spec)
        total, err, bad = total + v, err + e, bad or ier
    tol = max(spec.rel_tol * abs(total), spec.abs_tol)
    if bad and err > tol:
        raise QuadratureError(
            f"quadrature did not converge: estimate {total:.6e}, error bound {err:.3e}",
            estimate=total, error=err,
        )
    return total
