"""Adaptive Dormand-Prince 5(4) integration of identified latent dynamics.

The right-hand side is always dz/dt = Xi^T theta(z) for a fitted
CoefficientMatrix, so the whole stepper is one compiled kernel with the
library evaluation inlined. No dense output: the stepper truncates its
proposed step to land exactly on every requested time instant, while the
controller keeps the untruncated proposal so grid landings do not destroy
its memory of the accepted step size.

Error control: RMS of the embedded 5th/4th difference scaled by
atol + rtol * |z| kept at or below 1, safety 0.9, step-change factors
clamped to [0.2, 5]. The fifth-order value propagates (local
extrapolation) and the last stage is reused as the next first stage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .dynamics import CoefficientMatrix
from .errors import ConfigError, DomainError, InstabilityError, IntegrationError
from .library import theta_row

FAC_MIN = 0.2
FAC_MAX = 5.0

# classic DOPRI5 tableau
_A = np.zeros((7, 7))
_A[1, 0] = 1 / 5
_A[2, :2] = (3 / 40, 9 / 40)
_A[3, :3] = (44 / 45, -56 / 15, 32 / 9)
_A[4, :4] = (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729)
_A[5, :5] = (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_A[6, :] = _B5  # first-same-as-last
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass(frozen=True)
class OdeSolverConfig:
    rtol: float = 1.0e-6
    atol: float = 1.0e-8
    initial_step: float | None = None  # None: first grid interval
    min_step: float = 1.0e-12
    max_step: float = np.inf
    safety: float = 0.9
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ConfigError(f"tolerances must be positive "
                              f"(rtol={self.rtol}, atol={self.atol})")
        if not 0 < self.min_step <= self.max_step:
            raise ConfigError(f"need 0 < min_step <= max_step, got "
                              f"[{self.min_step}, {self.max_step}]")
        if not 0 < self.safety < 1:
            raise ConfigError(f"safety factor must lie in (0, 1), got {self.safety}")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")


@njit(cache=True)
def _rhs(y, xi, expo, has_sin, has_cos, has_exp, theta, out):
    theta_row(y, expo, has_sin, has_cos, has_exp, theta)
    for i in range(out.shape[0]):
        acc = 0.0
        for j in range(xi.shape[0]):
            acc += xi[j, i] * theta[j]
        out[i] = acc


@njit(cache=True)
def _dopri_kernel(z0, instants, xi, expo, has_sin, has_cos, has_exp,
                  a, b5, e, rtol, atol, h0, hmin, hmax, safety, max_steps):
    n = z0.shape[0]
    Z = np.empty((n, instants.shape[0]))
    Z[:, 0] = z0
    theta = np.empty(xi.shape[0])
    k = np.empty((7, n))
    y = z0.copy()
    y5 = np.empty(n)
    ytmp = np.empty(n)
    _rhs(y, xi, expo, has_sin, has_cos, has_exp, theta, k[0])
    hprop = min(max(h0, hmin), hmax)
    nsteps = 0
    t = instants[0]
    for m in range(1, instants.shape[0]):
        target = instants[m]
        while t < target:
            truncated = t + hprop >= target
            h = target - t if truncated else hprop
            if not truncated and h < hmin:
                return Z, 2, t
            nsteps += 1
            if nsteps > max_steps:
                return Z, 1, t
            for s in range(1, 6):
                for i in range(n):
                    acc = 0.0
                    for j in range(s):
                        acc += a[s, j] * k[j, i]
                    ytmp[i] = y[i] + h * acc
                _rhs(ytmp, xi, expo, has_sin, has_cos, has_exp, theta, k[s])
            for i in range(n):
                acc = 0.0
                for j in range(6):
                    acc += b5[j] * k[j, i]
                y5[i] = y[i] + h * acc
            _rhs(y5, xi, expo, has_sin, has_cos, has_exp, theta, k[6])
            errsq = 0.0
            for i in range(n):
                acc = 0.0
                for j in range(7):
                    acc += e[j] * k[j, i]
                ay = abs(y[i])
                ay5 = abs(y5[i])
                sc = atol + rtol * (ay if ay > ay5 else ay5)
                r = h * acc / sc
                errsq += r * r
            errn = np.sqrt(errsq / n)
            if np.isfinite(errn):
                fac = FAC_MAX if errn == 0.0 else safety * errn ** -0.2
                if fac > FAC_MAX:
                    fac = FAC_MAX
                elif fac < FAC_MIN:
                    fac = FAC_MIN
                if errn <= 1.0:
                    t = target if truncated else t + h
                    for i in range(n):
                        y[i] = y5[i]
                        k[0, i] = k[6, i]
                    grown = h * fac
                    if truncated:
                        if grown > hprop:
                            hprop = grown
                    else:
                        hprop = grown
                    if hprop > hmax:
                        hprop = hmax
                else:
                    hprop = h * fac
            else:
                # non-finite error estimate: shrink hard; once the smallest
                # step still overflows, the state itself has blown up
                if h <= hmin * 1.0000001:
                    return Z, 3, t
                hprop = h * FAC_MIN
                if hprop < hmin:
                    hprop = hmin
        Z[:, m] = y
    return Z, 0, t


def integrate_dopri(fit: CoefficientMatrix, z0, timegrid,
                    config: OdeSolverConfig | None = None) -> np.ndarray:
    """Latent trajectory of dz/dt = Xi^T theta(z) at every grid instant.

    timegrid: a TimeGrid or a 1-D increasing array of instants. Column 0
    of the result is z0 itself.
    """
    cfg = config or OdeSolverConfig()
    instants = np.asarray(timegrid.instants() if hasattr(timegrid, "instants")
                          else timegrid, dtype=np.float64)
    if instants.ndim != 1 or instants.size < 1:
        raise ConfigError("timegrid must supply at least one instant")
    if instants.size > 1 and np.diff(instants).min() <= 0:
        raise ConfigError("time instants must increase strictly")
    spec = fit.spec
    z0 = np.asarray(z0, dtype=np.float64)
    if z0.shape != (spec.latent_dim,):
        raise DomainError(f"initial latent state must have shape "
                          f"({spec.latent_dim},), got {z0.shape}")
    if not np.all(np.isfinite(z0)):
        raise DomainError("non-finite initial latent state")
    if instants.size == 1:
        return z0[:, None].copy()
    h0 = cfg.initial_step if cfg.initial_step is not None \
        else float(instants[1] - instants[0])
    Z, status, t_reached = _dopri_kernel(
        z0, instants, np.ascontiguousarray(fit.xi), spec.exponents(),
        spec.include_sin, spec.include_cos, spec.include_exp,
        _A, _B5, _E, cfg.rtol, cfg.atol, h0, cfg.min_step, cfg.max_step,
        cfg.safety, cfg.max_steps)
    if status == 1:
        raise IntegrationError(f"exceeded max_steps={cfg.max_steps} at t={t_reached:g} "
                               f"of {instants[-1]:g}", t_reached=t_reached)
    if status == 2:
        raise IntegrationError(f"step size underflow below {cfg.min_step:g} at "
                               f"t={t_reached:g}: identified dynamics too stiff",
                               t_reached=t_reached)
    if status == 3:
        raise InstabilityError("identified dynamics blew up (non-finite state) "
                               f"near t={t_reached:g}")
    return Z
