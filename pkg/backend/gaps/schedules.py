"""Radial approach schedules ``alpha_k = x0 + t_k (z - x0)`` with ``t_k`` decreasing to 1."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from common.defaults import get_default
from common.exceptions import InvalidPoleError, ParameterError, PreconditionError


@dataclass(frozen=True)
class ApproachSchedule:
    """
    Geometric schedule ``t_k = 1 + (t0 - 1) q**k`` for ``k = 0 .. count - 1``.

    A template carries only ``(t0, q, count)``; ``toward(x0, z)`` binds it to
    an interior point and a touching point.
    """

    t0: float = 1.2
    q: float = 0.5
    count: int = 8
    x0: tuple = None
    z: tuple = None

    def __post_init__(self):
        if not self.t0 > 1:
            raise ParameterError(f't0 must exceed 1, got {self.t0}')
        if not 0 < self.q < 1:
            raise ParameterError(f'q must lie in (0, 1), got {self.q}')
        if int(self.count) != self.count or self.count < 4:
            raise PreconditionError(f'a schedule needs at least 4 poles, got {self.count}')

    @classmethod
    def from_settings(cls, key='SCHEDULE', **overrides):
        params = dict(get_default(key))
        params.update({k: v for k, v in overrides.items() if v is not None})
        return cls(t0=float(params['t0']), q=float(params['q']), count=int(params['count']))

    @property
    def factors(self):
        return 1.0 + (self.t0 - 1.0) * self.q ** np.arange(self.count)

    @property
    def step_ratio(self):
        """Ratio by which ``t - 1`` shrinks between samples, for Richardson tables."""
        return 1.0 / self.q

    def toward(self, x0, z):
        x0 = tuple(float(v) for v in np.asarray(x0, dtype=float))
        z = tuple(float(v) for v in np.asarray(z, dtype=float))
        return replace(self, x0=x0, z=z)

    def poles(self):
        if self.x0 is None or self.z is None:
            raise PreconditionError('schedule is not bound to a touching point; call toward(x0, z)')
        x0, z = np.asarray(self.x0), np.asarray(self.z)
        return x0 + self.factors[:, None] * (z - x0)

    def check_exterior(self, spec):
        """Raise ``InvalidPoleError`` unless every pole is outside the closed domain."""
        poles = self.poles()
        inside = spec.closure_contains(poles)
        if inside.any():
            k = int(np.flatnonzero(inside)[0])
            raise InvalidPoleError(f'schedule pole {k} at {poles[k].tolist()} is not exterior to the {spec.kind}')
        return poles
