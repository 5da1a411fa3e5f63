r"""Whitham-Broer-Kaup family and its two shallow-water reductions.

The coupled system is

.. math::

    D_t^\alpha u + u u_x + v_x + b u_{xx} = 0, \qquad
    D_t^\alpha v + u v_x + v u_x + a u_{xxx} - b v_{xx} = 0 .

For ``a + b**2 > 0`` it admits the travelling kink

.. math::

    u = \omega - 2\ell\beta \coth\xi, \qquad
    v = -2\ell^2 \beta(\beta + b) \operatorname{csch}^2\xi, \qquad
    \xi = \ell(x + c - \omega t), \quad \beta = \sqrt{a + b^2},

which is exact for ``alpha = 1``. The modified Boussinesq preset is
``(a, b) = (1, 0)``; the approximate long wave preset is ``(a, b) = (0, 1/2)``.
The ALW preset's first equation carries ``(1/2) u_xx``, as the general
system above requires. A variant with ``(1/2) v_xx`` in that equation is
sometimes quoted; it does not admit the kink above and is not supported.
Some texts also describe ALW as ``b = 1``; the kink and the reference
iterates both use ``b = 1/2``, so ``"wbk"`` with ``b=1`` covers the other
reading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .specialfn import gamma

__all__ = [
    "ModelSpec",
    "wbk_model",
    "mb_model",
    "alw_model",
    "get_model",
    "golden_iterates",
    "REFERENCE_PARAMETERS",
    "POLE_GUARD",
]

#: Wave parameters shared by both reference configurations.
REFERENCE_PARAMETERS = {"omega": 0.005, "ell": 0.1, "c": 10.0}

#: Grid points with ``|sinh(ell (x + c))|`` below this are rejected.
POLE_GUARD = 1e-6


def _coth(z):
    return np.cosh(z) / np.sinh(z)


def _csch(z):
    return 1.0 / np.sinh(z)


@dataclass(frozen=True)
class ModelSpec:
    """Coefficients, initial data and (classical-order) exact solution of one system."""

    name: str
    a: float
    b: float
    omega: float
    ell: float
    c: float
    u0: Callable = field(repr=False)
    v0: Callable = field(repr=False)
    exact_u: Optional[Callable] = field(default=None, repr=False)
    exact_v: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if self.ell == 0:
            raise DomainError("ell must be nonzero")
        for key in ("a", "b", "omega", "ell", "c"):
            if not math.isfinite(getattr(self, key)):
                raise DomainError(f"{key} must be finite")

    @property
    def has_exact(self) -> bool:
        return self.exact_u is not None and self.exact_v is not None

    def singular_mask(self, x: np.ndarray) -> np.ndarray:
        """True where ``x`` sits on (or next to) the pole at ``x = -c``."""
        return np.abs(np.sinh(self.ell * (np.asarray(x, dtype=float) + self.c))) < POLE_GUARD

    def derivative_orders(self) -> tuple[int, ...]:
        """Spatial derivative orders the recurrence needs for this model."""
        orders = [1]
        if self.b != 0:
            orders.append(2)
        if self.a != 0:
            orders.append(3)
        return tuple(orders)


def wbk_model(a: float, b: float, omega: float, ell: float, c: float, name: str = "wbk") -> ModelSpec:
    """General WBK system with the travelling-kink initial data.

    Raises
    ------
    DomainError
        If ``ell == 0`` or ``a + b**2 <= 0`` (no real kink exists).
    """
    if ell == 0:
        raise DomainError("ell must be nonzero")
    disc = a + b * b
    if not disc > 0:
        raise DomainError(f"a + b**2 must be positive for the kink solution, got {disc}")
    beta = math.sqrt(disc)
    amp_u = 2.0 * ell * beta
    amp_v = 2.0 * ell * ell * beta * (beta + b)

    def u0(x):
        return omega - amp_u * _coth(ell * (np.asarray(x, dtype=float) + c))

    def v0(x):
        return -amp_v * _csch(ell * (np.asarray(x, dtype=float) + c)) ** 2

    def exact_u(x, t):
        return omega - amp_u * _coth(ell * (np.asarray(x, dtype=float) + c - omega * t))

    def exact_v(x, t):
        return -amp_v * _csch(ell * (np.asarray(x, dtype=float) + c - omega * t)) ** 2

    return ModelSpec(name, float(a), float(b), float(omega), float(ell), float(c), u0, v0, exact_u, exact_v)


def mb_model(omega: float = 0.005, ell: float = 0.1, c: float = 10.0) -> ModelSpec:
    """Modified Boussinesq: ``a = 1, b = 0``, ``u0 = omega - 2 ell coth(ell (x + c))``."""
    return wbk_model(1.0, 0.0, omega, ell, c, name="mb")


def alw_model(omega: float = 0.005, ell: float = 0.1, c: float = 10.0) -> ModelSpec:
    """Approximate long wave: ``a = 0, b = 1/2``, ``u0 = omega - ell coth(ell (x + c))``."""
    return wbk_model(0.0, 0.5, omega, ell, c, name="alw")


def get_model(name: str, **overrides) -> ModelSpec:
    """Look up a preset by name (``"mb"``, ``"alw"`` or ``"wbk"``).

    ``omega``, ``ell`` and ``c`` may be overridden for every preset; ``a`` and
    ``b`` only for ``"wbk"`` (defaults ``a = 1, b = 0``).
    """
    params = dict(REFERENCE_PARAMETERS)
    unknown = set(overrides) - {"omega", "ell", "c", "a", "b"}
    if unknown:
        raise DomainError(f"unknown model parameter(s): {', '.join(sorted(unknown))}")
    key = name.lower()
    if key in ("mb", "alw"):
        fixed = {"a", "b"} & set(overrides)
        if fixed:
            raise DomainError(f"{', '.join(sorted(fixed))} is fixed for preset {key!r}; use 'wbk'")
        params.update(overrides)
        return (mb_model if key == "mb" else alw_model)(**params)
    if key == "wbk":
        a = overrides.pop("a", 1.0)
        b = overrides.pop("b", 0.0)
        params.update(overrides)
        return wbk_model(a, b, **params)
    raise DomainError(f"unknown model {name!r}; expected 'mb', 'alw' or 'wbk'")


# Reference closed forms of the first three iterates. The t^{2 alpha} term of
# the reference v3 carries ell^5 omega where the recurrence produces
# ell^4 omega^2; the ``corrected`` flag swaps in the latter.


def _mb_golden(m, hb, n, al, ell, om, c, corrected):
    g1, g2, g3 = gamma(al + 1), gamma(2 * al + 1), gamma(3 * al + 1)

    def fu(x, t):
        z = ell * (np.asarray(x, dtype=float) + c)
        cs, ct = _csch(z), _coth(z)
        t1, t2, t3 = t**al, t ** (2 * al), t ** (3 * al)
        if m == 1:
            return 2 * hb * ell**2 * om * cs**2 * t1 / g1
        if m == 2:
            return (2 * (n + hb) * hb * ell**2 * om * cs**2 * t1 / g1
                    - 4 * hb**2 * ell**3 * om**2 * ct * cs**2 * t2 / g2)
        return (2 * (hb + n) ** 2 * hb * ell**2 * om * cs**2 * t1 / g1
                - 8 * (hb + n) * hb**2 * ell**3 * om**2 * ct * cs**2 * t2 / g2
                + 2 * hb**3 * ell**4 * om**2 * cs**5 * t3 / (g1**2 * g3)
                * (-4 * ell * np.cosh(z) * g2
                   + g1**2 * (8 * ell * np.cosh(z) + om * (3 * np.sinh(z) + np.sinh(3 * z)))))

    def fv(x, t):
        z = ell * (np.asarray(x, dtype=float) + c)
        cs, ct = _csch(z), _coth(z)
        t1, t2, t3 = t**al, t ** (2 * al), t ** (3 * al)
        if m == 1:
            return 4 * hb * ell**3 * om * ct * cs**2 * t1 / g1
        if m == 2:
            return (4 * (n + hb) * hb * ell**3 * om * ct * cs**2 * t1 / g1
                    - 4 * hb**2 * ell**4 * om**2 * (2 + np.cosh(2 * z)) * cs**4 * t2 / g2)
        mid = ell**4 * om**2 if corrected else ell**5 * om
        return (4 * (hb + n) ** 2 * hb * ell**3 * om * ct * cs**2 * t1 / g1
                - 8 * (hb + n) * hb**2 * mid * (2 + np.cosh(2 * z)) * cs**4 * t2 / g2
                + 2 * hb**3 * ell**5 * om**2 * cs**6 * t3 / (g1**2 * g3)
                * (-4 * ell * (3 + 2 * np.cosh(2 * z)) * g2
                   + g1**2 * (24 * ell + 16 * ell * np.cosh(2 * z)
                              + 10 * om * np.sinh(2 * z) + om * np.sinh(4 * z))))

    return fu, fv


def _alw_golden(m, hb, n, al, ell, om, c, corrected):
    g1, g2, g3 = gamma(al + 1), gamma(2 * al + 1), gamma(3 * al + 1)

    def fu(x, t):
        z = ell * (np.asarray(x, dtype=float) + c)
        cs, ct = _csch(z), _coth(z)
        t1, t2, t3 = t**al, t ** (2 * al), t ** (3 * al)
        if m == 1:
            return hb * ell**2 * om * cs**2 * t1 / g1
        if m == 2:
            return ((n + hb) * hb * ell**2 * om * cs**2 * t1 / g1
                    - 2 * hb**2 * ell**3 * om**2 * ct * cs**2 * t2 / g2)
        return ((hb + n) ** 2 * hb * ell**2 * om * cs**2 * t1 / g1
                - 4 * (hb + n) * hb**2 * ell**3 * om**2 * ct * cs**2 * t2 / g2
                + hb**3 * ell**4 * t3 * om**2 * cs**5 / (g1**2 * g3)
                * (-2 * ell * np.cosh(z) * g2
                   + g1**2 * (4 * ell * np.cosh(z) + om * (3 * np.sinh(z) + np.sinh(3 * z)))))

    def fv(x, t):
        z = ell * (np.asarray(x, dtype=float) + c)
        cs, ct = _csch(z), _coth(z)
        t1, t2, t3 = t**al, t ** (2 * al), t ** (3 * al)
        if m == 1:
            return 2 * hb * ell**3 * om * ct * cs**2 * t1 / g1
        if m == 2:
            return (2 * (n + hb) * hb * ell**3 * om * ct * cs**2 * t1 / g1
                    - 2 * hb**2 * ell**4 * om**2 * (2 + np.cosh(2 * z)) * cs**4 * t2 / g2)
        mid = ell**4 * om**2 if corrected else ell**5 * om
        return (2 * (hb + n) ** 2 * hb * ell**3 * om * ct * cs**2 * t1 / g1
                - 4 * (hb + n) * hb**2 * mid * t2 * (2 + np.cosh(2 * z)) * cs**4 / g2
                + hb**3 * ell**5 * t3 * om**2 * cs**6 / (g1**2 * g3)
                * (-2 * ell * (3 + 2 * np.cosh(2 * z)) * g2
                   + g1**2 * (12 * ell + 8 * ell * np.cosh(2 * z)
                              + 10 * om * np.sinh(2 * z) + om * np.sinh(4 * z))))

    return fu, fv


def golden_iterates(model: ModelSpec, params, m: int, corrected: bool = False):
    """Closed-form ``(u_m, v_m)`` evaluators of ``(x, t)`` for the two presets.

    ``params`` supplies ``alpha``, ``hbar`` and ``n``. With ``corrected=False``
    the reference formulas are used verbatim, including the ``ell**5 * omega``
    factor in ``v_3`` that disagrees with the recurrence; ``corrected=True``
    uses ``ell**4 * omega**2`` there.

    Raises
    ------
    DomainError
        For a model other than ``"mb"``/``"alw"`` or ``m`` outside 1..3.
    """
    if m not in (1, 2, 3):
        raise DomainError(f"closed forms exist only for m = 1, 2, 3, got {m}")
    builders = {"mb": _mb_golden, "alw": _alw_golden}
    if model.name not in builders:
        raise DomainError(f"no closed-form iterates for model {model.name!r}")
    return builders[model.name](
        m, float(params.hbar), float(params.n), float(params.alpha),
        model.ell, model.omega, model.c, corrected,
    )
