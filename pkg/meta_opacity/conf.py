import typing as T
from dataclasses import dataclass, replace
from fractions import Fraction

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

_NoValue = object()

DEFAULTS: T.Dict[str, T.Any] = {
    "META_OPACITY_MAX_STATES": 5000,
    "META_OPACITY_MAX_SUBSETS": 2**16,
    "META_OPACITY_MAX_SEMILINEAR": 2000,
    "META_OPACITY_ORACLE_GRID": "1/2",
    "META_OPACITY_ORACLE_STEPS": 6,
    "META_OPACITY_ORACLE_HORIZON": "3",
}


def get_setting(name: str, default=_NoValue) -> T.Any:
    result = getattr(settings, name, default)
    if result is _NoValue:
        raise ImproperlyConfigured(f"setting {name} is required")
    return result


def _positive_int(name: str) -> int:
    value = get_setting(name, DEFAULTS[name])
    try:
        value = int(value)
    except (TypeError, ValueError) as e:
        raise ImproperlyConfigured(f"{name} must be an integer") from e
    if value <= 0:
        raise ImproperlyConfigured(f"{name} must be positive, got {value}")
    return value


def _positive_rational(name: str) -> Fraction:
    value = get_setting(name, DEFAULTS[name])
    try:
        value = Fraction(str(value))
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ImproperlyConfigured(f"{name} must be a rational number") from e
    if value <= 0:
        raise ImproperlyConfigured(f"{name} must be positive, got {value}")
    return value


@dataclass(frozen=True)
class Limits:
    max_states: int = DEFAULTS["META_OPACITY_MAX_STATES"]
    max_subsets: int = DEFAULTS["META_OPACITY_MAX_SUBSETS"]
    max_semilinear: int = DEFAULTS["META_OPACITY_MAX_SEMILINEAR"]

    @classmethod
    def from_settings(cls, **overrides: T.Optional[int]) -> "Limits":
        limits = cls(
            max_states=_positive_int("META_OPACITY_MAX_STATES"),
            max_subsets=_positive_int("META_OPACITY_MAX_SUBSETS"),
            max_semilinear=_positive_int("META_OPACITY_MAX_SEMILINEAR"),
        )
        given = {k: v for k, v in overrides.items() if v is not None}
        for k, v in given.items():
            if v <= 0:
                raise ImproperlyConfigured(f"{k} must be positive, got {v}")
        return replace(limits, **given)


@dataclass(frozen=True)
class OracleBounds:
    """Bounds of the grid oracle: delays are multiples of ``grid`` and the
    total duration never exceeds ``horizon``."""

    grid: Fraction = Fraction(DEFAULTS["META_OPACITY_ORACLE_GRID"])
    max_steps: int = DEFAULTS["META_OPACITY_ORACLE_STEPS"]
    horizon: Fraction = Fraction(DEFAULTS["META_OPACITY_ORACLE_HORIZON"])

    @classmethod
    def from_settings(cls, **overrides: T.Any) -> "OracleBounds":
        bounds = cls(
            grid=_positive_rational("META_OPACITY_ORACLE_GRID"),
            max_steps=_positive_int("META_OPACITY_ORACLE_STEPS"),
            horizon=_positive_rational("META_OPACITY_ORACLE_HORIZON"),
        )
        given = {k: v for k, v in overrides.items() if v is not None}
        return replace(bounds, **given)
