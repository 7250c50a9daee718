"""Problem geometry: dimension, diffusion coefficient, absorbing targets."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class Target:
    """One absorbing target.

    delta is the geodesic distance from the source. size is the window
    half-width in 2D or the window radius in 3D; it is ignored in 1D.
    """

    delta: float
    size: float = 0.0

    def __post_init__(self):
        if not self.delta > 0.0:
            raise DomainError(f"target distance must be positive, got {self.delta}")


@dataclass(frozen=True)
class Geometry:
    dim: int
    diffusion: float
    targets: tuple[Target, ...]

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dim must be 1, 2 or 3, got {self.dim}")
        if not self.diffusion > 0.0:
            raise DomainError(f"diffusion must be positive, got {self.diffusion}")
        if not isinstance(self.targets, tuple):
            object.__setattr__(self, "targets", tuple(self.targets))
        if len(self.targets) == 0:
            raise DomainError("at least one target is required")
        if self.dim == 1 and len(self.targets) > 2:
            raise DomainError("1D geometries support at most two targets")
        for t in self.targets:
            if self.dim == 2 and not (0.0 < t.size < 1.0):
                raise DomainError(f"2D window half-width must be in (0, 1), got {t.size}")
            if self.dim == 3 and not t.size > 0.0:
                raise DomainError(f"3D window radius must be positive, got {t.size}")

    @property
    def delta_min(self) -> float:
        return min(t.delta for t in self.targets)

    @property
    def tau_d(self) -> float:
        """Diffusive timescale delta_min^2 / (4 D)."""
        return self.delta_min ** 2 / (4.0 * self.diffusion)

    @classmethod
    def line(cls, deltas, diffusion: float = 1.0) -> "Geometry":
        """1D geometry with one or two absorbing points at the given distances."""
        if isinstance(deltas, (int, float)):
            deltas = (deltas,)
        return cls(1, diffusion, tuple(Target(float(d)) for d in deltas))

    @classmethod
    def disc(cls, deltas, half_widths, diffusion: float = 1.0) -> "Geometry":
        """2D geometry with boundary windows of the given half-widths."""
        return cls(2, diffusion, tuple(
            Target(float(d), float(e)) for d, e in zip(deltas, half_widths, strict=True)))

    @classmethod
    def ball(cls, deltas, radii, diffusion: float = 1.0) -> "Geometry":
        """3D geometry with absorbing windows of the given radii."""
        return cls(3, diffusion, tuple(
            Target(float(d), float(a)) for d, a in zip(deltas, radii, strict=True)))


@dataclass(frozen=True)
class ValidityWindow:
    """Trust region of the short-time asymptotics.

    f_max bounds the cumulative exit probability up to which the
    expansion is used; operations flag or refuse beyond it instead of
    extrapolating. The time bound it induces depends on the geometry
    and comes from `horizon`.
    """

    f_max: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.f_max < 1.0:
            raise DomainError(f"f_max must be in (0, 1), got {self.f_max}")

    def cap(self, g: "Geometry") -> float:
        """Largest trusted cumulative exit probability for this geometry."""
        from .survival import effective_f_max
        return effective_f_max(g, self.f_max)

    def horizon(self, g: "Geometry") -> float:
        """Largest trusted time for this geometry."""
        from .survival import time_horizon
        return time_horizon(g, self.f_max)

    def contains(self, g: "Geometry", t: float) -> bool:
        return 0.0 < t <= self.horizon(g)
