"""Leslie material coefficients and their admissibility classes.

The six viscosities mu1..mu6 are not independent: the derived combinations
lambda1 = mu2 - mu3 and lambda2 = mu5 - mu6 together with the Onsager
reciprocity constraint mu2 + mu3 = mu6 - mu5 leave five free parameters.
The constructor therefore takes (mu1, mu4, mu5, mu6, lambda1) plus the
inertial constant rho1 and derives mu2, mu3, lambda2, so the relations can
never be violated by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "LeslieCoefficients",
    "DissipationClass",
    "from_independent",
    "classify",
    "preset",
    "eta0",
    "PRESET_NAMES",
]

# Tolerance for relations on values that round-tripped through text files;
# values built by from_independent satisfy them exactly.
RELATION_TOL = 1e-12


@dataclass(frozen=True)
class LeslieCoefficients:
    mu1: float
    mu2: float
    mu3: float
    mu4: float
    mu5: float
    mu6: float
    lambda1: float
    lambda2: float
    rho1: float
    delta: float | None = None

    def __post_init__(self):
        if not self.rho1 > 0:
            raise ValueError(
                f"rho1 must be positive (parabolic limit rho1=0 is unsupported), got {self.rho1}"
            )
        checks = [
            ("lambda1 = mu2 - mu3", self.lambda1 - (self.mu2 - self.mu3)),
            ("lambda2 = mu5 - mu6", self.lambda2 - (self.mu5 - self.mu6)),
            ("mu2 + mu3 = mu6 - mu5", (self.mu2 + self.mu3) - (self.mu6 - self.mu5)),
        ]
        scale = max(1.0, abs(self.mu2), abs(self.mu3), abs(self.mu5), abs(self.mu6),
                    abs(self.lambda1), abs(self.lambda2))
        for name, err in checks:
            if abs(err) > RELATION_TOL * scale:
                raise ValueError(f"coefficient relation violated: {name} (off by {err:.3e})")
        if self.delta is not None and not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class DissipationClass:
    """Verdict of the damping classification.

    kind is "strict_damping", "zero_lambda1" or "invalid"; delta is set for
    the zero_lambda1 case and reason for the invalid one.
    """

    kind: str
    delta: float | None = None
    reason: str | None = None

    @property
    def is_dissipative(self) -> bool:
        return self.kind != "invalid"


def from_independent(
    mu1: float,
    mu4: float,
    mu5: float,
    mu6: float,
    lambda1: float,
    rho1: float,
    delta: float | None = None,
) -> LeslieCoefficients:
    """Build a coefficient set from the five independent viscosities.

    mu2 and mu3 are resolved from lambda1 = mu2 - mu3 and the reciprocity
    constraint mu2 + mu3 = -(mu5 - mu6).
    """
    lambda2 = mu5 - mu6
    mu2 = 0.5 * (lambda1 - lambda2)
    mu3 = mu2 - lambda1  # keeps lambda1 = mu2 - mu3 exact in floating point
    return LeslieCoefficients(
        mu1=float(mu1), mu2=mu2, mu3=mu3, mu4=float(mu4), mu5=float(mu5),
        mu6=float(mu6), lambda1=float(lambda1), lambda2=lambda2,
        rho1=float(rho1), delta=delta,
    )


def classify(c: LeslieCoefficients, delta: float | None = None) -> DissipationClass:
    """Decide which damping class the coefficients fall into.

    Strict damping requires mu1 >= 0, mu4 > 0, lambda1 < 0 and
    mu5 + mu6 + lambda2^2/lambda1 >= 0.  The borderline lambda1 = 0 class
    requires a margin delta in (0, 1) and
    (1 - delta) * mu4 * (mu5 + mu6) >= 2 * lambda2^2.
    """
    if c.mu1 < 0:
        return DissipationClass("invalid", reason="mu1 >= 0 violated")
    if not c.mu4 > 0:
        return DissipationClass("invalid", reason="mu4 > 0 violated")
    if c.lambda1 < 0:
        combo = c.mu5 + c.mu6 + c.lambda2**2 / c.lambda1
        if combo < 0:
            return DissipationClass(
                "invalid", reason="mu5 + mu6 + lambda2^2/lambda1 >= 0 violated"
            )
        return DissipationClass("strict_damping")
    if c.lambda1 == 0:
        if delta is None:
            delta = c.delta
        if delta is None or not 0.0 < delta < 1.0:
            raise ValueError("lambda1 = 0 classification needs delta in (0, 1)")
        if (1.0 - delta) * c.mu4 * (c.mu5 + c.mu6) < 2.0 * c.lambda2**2:
            return DissipationClass(
                "invalid",
                reason="(1 - delta) mu4 (mu5 + mu6) >= 2 lambda2^2 violated",
            )
        return DissipationClass("zero_lambda1", delta=delta)
    return DissipationClass("invalid", reason="lambda1 < 0 violated")


PRESET_NAMES = ("wave_map", "damped_default", "zero_lambda1_default")


def preset(name: str) -> LeslieCoefficients:
    """Named coefficient sets used throughout the test experiments."""
    if name == "wave_map":
        # All Leslie stress terms vanish; momentum couples to the director
        # only through the elastic stress.
        return from_independent(mu1=0.0, mu4=1.0, mu5=0.0, mu6=0.0, lambda1=0.0, rho1=1.0)
    if name == "damped_default":
        return from_independent(mu1=1.0, mu4=2.0, mu5=1.0, mu6=1.0, lambda1=-1.0, rho1=1.0)
    if name == "zero_lambda1_default":
        return from_independent(
            mu1=0.0, mu4=4.0, mu5=1.0, mu6=0.5, lambda1=0.0, rho1=1.0, delta=0.5
        )
    raise ValueError(f"unknown preset {name!r}; valid names: {', '.join(PRESET_NAMES)}")


def eta0(c: LeslieCoefficients, estimate_constant: float) -> float:
    """Largest admissible weight for the modified energy functional.

    Defined only in the strict-damping case.  estimate_constant is the
    abstract constant absorbed from the nonlinear estimates; it is a caller
    choice.  The (1 - |lambda2|/lambda1)^2 factor is evaluated literally,
    with lambda1 < 0 making it >= 1.
    """
    if c.lambda1 >= 0:
        raise ValueError("eta0 defined only in the strict-damping case (lambda1 < 0)")
    cls = classify(c)
    if cls.kind != "strict_damping":
        raise ValueError(f"eta0 defined only in the strict-damping case: {cls.reason}")
    if not estimate_constant > 0:
        raise ValueError("estimate_constant must be positive")
    c2 = estimate_constant**2
    denom = 3.0 * c.rho1 * (1.0 - abs(c.lambda2) / c.lambda1) ** 2 + c2 * (
        abs(c.lambda1) + abs(c.lambda2)
    ) ** 2
    return 0.5 * min(
        0.5 * c.mu4 / denom,
        -c.lambda1 / (2.0 * c.rho1),
        1.0 / c.rho1,
        1.0,
    )


def equivalence_constants(c: LeslieCoefficients, eta_max: float) -> tuple[float, float]:
    """Lower/upper constants relating the modified energy to the plain one."""
    upper = 4.0 + 2.0 * eta_max - c.lambda1 * eta_max + 2.0 * c.rho1 * eta_max
    lower = min(1.0, 1.0 - eta_max, 1.0 - eta_max * c.rho1)
    return lower, upper
