import math
import re
from fractions import Fraction

import numpy as np

# Tolerances shared by the determinism and equivalence checks
DETERMINISM_TOL = 1e-12
FIDELITY_TOL = 1e-9

# Angles are written as rational multiples of pi, e.g. "3/4 pi", "-1/2 pi", "pi", "0"
_PI_ANGLE = re.compile(r"^\s*([+-]?)\s*(?:(\d+)\s*(?:/\s*(\d+))?)?\s*(?:\*?\s*pi)?\s*$")

STREAM_NAMES = ("sender", "channel", "eavesdropper", "receiver")


def pi_multiple(fraction: Fraction) -> float:
    """Radians for a rational multiple of pi, computed the one way every module uses."""
    return float(fraction) * math.pi


def parse_angle(value) -> float:
    """
    Parse an angle from configuration.

    Args:
        value: "a/b pi" style text, or a plain number taken as radians

    Returns:
        Angle in radians
    """
    if isinstance(value, bool):
        raise ValueError(f"not an angle: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)

    text = str(value).strip().lower().replace("π", "pi")
    has_pi = "pi" in text
    match = _PI_ANGLE.match(text)
    if match is None or (not has_pi and match.group(3) is not None):
        try:
            return float(text)
        except ValueError:
            raise ValueError(f"not an angle: {value!r}") from None

    sign, numerator, denominator = match.groups()
    if numerator is None:
        if not has_pi:
            raise ValueError(f"not an angle: {value!r}")
        numerator = "1"
    frac = Fraction(int(numerator), int(denominator or 1))
    if sign == "-":
        frac = -frac
    return pi_multiple(frac) if has_pi else float(frac)


def format_angle(radians: float) -> str | float:
    """
    Inverse of parse_angle.

    Returns "a/b pi" text when that text parses back to exactly the same float,
    otherwise the radians themselves.
    """
    if not math.isfinite(radians):
        return radians
    frac = Fraction(radians / math.pi).limit_denominator(4096)
    if pi_multiple(frac) != radians:
        return float(radians)
    if frac == 0:
        return "0"
    if frac.denominator == 1:
        return "pi" if frac.numerator == 1 else f"{frac.numerator} pi"
    return f"{frac.numerator}/{frac.denominator} pi"


def reduce_phase(phi: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    reduced = math.remainder(phi, 2 * math.pi)
    if reduced <= -math.pi:
        reduced += 2 * math.pi
    return reduced


def make_streams(seed: int) -> dict[str, np.random.Generator]:
    """Independent PCG64 streams for each party of a session, all derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(len(STREAM_NAMES))
    return {name: np.random.default_rng(child) for name, child in zip(STREAM_NAMES, children)}
