from enum import Enum

from .errors import Unsupported


class FunctionalKind(str, Enum):
    VOLUME = "V"
    SURFACE_AREA = "S"
    DIAMETER = "D"
    CIRCUMRADIUS = "R"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        text = str(value).strip()
        for kind in cls:
            if text.upper() in (kind.value, kind.name, kind.name.replace("_", "")):
                return kind
        raise ValueError(f"unknown functional {value!r}")


def size_exponent(kind: FunctionalKind, n: int) -> float:
    """Power q with X_t equal in law to t**q * X_1."""
    kind = FunctionalKind.parse(kind)
    if kind is FunctionalKind.VOLUME:
        return n / 2
    if kind is FunctionalKind.SURFACE_AREA:
        if n < 2:
            raise Unsupported("surface area needs n >= 2")
        return (n - 1) / 2
    return 0.5


def inverse_exponent(kind: FunctionalKind, n: int) -> float:
    """Power p with the level-1 passage time equal in law to X_1**(-p)."""
    return 1.0 / size_exponent(kind, n)
