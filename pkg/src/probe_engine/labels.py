import enum


class Regime(str, enum.Enum):
    """Which reservoirs inject heat into the conductor."""

    L = "L"
    P = "P"
    LP = "LP"
    REFRIGERATOR = "REFRIGERATOR"


class Branch(str, enum.Enum):
    """Root of eps * (2 - eps) = 1 + dP; PLUS is the high-load branch."""

    PLUS = "plus"
    MINUS = "minus"

    @property
    def sign(self) -> float:
        return 1.0 if self is Branch.PLUS else -1.0

    @classmethod
    def parse(cls, value) -> "Branch":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"branch must be 'plus' or 'minus', got {value!r}") from None


ENGINE_REGIMES = (Regime.L, Regime.P, Regime.LP)
