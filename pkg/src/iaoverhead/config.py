"""Network, link-budget and block-fading configuration types."""
from dataclasses import dataclass, field


@dataclass(frozen=True)
class NetworkConfig:
    """Homogeneous K-user MIMO interference network.

    All transmitters carry ``Nt`` antennas, all receivers ``Nr``, and every
    pair runs ``d`` spatial streams. Heterogeneous antenna counts are not
    supported.
    """

    K: int
    Nt: int
    Nr: int
    d: int = 1

    def __post_init__(self):
        if self.K < 2:
            raise ValueError(f"need at least 2 users, got K={self.K}")
        if self.Nt < 1 or self.Nr < 1:
            raise ValueError(f"antenna counts must be positive, got Nt={self.Nt} Nr={self.Nr}")
        if not 1 <= self.d <= min(self.Nt, self.Nr):
            raise ValueError(f"streams must satisfy 1 <= d <= min(Nt, Nr), got d={self.d}")
        if self.K * self.Nt < self.Nr:
            raise ValueError(f"feedback estimation needs K*Nt >= Nr, got {self.K * self.Nt} < {self.Nr}")

    @property
    def ia_feasible(self) -> bool:
        """Proper-system rule for the symmetric single-stream-per-user cases."""
        return self.d * (self.K + 1) <= self.Nt + self.Nr


@dataclass(frozen=True)
class LinkBudget:
    """Transmit powers and noise level, all in linear scale.

    ``gamma`` is the feedback-to-forward power ratio, so the feedback link
    transmits at ``gamma * P``.
    """

    P: float
    gamma: float = 1.0
    sigma2: float = 1.0

    def __post_init__(self):
        if self.P <= 0 or self.gamma <= 0 or self.sigma2 <= 0:
            raise ValueError("P, gamma and sigma2 must all be positive")

    @property
    def Pf(self) -> float:
        return self.gamma * self.P

    def rho(self, d: int = 1) -> float:
        """Per-stream SNR P / (d * sigma2)."""
        return self.P / (d * self.sigma2)

    @classmethod
    def from_snr(cls, rho: float, d: int = 1, gamma: float = 1.0, sigma2: float = 1.0):
        """Build a budget with the given per-stream SNR at unit noise power."""
        return cls(P=rho * d * sigma2, gamma=gamma, sigma2=sigma2)


@dataclass
class FadingFrame:
    """Block-fading frame tied to a normalized Doppler spread.

    The block length is pinned to ``1 / (2 fd)`` channel uses; ``alpha`` is
    the fraction of the block handed to training and feedback (None until an
    optimizer fills it in).
    """

    fd: float
    alpha: float | None = None
    Tframe: float = field(init=False)

    def __post_init__(self):
        if self.fd <= 0:
            raise ValueError(f"Doppler spread must be positive, got {self.fd}")
        self.Tframe = 1.0 / (2.0 * self.fd)
        if self.alpha is not None and not 0 < self.alpha <= 1:
            raise ValueError(f"overhead fraction must lie in (0, 1], got {self.alpha}")

    @property
    def Tohd(self) -> float:
        """Overhead budget in symbols; requires alpha to be set."""
        if self.alpha is None:
            raise ValueError("overhead fraction alpha has not been set")
        return self.alpha * self.Tframe


def make_frame(fd: float) -> FadingFrame:
    """Frame for a normalized Doppler spread; alpha left for the optimizer."""
    return FadingFrame(fd=fd)
