"""Link budget and traffic parameters.

All dB bookkeeping happens here. Every other module works with the linear
mean SNR at 1 m (``xi``) and the traffic density ``w`` in SI units.

The mean SNR at distance ``r`` is ``xi * r**-alpha`` with::

    xi [dB] = Pt [dBm] + G0 [dB] + K [dB] - (N0 [dBm/Hz] + 10 log10(B [Hz]))

``K`` is the path-loss *gain* at the 1 m reference distance, so it is
negative for a physical channel (e.g. -61.34 dB at 28 GHz). The dBm offsets
of ``Pt`` and ``N0`` cancel, so no 30 dB milliwatt correction appears.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

KM2 = 1.0e6  # m^2 per km^2


def free_space_intercept_db(carrier_ghz: float) -> float:
    """Path-loss gain at 1 m from the 3GPP close-in intercept.

    Returns ``-(32.4 + 20 log10(fc / 1 GHz))``. This is a convenience
    default for ``k_pathloss_db``; it is not a calibrated channel model.
    """
    if carrier_ghz <= 0:
        raise ValueError("carrier frequency must be positive")
    return -(32.4 + 20.0 * math.log10(carrier_ghz))


DEFAULT_CARRIER_GHZ = 28.0
DEFAULT_K_PATHLOSS_DB = free_space_intercept_db(DEFAULT_CARRIER_GHZ)


@dataclass(frozen=True)
class NetworkParams:
    """Radio and deployment parameters.

    Args:
        lambda_bs: BS density [m^-2]
        pt_dbm: transmit power [dBm]
        g0_db: product of Tx and Rx antenna gains [dB]
        bandwidth_hz: system bandwidth [Hz]
        noise_density_dbm_hz: noise power spectral density [dBm/Hz]
        k_pathloss_db: path-loss gain at 1 m [dB]
        alpha: path-loss exponent
    """

    lambda_bs: float = 1.0e-5
    pt_dbm: float = 30.0
    g0_db: float = 20.0
    bandwidth_hz: float = 1.0e9
    noise_density_dbm_hz: float = -174.0
    k_pathloss_db: float = DEFAULT_K_PATHLOSS_DB
    alpha: float = 2.0

    def __post_init__(self):
        if not self.lambda_bs > 0:
            raise ValueError(f"lambda_bs must be > 0, got {self.lambda_bs}")
        if not self.bandwidth_hz > 0:
            raise ValueError(f"bandwidth_hz must be > 0, got {self.bandwidth_hz}")
        if not self.alpha >= 2:
            raise ValueError(f"alpha must be >= 2, got {self.alpha}")
        for name in ("pt_dbm", "g0_db", "noise_density_dbm_hz", "k_pathloss_db"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def noise_power_dbm(self) -> float:
        return self.noise_density_dbm_hz + 10.0 * math.log10(self.bandwidth_hz)

    @property
    def xi_db(self) -> float:
        return self.pt_dbm + self.g0_db + self.k_pathloss_db - self.noise_power_dbm

    @property
    def xi(self) -> float:
        return xi(self)


@dataclass(frozen=True)
class TrafficParams:
    """Dynamic traffic description.

    Args:
        lambda_u: flow arrival intensity [users s^-1 m^-2]
        sigma_bits: mean file size [bits]
    """

    lambda_u: float = 1.0e-4
    sigma_bits: float = 1.0e8

    def __post_init__(self):
        if not self.lambda_u >= 0:
            raise ValueError(f"lambda_u must be >= 0, got {self.lambda_u}")
        if not self.sigma_bits > 0:
            raise ValueError(f"sigma_bits must be > 0, got {self.sigma_bits}")

    @classmethod
    def from_per_km2(cls, lambda_u_km2: float, sigma_bits: float) -> "TrafficParams":
        """Build from an arrival intensity given in users s^-1 km^-2."""
        return cls(lambda_u=lambda_u_km2 / KM2, sigma_bits=sigma_bits)

    @property
    def w(self) -> float:
        return traffic_density(self)


def xi(params: NetworkParams) -> float:
    """Mean SNR at 1 m, linear scale."""
    return 10.0 ** (params.xi_db / 10.0)


def traffic_density(t: TrafficParams) -> float:
    """Traffic density ``w = lambda_u * sigma`` [bits s^-1 m^-2]."""
    return t.lambda_u * t.sigma_bits


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def linear_to_db(x):
    return 10.0 * math.log10(x)
