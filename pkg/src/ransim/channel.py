"""3GPP TR 38.901 UMa propagation, stochastic fading, SINR and spectral efficiency.

All scalar helpers also accept numpy arrays. The simulator works on dense
UE x RU matrices, so the array forms are the ones on the hot path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyAllocation, InvalidSpec, OutOfValidity

SPEED_OF_LIGHT = 3.0e8
THERMAL_NOISE_DBM_PER_HZ = -174.0
SUBCARRIERS_PER_PRB = 12
MAX_D2D_M = 5000.0


@dataclass(frozen=True)
class LinkGeometry:
    d2d_m: float
    h_bs_m: float = 25.0
    h_ut_m: float = 1.5
    fc_ghz: float = 28.0

    def __post_init__(self):
        if self.d2d_m < 0:
            raise OutOfValidity(f"d2d_m must be >= 0, got {self.d2d_m}")
        if not 0.5 <= self.fc_ghz <= 100.0:
            raise OutOfValidity(f"fc_ghz {self.fc_ghz} outside 0.5-100 GHz")

    @property
    def d3d_m(self) -> float:
        return float(np.hypot(self.d2d_m, self.h_bs_m - self.h_ut_m))


@dataclass(frozen=True)
class ChannelRealization:
    los: bool
    path_loss_db: float
    shadow_db: float
    fast_fade_db: float

    @property
    def gain_db(self) -> float:
        return -self.path_loss_db - self.shadow_db + self.fast_fade_db


@dataclass(frozen=True)
class RadioConfig:
    fc_ghz: float = 28.0
    bandwidth_hz: float = 4.0e8
    tx_power_dbm: float = 35.0
    antenna_gain_db: float = 8.0
    noise_figure_db: float = 9.0
    prb_count: int = 264
    subcarrier_spacing_hz: float = 120.0e3
    se_cap: float = 7.8
    ue_height_m: float = 1.5
    min_d2d_m: float = 10.0
    rician_k_db: float = 9.0
    shadow_sigma_los_db: float = 4.0
    shadow_sigma_nlos_db: float = 6.0

    def __post_init__(self):
        if self.prb_count * self.prb_bandwidth_hz > self.bandwidth_hz:
            raise InvalidSpec(
                f"{self.prb_count} PRBs x {self.prb_bandwidth_hz:.0f} Hz exceed bandwidth {self.bandwidth_hz:.0f} Hz")

    @property
    def prb_bandwidth_hz(self) -> float:
        return SUBCARRIERS_PER_PRB * self.subcarrier_spacing_hz

    @property
    def grid_bandwidth_hz(self) -> float:
        return self.prb_count * self.prb_bandwidth_hz

    def tx_power_per_prb_dbm(self) -> float:
        return self.tx_power_dbm - 10.0 * np.log10(self.prb_count)

    def noise_per_prb_dbm(self) -> float:
        return noise_dbm(self.prb_bandwidth_hz, self.noise_figure_db)


def noise_dbm(bandwidth_hz, noise_figure_db):
    return THERMAL_NOISE_DBM_PER_HZ + 10.0 * np.log10(bandwidth_hz) + noise_figure_db


def los_probability(d2d_m, h_ut_m=1.5):
    """UMa LOS probability (high-UE correction omitted, valid for h_ut <= 13 m)."""
    if np.any(np.asarray(h_ut_m) > 13.0):
        raise OutOfValidity("h_ut_m > 13 m needs the high-UE correction term")
    d = np.asarray(d2d_m, dtype=float)
    safe = np.maximum(d, 18.0)
    far = 18.0 / safe + np.exp(-safe / 63.0) * (1.0 - 18.0 / safe)
    p = np.where(d <= 18.0, 1.0, far)
    return float(p) if p.ndim == 0 else p


def breakpoint_distance_m(h_bs_m, h_ut_m, fc_ghz):
    # effective environment height h_E = 1 m
    return 4.0 * (h_bs_m - 1.0) * (h_ut_m - 1.0) * fc_ghz * 1e9 / SPEED_OF_LIGHT


def _pl_los(d2d, d3d, h_bs, h_ut, fc_ghz):
    d_bp = breakpoint_distance_m(h_bs, h_ut, fc_ghz)
    near = 28.0 + 22.0 * np.log10(d3d) + 20.0 * np.log10(fc_ghz)
    far = (28.0 + 40.0 * np.log10(d3d) + 20.0 * np.log10(fc_ghz)
           - 9.0 * np.log10(d_bp ** 2 + (h_bs - h_ut) ** 2))
    return np.where(d2d <= d_bp, near, far)


def _pl_nlos(d2d, d3d, h_bs, h_ut, fc_ghz):
    pl_nlos = 13.54 + 39.08 * np.log10(d3d) + 20.0 * np.log10(fc_ghz) - 0.6 * (h_ut - 1.5)
    return np.maximum(_pl_los(d2d, d3d, h_bs, h_ut, fc_ghz), pl_nlos)


def path_loss_array(d2d_m, los, h_bs_m=25.0, h_ut_m=1.5, fc_ghz=28.0):
    """Vectorized UMa path loss in dB; ``los`` broadcasts against ``d2d_m``."""
    d2d = np.asarray(d2d_m, dtype=float)
    if np.any(d2d > MAX_D2D_M):
        raise OutOfValidity(f"d2d beyond {MAX_D2D_M:.0f} m")
    d3d = np.hypot(d2d, h_bs_m - h_ut_m)
    pl = np.where(los, _pl_los(d2d, d3d, h_bs_m, h_ut_m, fc_ghz),
                  _pl_nlos(d2d, d3d, h_bs_m, h_ut_m, fc_ghz))
    return float(pl) if pl.ndim == 0 else pl


def path_loss_db(geom: LinkGeometry, los: bool) -> float:
    return path_loss_array(geom.d2d_m, bool(los), geom.h_bs_m, geom.h_ut_m, geom.fc_ghz)


def fast_fade_db(los, rng: np.random.Generator, rician_k_db=9.0):
    """Small-scale power gain in dB: Rician(K) where LOS, Rayleigh elsewhere.

    Draws two standard normals per link (real and imaginary parts).
    """
    los = np.asarray(los, dtype=bool)
    xy = rng.standard_normal((2,) + los.shape)
    k = 10.0 ** (rician_k_db / 10.0)
    k_eff = np.where(los, k, 0.0)
    spec_amp = np.sqrt(k_eff / (k_eff + 1.0))
    diff_amp = np.sqrt(0.5 / (k_eff + 1.0))
    power = (spec_amp + diff_amp * xy[0]) ** 2 + (diff_amp * xy[1]) ** 2
    return 10.0 * np.log10(power)


def draw_los_shadow(p_los, rng: np.random.Generator, sigma_los=4.0, sigma_nlos=6.0):
    p_los = np.asarray(p_los, dtype=float)
    los = rng.random(p_los.shape) < p_los
    shadow = rng.standard_normal(p_los.shape) * np.where(los, sigma_los, sigma_nlos)
    return los, shadow


def draw_realization(geom: LinkGeometry, rng: np.random.Generator, radio: RadioConfig | None = None) -> ChannelRealization:
    radio = radio or RadioConfig()
    los, shadow = draw_los_shadow(los_probability(geom.d2d_m, geom.h_ut_m), rng,
                                  radio.shadow_sigma_los_db, radio.shadow_sigma_nlos_db)
    fade = fast_fade_db(los, rng, radio.rician_k_db)
    return ChannelRealization(
        los=bool(los),
        path_loss_db=path_loss_db(geom, bool(los)),
        shadow_db=float(shadow),
        fast_fade_db=float(fade),
    )


def received_power_dbm(real: ChannelRealization, radio: RadioConfig, power_share: float, extra_gain_db=0.0) -> float:
    return (radio.tx_power_dbm + radio.antenna_gain_db + 10.0 * np.log10(power_share)
            + real.gain_db + extra_gain_db)


def sinr_db(serving: ChannelRealization, radio: RadioConfig, interferers, alloc_bandwidth_hz: float,
            beam_gain_db: float = 0.0) -> float:
    """SINR over an allocation of ``alloc_bandwidth_hz``.

    Transmit power is spread evenly over the PRB grid, so the serving signal
    carries the allocation's share of the RU power. ``interferers`` holds
    ``(realization, power_share)`` pairs, the share being the fraction of
    that RU's total power landing on the same PRBs.
    """
    if not alloc_bandwidth_hz > 0:
        raise EmptyAllocation("allocation bandwidth must be positive")
    share = alloc_bandwidth_hz / radio.grid_bandwidth_hz
    s_mw = 10.0 ** (received_power_dbm(serving, radio, share, beam_gain_db) / 10.0)
    n_mw = 10.0 ** (noise_dbm(alloc_bandwidth_hz, radio.noise_figure_db) / 10.0)
    i_mw = sum(10.0 ** (received_power_dbm(r, radio, sh) / 10.0) for r, sh in interferers if sh > 0)
    return float(10.0 * np.log10(s_mw / (n_mw + i_mw)))


def spectral_efficiency(sinr, cap=7.8):
    se = np.minimum(np.log2(1.0 + 10.0 ** (np.asarray(sinr, dtype=float) / 10.0)), cap)
    return float(se) if se.ndim == 0 else se
