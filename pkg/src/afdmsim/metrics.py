"""Frame construction, sensing quality metrics, and the LMMSE comm link.

Frames put a boosted pilot on subcarrier 0 with Q zero guards on each cyclic
side and unit-power 4QAM data elsewhere; the energy freed by the guards and
the pilot slot is assigned to the pilot so total symbol energy is exactly
n_c for every pilot overhead. Pilot overhead PO = (2Q+1)/n_c.

Sensing metrics operate on delay-Doppler maps: PSLR (peak over strongest
other cell) and image SNR (peak power over mean background power outside a
one-cell guard ring). Detection probability runs CA-CFAR per Monte-Carlo
trial with fresh noise and fresh data symbols.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._phase import chirp_phasor, rational_phasor, unit_phasor
from .channel import PathTap, add_awgn, apply_channel, noise_variance, taps_from_targets
from .params import AfdmConfig, ScenarioConfig
from .ddgrid import vector_to_grid
from .sensing import (
    DelayDopplerMap,
    ca_cfar_2d,
    ddmf,
    dechirp,
    detection_near,
    tfmf,
)
from .waveform import demodulate, modulate, subcarrier

ALGORITHMS = ("tfmf", "dechirp", "ddmf")

#: CFAR configuration used by the detection-probability studies.
CFAR_TRAIN, CFAR_GUARD, CFAR_PFA = 2, 1, 1e-4


@dataclass(frozen=True)
class MetricReport:
    """Aggregated quality figures for one (condition, algorithm) cell.

    Probability fields must be valid fractions or NaN when the quantity was
    not measured; dB fields may be +-inf (sentinels for degenerate maps).
    """

    pslr_db: float
    image_snr_db: float
    pd: float
    ber: float
    trials: int

    def __post_init__(self) -> None:
        for name in ("pd", "ber"):
            value = getattr(self, name)
            if not math.isnan(value) and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.trials <= 0:
            raise ValueError("trials must be positive")


# ---------------------------------------------------------------------------
# 4QAM mapping (Gray: independent sign bits on I and Q)
# ---------------------------------------------------------------------------

_SCALE = 1.0 / math.sqrt(2.0)


def qam4_modulate(bits: np.ndarray) -> np.ndarray:
    """(..., 2) bit pairs -> unit-power 4QAM symbols."""
    b = np.asarray(bits)
    return ((1 - 2 * b[..., 0]) + 1j * (1 - 2 * b[..., 1])) * _SCALE


def qam4_demodulate(symbols: np.ndarray) -> np.ndarray:
    """Hard decisions back to (..., 2) bit pairs."""
    s = np.asarray(symbols)
    return np.stack([(s.real < 0).astype(np.int8), (s.imag < 0).astype(np.int8)], axis=-1)


def ber(x_hat: np.ndarray, x_true: np.ndarray) -> float:
    """Bit error fraction between two 4QAM symbol arrays."""
    b_hat = qam4_demodulate(x_hat)
    b_true = qam4_demodulate(x_true)
    return float(np.mean(b_hat != b_true))


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrameSpec:
    """Pilot/guard layout of one symbol.

    ``q_guard`` is the single-sided zero-guard count; ``None`` means a pure
    data frame with no pilot at all. ``pilot_power`` overrides the default
    energy-conserving boost (the number of distinct pilot+guard slots).
    """

    q_guard: int | None
    pilot_power: float | None = None
    pilot_index: int = 0
    constellation: str = "4qam"

    def __post_init__(self) -> None:
        if self.q_guard is not None and self.q_guard < 0:
            raise ValueError("q_guard must be non-negative")
        if self.pilot_index != 0:
            raise ValueError("the pilot is fixed at subcarrier 0")
        if self.constellation != "4qam":
            raise ValueError(f"unsupported constellation {self.constellation!r}")

    @classmethod
    def from_overhead(cls, n_c: int, po: float) -> "FrameSpec":
        """Resolve a pilot-overhead fraction to a guard count.

        PO = 0 gives the all-data frame; otherwise Q = round((PO*n_c - 1)/2),
        so PO = 1 covers every non-pilot subcarrier with guards.
        """
        if not 0.0 <= po <= 1.0:
            raise ValueError("pilot overhead must lie in [0, 1]")
        if po == 0.0:
            return cls(q_guard=None)
        return cls(q_guard=max(0, round((po * n_c - 1) / 2)))

    def occupied_slots(self, n_c: int) -> int:
        """Distinct subcarriers taken by the pilot and its guards."""
        if self.q_guard is None:
            return 0
        return min(2 * self.q_guard + 1, n_c)

    def overhead(self, n_c: int) -> float:
        return self.occupied_slots(n_c) / n_c


def build_frame(config: AfdmConfig, spec: FrameSpec, rng: np.random.Generator) -> np.ndarray:
    """One DAFT-domain symbol vector with total energy exactly n_c."""
    n_c = config.n_c
    if spec.q_guard is None:
        bits = rng.integers(0, 2, size=(n_c, 2))
        return qam4_modulate(bits).astype(np.complex128)

    occupied = spec.occupied_slots(n_c)
    n_data = n_c - occupied
    pilot_power = spec.pilot_power if spec.pilot_power is not None else float(occupied)
    x = np.zeros(n_c, dtype=np.complex128)
    x[0] = math.sqrt(pilot_power)
    if n_data:
        offsets = np.arange(-spec.q_guard, spec.q_guard + 1)
        mask = np.ones(n_c, dtype=bool)
        mask[np.mod(offsets, n_c)] = False
        bits = rng.integers(0, 2, size=(n_data, 2))
        x[mask] = qam4_modulate(bits)
    return x


def pilot_reference(config: AfdmConfig):
    """Unit-amplitude deterministic pilot waveform (base chirp subcarrier)."""
    return subcarrier(config, 0)


# ---------------------------------------------------------------------------
# Map metrics
# ---------------------------------------------------------------------------

def _cells(ddm) -> np.ndarray:
    return ddm.cells if isinstance(ddm, DelayDopplerMap) else np.asarray(ddm)


def pslr(ddm, target: tuple[int, int]) -> float:
    """Peak-to-maximum-sidelobe ratio in dB, peak taken at the target cell."""
    mag = np.abs(_cells(ddm))
    l, k = target
    peak_val = mag[l, k]
    rest = np.delete(mag.ravel(), l * mag.shape[1] + k)
    side = rest.max() if rest.size else 0.0
    if side == 0.0:
        return math.inf
    if peak_val == 0.0:
        return -math.inf
    return 20.0 * math.log10(peak_val / side)


def image_snr(ddm, target: tuple[int, int]) -> float:
    """Peak power over mean background power (one-cell guard ring excluded), dB."""
    cells = _cells(ddm)
    power = np.abs(cells) ** 2
    n_p, K = power.shape
    l, k = target
    mask = np.ones((n_p, K), dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            mask[(l + di) % n_p, (k + dj) % K] = False
    if not mask.any():
        raise ValueError("map too small to exclude the target guard ring")
    background = power[mask].mean()
    if background == 0.0:
        return math.inf
    if power[l, k] == 0.0:
        return -math.inf
    return 10.0 * math.log10(power[l, k] / background)


# ---------------------------------------------------------------------------
# Monte-Carlo sensing trials
# ---------------------------------------------------------------------------

def sensing_maps(
    config: AfdmConfig,
    spec: FrameSpec,
    paths,
    snr_db: float,
    algorithms,
    rng: np.random.Generator,
    tfmf_reference: str = "transmit",
) -> dict[str, DelayDopplerMap]:
    """Simulate one symbol through the channel and run the requested pipelines.

    ``tfmf_reference`` selects the matched-filter copy: the full known
    transmit signal (default) or the deterministic pilot only.
    """
    x = build_frame(config, spec, rng)
    s = modulate(config, x)
    r = add_awgn(apply_channel(config, s, paths), snr_db, rng)
    out: dict[str, DelayDopplerMap] = {}
    for alg in algorithms:
        if alg == "tfmf":
            ref = s if tfmf_reference == "transmit" else pilot_reference(config)
            out[alg] = tfmf(config, r, ref)
        elif alg == "dechirp":
            out[alg] = dechirp(config, r, pilot_reference(config))
        elif alg == "ddmf":
            y_grid = vector_to_grid(config, demodulate(config, r))
            x_grid = vector_to_grid(config, x)
            out[alg] = ddmf(config, y_grid, x_grid)
        else:
            raise ValueError(f"unknown algorithm {alg!r}; expected one of {ALGORITHMS}")
    return out


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent, deterministic per-trial stream."""
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


def monte_carlo_pd(
    scenario: ScenarioConfig,
    algorithm: str,
    trials: int,
    seed: int | None = None,
    snr_db: float | None = None,
    pilot_overhead: float | None = None,
    preset_name: str | None = None,
) -> float:
    """Detection probability of the scenario's first target under CA-CFAR.

    A trial counts as a detection when CFAR (2 train, 1 guard, Pfa 1e-4)
    fires within one cyclic cell of the true tap. Noise and data symbols are
    redrawn every trial; path gains stay fixed at the scenario values.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not scenario.targets:
        raise ValueError("scenario has no target to detect")
    config = scenario.waveform(preset_name)
    spec = FrameSpec.from_overhead(
        config.n_c,
        scenario.pilot_overhead if pilot_overhead is None else pilot_overhead,
    )
    paths = taps_from_targets(scenario.targets)
    snr = scenario.snr_db if snr_db is None else snr_db
    base_seed = scenario.rng_seed if seed is None else seed
    target = scenario.targets[0]
    hits = 0
    for t in range(trials):
        rng = trial_rng(base_seed, t)
        ddm = sensing_maps(config, spec, paths, snr, (algorithm,), rng)[algorithm]
        detections = ca_cfar_2d(ddm, CFAR_TRAIN, CFAR_GUARD, CFAR_PFA)
        if detection_near(
            detections, target[1], target[2], config.n_p, config.k_chirps
        ):
            hits += 1
    return hits / trials


# ---------------------------------------------------------------------------
# Effective channel, LMMSE detection, BER
# ---------------------------------------------------------------------------

def _idaft_matrix(config: AfdmConfig) -> np.ndarray:
    """Modulation matrix A with A[n, m] = psi_m[n]/sqrt(n_c)."""
    n = np.arange(config.n_c, dtype=np.int64)
    m = np.arange(config.n_c, dtype=np.int64)
    col = rational_phasor(config.c1, n * n)[:, None]
    row = chirp_phasor(config.c2, m * m)[None, :]
    core = unit_phasor(np.outer(n, m), config.n_c)
    return col * core * row / math.sqrt(config.n_c)


def build_effective_channel(config: AfdmConfig, paths) -> np.ndarray:
    """Dense n_c x n_c DAFT-domain channel matrix.

    Column m equals demodulate(apply_channel(modulate(e_m))), evaluated in a
    single batch: the modulation matrix is pushed through the cyclic channel
    and demodulated column-wise with FFTs.
    """
    A = _idaft_matrix(config)
    n = np.arange(config.n_c, dtype=np.int64)
    R = np.zeros_like(A)
    for p in paths:
        phase = unit_phasor(-p.doppler_tap * n, config.n_c)[:, None]
        R += complex(p.gain) * np.roll(A, p.delay_tap % config.n_c, axis=0) * phase
    c1_col = np.conj(rational_phasor(config.c1, n * n))[:, None]
    c2_col = np.conj(chirp_phasor(config.c2, n * n))[:, None]
    return c2_col * np.fft.fft(c1_col * R, axis=0) / math.sqrt(config.n_c)


def lmmse_detect(
    H: np.ndarray,
    y: np.ndarray,
    noise_var: float,
    gram: np.ndarray | None = None,
) -> np.ndarray:
    """LMMSE equalizer: x_hat = H^H (H H^H + noise_var I)^(-1) y.

    ``y`` may be a vector or a matrix of column observations. A precomputed
    ``gram`` = H H^H can be supplied when solving repeatedly at different
    noise levels. Raises ``numpy.linalg.LinAlgError`` when the regularized
    system is singular (rank-deficient H at noise_var = 0).
    """
    if noise_var < 0:
        raise ValueError("noise_var must be non-negative")
    n = H.shape[0]
    if gram is None:
        gram = H @ H.conj().T
    z = np.linalg.solve(gram + noise_var * np.eye(n), y)
    return H.conj().T @ z


def rayleigh_gains(powers, rng: np.random.Generator) -> np.ndarray:
    """Complex Gaussian gains with E|h_i|^2 equal to the given powers."""
    p = np.asarray(powers, dtype=np.float64)
    g = rng.standard_normal(p.shape) + 1j * rng.standard_normal(p.shape)
    return np.sqrt(p / 2.0) * g


def lmmse_ber_compare(
    configs: dict[str, AfdmConfig],
    target_powers,
    target_taps,
    snr_db_list,
    n_symbols: int,
    realizations: int,
    seed: int,
) -> dict[tuple[str, float], tuple[int, int]]:
    """Paired BER counts for several waveform configs over a fading channel.

    Per realization the Rayleigh path gains, data bits, and noise draws are
    shared across configs (the time-domain channel is waveform-independent),
    which pairs the BER estimates tightly. Returns
    {(config_name, snr_db): (bit_errors, bits)}.
    """
    if realizations < 1 or n_symbols < 1:
        raise ValueError("realizations and n_symbols must be >= 1")
    names = list(configs)
    n_c = next(iter(configs.values())).n_c
    if any(c.n_c != n_c for c in configs.values()):
        raise ValueError("all configs must share n_c")
    per_real = max(1, n_symbols // realizations)
    taps = [(int(l), int(k)) for l, k in target_taps]
    counts = {(nm, float(snr)): [0, 0] for nm in names for snr in snr_db_list}
    for real in range(realizations):
        rng = trial_rng(seed, real)
        gains = rayleigh_gains(target_powers, rng)
        paths = [PathTap(complex(g), l, k) for g, (l, k) in zip(gains, taps)]
        bits = rng.integers(0, 2, size=(per_real, n_c, 2))
        x = qam4_modulate(bits).T.astype(np.complex128)  # (n_c, per_real)
        w = (
            rng.standard_normal((n_c, per_real))
            + 1j * rng.standard_normal((n_c, per_real))
        ) / math.sqrt(2.0)
        for name in names:
            H = build_effective_channel(configs[name], paths)
            gram = H @ H.conj().T
            y0 = H @ x
            for snr in snr_db_list:
                sigma2 = noise_variance(float(snr))
                y = y0 + math.sqrt(sigma2) * w
                x_hat = lmmse_detect(H, y, sigma2, gram=gram)
                entry = counts[(name, float(snr))]
                entry[0] += int(
                    np.sum(qam4_demodulate(x_hat.T) != qam4_demodulate(x.T))
                )
                entry[1] += x.size * 2
    return {key: (v[0], v[1]) for key, v in counts.items()}
