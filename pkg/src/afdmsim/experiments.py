"""Experiment orchestration: scenarios, runs, and CSV artifacts.

Every run resolves a scenario (built-in name or file), executes one
experiment kind for each requested (preset, algorithm) combination, writes
``<kind>_<preset>_<algorithm>.csv`` artifacts plus ``manifest.json``
recording the fully resolved configuration, and cleans up partial outputs on
failure. Fixed seeds give byte-identical CSVs, except for ``runtime_scaling``
whose rows contain wall-clock measurements.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import csvio
from .ambiguity import aaf_psi0_surface, dpaf_surface
from .channel import PathTap, taps_from_targets
from .ddgrid import grid_to_vector, io_predict, vector_to_grid
from .metrics import (
    CFAR_GUARD,
    CFAR_PFA,
    CFAR_TRAIN,
    FrameSpec,
    MetricReport,
    image_snr,
    lmmse_ber_compare,
    monte_carlo_pd,
    pslr,
    sensing_maps,
    trial_rng,
)
from .params import AfdmConfig, ScenarioConfig, load_scenario
from .sensing import ca_cfar_2d, ddmf_batch, detection_near
from .waveform import demodulate, modulate, subcarrier
from .channel import apply_channel

EXPERIMENT_KINDS = (
    "ddm",
    "af_surface",
    "snr_sweep",
    "po_sweep",
    "pd_curve",
    "ber_curve",
    "io_check",
    "runtime_scaling",
)

IO_CHECK_TOLERANCE = 1e-9


class NumericalCheckError(RuntimeError):
    """A numerical self-check exceeded its tolerance."""


def builtin_scenarios() -> dict[str, ScenarioConfig]:
    """Named reference scenarios.

    ``table1``/``fig5``: the full-scale grid with a single unit target at
    (10, 3); ``fig4``: three targets with powers 0.6/0.3/0.1; ``desk``: a
    scaled-down grid for fast experimentation.
    """
    full = dict(n_c=512, k_chirps=8, n_p=64, l_max=10, k_max=3)
    three = (
        (math.sqrt(0.6) + 0.0j, 3, 0),
        (math.sqrt(0.3) + 0.0j, 7, 2),
        (math.sqrt(0.1) + 0.0j, 10, 3),
    )
    return {
        "table1": ScenarioConfig(
            name="table1", targets=((1.0 + 0.0j, 10, 3),), snr_db=20.0,
            pilot_overhead=1.0, rng_seed=1, **full,
        ),
        "fig4": ScenarioConfig(
            name="fig4", targets=three, snr_db=20.0,
            pilot_overhead=1.0, rng_seed=1, **full,
        ),
        "fig5": ScenarioConfig(
            name="fig5", targets=((1.0 + 0.0j, 10, 3),), snr_db=20.0,
            pilot_overhead=1.0, rng_seed=1, **full,
        ),
        "desk": ScenarioConfig(
            name="desk", n_c=32, k_chirps=4, n_p=8, l_max=2, k_max=1,
            targets=((1.0 + 0.0j, 1, 1),), snr_db=20.0,
            pilot_overhead=1.0, rng_seed=7,
        ),
    }


def resolve_scenario(ref: str | Path | ScenarioConfig) -> ScenarioConfig:
    if isinstance(ref, ScenarioConfig):
        return ref
    builtins = builtin_scenarios()
    if isinstance(ref, str) and ref in builtins:
        return builtins[ref]
    return load_scenario(ref)


@dataclass(frozen=True)
class ExperimentSpec:
    """One orchestrated run: what to compute and where to put it."""

    kind: str
    scenario: ScenarioConfig
    out_dir: Path
    presets: tuple[str, ...] = ()
    algorithms: tuple[str, ...] = ("tfmf", "dechirp", "ddmf")
    seed: int | None = None
    trials: int = 100
    snr_db_list: tuple[float, ...] = (0.0, 10.0, 20.0)
    po_list: tuple[float, ...] = (0.0, 0.5, 1.0)
    sizes: tuple[int, ...] = (256, 512, 1024, 2048)
    tfmf_reference: str = "transmit"

    def __post_init__(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.tfmf_reference not in ("transmit", "pilot"):
            raise ValueError("tfmf_reference must be 'transmit' or 'pilot'")

    @property
    def resolved_presets(self) -> tuple[str, ...]:
        return self.presets or (self.scenario.preset,)

    @property
    def resolved_seed(self) -> int:
        return self.scenario.rng_seed if self.seed is None else self.seed


def _algorithms_for(preset_name: str, algorithms) -> tuple[str, ...]:
    """ddmf requires the FMCW-equivalent set; drop it for other presets."""
    if preset_name == "proposed":
        return tuple(algorithms)
    return tuple(a for a in algorithms if a != "ddmf")


def _scenario_manifest(sc: ScenarioConfig) -> dict:
    return {
        "name": sc.name,
        "n_c": sc.n_c,
        "k_chirps": sc.k_chirps,
        "n_p": sc.n_p,
        "preset": sc.preset,
        "l_max": sc.l_max,
        "k_max": sc.k_max,
        "snr_db": sc.snr_db,
        "pilot_overhead": sc.pilot_overhead,
        "rng_seed": sc.rng_seed,
        "carrier_hz": sc.carrier_hz,
        "subcarrier_spacing_hz": sc.subcarrier_spacing_hz,
        "bandwidth_hz": sc.bandwidth_hz,
        "targets": [
            {"gain_re": g.real, "gain_im": g.imag, "l": l, "k": k}
            for g, l, k in sc.targets
        ],
    }


def _config_manifest(config: AfdmConfig) -> dict:
    return {
        "n_c": config.n_c,
        "k_chirps": config.k_chirps,
        "n_p": config.n_p,
        "c1": str(config.c1),
        "c2": str(config.c2),
        "l_cpp": config.l_cpp,
        "z_a": config.z_a,
    }


def run(spec: ExperimentSpec) -> list[Path]:
    """Execute one experiment; returns the paths written (manifest last)."""
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    outputs: dict[str, list[str]] = {}
    try:
        runner = _RUNNERS[spec.kind]
        runner(spec, out_dir, written, outputs)
        manifest = {
            "kind": spec.kind,
            "scenario": _scenario_manifest(spec.scenario),
            "presets": list(spec.resolved_presets),
            "waveforms": {
                name: _config_manifest(spec.scenario.waveform(name))
                for name in spec.resolved_presets
            },
            "algorithms": list(spec.algorithms),
            "seed": spec.resolved_seed,
            "trials": spec.trials,
            "snr_db_list": list(spec.snr_db_list),
            "po_list": list(spec.po_list),
            "sizes": list(spec.sizes),
            "tfmf_reference": spec.tfmf_reference,
            "cfar": {"train": CFAR_TRAIN, "guard": CFAR_GUARD, "pfa": CFAR_PFA},
            "outputs": outputs,
        }
        manifest_path = out_dir / "manifest.json"
        manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
        written.append(manifest_path)
        return written
    except Exception:
        for path in written:
            try:
                path.unlink()
            except OSError:
                pass
        raise


# ---------------------------------------------------------------------------
# Individual experiment kinds
# ---------------------------------------------------------------------------

def _run_ddm(spec, out_dir, written, outputs) -> None:
    sc = spec.scenario
    paths = taps_from_targets(sc.targets)
    spec_frame = FrameSpec.from_overhead(sc.n_c, sc.pilot_overhead)
    for preset_name in spec.resolved_presets:
        config = sc.waveform(preset_name)
        rng = trial_rng(spec.resolved_seed, 0)
        maps = sensing_maps(
            config, spec_frame, paths, sc.snr_db,
            _algorithms_for(preset_name, spec.algorithms), rng,
            tfmf_reference=spec.tfmf_reference,
        )
        for alg, ddm in maps.items():
            name = f"ddm_{preset_name}_{alg}.csv"
            written.append(csvio.write_ddm(out_dir / name, ddm))
            outputs[name] = ["l", "k", "magnitude_db"]


def _run_af_surface(spec, out_dir, written, outputs) -> None:
    sc = spec.scenario
    for preset_name in spec.resolved_presets:
        config = sc.waveform(preset_name)
        if config.fmcw_equivalent:
            surface = aaf_psi0_surface(config)
        else:
            base = subcarrier(config, 0)
            surface = dpaf_surface(base, base)
        name = f"af_surface_{preset_name}_psi0.csv"
        written.append(
            csvio.write_af_surface(out_dir / name, surface[: config.n_p, :])
        )
        outputs[name] = ["l", "k", "re", "im", "magnitude_db"]


def _metric_trials(spec, preset_name, algorithms, snr_db, po, trials):
    """Per-trial PSLR/image-SNR/detection samples for one condition."""
    sc = spec.scenario
    config = sc.waveform(preset_name)
    frame = FrameSpec.from_overhead(config.n_c, po)
    paths = taps_from_targets(sc.targets)
    target = sc.targets[0]
    cell = (target[1] % config.n_p, target[2] % config.k_chirps)
    samples = {alg: {"pslr": [], "isnr": [], "hit": []} for alg in algorithms}
    for t in range(trials):
        rng = trial_rng(spec.resolved_seed, t)
        maps = sensing_maps(
            config, frame, paths, snr_db, algorithms, rng,
            tfmf_reference=spec.tfmf_reference,
        )
        for alg, ddm in maps.items():
            rec = samples[alg]
            rec["pslr"].append(pslr(ddm, cell))
            rec["isnr"].append(image_snr(ddm, cell))
            detections = ca_cfar_2d(ddm, CFAR_TRAIN, CFAR_GUARD, CFAR_PFA)
            rec["hit"].append(
                detection_near(
                    detections, target[1], target[2], config.n_p, config.k_chirps
                )
            )
    return samples


def _sweep_rows(spec, preset_name, snr_values, po_values):
    rows = []
    algorithms = _algorithms_for(preset_name, spec.algorithms)
    for po in po_values:
        for snr in snr_values:
            samples = _metric_trials(
                spec, preset_name, algorithms, snr, po, spec.trials
            )
            for alg in algorithms:
                rec = samples[alg]
                report = MetricReport(
                    pslr_db=float(np.mean(rec["pslr"])),
                    image_snr_db=float(np.mean(rec["isnr"])),
                    pd=float(np.mean(rec["hit"])),
                    ber=float("nan"),
                    trials=spec.trials,
                )
                rows.append(
                    (float(snr), float(po), alg, preset_name, report.pslr_db,
                     report.image_snr_db, report.pd, report.ber, report.trials)
                )
    return rows


def _run_snr_sweep(spec, out_dir, written, outputs) -> None:
    for preset_name in spec.resolved_presets:
        rows = _sweep_rows(
            spec, preset_name, spec.snr_db_list, (spec.scenario.pilot_overhead,)
        )
        name = f"snr_sweep_{preset_name}_all.csv"
        written.append(csvio.write_metric_rows(out_dir / name, rows))
        outputs[name] = list(csvio.METRIC_COLUMNS)


def _run_po_sweep(spec, out_dir, written, outputs) -> None:
    for preset_name in spec.resolved_presets:
        rows = _sweep_rows(
            spec, preset_name, (spec.scenario.snr_db,), spec.po_list
        )
        name = f"po_sweep_{preset_name}_all.csv"
        written.append(csvio.write_metric_rows(out_dir / name, rows))
        outputs[name] = list(csvio.METRIC_COLUMNS)


def _run_pd_curve(spec, out_dir, written, outputs) -> None:
    for preset_name in spec.resolved_presets:
        rows = []
        for alg in _algorithms_for(preset_name, spec.algorithms):
            for snr in spec.snr_db_list:
                report = MetricReport(
                    pslr_db=float("nan"),
                    image_snr_db=float("nan"),
                    pd=monte_carlo_pd(
                        spec.scenario,
                        alg,
                        spec.trials,
                        seed=spec.resolved_seed,
                        snr_db=float(snr),
                        preset_name=preset_name,
                    ),
                    ber=float("nan"),
                    trials=spec.trials,
                )
                rows.append(
                    (float(snr), float(spec.scenario.pilot_overhead), alg,
                     preset_name, report.pslr_db, report.image_snr_db,
                     report.pd, report.ber, report.trials)
                )
        name = f"pd_curve_{preset_name}_all.csv"
        written.append(csvio.write_metric_rows(out_dir / name, rows))
        outputs[name] = list(csvio.METRIC_COLUMNS)


def _run_ber_curve(spec, out_dir, written, outputs) -> None:
    sc = spec.scenario
    if not sc.targets:
        raise ValueError("ber_curve needs at least one scenario target")
    powers = [abs(g) ** 2 for g, _, _ in sc.targets]
    taps = [(l, k) for _, l, k in sc.targets]
    configs = {name: sc.waveform(name) for name in spec.resolved_presets}
    realizations = max(1, spec.trials // 10)
    counts = lmmse_ber_compare(
        configs, powers, taps, spec.snr_db_list, spec.trials,
        realizations, spec.resolved_seed,
    )
    for preset_name in spec.resolved_presets:
        rows = []
        for snr in spec.snr_db_list:
            errors, bits = counts[(preset_name, float(snr))]
            report = MetricReport(
                pslr_db=float("nan"),
                image_snr_db=float("nan"),
                pd=float("nan"),
                ber=errors / bits,
                trials=bits,
            )
            rows.append(
                (float(snr), 0.0, "lmmse", preset_name, report.pslr_db,
                 report.image_snr_db, report.pd, report.ber, report.trials)
            )
        name = f"ber_curve_{preset_name}_lmmse.csv"
        written.append(csvio.write_metric_rows(out_dir / name, rows))
        outputs[name] = list(csvio.METRIC_COLUMNS)


def _run_io_check(spec, out_dir, written, outputs) -> None:
    sc = spec.scenario
    config = sc.waveform("proposed") if sc.preset != "proposed" else sc.waveform()
    if config.n_c > 64:
        config = builtin_scenarios()["desk"].waveform("proposed")
    rng = trial_rng(spec.resolved_seed, 0)
    worst = 0.0
    for _ in range(spec.trials):
        x_grid = rng.standard_normal((config.n_p, config.k_chirps)) + 1j * rng.standard_normal(
            (config.n_p, config.k_chirps)
        )
        n_paths = int(rng.integers(1, 4))
        paths = [
            PathTap(
                complex(rng.standard_normal(), rng.standard_normal()),
                int(rng.integers(0, config.n_p)),
                int(rng.integers(-(config.k_chirps // 2) + 1, config.k_chirps // 2)),
            )
            for _ in range(n_paths)
        ]
        predicted = io_predict(config, x_grid, paths)
        s = modulate(config, grid_to_vector(config, x_grid))
        observed = vector_to_grid(
            config, demodulate(config, apply_channel(config, s, paths))
        )
        worst = max(worst, float(np.abs(predicted - observed).max()))
    name = "io_check_proposed_all.csv"
    written.append(
        csvio.write_csv(
            out_dir / name,
            ["n_c", "trials", "max_abs_error", "tolerance", "passed"],
            [(config.n_c, spec.trials, worst, IO_CHECK_TOLERANCE, worst < IO_CHECK_TOLERANCE)],
        )
    )
    outputs[name] = ["n_c", "trials", "max_abs_error", "tolerance", "passed"]
    if worst >= IO_CHECK_TOLERANCE:
        raise NumericalCheckError(
            f"grid I/O relation error {worst:.3e} exceeds {IO_CHECK_TOLERANCE:.1e}"
        )


def _time_batch(fn, reps: int) -> float:
    best = math.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def benchmark_pipelines(
    sizes, k_chirps: int = 8, seed: int = 0, reps: int = 9,
) -> list[tuple[str, int, float]]:
    """Per-map runtimes (best of ``reps``) for each pipeline at each size.

    Pipelines are timed in batch mode so per-call dispatch overhead does not
    mask the per-map work: O(n_c log n_c) for the transform pipelines and
    O(n_c^2) for the grid matched filter. Batches are sized per n_c to keep
    each measurement long enough to time reliably while staying
    cache-resident for the matched filter.
    """
    from .params import proposed_params
    from .sensing import dechirp_batch, tfmf_batch

    rng = np.random.default_rng(seed)
    results = []
    for n_c in sizes:
        config = proposed_params(n_c // k_chirps, k_chirps)
        pilot = subcarrier(config, 0).samples
        batch_fast = int(np.clip(2**21 // n_c, 64, 8192))
        stack = rng.standard_normal((batch_fast, n_c)) + 1j * rng.standard_normal(
            (batch_fast, n_c)
        )
        n_p, K = config.n_p, config.k_chirps

        def run_tfmf():
            tfmf_batch(config, stack, pilot)

        def run_dechirp():
            dechirp_batch(config, stack, pilot)

        batch_mf = int(np.clip(2**24 // (n_c * n_c), 1, 64))
        y = rng.standard_normal((batch_mf, n_p, K)) + 1j * rng.standard_normal(
            (batch_mf, n_p, K)
        )
        x = np.broadcast_to(
            rng.standard_normal((1, n_p, K)) + 1j * rng.standard_normal((1, n_p, K)),
            (batch_mf, n_p, K),
        ).copy()

        def run_ddmf():
            ddmf_batch(config, y, x)

        run_tfmf(), run_dechirp(), run_ddmf()  # warm-up
        results.append(("tfmf", n_c, _time_batch(run_tfmf, reps) / batch_fast))
        results.append(("dechirp", n_c, _time_batch(run_dechirp, reps) / batch_fast))
        results.append(("ddmf", n_c, _time_batch(run_ddmf, reps) / batch_mf))
    return results


def loglog_slope(sizes, times) -> float:
    """Least-squares slope of log(time) against log(size)."""
    return float(np.polyfit(np.log(np.asarray(sizes, float)), np.log(times), 1)[0])


def _run_runtime_scaling(spec, out_dir, written, outputs) -> None:
    rows = benchmark_pipelines(spec.sizes, seed=spec.resolved_seed)
    by_alg: dict[str, list[tuple[int, float]]] = {}
    for alg, n_c, seconds in rows:
        by_alg.setdefault(alg, []).append((n_c, seconds))
    out_rows = [(alg, n_c, secs) for alg, n_c, secs in rows]
    name = "runtime_scaling_proposed_all.csv"
    written.append(
        csvio.write_csv(out_dir / name, ["algorithm", "n_c", "seconds_per_map"], out_rows)
    )
    outputs[name] = ["algorithm", "n_c", "seconds_per_map"]
    slope_rows = [
        (alg, loglog_slope([n for n, _ in pts], [s for _, s in pts]))
        for alg, pts in by_alg.items()
    ]
    name2 = "runtime_slopes_proposed_all.csv"
    written.append(csvio.write_csv(out_dir / name2, ["algorithm", "slope"], slope_rows))
    outputs[name2] = ["algorithm", "slope"]


_RUNNERS = {
    "ddm": _run_ddm,
    "af_surface": _run_af_surface,
    "snr_sweep": _run_snr_sweep,
    "po_sweep": _run_po_sweep,
    "pd_curve": _run_pd_curve,
    "ber_curve": _run_ber_curve,
    "io_check": _run_io_check,
    "runtime_scaling": _run_runtime_scaling,
}
