"""Command-line front end: parameter sweeps, grid data emission, identity audit.

Every sweep writes a deterministic table (CSV or JSON): the same config
produces byte-identical output regardless of how many worker threads
evaluate the grid.  ``RINGSIM_THREADS`` caps the worker count.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import add_drop, attenuation, hom, single_bus
from .core import CouplerParams, RingParams

__all__ = [
    "AuditReport",
    "ConfigError",
    "IdentityRecord",
    "SweepConfig",
    "main",
    "run_audit",
    "run_sweep",
]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_AUDIT = 2
EXIT_IO = 3

#: Grid points handled per worker task; fixed so output never depends on
#: the worker count.
_CHUNK = 65536

_PI = math.pi

_DEFAULTS: dict[str, dict[str, object]] = {
    "single-bus": {
        "tau": 0.9,
        "alpha": 0.95,
        "theta_min": -_PI,
        "theta_max": _PI,
        "theta_count": 201,
    },
    "langevin-compare": {
        "tau": 0.99,
        "alpha": 0.99,
        "round_trip_time_s": 1e-12,
        "delta_tr_min": 1e-4,
        "delta_tr_max": _PI,
        "delta_count": 40,
    },
    "attenuation-chain": {
        "gamma_per_m": 0.35,
        "length_m": 2.0,
        "beta_per_m": 0.0,
        "splitter_counts": [100, 1000, 10000],
    },
    "add-drop": {
        "tau": 0.9,
        "eta": 0.9,
        "alpha": 0.95,
        "theta_min": -_PI,
        "theta_max": _PI,
        "theta_count": 201,
    },
    "homm-grid": {
        "alpha": 1.0,
        "threshold": 1e-3,
        "tau_count": 101,
        "eta_count": 101,
        "theta_count": 201,
    },
    "critical-dip": {
        "alphas": [1.0, 0.95, 0.75, 0.5],
        "theta_min": -_PI,
        "theta_max": _PI,
        "theta_count": 201,
    },
    "entropy-grid": {
        "alpha": 0.75,
        "tau_count": 41,
        "eta_count": 41,
        "theta_count": 81,
        "p1_threshold": 1e-12,
    },
    "audit": {"seed": 12345, "samples": 200},
}

SWEEP_MODES = tuple(m for m in _DEFAULTS if m != "audit")


class ConfigError(ValueError):
    """Invalid sweep configuration; message names the offending field."""


@dataclass(frozen=True)
class SweepConfig:
    """One resolved sweep: mode, numeric parameters, output destination."""

    mode: str
    params: dict
    out: str | None = None
    fmt: str = "csv"

    def canonical(self) -> str:
        """One-line JSON echo of mode plus parameters, key-sorted."""
        doc = {"mode": self.mode, **self.params}
        return json.dumps(doc, sort_keys=True, separators=(", ", ": "))


def _coerce(mode: str, key: str, value: object) -> object:
    default = _DEFAULTS[mode][key]
    if isinstance(default, bool):  # not currently used, but keep bool != int
        raise ConfigError(f"{key}: unsupported type")
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        if float(value) != int(value):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, list):
        if not isinstance(value, (list, tuple)) or not value:
            raise ConfigError(f"{key}: expected a non-empty list, got {value!r}")
        kind = type(default[0])
        out = []
        for item in value:
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise ConfigError(f"{key}: expected numbers, got {item!r}")
            if kind is int and float(item) != int(item):
                raise ConfigError(f"{key}: expected integers, got {item!r}")
            out.append(kind(item))
        return out
    raise ConfigError(f"{key}: unsupported type")


def _validate(mode: str, params: dict) -> None:
    def check(cond: bool, key: str, message: str) -> None:
        if not cond:
            raise ConfigError(f"{key}: {message} (got {params[key]!r})")

    for key in ("tau", "eta"):
        if key in params:
            check(0.0 <= params[key] <= 1.0, key, "must lie in [0, 1]")
    if "alpha" in params:
        check(0.0 < params["alpha"] <= 1.0, "alpha", "must lie in (0, 1]")
    if "alphas" in params:
        check(
            all(0.0 < a <= 1.0 for a in params["alphas"]),
            "alphas",
            "every entry must lie in (0, 1]",
        )
    if "theta_min" in params:
        slack = 1e-12
        check(
            -_PI - slack <= params["theta_min"] <= _PI + slack,
            "theta_min",
            "must lie in [-pi, pi]",
        )
        check(
            -_PI - slack <= params["theta_max"] <= _PI + slack,
            "theta_max",
            "must lie in [-pi, pi]",
        )
        check(
            params["theta_min"] <= params["theta_max"],
            "theta_min",
            "must not exceed theta_max",
        )
    for key in ("theta_count", "tau_count", "eta_count", "delta_count", "samples"):
        if key in params:
            check(params[key] >= 1, key, "must be >= 1")
    if "threshold" in params:
        check(params["threshold"] > 0.0, "threshold", "must be > 0")
    if "p1_threshold" in params:
        check(params["p1_threshold"] >= 0.0, "p1_threshold", "must be >= 0")
    if "round_trip_time_s" in params:
        check(params["round_trip_time_s"] > 0.0, "round_trip_time_s", "must be > 0")
    if "delta_tr_min" in params:
        check(params["delta_tr_min"] > 0.0, "delta_tr_min", "must be > 0")
        check(
            params["delta_tr_min"] <= params["delta_tr_max"],
            "delta_tr_min",
            "must not exceed delta_tr_max",
        )
    if "gamma_per_m" in params:
        check(params["gamma_per_m"] >= 0.0, "gamma_per_m", "must be >= 0")
        check(params["length_m"] > 0.0, "length_m", "must be > 0")
    if "splitter_counts" in params:
        check(
            all(n >= 1 for n in params["splitter_counts"]),
            "splitter_counts",
            "every entry must be >= 1",
        )
    if "seed" in params:
        check(params["seed"] >= 0, "seed", "must be >= 0")


def load_config(
    mode: str,
    config_path: str | None,
    overrides: list[str] | None,
    out: str | None,
    fmt: str | None,
) -> SweepConfig:
    """Resolve defaults, config file, and --set overrides into a SweepConfig."""
    params = dict(_DEFAULTS[mode])
    file_out: str | None = None
    file_fmt: str | None = None
    if config_path is not None:
        try:
            with open(config_path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a flat JSON object")
        for key, value in doc.items():
            if key == "mode":
                if value != mode:
                    raise ConfigError(
                        f"mode: config file says {value!r}, command line says {mode!r}"
                    )
            elif key == "out":
                file_out = str(value)
            elif key == "format":
                file_fmt = str(value)
            elif key in params:
                params[key] = _coerce(mode, key, value)
            else:
                raise ConfigError(
                    f"{key}: unknown key for mode {mode}; valid keys: "
                    + ", ".join(sorted(params))
                )
    for item in overrides or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        if key not in params:
            raise ConfigError(
                f"{key}: unknown key for mode {mode}; valid keys: "
                + ", ".join(sorted(params))
            )
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        params[key] = _coerce(mode, key, value)
    _validate(mode, params)
    resolved_fmt = fmt or file_fmt or "csv"
    if resolved_fmt not in ("csv", "json"):
        raise ConfigError(f"format: must be csv or json, got {resolved_fmt!r}")
    return SweepConfig(mode=mode, params=params, out=out or file_out, fmt=resolved_fmt)


def _worker_count() -> int:
    raw = os.environ.get("RINGSIM_THREADS")
    if raw is None:
        return min(8, os.cpu_count() or 1)
    try:
        count = int(raw)
    except ValueError:
        count = 0
    if count < 1:
        raise ConfigError(f"RINGSIM_THREADS: must be a positive integer, got {raw!r}")
    return count


def _chunked_rows(total: int, compute, workers: int) -> list[list]:
    """Evaluate ``compute(lo, hi)`` over chunks, preserving canonical order."""
    spans = [(lo, min(lo + _CHUNK, total)) for lo in range(0, total, _CHUNK)]
    if not spans:
        return []
    if workers <= 1 or len(spans) == 1:
        rows: list[list] = []
        for lo, hi in spans:
            rows.extend(compute(lo, hi))
        return rows
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda span: compute(*span), spans)
        return [row for part in parts for row in part]


# --- sweep implementations -------------------------------------------------


def _sweep_single_bus(p: dict, workers: int):
    coupler = CouplerParams.from_magnitude(p["tau"])
    thetas = np.linspace(p["theta_min"], p["theta_max"], p["theta_count"])

    def compute(lo: int, hi: int) -> list[list]:
        rows = []
        for theta in thetas[lo:hi]:
            ring = RingParams.from_alpha(p["alpha"], theta=float(theta))
            amp, noise = single_bus.transfer_amplitude(coupler, ring)
            rows.append(
                [float(theta), amp.real, amp.imag, abs(amp) ** 2, noise]
            )
        return rows

    columns = ["theta_rad", "transfer_re", "transfer_im", "power", "noise_power"]
    return columns, _chunked_rows(len(thetas), compute, workers), None


def _sweep_langevin_compare(p: dict, workers: int):
    coupler = CouplerParams.from_magnitude(p["tau"])
    per_side = np.logspace(
        math.log10(p["delta_tr_min"]), math.log10(p["delta_tr_max"]), p["delta_count"]
    )
    x = np.concatenate([-per_side[::-1], per_side])
    deltas = x / p["round_trip_time_s"]
    table = single_bus.power_comparison(
        coupler, p["alpha"], p["round_trip_time_s"], deltas
    )

    def compute(lo: int, hi: int) -> list[list]:
        rows = []
        for xval, ring_pow, lor_pow in table[lo:hi]:
            rel = abs(ring_pow - lor_pow) / lor_pow if lor_pow else math.inf
            rows.append([float(xval), float(ring_pow), float(lor_pow), float(rel)])
        return rows

    columns = ["delta_tr", "power_phasor", "power_lorentzian", "rel_diff"]
    return columns, _chunked_rows(len(table), compute, workers), None


def _sweep_attenuation_chain(p: dict, workers: int):
    gamma, length, beta = p["gamma_per_m"], p["length_m"], p["beta_per_m"]
    counts = p["splitter_counts"]
    limit = math.exp(-gamma * length)

    def compute(lo: int, hi: int) -> list[list]:
        rows = []
        for n in counts[lo:hi]:
            chain = attenuation.BeamSplitterChain(gamma, length, beta, n)
            rows.append([int(n), chain.power, limit, abs(chain.power - limit)])
        return rows

    columns = ["n_splitters", "chain_power", "continuum_power", "abs_error"]
    return columns, _chunked_rows(len(counts), compute, workers), None


def _sweep_add_drop(p: dict, workers: int):
    coupler_in = CouplerParams.from_magnitude(p["tau"])
    coupler_drop = CouplerParams.from_magnitude(p["eta"])
    thetas = np.linspace(p["theta_min"], p["theta_max"], p["theta_count"])

    def compute(lo: int, hi: int) -> list[list]:
        rows = []
        for theta in thetas[lo:hi]:
            params = add_drop.AddDropParams(
                coupler_in,
                coupler_drop,
                RingParams.from_alpha(p["alpha"], theta=float(theta)),
            )
            m = add_drop.transfer_matrix(params)
            comm = add_drop.noise_commutators(m)
            rows.append(
                [
                    float(theta),
                    m[0, 0].real, m[0, 0].imag,
                    m[0, 1].real, m[0, 1].imag,
                    m[1, 0].real, m[1, 0].imag,
                    m[1, 1].real, m[1, 1].imag,
                    comm[0, 0].real, comm[1, 1].real,
                    comm[0, 1].real, comm[0, 1].imag,
                ]
            )
        return rows

    columns = [
        "theta_rad",
        "m_ca_re", "m_ca_im", "m_cb_re", "m_cb_im",
        "m_da_re", "m_da_im", "m_db_re", "m_db_im",
        "comm_cc", "comm_dd", "comm_cd_re", "comm_cd_im",
    ]
    return columns, _chunked_rows(len(thetas), compute, workers), None


def _grid_axes(p: dict) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    taus = np.linspace(0.0, 1.0, p["tau_count"])
    etas = np.linspace(0.0, 1.0, p["eta_count"])
    thetas = np.linspace(-_PI, _PI, p["theta_count"])
    return taus, etas, thetas


def _sweep_homm_grid(p: dict, workers: int):
    taus, etas, thetas = _grid_axes(p)
    shape = (len(taus), len(etas), len(thetas))
    total = int(np.prod(shape))
    threshold = p["threshold"]

    def compute(lo: int, hi: int) -> list[list]:
        it, ie, ith = np.unravel_index(np.arange(lo, hi), shape)
        ratio = hom.coincidence_ratio_grid(
            taus[it], etas[ie], thetas[ith], p["alpha"]
        )
        keep = ratio <= threshold  # NaN (undefined ratio) never passes
        return [
            [float(taus[a]), float(etas[b]), float(thetas[c]), float(r)]
            for a, b, c, r in zip(it[keep], ie[keep], ith[keep], ratio[keep])
        ]

    rows = _chunked_rows(total, compute, workers)
    summary = {
        "count": len(rows),
        "fraction": len(rows) / total,
        "grid": "x".join(str(n) for n in shape),
    }
    columns = ["tau", "eta", "theta_rad", "coincidence_ratio"]
    return columns, rows, summary


def _sweep_critical_dip(p: dict, workers: int):
    thetas = np.linspace(p["theta_min"], p["theta_max"], p["theta_count"])
    tau = 1.0 / math.sqrt(2.0)
    curves = [
        hom.coincidence_ratio_grid(tau, tau, thetas, a) for a in p["alphas"]
    ]

    def compute(lo: int, hi: int) -> list[list]:
        return [
            [float(thetas[i])] + [float(curve[i]) for curve in curves]
            for i in range(lo, hi)
        ]

    columns = ["theta_rad"] + [f"coincidence_alpha_{a!r}" for a in p["alphas"]]
    return columns, _chunked_rows(len(thetas), compute, workers), None


def _sweep_entropy_grid(p: dict, workers: int):
    taus, etas, thetas = _grid_axes(p)
    shape = (len(taus), len(etas), len(thetas))
    total = int(np.prod(shape))

    def compute(lo: int, hi: int) -> list[list]:
        it, ie, ith = np.unravel_index(np.arange(lo, hi), shape)
        bits = hom.entropy_grid(
            taus[it], etas[ie], thetas[ith], p["alpha"], p["p1_threshold"]
        )
        return [
            [float(taus[a]), float(etas[b]), float(thetas[c]), float(s)]
            for a, b, c, s in zip(it, ie, ith, bits)
        ]

    columns = ["tau", "eta", "theta_rad", "entropy_bits"]
    return columns, _chunked_rows(total, compute, workers), None


_SWEEPS = {
    "single-bus": _sweep_single_bus,
    "langevin-compare": _sweep_langevin_compare,
    "attenuation-chain": _sweep_attenuation_chain,
    "add-drop": _sweep_add_drop,
    "homm-grid": _sweep_homm_grid,
    "critical-dip": _sweep_critical_dip,
    "entropy-grid": _sweep_entropy_grid,
}


def _fmt_cell(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return repr(float(value))


def render_csv(config: SweepConfig, columns, rows, summary) -> str:
    buf = io.StringIO()
    buf.write(f"# config: {config.canonical()}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt_cell(v) for v in row) + "\n")
    if summary is not None:
        pairs = " ".join(f"{k}={_fmt_cell(v) if not isinstance(v, str) else v}"
                         for k, v in summary.items())
        buf.write(f"# summary: {pairs}\n")
    return buf.getvalue()


def render_json(config: SweepConfig, columns, rows, summary) -> str:
    def clean(v):
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            return int(v)
        v = float(v)
        return v if math.isfinite(v) else None

    payload = {
        "mode": config.mode,
        "config": dict(sorted(config.params.items())),
        "columns": list(columns),
        "rows": [[clean(v) for v in row] for row in rows],
    }
    if summary is not None:
        payload["summary"] = summary
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def run_sweep(config: SweepConfig) -> str:
    """Evaluate one sweep and return the rendered output text."""
    if config.mode not in _SWEEPS:
        raise ConfigError(f"mode: unknown sweep mode {config.mode!r}")
    columns, rows, summary = _SWEEPS[config.mode](config.params, _worker_count())
    renderer = render_csv if config.fmt == "csv" else render_json
    return renderer(config, columns, rows, summary)


# --- identity audit ---------------------------------------------------------


@dataclass(frozen=True)
class IdentityRecord:
    name: str
    samples: int
    max_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance


@dataclass(frozen=True)
class AuditReport:
    seed: int
    records: tuple[IdentityRecord, ...]

    @property
    def ok(self) -> bool:
        return all(record.passed for record in self.records)


def _random_add_drop(rng: np.random.Generator) -> add_drop.AddDropParams:
    return add_drop.AddDropParams(
        CouplerParams.from_magnitude(rng.uniform(0.05, 0.98)),
        CouplerParams.from_magnitude(rng.uniform(0.05, 0.98)),
        RingParams.from_alpha(rng.uniform(0.3, 0.98), theta=rng.uniform(-_PI, _PI)),
    )


def run_audit(seed: int, samples: int) -> AuditReport:
    """Re-derive every bookkeeping identity on random parameters.

    Deterministic for a fixed seed; each identity records its worst
    residual over ``samples`` draws.
    """
    if samples < 1:
        raise ConfigError(f"samples: must be >= 1, got {samples}")
    rng = np.random.default_rng(seed)
    records: list[IdentityRecord] = []

    def record(name: str, tolerance: float, residuals) -> None:
        worst = float(np.max(residuals))
        records.append(
            IdentityRecord(
                name=name,
                samples=len(residuals),
                max_residual=worst,
                tolerance=tolerance,
            )
        )

    def rand_single(max_tau: float = 0.99):
        coupler = CouplerParams.from_magnitude(
            rng.uniform(0.0, max_tau), tau_phase=rng.uniform(-_PI, _PI)
        )
        ring = RingParams.from_alpha(
            rng.uniform(0.3, 1.0), theta=rng.uniform(-_PI, _PI)
        )
        return coupler, ring

    res = []
    for _ in range(samples):
        ident = single_bus.commutator_sum_identity(*rand_single())
        res.append(abs(ident.analytic - ident.closed))
    record("single_bus_noise_closed_form", 1e-12, res)

    res = []
    for _ in range(min(samples, 100)):
        coupler = CouplerParams.from_magnitude(rng.uniform(0.0, 0.9))
        ring = RingParams.from_alpha(rng.uniform(0.3, 0.95), theta=rng.uniform(-_PI, _PI))
        series = single_bus.commutator_sum_series(coupler, ring, n_max=200, m_max=200)
        closed = single_bus.commutator_sum_identity(coupler, ring).closed
        res.append(abs(series - closed))
    record("circulation_double_sum_closed_form", 1e-8, res)

    res = []
    for _ in range(samples):
        gamma, length = rng.uniform(0.01, 2.5), rng.uniform(0.1, 2.0)
        res.append(abs(attenuation.continuum_commutator(gamma, length) - 1.0))
    record("uniform_line_commutator_unity", 1e-10, res)

    res = []
    for _ in range(samples):
        segments = [
            attenuation.LossSegment(rng.uniform(0.0, 2.0), rng.uniform(0.05, 1.0))
            for _ in range(5)
        ]
        res.append(abs(attenuation.piecewise_commutator(segments) - 1.0))
    record("piecewise_commutator_unity", 1e-10, res)

    res = []
    for _ in range(samples):
        rates = single_bus.LangevinRates(rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0))
        amp, noise = single_bus.langevin_transfer(rates, rng.uniform(-3.0, 3.0))
        res.append(abs(abs(amp) ** 2 + noise - 1.0))
    record("lorentzian_power_plus_noise_unity", 1e-12, res)

    res = []
    for _ in range(samples):
        t, a = rng.uniform(0.05, 0.999), rng.uniform(0.05, 0.999)
        tr = rng.uniform(1e-13, 1e-9)
        rates = single_bus.match_rates(
            CouplerParams.from_magnitude(t), RingParams.from_alpha(a, theta=0.0), tr
        )
        scale = math.sqrt(a * t) * tr
        res.append(abs(rates.gamma_plus * scale - (1.0 - a * t)))
        res.append(abs(rates.gamma_minus * scale - (a - t)))
    record("rate_matching_two_forms", 1e-12, res)

    res = []
    for _ in range(samples):
        m = add_drop.transfer_matrix(_random_add_drop(rng))
        comm = add_drop.noise_commutators(m)
        res.append(abs(comm[0, 0] - (1.0 - abs(m[0, 0]) ** 2 - abs(m[0, 1]) ** 2)))
        res.append(abs(comm[1, 1] - (1.0 - abs(m[1, 0]) ** 2 - abs(m[1, 1]) ** 2)))
        res.append(
            abs(
                comm[0, 1]
                - (-(m[0, 0] * m[1, 0].conjugate() + m[0, 1] * m[1, 1].conjugate()))
            )
        )
        res.append(abs(comm[1, 0] - comm[0, 1].conjugate()))
    record("noise_commutator_entries", 1e-12, res)

    res = []
    for _ in range(samples):
        params = add_drop.AddDropParams(
            CouplerParams.from_magnitude(rng.uniform(0.05, 0.98)),
            CouplerParams.from_magnitude(rng.uniform(0.05, 0.98)),
            RingParams.from_alpha(1.0, theta=rng.uniform(-_PI, _PI)),
        )
        m = add_drop.transfer_matrix(params)
        res.append(float(np.max(np.abs(m @ m.conj().T - np.eye(2)))))
    record("lossless_matrix_unitarity", 1e-12, res)

    res = []
    for _ in range(samples):
        m = add_drop.transfer_matrix(_random_add_drop(rng))
        state = hom.output_state(add_drop.inverse_conjugate(m))
        density = hom.reduce_density(state, add_drop.noise_commutators(m))
        res.append(abs(density.p0 + density.p1 + density.p2 - 1.0))
        eigs = np.linalg.eigvalsh(density.rho2)
        res.append(max(0.0, -float(eigs.min())))
        if density.rho1 is not None:
            eigs = np.linalg.eigvalsh(density.rho1)
            res.append(max(0.0, -float(eigs.min())))
    record("sector_probabilities_and_psd", 1e-10, res)

    res = []
    for _ in range(samples):
        m = add_drop.transfer_matrix(_random_add_drop(rng))
        state = hom.output_state(add_drop.inverse_conjugate(m))
        density = hom.reduce_density(state, add_drop.noise_commutators(m))
        closed = hom.sector_normalizer(m)
        res.append(abs(density.normalizer - closed) / max(1.0, abs(closed)))
    record("sector_norm_closed_form", 1e-10, res)

    res = []
    for _ in range(samples):
        m = add_drop.transfer_matrix(_random_add_drop(rng))
        direct = hom.coincidence_ratio(m)
        inverted = hom.coincidence_ratio(add_drop.inverse_conjugate(m))
        res.append(abs(direct - inverted) / (1.0 + direct))
    record("coincidence_ratio_inversion_invariance", 1e-12, res)

    res = []
    for _ in range(samples):
        params = add_drop.AddDropParams(
            CouplerParams.from_magnitude(rng.uniform(0.05, 0.98)),
            CouplerParams.from_magnitude(rng.uniform(0.05, 0.98)),
            RingParams.from_alpha(1.0, theta=rng.uniform(-_PI, _PI)),
        )
        m = add_drop.transfer_matrix(params)
        state = hom.output_state(add_drop.inverse_conjugate(m))
        res.append(
            abs(hom.coincidence_ratio(m) - hom.coincidence_probability(state))
        )
    record("lossless_coincidence_route_agreement", 1e-8, res)

    return AuditReport(seed=seed, records=tuple(records))


def render_audit_text(report: AuditReport, samples: int) -> str:
    width = max(len(r.name) for r in report.records)
    lines = [f"identity audit (seed={report.seed}, samples={samples})"]
    for r in report.records:
        verdict = "PASS" if r.passed else "FAIL"
        lines.append(
            f"  {r.name:<{width}}  n={r.samples:<5d} max|res|={r.max_residual:9.3e}"
            f"  tol={r.tolerance:7.1e}  {verdict}"
        )
    passed = sum(r.passed for r in report.records)
    lines.append(
        f"audit: {'PASS' if report.ok else 'FAIL'} "
        f"({passed}/{len(report.records)} identities)"
    )
    return "\n".join(lines) + "\n"


def render_audit_json(report: AuditReport, samples: int) -> str:
    payload = {
        "seed": report.seed,
        "samples": samples,
        "identities": [
            {
                "name": r.name,
                "samples": r.samples,
                "max_residual": r.max_residual,
                "tolerance": r.tolerance,
                "pass": r.passed,
            }
            for r in report.records
        ],
        "pass": report.ok,
    }
    return json.dumps(payload, indent=2) + "\n"


# --- entry point ------------------------------------------------------------


def _write_output(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringsim",
        description=(
            "Lossy ring-resonator sweeps: transfer functions, noise "
            "commutators, and two-photon interference grids."
        ),
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in SWEEP_MODES:
        keys = ", ".join(sorted(_DEFAULTS[mode]))
        p = sub.add_parser(mode, help=f"sweep keys: {keys}")
        p.add_argument("--config", help="flat JSON config file")
        p.add_argument(
            "--set",
            action="append",
            dest="overrides",
            metavar="KEY=VALUE",
            help="override one config key (repeatable; JSON values accepted)",
        )
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), dest="fmt")
    audit = sub.add_parser("audit", help="run the bookkeeping-identity audit")
    audit.add_argument("--seed", type=int, default=_DEFAULTS["audit"]["seed"])
    audit.add_argument("--samples", type=int, default=_DEFAULTS["audit"]["samples"])
    audit.add_argument("--out", help="also write a JSON report to this path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.mode == "audit":
            if args.samples < 1:
                raise ConfigError(f"samples: must be >= 1, got {args.samples}")
            report = run_audit(args.seed, args.samples)
            sys.stdout.write(render_audit_text(report, args.samples))
            if args.out:
                try:
                    _write_output(render_audit_json(report, args.samples), args.out)
                except OSError as exc:
                    sys.stderr.write(f"ringsim: i/o error: {exc}\n")
                    return EXIT_IO
            return EXIT_OK if report.ok else EXIT_AUDIT
        config = load_config(args.mode, args.config, args.overrides, args.out, args.fmt)
        text = run_sweep(config)
    except ConfigError as exc:
        sys.stderr.write(f"ringsim: config error: {exc}\n")
        return EXIT_CONFIG
    try:
        _write_output(text, config.out)
    except OSError as exc:
        sys.stderr.write(f"ringsim: i/o error: {exc}\n")
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
