"""Curie-Weiss experiments: sampler comparisons, optimal cuts and alpha sweeps.

Everything is exact: worst-case TV is the maximum over all ``2**d``
starting states of the TV distance of the corresponding row of ``K**t``.
One time step is one application of the named kernel.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import Cut, InvariantError, Kernel, additive_mixture, gibbs_kernel, tv_curve, validate_kernel
from .curie_weiss import ModelParams, glauber_kernel, magnetisation_cut, magnetisations
from .partition_opt import Objective, brute_force_cut

log = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "TvCurve",
    "CutRecord",
    "ProfileRow",
    "parse_config_file",
    "config_from_mapping",
    "composite_kernels",
    "run_fixed_cut_comparison",
    "run_optimal_cut_comparison",
    "run_alpha_sweep",
    "magnetisation_profile",
    "write_csv",
]

SAMPLERS = ("P", "GP", "GPG", "A")
DEFAULT_REGIMES = ((2.0, 0.0), (2.0, 2.0), (15.0, 0.0), (15.0, 2.0))
# sampler -> brute-force objective selecting its cut
SAMPLER_OBJECTIVE = {"GP": Objective.TRACE_GP, "GPG": Objective.TRACE_GPG, "A": Objective.FROBENIUS_A}

CURVE_COLUMNS = ("T", "h", "sampler", "alpha", "t", "tv")
CUT_COLUMNS = ("T", "h", "sampler", "cut_bitmask", "pi_S", "objective")
PROFILE_COLUMNS = ("T", "h", "sampler", "m", "states", "states_in", "states_out",
                   "mass_in", "mass_out")


@dataclass
class ExperimentConfig:
    regimes: list[tuple[float, float]] = field(default_factory=lambda: list(DEFAULT_REGIMES))
    d: int = 4
    samplers: tuple[str, ...] = SAMPLERS
    alpha: float = 0.5
    alpha_grid: list[float] = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    slice_alphas: list[float] = field(
        default_factory=lambda: [round(0.05 * i, 2) for i in range(21)])
    slice_horizons: list[int] = field(default_factory=lambda: [3, 5, 10])
    horizons: list[int] = field(default_factory=lambda: list(range(1, 31)))
    cut_mode: str = "magnetisation"
    cut_bitmask: int | None = None
    output_dir: Path | None = None
    plots: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.d < 1:
            raise ValueError("d must be positive")
        unknown = set(self.samplers) - set(SAMPLERS)
        if unknown:
            raise ValueError(f"unknown samplers {sorted(unknown)}; choose from {SAMPLERS}")
        for hs in (self.horizons, self.slice_horizons):
            if any(t < 1 for t in hs) or list(hs) != sorted(hs):
                raise ValueError("horizons must be positive and ascending")
        for a in [self.alpha, *self.alpha_grid, *self.slice_alphas]:
            if not 0.0 <= a <= 1.0:
                raise ValueError(f"alpha {a} outside [0, 1]")
        if self.cut_mode not in ("magnetisation", "frobenius_optimal", "bitmask"):
            raise ValueError(f"unknown cut mode {self.cut_mode!r}")
        if self.cut_mode == "bitmask" and self.cut_bitmask is None:
            raise ValueError("cut mode 'bitmask' needs cut_bitmask")

    @property
    def curve_times(self) -> list[int]:
        return [0, *self.horizons]


def _parse_list(text: str, conv=float) -> list:
    out = []
    for item in text.replace(";", ",").split(","):
        item = item.strip()
        if not item:
            continue
        if conv is int and "-" in item[1:]:
            lo, hi = item.split("-", 1) if not item.startswith("-") else (item, item)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(conv(item))
    return out


def _parse_regimes(text: str) -> list[tuple[float, float]]:
    regimes = []
    for item in _parse_list(text, str):
        T, sep, h = item.partition(":")
        if not sep:
            raise ValueError(f"regime {item!r} must be written T:h")
        regimes.append((float(T), float(h)))
    return regimes


def _parse_cut(text: str) -> tuple[str, int | None]:
    text = text.strip()
    if text in ("mag", "magnetisation"):
        return "magnetisation", None
    if text in ("opt", "frobenius_optimal"):
        return "frobenius_optimal", None
    if text.startswith("bitmask:"):
        return "bitmask", int(text.split(":", 1)[1], 0)
    raise ValueError(f"cut must be mag, opt or bitmask:<int>, got {text!r}")


def parse_config_file(path) -> dict[str, str]:
    """Read ``key = value`` lines; ``#`` starts a comment, blank lines are skipped.

    Recognised keys: ``d``, ``regimes`` (``T:h`` pairs), ``samplers``,
    ``alpha``, ``alpha_grid``, ``slice_alphas``, ``slice_horizons``,
    ``horizons`` (integers or ``a-b`` ranges), ``cut`` (``mag``, ``opt`` or
    ``bitmask:<int>``), ``output_dir`` and ``plots`` (``yes``/``no``).
    """
    entries = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            entries[key.strip()] = value.strip()
    return entries


def config_from_mapping(entries: dict[str, str], base: ExperimentConfig | None = None) -> ExperimentConfig:
    cfg = base or ExperimentConfig()
    updates = {}
    for key, value in entries.items():
        if key == "d":
            updates["d"] = int(value)
        elif key == "regimes":
            updates["regimes"] = _parse_regimes(value)
        elif key == "samplers":
            updates["samplers"] = tuple(_parse_list(value, str))
        elif key == "alpha":
            updates["alpha"] = float(value)
        elif key in ("alpha_grid", "slice_alphas"):
            updates[key] = _parse_list(value)
        elif key in ("horizons", "slice_horizons"):
            updates[key] = _parse_list(value, int)
        elif key == "cut":
            updates["cut_mode"], updates["cut_bitmask"] = _parse_cut(value)
        elif key == "output_dir":
            updates["output_dir"] = Path(value)
        elif key == "plots":
            updates["plots"] = value.lower() in ("1", "yes", "true", "on")
        else:
            raise ValueError(f"unknown config key {key!r}")
    return replace(cfg, **updates)


@dataclass(frozen=True)
class TvCurve:
    sampler: str
    T: float
    h: float
    rows: tuple[tuple[int, float], ...]
    alpha: float | None = None

    def __post_init__(self):
        tv = np.array([v for _, v in self.rows])
        if np.any(tv < -1e-12) or np.any(tv > 1 + 1e-12):
            raise InvariantError(f"{self.sampler}: TV outside [0, 1]")
        if np.any(np.diff(tv) > 1e-12):
            raise InvariantError(f"{self.sampler}: worst-case TV increased along the curve")

    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.rows])

    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.rows])

    def at(self, t: int) -> float:
        return dict(self.rows)[t]

    def to_rows(self) -> list[dict]:
        alpha = "" if self.alpha is None else self.alpha
        return [{"T": self.T, "h": self.h, "sampler": self.sampler, "alpha": alpha,
                 "t": t, "tv": repr(v)} for t, v in self.rows]


@dataclass(frozen=True)
class CutRecord:
    T: float
    h: float
    sampler: str
    cut: Cut
    pi_S: float
    objective: float

    def to_row(self) -> dict:
        return {"T": self.T, "h": self.h, "sampler": self.sampler, "cut_bitmask": self.cut.mask,
                "pi_S": repr(self.pi_S), "objective": repr(self.objective)}


@dataclass(frozen=True)
class ProfileRow:
    m: int
    states: int
    states_in: int
    states_out: int
    mass_in: float
    mass_out: float


def write_csv(path, columns: Sequence[str], rows: Iterable[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return path


def composite_kernels(P: Kernel, S: Cut) -> tuple[Kernel, Kernel, Kernel]:
    """``(G_S P, G_S P G_S, (P + G_S) / 2)`` for the two-block Gibbs kernel of ``S``."""
    G = gibbs_kernel(P.pi, S)
    gp = G.matrix @ P.matrix
    return (validate_kernel(gp, P.pi), validate_kernel(gp @ G.matrix, P.pi),
            additive_mixture(P, G, 0.5))


def _sampler_kernel(P: Kernel, sampler: str, S: Cut | None, alpha: float = 0.5) -> Kernel:
    if sampler == "P":
        return P
    G = gibbs_kernel(P.pi, S)
    if sampler == "GP":
        return validate_kernel(G.matrix @ P.matrix, P.pi)
    if sampler == "GPG":
        return validate_kernel(G.matrix @ P.matrix @ G.matrix, P.pi)
    return additive_mixture(P, G, alpha)


def _fixed_cut(config: ExperimentConfig, n: int) -> Cut:
    if config.cut_mode == "bitmask":
        return Cut(config.cut_bitmask, n)
    return magnetisation_cut(config.d)


def _curve(K: Kernel, sampler, T, h, times, alpha=None) -> TvCurve:
    return TvCurve(sampler, T, h, tuple(tv_curve(K, times)), alpha)


def _regime_tag(T, h) -> str:
    return f"T{T:g}_h{h:g}"


def _emit_curves(config: ExperimentConfig, name: str, curves: list[TvCurve], title: str):
    if config.output_dir is None:
        return
    out = Path(config.output_dir)
    for T, h in config.regimes:
        rows = [r for c in curves if (c.T, c.h) == (T, h) for r in c.to_rows()]
        write_csv(out / f"{name}_{_regime_tag(T, h)}.csv", CURVE_COLUMNS, rows)
    if config.plots:
        from .plotting import plot_tv_curves
        plot_tv_curves(curves, out / f"{name}.png", title=title)


def run_fixed_cut_comparison(config: ExperimentConfig) -> list[TvCurve]:
    """Worst-case TV of each sampler with a fixed cut (magnetisation sign by default)."""
    if config.cut_mode == "frobenius_optimal":
        raise ValueError("fixed-cut comparison needs cut mode 'magnetisation' or 'bitmask'")
    curves = []
    for T, h in config.regimes:
        P = glauber_kernel(ModelParams(config.d, T, h))
        S = _fixed_cut(config, P.n)
        for sampler in config.samplers:
            K = _sampler_kernel(P, sampler, S, config.alpha)
            alpha = config.alpha if sampler == "A" else None
            curves.append(_curve(K, sampler, T, h, config.curve_times, alpha))
        log.info("fixed cut T=%g h=%g done", T, h)
    _emit_curves(config, "compare", curves, "Worst-case TV, fixed cut")
    return curves


def optimal_cuts(P: Kernel, T, h, samplers=("GP", "GPG", "A"), alpha: float = 0.5) -> dict[str, CutRecord]:
    """Brute-force Frobenius-optimal cut for each partition-dependent sampler."""
    cuts = {}
    for sampler in samplers:
        if sampler == "P":
            continue
        res = brute_force_cut(P, alpha, SAMPLER_OBJECTIVE[sampler])
        # report every sampler on the trace scale: Tr(K* K) = ||K - Pi||^2 + 1
        value = res.objective_value + (1.0 if sampler == "A" else 0.0)
        cuts[sampler] = CutRecord(T, h, sampler, res.best_cut, res.best_cut.mass(P.pi), value)
    return cuts


def run_optimal_cut_comparison(config: ExperimentConfig) -> tuple[list[TvCurve], list[CutRecord]]:
    """Each partition-dependent sampler at its own brute-force optimal cut."""
    curves, records = [], []
    for T, h in config.regimes:
        P = glauber_kernel(ModelParams(config.d, T, h))
        cuts = optimal_cuts(P, T, h, config.samplers, config.alpha)
        records.extend(cuts.values())
        for sampler in config.samplers:
            S = cuts[sampler].cut if sampler != "P" else None
            K = _sampler_kernel(P, sampler, S, config.alpha)
            alpha = config.alpha if sampler == "A" else None
            curves.append(_curve(K, sampler, T, h, config.curve_times, alpha))
    _emit_curves(config, "optcuts", curves, "Worst-case TV, Frobenius-optimal cuts")
    if config.output_dir is not None:
        write_csv(Path(config.output_dir) / "optcuts_cuts.csv", CUT_COLUMNS,
                  [r.to_row() for r in records])
    return curves, records


def run_alpha_sweep(config: ExperimentConfig) -> tuple[list[TvCurve], list["AlphaSlice"]]:
    """TV-versus-time for ``config.alpha_grid`` and TV-versus-alpha slices.

    Returns the curves and one :class:`AlphaSlice` per regime and slice
    horizon, holding ``(alpha, tv)`` pairs over ``config.slice_alphas``.
    """
    curves, slices = [], []
    for T, h in config.regimes:
        P = glauber_kernel(ModelParams(config.d, T, h))
        G = gibbs_kernel(P.pi, _fixed_cut(config, P.n))
        for a in config.alpha_grid:
            curves.append(_curve(additive_mixture(P, G, a), "A", T, h, config.curve_times, a))
        table = {a: dict(tv_curve(additive_mixture(P, G, a), config.slice_horizons))
                 for a in config.slice_alphas}
        for t in config.slice_horizons:
            slices.append(AlphaSlice(T, h, t, tuple((a, table[a][t]) for a in config.slice_alphas)))
    _emit_curves(config, "alpha", curves, "Worst-case TV of A_alpha")
    if config.output_dir is not None:
        out = Path(config.output_dir)
        for T, h in config.regimes:
            rows = [r for s in slices if (s.T, s.h) == (T, h) for r in s.to_rows()]
            write_csv(out / f"alpha_slices_{_regime_tag(T, h)}.csv", CURVE_COLUMNS, rows)
        if config.plots:
            from .plotting import plot_alpha_slices
            plot_alpha_slices(slices, out / "alpha_slices.png")
    return curves, slices


@dataclass(frozen=True)
class AlphaSlice:
    T: float
    h: float
    t: int
    rows: tuple[tuple[float, float], ...]

    def alphas(self) -> np.ndarray:
        return np.array([a for a, _ in self.rows])

    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.rows])

    def to_rows(self) -> list[dict]:
        return [{"T": self.T, "h": self.h, "sampler": "A", "alpha": a, "t": self.t,
                 "tv": repr(v)} for a, v in self.rows]


def magnetisation_profile(cut: Cut, d: int, pi=None) -> list[ProfileRow]:
    """State counts and stationary mass inside and outside ``cut`` per magnetisation level."""
    if cut.n != 1 << d:
        raise InvariantError(f"cut covers {cut.n} states, {d} spins give {1 << d}")
    m = magnetisations(d)
    ind = cut.indicator()
    probs = np.zeros(m.size) if pi is None else np.asarray(getattr(pi, "probs", pi))
    rows = []
    for level in range(-d, d + 1, 2):
        at = m == level
        rows.append(ProfileRow(level, int(at.sum()), int((at & ind).sum()), int((at & ~ind).sum()),
                               float(probs[at & ind].sum()), float(probs[at & ~ind].sum())))
    return rows


def profile_rows(T, h, sampler, rows: list[ProfileRow]) -> list[dict]:
    return [{"T": T, "h": h, "sampler": sampler, "m": r.m, "states": r.states,
             "states_in": r.states_in, "states_out": r.states_out,
             "mass_in": repr(r.mass_in), "mass_out": repr(r.mass_out)} for r in rows]
