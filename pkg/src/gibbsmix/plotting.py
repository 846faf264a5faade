"""Figures written next to the CSV reports.  CSV stays the data contract."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.3,
    "savefig.dpi": 150,
}

SAMPLER_STYLE = {
    "P": dict(color="0.35", ls="-"),
    "GP": dict(color="tab:blue", ls="--"),
    "GPG": dict(color="tab:green", ls="-."),
    "A": dict(color="tab:red", ls="-"),
}


def _regime_grid(regimes, sharey=True):
    ncols = 2 if len(regimes) > 1 else 1
    nrows = (len(regimes) + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(3.3 * ncols, 2.5 * nrows),
                             sharex=True, sharey=sharey, squeeze=False)
    for ax in axes.flat[len(regimes):]:
        ax.set_visible(False)
    return fig, dict(zip(regimes, axes.flat))


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def _regimes(items):
    seen = []
    for it in items:
        if (it.T, it.h) not in seen:
            seen.append((it.T, it.h))
    return seen


def plot_tv_curves(curves, path, title: str | None = None) -> Path:
    with plt.rc_context(STYLE):
        fig, axes = _regime_grid(_regimes(curves))
        cmap = plt.get_cmap("viridis")
        family = _alpha_family(curves)
        for c in curves:
            ax = axes[(c.T, c.h)]
            if family:
                label = f"alpha={c.alpha:g}"
                style = dict(color=cmap(0.9 * c.alpha))
            else:
                label = c.sampler if c.sampler != "A" else "A (alpha=1/2)"
                style = SAMPLER_STYLE[c.sampler]
            ax.plot(c.times(), c.values(), label=label, **style)
        for (T, h), ax in axes.items():
            ax.set_title(f"T={T:g}, h={h:g}")
            ax.set_xlabel("t")
            ax.set_ylabel("worst-case TV")
            ax.set_ylim(0, 1.02)
        next(iter(axes.values())).legend(frameon=False)
        if title:
            fig.suptitle(title)
        return _save(fig, path)


def _alpha_family(curves) -> bool:
    return all(c.sampler == "A" for c in curves) and len({c.alpha for c in curves}) > 1


def plot_alpha_slices(slices, path) -> Path:
    with plt.rc_context(STYLE):
        fig, axes = _regime_grid(_regimes(slices))
        for s in slices:
            axes[(s.T, s.h)].plot(s.alphas(), s.values(), marker="o", ms=2.5, label=f"t={s.t}")
        for (T, h), ax in axes.items():
            ax.set_title(f"T={T:g}, h={h:g}")
            ax.set_xlabel("alpha")
            ax.set_ylabel("worst-case TV")
        next(iter(axes.values())).legend(frameon=False)
        return _save(fig, path)


def plot_profiles(profiles, path) -> Path:
    """``profiles`` maps ``(T, h, sampler)`` to a list of :class:`ProfileRow`."""
    keys = list(profiles)
    regimes = []
    for T, h, _ in keys:
        if (T, h) not in regimes:
            regimes.append((T, h))
    with plt.rc_context(STYLE):
        fig, axes = _regime_grid(regimes, sharey=False)
        by_regime = {}
        for T, h, sampler in keys:
            by_regime.setdefault((T, h), []).append(sampler)
        for (T, h), samplers in by_regime.items():
            ax = axes[(T, h)]
            width = 0.8 / len(samplers)
            for i, sampler in enumerate(samplers):
                rows = profiles[(T, h, sampler)]
                x = [r.m + (i - (len(samplers) - 1) / 2) * width * 2 for r in rows]
                ax.bar(x, [r.mass_in for r in rows], width=2 * width,
                       color=SAMPLER_STYLE.get(sampler, {}).get("color"),
                       label=f"{sampler}: pi(S)={sum(r.mass_in for r in rows):.3f}")
            ax.set_title(f"T={T:g}, h={h:g}")
            ax.set_xlabel("magnetisation m")
            ax.set_ylabel("mass inside S")
            ax.legend(frameon=False)
        return _save(fig, path)


def plot_mm_trace(trace, path, optimum: float | None = None) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.6, 2.6))
        its = range(len(trace.iterates))
        ax.plot(its, [it.true_objective for it in trace.iterates], marker="o", label="objective")
        ax.plot(its, [it.majorizer_value for it in trace.iterates], marker="x", ls=":",
                label="majoriser at iterate")
        if optimum is not None:
            ax.axhline(optimum, color="0.5", lw=0.8, label="brute-force optimum")
        ax.set_xlabel("MM iteration")
        ax.set_ylabel("squared Frobenius distance")
        ax.legend(frameon=False)
        return _save(fig, path)
