"""Report figures rendered to files with the Agg backend."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.figsize": (5.0, 3.2),
    "savefig.dpi": 120,
}


def _save(fig, out_dir: Path, name: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.png"
    fig.tight_layout()
    # fixed metadata keeps repeated runs byte-identical
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def _bars(labels: List[str], values: List[float], title: str, ylabel: str, out_dir: Path, name: str,
          colors=None) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.bar(range(len(values)), values, color=colors or "#4c72b0")
        ax.set_xticks(range(len(values)))
        ax.set_xticklabels(labels, rotation=30 if len(labels) > 6 else 0, ha="right" if len(labels) > 6 else "center")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        return _save(fig, out_dir, name)


def chi_figure(results: Dict[str, Any], out_dir: Path) -> List[Path]:
    labels, values = [], []
    for leaf, counts in sorted(results["counts"].items()):
        for p, n in enumerate(counts):
            labels.append(f"L{leaf} dim{p}")
            values.append(n)
    return [_bars(labels, values, f"simplex counts, chi_mu = {results['chi_mu']:g}", "count", out_dir, "chi")]


def gauss_bonnet_figure(results: Dict[str, Any], out_dir: Path) -> List[Path]:
    defects = [d for leaf in results["leaves"] for d in leaf["defects"]]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.hist(defects, bins=min(30, max(5, len(set(round(d, 9) for d in defects)))), color="#55a868")
        ax.set_xlabel("angle defect (rad)")
        ax.set_ylabel("vertices")
        ax.set_title("vertex angle defects")
        return [_save(fig, out_dir, "gauss_bonnet")]


def obstruction_figure(results: Dict[str, Any], out_dir: Path) -> List[Path]:
    hist = results["value_histogram"]
    keys = sorted(hist, key=int)
    return [_bars(keys, [hist[k] for k in keys], "face windings of the field", "faces", out_dir, "obstruction")]


def index_figure(results: Dict[str, Any], out_dir: Path) -> List[Path]:
    labels, values = [], []
    for leaf in results["leaves"]:
        for dim, counts in sorted(leaf["counts"].items()):
            for idx, n in sorted(counts.items()):
                labels.append(f"L{leaf['id']} d{dim} i{idx}")
                values.append(n)
    return [_bars(labels, values, "zeros of the characteristic field", "zeros", out_dir, "index")]


def cancel_figure(results: Dict[str, Any], out_dir: Path) -> List[Path]:
    norms = results["norms"]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.step(range(len(norms)), norms, where="post", color="#c44e52", label="residual mass")
        ax.axhline(results["lower_bound"], ls="--", color="0.4", lw=1, label="per-leaf bound")
        ax.set_xlabel("step")
        ax.set_ylabel("weighted L1 norm")
        ax.set_title("cancellation trace")
        ax.legend(frameon=False)
        return [_save(fig, out_dir, "cancel")]


def hodge_figure(results: Dict[str, Any], out_dir: Path) -> List[Path]:
    b = results["betti"]
    return [_bars([f"b{p}" for p in range(len(b))], b, "weighted Betti numbers", "dim_mu", out_dir, "hodge")]


def approx_figure(results: Dict[str, Any], out_dir: Path) -> List[Path]:
    vmap = results["vertex_map"]
    xs = sorted(vmap, key=int)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(range(len(xs)), [vmap[x] for x in xs], "o", ms=3, color="#8172b2")
        ax.set_xlabel("source vertex (subdivision order)")
        ax.set_ylabel("target vertex")
        ax.set_title(f"simplicial approximation, level {results['level']}, degree {results['degree']}")
        return [_save(fig, out_dir, "approx")]


def verify_figure(results: Dict[str, Any], out_dir: Path, checks: Dict[str, bool]) -> List[Path]:
    names = sorted(checks)
    with plt.rc_context({**STYLE, "figure.figsize": (6.0, max(2.5, 0.18 * len(names)))}):
        fig, ax = plt.subplots()
        ax.barh(range(len(names)), [1] * len(names),
                color=["#55a868" if checks[n] else "#c44e52" for n in names])
        ax.set_yticks(range(len(names)))
        ax.set_yticklabels(names, fontsize=6)
        ax.set_xticks([])
        ax.invert_yaxis()
        ax.set_title("invariant checks (green = pass)")
        return [_save(fig, out_dir, "verify")]


RENDERERS = {
    "chi": chi_figure,
    "gauss-bonnet": gauss_bonnet_figure,
    "obstruction": obstruction_figure,
    "index": index_figure,
    "cancel": cancel_figure,
    "hodge": hodge_figure,
    "approx": approx_figure,
}


def render(command: str, results: Dict[str, Any], checks: Dict[str, bool], out_dir: Path) -> List[Path]:
    out_dir = Path(out_dir)
    if command == "verify":
        return verify_figure(results, out_dir, checks)
    return RENDERERS[command](results, out_dir)
