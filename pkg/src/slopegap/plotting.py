"""Static figures written next to the tabular output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids and no timestamp keep SVG output byte-identical across runs
plt.rcParams.update(
    {
        "svg.hashsalt": "slopegap",
        "svg.fonttype": "none",
        "figure.figsize": (6.0, 4.0),
        "axes.grid": True,
        "grid.alpha": 0.3,
        "font.size": 10,
    }
)


def _save(fig, path):
    fmt = str(path).rsplit(".", 1)[-1].lower() if "." in str(path) else "svg"
    if fmt not in ("svg", "png", "pdf"):
        fmt = "svg"
    meta = {"Date": None} if fmt == "svg" else ({"CreationDate": None} if fmt == "pdf" else None)
    fig.savefig(path, format=fmt, metadata=meta, bbox_inches="tight")
    plt.close(fig)


def plot_cdf(x, cdf, path, title="Return time CDF", reference=None, density=None):
    fig, ax = plt.subplots()
    ax.plot(x, cdf, lw=1.2, label="CDF")
    if reference is not None:
        rx, ry = reference
        ax.step(rx, ry, where="post", lw=0.8, label="empirical")
    if density is not None:
        ax2 = ax.twinx()
        ax2.plot(x, density, lw=0.8, color="C3", label="density")
        ax2.set_ylabel("density")
        ax2.grid(False)
    ax.set_xlabel("x")
    ax.set_ylabel("m{R <= x}")
    ax.set_title(title)
    ax.legend(loc="lower right")
    _save(fig, path)


def plot_decay(lengths, errors, slope, intercept, path, title="Decay", bound=None):
    lengths = np.asarray(lengths, float)
    errors = np.asarray(errors, float)
    fig, ax = plt.subplots()
    ok = errors > 0
    ax.loglog(lengths[ok], errors[ok], "o", label="measured")
    fit = np.exp(intercept) * lengths**slope
    ax.loglog(lengths, fit, "-", label=f"fit slope {slope:.3f}")
    if bound is not None and ok.any():
        i = int(np.argmax(ok))
        ref = errors[i] * (lengths / lengths[i]) ** bound
        ax.loglog(lengths, ref, "--", color="0.5", label=f"slope {bound:.3f}")
    ax.set_xlabel("L = Q^2")
    ax.set_ylabel("error")
    ax.set_title(title)
    ax.legend()
    _save(fig, path)


def plot_points(a, b, path, title="Transversal points"):
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.plot([0, 1, 1, 0], [1, 0, 1, 1], color="0.4", lw=0.8)
    ax.scatter(a, b, s=2, alpha=0.6)
    ax.set_xlim(0, 1.02)
    ax.set_ylim(0, 1.02)
    ax.set_aspect("equal")
    ax.set_xlabel("a")
    ax.set_ylabel("b")
    ax.set_title(title)
    _save(fig, path)


def plot_gaps(gaps, path, title="Renormalized gaps", hall=None):
    fig, ax = plt.subplots()
    gaps = np.asarray(gaps, float)
    hi = np.quantile(gaps, 0.99) if gaps.size > 10 else gaps.max()
    ax.hist(gaps[gaps <= hi], bins=min(200, max(10, gaps.size // 20)), density=True, alpha=0.6, label="gaps")
    if hall is not None:
        hx, hy = hall
        ax.plot(hx, hy, color="C3", lw=1.2, label="Hall density")
    ax.set_xlabel("gap")
    ax.set_title(title)
    ax.legend()
    _save(fig, path)
