"""SVG figures of the domains, the Joukowski map and the moment tables."""

import math
from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import seaborn as sns

from scripts.circle_sets import ArcSet
from scripts.conformal import JoukowskiMap, PrivalovDomain, joukowski_forward

SVG_HASHSALT = 'privalov-verification'
GEODESIC_POINTS = 64


def _save_svg(path: Union[str, Path]) -> Path:
    """Write the current figure as byte-deterministic SVG and close it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context({'svg.hashsalt': SVG_HASHSALT}):
        plt.savefig(path, format='svg', bbox_inches='tight', metadata={'Date': None})
    plt.close()
    return path


def render_domain(E: ArcSet, path: Union[str, Path], max_gap=None, title: str = '') -> Path:
    """
    Draw the Joukowski-Privalov domain of E: arcs of E in black, the caps
    cut off by the geodesics shaded. A set without gaps gives the plain disk.
    """
    domain = PrivalovDomain(E, max_gap)
    plt.style.use('default')
    plt.figure(figsize=(8, 8))
    ax = plt.gca()

    theta = np.linspace(0.0, 2.0 * math.pi, 721)
    plt.fill(np.cos(theta), np.sin(theta), color='#dbe9f6', zorder=0)

    for a, b in E.arcs().tolist():
        s = np.linspace(a, b, max(2, int(360 * (b - a) / math.pi)))
        plt.plot(np.cos(s), np.sin(s), color='black', linewidth=1.6)

    for geodesic in domain.geodesics:
        arc = geodesic.points(GEODESIC_POINTS)
        gap = np.exp(1j * np.linspace(geodesic.a, geodesic.b, GEODESIC_POINTS))
        # cap boundary: along the gap, then back along the geodesic
        cap = np.concatenate([gap, arc[::-1] if abs(arc[0] - gap[0]) < abs(arc[-1] - gap[0]) else arc])
        plt.fill(cap.real, cap.imag, color='white', zorder=1)
        plt.plot(arc.real, arc.imag, color='tab:red', linewidth=0.9, zorder=2)

    plt.plot([0.0], [0.0], marker='+', color='black')
    ax.set_aspect('equal')
    ax.set_xlim(-1.05, 1.05)
    ax.set_ylim(-1.05, 1.05)
    ax.axis('off')
    plt.title(title or f"Domain with {domain.n_gaps} gaps, |E| = {E.measure:.4f}")
    return _save_svg(path)


def render_mapping(L: float, t: float, path: Union[str, Path]) -> Path:
    """
    Omega_L with the arc A_{L,t} marked (left) and its image under phi_L,
    an interval of the real line (right). Horizontal lines of Omega_L are
    carried along to show the action of the map.
    """
    m = JoukowskiMap(L)
    plt.style.use('default')
    fig, (left, right) = plt.subplots(1, 2, figsize=(12, 5))

    s = np.linspace(0.0, math.pi, 361)
    left.plot(L * np.cos(s), L * np.sin(s), color='black', linewidth=1.0)
    left.plot([-1.0, -L], [0.0, 0.0], color='black', linewidth=1.0)
    left.plot([L, 1.0], [0.0, 0.0], color='black', linewidth=1.0)
    target = np.linspace(0.0, t, 91)
    left.plot(L * np.cos(target), L * np.sin(target), color='tab:red', linewidth=2.5,
              label=f"A(L={L:g}, t={t:.3f})")

    x = np.linspace(-1.0, 1.0, 801)
    palette = sns.color_palette('crest', 6)
    for level, color in zip(np.linspace(0.05, 0.6, 6), palette):
        z = x + 1j * level
        z = z[m.in_domain(z)]
        left.plot(z.real, z.imag, color=color, linewidth=0.8)
        w = joukowski_forward(m, z)
        right.plot(w.real, w.imag, color=color, linewidth=0.8)

    image = 2.0 * L * np.cos(target) / (1.0 - L * L)
    right.axhline(0.0, color='black', linewidth=1.0)
    right.plot(image, np.zeros_like(image), color='tab:red', linewidth=3.0,
               label=f"[{image.min():.4f}, {image.max():.4f}]")

    left.set_title('Omega_L')
    right.set_title('phi_L(Omega_L)')
    for ax in (left, right):
        ax.set_aspect('equal')
        ax.legend(loc='upper right')
    left.set_xlim(-1.0, 1.0)
    left.set_ylim(-0.05, 0.7)
    right.set_xlim(-2.0, 2.0)
    right.set_ylim(-0.05, 1.4)
    return _save_svg(path)


def render_moments(rows: pd.DataFrame, path: Union[str, Path]) -> Path:
    """-log(moment)/sqrt(n) against c~_n, log-log; the bound is the diagonal."""
    data = rows[rows['moment'] > 0].assign(
        rate=lambda df: -np.log(df['moment']) / np.sqrt(df['n']),
    )
    plt.style.use('default')
    plt.figure(figsize=(8, 6))
    sns.scatterplot(data=data, x='c_reg', y='rate', hue='passed')
    lo = float(min(data['c_reg'].min(), data['rate'].min()))
    hi = float(max(data['c_reg'].max(), data['rate'].max()))
    plt.plot([lo, hi], [lo, hi], color='gray', linestyle='--', label='rate = c~_n')
    plt.xscale('log')
    plt.yscale('log')
    plt.xlabel('c~_n')
    plt.ylabel('-log(moment) / sqrt(n)')
    plt.title('Moment decay against the regularized sequence')
    plt.legend()
    return _save_svg(path)
