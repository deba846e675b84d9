"""Synthetic point clouds used by the experiments.

Every generator returns a :class:`Dataset` whose ``spec`` records all
parameters, so the output can be regenerated bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.transform import Rotation

from .errors import InputError
from .graph import PointCloud


@dataclass
class Dataset:
    cloud: PointCloud
    labels: np.ndarray | None
    spec: dict = field(default_factory=dict)


def gen_gmm(n_per_cloud=(200, 100), means=None, cov_scale=0.5, seed=0) -> Dataset:
    """Isotropic Gaussian clouds in the plane (or in ``len(means[0])`` dimensions).

    ``cov_scale`` is the per-coordinate standard deviation, one value or one
    per cloud.  Default means sit 4 apart on the x-axis.
    """
    n_per_cloud = [int(m) for m in np.atleast_1d(n_per_cloud)]
    if not n_per_cloud or min(n_per_cloud) < 1:
        raise InputError("need at least one nonempty cloud")
    c = len(n_per_cloud)
    if means is None:
        means = [[4.0 * i, 0.0] for i in range(c)]
    means = np.asarray(means, dtype=float)
    if means.shape[0] != c:
        raise InputError(f"got {means.shape[0]} means for {c} clouds")
    scales = np.broadcast_to(np.asarray(cov_scale, dtype=float), (c,))
    if np.any(scales <= 0):
        raise InputError("cov_scale must be positive")
    rng = np.random.default_rng(seed)
    pts = [means[i] + scales[i] * rng.standard_normal((m, means.shape[1])) for i, m in enumerate(n_per_cloud)]
    labels = np.repeat(np.arange(c), n_per_cloud)
    spec = {
        "kind": "gmm",
        "n_per_cloud": n_per_cloud,
        "means": means.tolist(),
        "cov_scale": scales.tolist(),
        "seed": seed,
    }
    return Dataset(PointCloud(np.vstack(pts)), labels, spec)


def gen_moons(n_moons=5, n_per_moon=300, noise=0.1, seed=0, *, spacing=1.5, interleave=0.4) -> Dataset:
    """Chain of interleaved unit half-circles.

    Moon ``i`` is centred at ``(i*spacing, 0)`` opening downward for even
    ``i`` and at ``(i*spacing, interleave)`` opening upward for odd ``i``.
    Gaussian noise of standard deviation ``noise`` is added to both
    coordinates.
    """
    if n_moons < 1 or n_per_moon < 1:
        raise InputError("n_moons and n_per_moon must be positive")
    if noise < 0:
        raise InputError("noise must be nonnegative")
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, np.pi, n_per_moon)
    pts = []
    for i in range(n_moons):
        if i % 2 == 0:
            arc = np.column_stack([i * spacing + np.cos(t), np.sin(t)])
        else:
            arc = np.column_stack([i * spacing - np.cos(t), interleave - np.sin(t)])
        pts.append(arc)
    X = np.vstack(pts)
    if noise > 0:
        X = X + noise * rng.standard_normal(X.shape)
    labels = np.repeat(np.arange(n_moons), n_per_moon)
    spec = {
        "kind": "moons",
        "n_moons": n_moons,
        "n_per_moon": n_per_moon,
        "noise": noise,
        "spacing": spacing,
        "interleave": interleave,
        "radius": 1.0,
        "seed": seed,
    }
    return Dataset(PointCloud(X), labels, spec)


GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def gen_sphere_points(n=2000, seed=None) -> Dataset:
    """Golden-angle spiral on the unit sphere, geodesic metric.

    With ``seed=None`` the lattice is axis-aligned; otherwise it is rotated
    by a seeded uniformly random rotation.
    """
    if n < 4:
        raise InputError("need at least 4 sphere points")
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    rad = np.sqrt(1.0 - z * z)
    theta = GOLDEN_ANGLE * i
    X = np.column_stack([rad * np.cos(theta), rad * np.sin(theta), z])
    if seed is not None:
        X = Rotation.random(random_state=np.random.default_rng(seed)).apply(X)
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    spec = {"kind": "sphere", "n": int(n), "seed": seed, "lattice": "golden-angle spiral"}
    return Dataset(PointCloud(X, metric="sphere-geodesic"), None, spec)


def nearest_neighbor_spacing(cloud: PointCloud) -> np.ndarray:
    """Distance from every point to its nearest other point (cloud metric)."""
    d, _ = cKDTree(cloud.points).query(cloud.points, k=2)
    chord = d[:, 1]
    if cloud.metric == "sphere-geodesic":
        return 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))
    return chord
