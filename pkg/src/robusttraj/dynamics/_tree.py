"""Flat array description of a kinematic tree, consumed by the kernels."""

import weakref
from dataclasses import dataclass

import numpy as np

from ..model import rpy_to_rotation


@dataclass(frozen=True, eq=False)
class TreeData:
    floating: bool
    parent: np.ndarray  # int64[n_b], parent[0] == -1
    off_R: np.ndarray  # joint frame rotation in parent body frame
    off_p: np.ndarray
    axis: np.ndarray  # joint axis in joint frame
    mass: np.ndarray
    com: np.ndarray
    inertia: np.ndarray
    contact_body: np.ndarray  # int64[n_c]
    contact_offset: np.ndarray
    ee_body: int
    ee_offset: np.ndarray
    ee_axis: np.ndarray

    @property
    def n_b(self):
        return self.parent.shape[0]


_CACHE = weakref.WeakKeyDictionary()


def tree_data(model):
    """TreeData for a Model, cached per model instance."""
    td = _CACHE.get(model)
    if td is not None:
        return td
    n_b = len(model.bodies)
    parent = np.full(n_b, -1, dtype=np.int64)
    off_R = np.zeros((n_b, 3, 3))
    off_p = np.zeros((n_b, 3))
    axis = np.zeros((n_b, 3))
    mass = np.zeros(n_b)
    com = np.zeros((n_b, 3))
    inertia = np.zeros((n_b, 3, 3))
    index = {b.name: i for i, b in enumerate(model.bodies)}
    off_R[0] = np.eye(3)
    for i, b in enumerate(model.bodies):
        mass[i] = b.mass
        com[i] = b.com
        inertia[i] = b.inertia
        if i > 0:
            j = model.joints[i - 1]
            parent[i] = index[j.parent_body]
            off_R[i] = rpy_to_rotation(j.origin_rpy)
            off_p[i] = j.origin_xyz
            axis[i] = j.axis
    cb = np.array([c.body for c in model.contacts], dtype=np.int64)
    co = np.array([c.offset for c in model.contacts]).reshape(-1, 3)
    if model.end_effector is not None:
        eb, eo, ea = (
            model.end_effector.body,
            np.asarray(model.end_effector.offset),
            np.asarray(model.end_effector.axis),
        )
    else:
        eb, eo, ea = -1, np.zeros(3), np.array([1.0, 0.0, 0.0])
    td = TreeData(
        model.floating_base, parent, off_R, off_p, axis, mass, com, inertia,
        cb, co, eb, eo, ea,
    )
    _CACHE[model] = td
    return td
