"""Robot-model and scenario file formats.

Models are a small JSON dialect with URDF-subset semantics: a single
floating (or fixed) base, revolute joints with fixed frame offsets, point
contacts, and one end-effector frame.  Scenarios bind a model to terrain
(contact anchors and frames), a pick/place task, a mesh, an objective, and
solver settings.  Parsing is pure and the resulting objects are immutable.
"""

import json
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

DEFAULT_MU = 0.7
DEFAULT_GRAVITY = (0.0, 0.0, -9.81)
NORMAL_FORCE_FLOOR = 1.0  # [N] positive floor standing in for the strict cone inequality


class ModelError(ValueError):
    """Semantic error in a model or scenario description."""


class ModelSyntaxError(ModelError):
    """Malformed JSON; carries line/column of the offending token."""

    def __init__(self, msg, line, col):
        super().__init__(f"syntax error at line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


def _ro(a):
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


def _vec3(x, what):
    a = np.asarray(x, dtype=float)
    if a.shape != (3,):
        raise ModelError(f"{what}: expected a 3-vector, got shape {a.shape}")
    return a


def rpy_to_rotation(rpy):
    """Fixed-axis roll-pitch-yaw (URDF convention): Rz(y) @ Ry(p) @ Rx(r)."""
    r, p, y = rpy
    cr, sr = math.cos(r), math.sin(r)
    cp, sp = math.cos(p), math.sin(p)
    cy, sy = math.cos(y), math.sin(y)
    Rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    Ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    Rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return Rz @ Ry @ Rx


def tangent_basis(normal):
    """Deterministic direct frame (t, b, n) for a unit contact normal."""
    n = np.asarray(normal, dtype=float)
    ref = np.array([1.0, 0.0, 0.0])
    if abs(n @ ref) > 0.9:
        ref = np.array([0.0, 1.0, 0.0])
    t = ref - (ref @ n) * n
    t = t / np.linalg.norm(t)
    b = np.cross(n, t)
    return t, b


@dataclass(frozen=True, eq=False)
class Body:
    name: str
    parent_joint: str | None
    mass: float
    com: np.ndarray
    inertia: np.ndarray  # 3x3 about the COM, body frame


@dataclass(frozen=True, eq=False)
class Joint:
    name: str
    parent_body: str
    child_body: str
    axis: np.ndarray
    origin_xyz: np.ndarray
    origin_rpy: np.ndarray
    q_lower: float
    q_upper: float
    v_limit: float
    tau_limit: float


@dataclass(frozen=True, eq=False)
class ContactPoint:
    body: int  # body index
    offset: np.ndarray
    normal: np.ndarray
    tangent_t: np.ndarray
    tangent_b: np.ndarray
    mu: float


@dataclass(frozen=True, eq=False)
class EndEffector:
    body: int
    offset: np.ndarray
    axis: np.ndarray  # approach axis in the end-effector body frame


@dataclass(frozen=True, eq=False)
class Model:
    name: str
    floating_base: bool
    bodies: tuple
    joints: tuple  # joints[i] attaches bodies[i + 1]; topological order
    contacts: tuple
    end_effector: EndEffector | None

    @property
    def n_j(self):
        return len(self.joints)

    @property
    def n_v(self):
        return (6 if self.floating_base else 0) + self.n_j

    @property
    def n_q(self):
        return self.n_v

    @property
    def n_c(self):
        return len(self.contacts)

    @property
    def n_s(self):
        return 3 * self.n_c

    @property
    def tau_lower(self):
        return _ro([-j.tau_limit for j in self.joints])

    @property
    def tau_upper(self):
        return _ro([j.tau_limit for j in self.joints])

    @property
    def q_joint_lower(self):
        return _ro([j.q_lower for j in self.joints])

    @property
    def q_joint_upper(self):
        return _ro([j.q_upper for j in self.joints])

    @property
    def v_joint_limit(self):
        return _ro([j.v_limit for j in self.joints])

    def body_index(self, name):
        for i, b in enumerate(self.bodies):
            if b.name == name:
                return i
        raise ModelError(f"unknown body {name!r}")

    def with_contact_frames(self, normals, mu):
        """New model with per-contact normals from a scenario terrain."""
        normals = np.asarray(normals, dtype=float)
        if normals.shape != (self.n_c, 3):
            raise ModelError(f"terrain normals: expected {self.n_c} 3-vectors")
        contacts = []
        for c, n in zip(self.contacts, normals):
            nn = np.linalg.norm(n)
            if not math.isclose(nn, 1.0, abs_tol=1e-9):
                n = n / nn
            t, b = tangent_basis(n)
            contacts.append(
                ContactPoint(c.body, c.offset, _ro(n), _ro(t), _ro(b), float(mu))
            )
        return replace(self, contacts=tuple(contacts))


def _check_inertia(name, I):
    if not np.allclose(I, I.T, atol=1e-12):
        raise ModelError(f"body {name!r}: inertia matrix not symmetric")
    if np.any(np.linalg.eigvalsh(I) <= 0.0):
        raise ModelError(f"body {name!r}: inertia matrix not positive definite")


def parse_model(text):
    """Parse and validate a model file; bodies come out parent-before-child."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelSyntaxError(e.msg, e.lineno, e.colno) from None

    name = doc.get("name", "unnamed")
    floating = bool(doc.get("floating_base", True))

    raw_bodies = doc.get("bodies", [])
    raw_joints = doc.get("joints", [])
    body_names = [b["name"] for b in raw_bodies]
    if len(set(body_names)) != len(body_names):
        dup = next(n for n in body_names if body_names.count(n) > 1)
        raise ModelError(f"duplicate body name {dup!r}")
    joint_names = [j["name"] for j in raw_joints]
    if len(set(joint_names)) != len(joint_names):
        dup = next(n for n in joint_names if joint_names.count(n) > 1)
        raise ModelError(f"duplicate joint name {dup!r}")

    joints_by_child = {}
    for j in raw_joints:
        for key in ("parent_body", "child_body"):
            if j[key] not in body_names:
                raise ModelError(f"joint {j['name']!r}: unknown body {j[key]!r}")
        if j["child_body"] in joints_by_child:
            raise ModelError(f"body {j['child_body']!r} has two parent joints")
        joints_by_child[j["child_body"]] = j

    roots = []
    for b in raw_bodies:
        pj = b.get("parent_joint")
        jc = joints_by_child.get(b["name"])
        if pj is None:
            if jc is not None:
                raise ModelError(
                    f"body {b['name']!r}: declared as root but joint {jc['name']!r} targets it"
                )
            roots.append(b)
        else:
            if jc is None or jc["name"] != pj:
                raise ModelError(f"body {b['name']!r}: parent_joint {pj!r} not found")
    if len(roots) != 1:
        raise ModelError(f"expected exactly one root body, found {len(roots)}")

    # topological order (also detects cycles, though the single-parent +
    # single-root checks above already preclude them for finite inputs)
    order = [roots[0]["name"]]
    raw_by_name = {b["name"]: b for b in raw_bodies}
    children = {}
    for j in raw_joints:
        children.setdefault(j["parent_body"], []).append(j["child_body"])
    stack = [roots[0]["name"]]
    seen = {roots[0]["name"]}
    while stack:
        cur = stack.pop(0)
        for ch in children.get(cur, []):
            if ch in seen:
                raise ModelError(f"cycle detected at body {ch!r}")
            seen.add(ch)
            order.append(ch)
            stack.append(ch)
    if len(order) != len(raw_bodies):
        missing = sorted(set(body_names) - set(order))
        raise ModelError(f"bodies unreachable from root: {missing}")

    bodies = []
    joints = []
    for bname in order:
        rb = raw_by_name[bname]
        mass = float(rb["mass"])
        if mass <= 0.0:
            raise ModelError(f"body {bname!r}: mass must be positive")
        com = _vec3(rb["com"], f"body {bname!r} com")
        ui = rb["inertia"]
        if len(ui) != 6:
            raise ModelError(f"body {bname!r}: inertia needs 6 upper-triangular entries")
        ixx, ixy, ixz, iyy, iyz, izz = (float(v) for v in ui)
        I = np.array([[ixx, ixy, ixz], [ixy, iyy, iyz], [ixz, iyz, izz]])
        _check_inertia(bname, I)
        bodies.append(Body(bname, rb.get("parent_joint"), mass, _ro(com), _ro(I)))
        if rb.get("parent_joint") is not None:
            rj = joints_by_child[bname]
            axis = _vec3(rj["axis"], f"joint {rj['name']!r} axis")
            if abs(np.linalg.norm(axis) - 1.0) > 1e-12:
                raise ModelError(f"joint {rj['name']!r}: axis must have unit norm")
            qlo, qhi = (float(v) for v in rj["q_limits"])
            if qlo > qhi:
                raise ModelError(f"joint {rj['name']!r}: q_limits lower > upper")
            vlim = float(rj["v_limit"])
            tlim = float(rj["tau_limit"])
            if vlim < 0 or tlim <= 0:
                raise ModelError(f"joint {rj['name']!r}: limits must be positive")
            joints.append(
                Joint(
                    rj["name"],
                    rj["parent_body"],
                    bname,
                    _ro(axis),
                    _ro(_vec3(rj["origin_xyz"], "origin_xyz")),
                    _ro(_vec3(rj["origin_rpy"], "origin_rpy")),
                    qlo,
                    qhi,
                    vlim,
                    tlim,
                )
            )

    index = {b.name: i for i, b in enumerate(bodies)}
    contacts = []
    for rc in doc.get("contacts", []):
        if rc["body"] not in index:
            raise ModelError(f"contact: unknown body {rc['body']!r}")
        t, b = tangent_basis(np.array([0.0, 0.0, 1.0]))
        contacts.append(
            ContactPoint(
                index[rc["body"]],
                _ro(_vec3(rc["offset"], "contact offset")),
                _ro([0.0, 0.0, 1.0]),
                _ro(t),
                _ro(b),
                DEFAULT_MU,
            )
        )

    ee = None
    if "end_effector" in doc:
        re_ = doc["end_effector"]
        if re_["body"] not in index:
            raise ModelError(f"end_effector: unknown body {re_['body']!r}")
        ax = _vec3(re_.get("axis", [1.0, 0.0, 0.0]), "end_effector axis")
        ax = ax / np.linalg.norm(ax)
        ee = EndEffector(index[re_["body"]], _ro(_vec3(re_["offset"], "ee offset")), _ro(ax))

    return Model(name, floating, tuple(bodies), tuple(joints), tuple(contacts), ee)


def model_to_json(model):
    """Serialize a model; parse(model_to_json(parse(t))) == parse(t)."""
    joints_by_child = {j.child_body: j for j in model.joints}
    doc = {
        "name": model.name,
        "floating_base": model.floating_base,
        "bodies": [
            {
                "name": b.name,
                "parent_joint": b.parent_joint,
                "mass": b.mass,
                "com": list(b.com),
                "inertia": [
                    b.inertia[0, 0], b.inertia[0, 1], b.inertia[0, 2],
                    b.inertia[1, 1], b.inertia[1, 2], b.inertia[2, 2],
                ],
            }
            for b in model.bodies
        ],
        "joints": [
            {
                "name": j.name,
                "parent_body": j.parent_body,
                "child_body": j.child_body,
                "axis": list(j.axis),
                "origin_xyz": list(j.origin_xyz),
                "origin_rpy": list(j.origin_rpy),
                "q_limits": [j.q_lower, j.q_upper],
                "v_limit": j.v_limit,
                "tau_limit": j.tau_limit,
            }
            for b in model.bodies[1:]
            for j in [joints_by_child[b.name]]
        ],
        "contacts": [
            {"body": model.bodies[c.body].name, "offset": list(c.offset)}
            for c in model.contacts
        ],
    }
    if model.end_effector is not None:
        ee = model.end_effector
        doc["end_effector"] = {
            "body": model.bodies[ee.body].name,
            "offset": list(ee.offset),
            "axis": list(ee.axis),
        }
    return json.dumps(doc, indent=2)


@dataclass(frozen=True, eq=False)
class TaskWaypoint:
    position: np.ndarray
    axis: np.ndarray  # world-frame target approach axis (unit)


@dataclass(frozen=True, eq=False)
class SolverSettings:
    tol_feas: float = 1e-6
    tol_opt: float = 1e-4
    max_iter: int = 500
    barrier_mu0: float = 0.1
    seed: int = 0


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    model: Model  # contact frames and mu already resolved from the terrain
    model_file: str
    duration_s: float
    mesh_points: int
    objective: str  # G1 | G2 | G3
    friction_mu: float
    anchors: np.ndarray  # (n_c, 3) world positions, incline applied
    normals: np.ndarray
    pick: TaskWaypoint
    place: TaskWaypoint
    gravity: np.ndarray
    seed_base_xyz: np.ndarray
    seed_base_mrp: np.ndarray
    seed_q_joints: np.ndarray
    incline_deg: float
    incline_axis: np.ndarray
    solver: SolverSettings
    raw: dict = field(repr=False, default=None)


def _axis_angle_rotation(axis, angle_rad):
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    K = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    return c * np.eye(3) + s * K + (1 - c) * np.outer(a, a)


def _mrp_compose_rotation(R_pre, mrp):
    """MRP of R_pre @ R(mrp), shadow-switched into the unit ball."""
    from .dynamics import rotation_to_mrp  # local import to avoid a cycle

    from .dynamics import mrp_to_rotation

    return rotation_to_mrp(R_pre @ mrp_to_rotation(np.asarray(mrp, dtype=float)))


def parse_scenario(text, base_dir=None, model_text=None):
    """Parse a scenario file and resolve it against its model.

    ``base_dir`` anchors the relative model reference; ``model_text`` can be
    supplied to bypass the filesystem (used by tests).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelSyntaxError(e.msg, e.lineno, e.colno) from None

    model_file = doc["model"]
    if model_text is None:
        path = model_file if base_dir is None else os.path.join(base_dir, model_file)
        if not os.path.exists(path):
            raise ModelError(f"model file not found: {path}")
        with open(path) as f:
            model_text = f.read()
    model = parse_model(model_text)

    M = int(doc["mesh_points"])
    if M < 2:
        raise ModelError(f"mesh_points must be >= 2, got {M}")
    duration = float(doc["duration_s"])
    if duration <= 0:
        raise ModelError("duration_s must be positive")
    objective = doc.get("objective", "G1")
    if objective not in ("G1", "G2", "G3"):
        raise ModelError(f"unknown objective tag {objective!r}")
    mu = float(doc.get("friction_mu", DEFAULT_MU))
    if mu <= 0:
        raise ModelError("friction_mu must be positive")

    terrain = doc.get("terrain", {"anchors": [], "normals": []})
    anchors = np.asarray(terrain["anchors"], dtype=float).reshape(-1, 3)
    if len(anchors) != model.n_c:
        raise ModelError(
            f"terrain anchors: expected {model.n_c} entries, got {len(anchors)}"
        )
    normals = np.asarray(
        terrain.get("normals", [[0.0, 0.0, 1.0]] * model.n_c), dtype=float
    ).reshape(-1, 3)
    if len(normals) != model.n_c:
        raise ModelError("terrain normals: count mismatch with contacts")
    normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)

    gravity = np.asarray(doc.get("gravity", DEFAULT_GRAVITY), dtype=float)

    seed = doc.get("seed_pose", {})
    seed_xyz = np.asarray(seed.get("base_xyz", [0.0, 0.0, 0.0]), dtype=float)
    seed_mrp = np.asarray(seed.get("base_mrp", [0.0, 0.0, 0.0]), dtype=float)
    seed_qj = np.asarray(seed.get("q_joints", [0.0] * model.n_j), dtype=float)
    if seed_qj.shape != (model.n_j,):
        raise ModelError("seed_pose q_joints: wrong length")

    task = doc.get("task")
    if task is None or "pick" not in task or "place" not in task:
        raise ModelError("task must define pick and place waypoints")

    def _waypoint(d, what):
        pos = _vec3(d["position"], f"{what} position")
        ax = _vec3(d["axis"], f"{what} axis")
        nn = np.linalg.norm(ax)
        if nn < 1e-12:
            raise ModelError(f"{what}: zero-norm target axis")
        return pos, ax / nn

    pick_pos, pick_ax = _waypoint(task["pick"], "pick")
    place_pos, place_ax = _waypoint(task["place"], "place")

    incline_deg = float(doc.get("incline_deg", 0.0))
    incline_axis = np.asarray(doc.get("incline_axis", [0.0, 1.0, 0.0]), dtype=float)
    if incline_deg != 0.0:
        # rigid rotation of the whole scene (terrain, task, seed base pose)
        # about an axis through the origin; gravity stays put
        R = _axis_angle_rotation(incline_axis, math.radians(incline_deg))
        anchors = anchors @ R.T
        normals = normals @ R.T
        pick_pos, pick_ax = R @ pick_pos, R @ pick_ax
        place_pos, place_ax = R @ place_pos, R @ place_ax
        seed_xyz = R @ seed_xyz
        seed_mrp = _mrp_compose_rotation(R, seed_mrp)

    solver_doc = doc.get("solver", {})
    defaults = SolverSettings()
    solver = SolverSettings(
        tol_feas=float(solver_doc.get("tol_feas", defaults.tol_feas)),
        tol_opt=float(solver_doc.get("tol_opt", defaults.tol_opt)),
        max_iter=int(solver_doc.get("max_iter", defaults.max_iter)),
        barrier_mu0=float(solver_doc.get("barrier_mu0", defaults.barrier_mu0)),
        seed=int(solver_doc.get("seed", defaults.seed)),
    )

    resolved = model.with_contact_frames(normals, mu)
    return Scenario(
        name=doc.get("name", "scenario"),
        model=resolved,
        model_file=model_file,
        duration_s=duration,
        mesh_points=M,
        objective=objective,
        friction_mu=mu,
        anchors=_ro(anchors),
        normals=_ro(normals),
        pick=TaskWaypoint(_ro(pick_pos), _ro(pick_ax)),
        place=TaskWaypoint(_ro(place_pos), _ro(place_ax)),
        gravity=_ro(gravity),
        seed_base_xyz=_ro(seed_xyz),
        seed_base_mrp=_ro(seed_mrp),
        seed_q_joints=_ro(seed_qj),
        incline_deg=incline_deg,
        incline_axis=_ro(incline_axis),
        solver=solver,
        raw=doc,
    )


def scenario_to_json(scenario):
    """Serialize the scenario as originally specified (pre-incline data)."""
    return json.dumps(scenario.raw, indent=2)


def load_scenario(path, overrides=None):
    """Read a scenario file, optionally overriding top-level fields."""
    with open(path) as f:
        text = f.read()
    if overrides:
        doc = json.loads(text)
        doc.update(overrides)
        text = json.dumps(doc)
    return parse_scenario(text, base_dir=os.path.dirname(os.path.abspath(path)))
