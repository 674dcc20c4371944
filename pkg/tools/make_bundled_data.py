"""Regenerate the bundled model/scenario JSON files in src/robusttraj/data.

Foot anchors and seed poses are computed from forward kinematics at the
nominal standing configuration so the bundled seeds start exactly on the
terrain.
"""

import json
import os

import numpy as np

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "robusttraj", "data")


def rod_inertia(m, length, axis):
    """Upper-triangular inertia of a thin rod through its COM along ``axis``."""
    i_perp = m * length**2 / 12.0
    i_ax = 0.1 * i_perp + 1e-4
    d = {"x": (i_ax, i_perp, i_perp), "y": (i_perp, i_ax, i_perp), "z": (i_perp, i_perp, i_ax)}[axis]
    return [d[0], 0.0, 0.0, d[1], 0.0, d[2]]


def mini_model():
    bodies = [
        {
            "name": "base",
            "parent_joint": None,
            "mass": 16.0,
            "com": [0.0, 0.0, 0.0],
            "inertia": [0.30, 0.0, 0.0, 0.55, 0.0, 0.70],
        }
    ]
    joints = []
    hips = {
        "FL": ([0.28, 0.17, -0.05], 0.25),
        "FR": ([0.28, -0.17, -0.05], -0.25),
        "HL": ([-0.28, 0.17, -0.05], -0.25),
        "HR": ([-0.28, -0.17, -0.05], 0.25),
    }
    for leg, (pos, yaw) in hips.items():
        bodies += [
            {
                "name": f"{leg}_upper",
                "parent_joint": f"{leg}_hip",
                "mass": 1.0,
                "com": [0.0, 0.0, -0.11],
                "inertia": rod_inertia(1.0, 0.22, "z"),
            },
            {
                "name": f"{leg}_lower",
                "parent_joint": f"{leg}_knee",
                "mass": 0.7,
                "com": [0.0, 0.0, -0.12],
                "inertia": rod_inertia(0.7, 0.24, "z"),
            },
        ]
        joints += [
            {
                "name": f"{leg}_hip",
                "parent_body": "base",
                "child_body": f"{leg}_upper",
                "axis": [0, 1, 0],
                "origin_xyz": pos,
                "origin_rpy": [0.0, 0.0, yaw],
                "q_limits": [-1.0, 1.6],
                "v_limit": 10.0,
                "tau_limit": 35.0,
            },
            {
                "name": f"{leg}_knee",
                "parent_body": f"{leg}_upper",
                "child_body": f"{leg}_lower",
                "axis": [0, 1, 0],
                "origin_xyz": [0.0, 0.0, -0.22],
                "origin_rpy": [0, 0, 0],
                "q_limits": [-2.3, -0.1],
                "v_limit": 10.0,
                "tau_limit": 35.0,
            },
        ]
    bodies += [
        {
            "name": "arm_base",
            "parent_joint": "arm_yaw",
            "mass": 0.8,
            "com": [0.02, 0.0, 0.02],
            "inertia": [0.002, 0.0, 0.0, 0.002, 0.0, 0.002],
        },
        {
            "name": "upper_arm",
            "parent_joint": "arm_shoulder",
            "mass": 0.9,
            "com": [0.12, 0.0, 0.0],
            "inertia": rod_inertia(0.9, 0.25, "x"),
        },
        {
            "name": "forearm",
            "parent_joint": "arm_elbow",
            "mass": 0.6,
            "com": [0.11, 0.0, 0.0],
            "inertia": rod_inertia(0.6, 0.24, "x"),
        },
    ]
    joints += [
        {
            "name": "arm_yaw",
            "parent_body": "base",
            "child_body": "arm_base",
            "axis": [0, 0, 1],
            "origin_xyz": [0.24, 0.0, 0.06],
            "origin_rpy": [0, 0, 0],
            "q_limits": [-2.8, 2.8],
            "v_limit": 8.0,
            "tau_limit": 20.0,
        },
        {
            "name": "arm_shoulder",
            "parent_body": "arm_base",
            "child_body": "upper_arm",
            "axis": [0, 1, 0],
            "origin_xyz": [0.04, 0.0, 0.04],
            "origin_rpy": [0, 0, 0],
            "q_limits": [-1.9, 1.9],
            "v_limit": 8.0,
            "tau_limit": 20.0,
        },
        {
            "name": "arm_elbow",
            "parent_body": "upper_arm",
            "child_body": "forearm",
            "axis": [0, 1, 0],
            "origin_xyz": [0.25, 0.0, 0.0],
            "origin_rpy": [0, 0, 0],
            "q_limits": [-0.3, 2.6],
            "v_limit": 8.0,
            "tau_limit": 12.0,
        },
    ]
    contacts = [{"body": f"{leg}_lower", "offset": [0.0, 0.0, -0.24]} for leg in hips]
    return {
        "name": "mini",
        "floating_base": True,
        "bodies": bodies,
        "joints": joints,
        "contacts": contacts,
        "end_effector": {"body": "forearm", "offset": [0.22, 0.0, 0.0], "axis": [1, 0, 0]},
    }


def mini_nominal_joints():
    q = {}
    for leg in ("FL", "FR", "HL", "HR"):
        q[f"{leg}_hip"] = 0.35
        q[f"{leg}_knee"] = -0.70
    q["arm_yaw"] = 0.0
    q["arm_shoulder"] = -0.35
    q["arm_elbow"] = 1.10
    return q


def anymal_jaco_model():
    bodies = [
        {
            "name": "base",
            "parent_joint": None,
            "mass": 19.0,
            "com": [0.0, 0.0, 0.0],
            "inertia": [0.35, 0.0, 0.0, 0.65, 0.0, 0.80],
        }
    ]
    joints = []
    hips = {
        "LF": [0.34, 0.19, 0.0],
        "RF": [0.34, -0.19, 0.0],
        "LH": [-0.34, 0.19, 0.0],
        "RH": [-0.34, -0.19, 0.0],
    }
    for leg, pos in hips.items():
        bodies += [
            {"name": f"{leg}_hip", "parent_joint": f"{leg}_HAA", "mass": 1.6,
             "com": [0.06, 0.0, 0.0], "inertia": [0.002, 0.0, 0.0, 0.004, 0.0, 0.004]},
            {"name": f"{leg}_thigh", "parent_joint": f"{leg}_HFE", "mass": 1.2,
             "com": [0.0, 0.0, -0.125], "inertia": rod_inertia(1.2, 0.25, "z")},
            {"name": f"{leg}_shank", "parent_joint": f"{leg}_KFE", "mass": 0.4,
             "com": [0.0, 0.0, -0.16], "inertia": rod_inertia(0.4, 0.32, "z")},
        ]
        joints += [
            {"name": f"{leg}_HAA", "parent_body": "base", "child_body": f"{leg}_hip",
             "axis": [1, 0, 0], "origin_xyz": pos, "origin_rpy": [0, 0, 0],
             "q_limits": [-0.7, 0.7], "v_limit": 10.0, "tau_limit": 40.0},
            {"name": f"{leg}_HFE", "parent_body": f"{leg}_hip", "child_body": f"{leg}_thigh",
             "axis": [0, 1, 0], "origin_xyz": [0.1, 0.0, 0.0], "origin_rpy": [0, 0, 0],
             "q_limits": [-1.6, 1.6], "v_limit": 10.0, "tau_limit": 40.0},
            {"name": f"{leg}_KFE", "parent_body": f"{leg}_thigh", "child_body": f"{leg}_shank",
             "axis": [0, 1, 0], "origin_xyz": [0.0, 0.0, -0.25], "origin_rpy": [0, 0, 0],
             "q_limits": [-2.5, -0.1], "v_limit": 10.0, "tau_limit": 40.0},
        ]
    arm_axes = {"1": "z", "2": "y", "3": "y", "4": "x", "5": "y", "6": "x"}
    arm_offsets = {
        "1": [0.30, 0.0, 0.08], "2": [0.0, 0.0, 0.08], "3": [0.21, 0.0, 0.0],
        "4": [0.21, 0.0, 0.0], "5": [0.10, 0.0, 0.0], "6": [0.07, 0.0, 0.0],
    }
    parent = "base"
    for k in "123456":
        name = f"jaco_{k}"
        ax = {"x": [1, 0, 0], "y": [0, 1, 0], "z": [0, 0, 1]}[arm_axes[k]]
        bodies.append(
            {"name": name, "parent_joint": f"arm_j{k}", "mass": 0.9 if k < "4" else 0.5,
             "com": [0.06, 0.0, 0.0], "inertia": [0.003, 0.0, 0.0, 0.003, 0.0, 0.003]}
        )
        joints.append(
            {"name": f"arm_j{k}", "parent_body": parent, "child_body": name,
             "axis": ax, "origin_xyz": arm_offsets[k], "origin_rpy": [0, 0, 0],
             "q_limits": [-2.9, 2.9], "v_limit": 8.0, "tau_limit": 18.0}
        )
        parent = name
    contacts = [{"body": f"{leg}_shank", "offset": [0.0, 0.0, -0.32]} for leg in hips]
    return {
        "name": "anymal-jaco-like",
        "floating_base": True,
        "bodies": bodies,
        "joints": joints,
        "contacts": contacts,
        "end_effector": {"body": "jaco_6", "offset": [0.10, 0.0, 0.0], "axis": [1, 0, 0]},
    }


def arm3_model():
    return {
        "name": "arm3",
        "floating_base": False,
        "bodies": [
            {"name": "mount", "parent_joint": None, "mass": 2.0, "com": [0, 0, 0],
             "inertia": [0.01, 0.0, 0.0, 0.01, 0.0, 0.01]},
            {"name": "link1", "parent_joint": "j_yaw", "mass": 0.8, "com": [0.02, 0.0, 0.02],
             "inertia": [0.002, 0.0, 0.0, 0.002, 0.0, 0.002]},
            {"name": "link2", "parent_joint": "j_shoulder", "mass": 0.9, "com": [0.12, 0.0, 0.0],
             "inertia": rod_inertia(0.9, 0.25, "x")},
            {"name": "link3", "parent_joint": "j_elbow", "mass": 0.6, "com": [0.11, 0.0, 0.0],
             "inertia": rod_inertia(0.6, 0.24, "x")},
        ],
        "joints": [
            {"name": "j_yaw", "parent_body": "mount", "child_body": "link1",
             "axis": [0, 0, 1], "origin_xyz": [0.0, 0.0, 0.10], "origin_rpy": [0, 0, 0],
             "q_limits": [-2.8, 2.8], "v_limit": 8.0, "tau_limit": 20.0},
            {"name": "j_shoulder", "parent_body": "link1", "child_body": "link2",
             "axis": [0, 1, 0], "origin_xyz": [0.04, 0.0, 0.04], "origin_rpy": [0, 0, 0],
             "q_limits": [-1.9, 1.9], "v_limit": 8.0, "tau_limit": 20.0},
            {"name": "j_elbow", "parent_body": "link2", "child_body": "link3",
             "axis": [0, 1, 0], "origin_xyz": [0.25, 0.0, 0.0], "origin_rpy": [0, 0, 0],
             "q_limits": [-0.3, 2.6], "v_limit": 8.0, "tau_limit": 12.0},
        ],
        "contacts": [],
        "end_effector": {"body": "link3", "offset": [0.22, 0.0, 0.0], "axis": [1, 0, 0]},
    }


def main():
    os.makedirs(OUT, exist_ok=True)
    from robusttraj import dynamics as dyn
    from robusttraj.model import parse_model

    mini = mini_model()
    with open(os.path.join(OUT, "mini.json"), "w") as f:
        f.write(json.dumps(mini, indent=2) + "\n")
    with open(os.path.join(OUT, "anymal_jaco_like.json"), "w") as f:
        f.write(json.dumps(anymal_jaco_model(), indent=2) + "\n")
    with open(os.path.join(OUT, "arm3.json"), "w") as f:
        f.write(json.dumps(arm3_model(), indent=2) + "\n")

    model = parse_model(json.dumps(mini))
    nominal = mini_nominal_joints()
    qj = np.array([nominal[j.name] for j in model.joints])

    # stand with feet exactly on z = 0
    q = np.concatenate([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], qj])
    feet = np.array([dyn.forward_kinematics(model, q, i) for i in range(model.n_c)])
    z_stand = -feet[:, 2].mean()
    q[2] = z_stand
    feet = np.array([dyn.forward_kinematics(model, q, i) for i in range(model.n_c)])
    ee = dyn.forward_kinematics(model, q, "ee")
    print("stand height:", z_stand)
    print("feet:\n", feet)
    print("ee nominal:", ee, "axis:", dyn.ee_axis(model, q))

    anchors = [[round(v, 9) for v in f] for f in feet]
    seed = {
        "base_xyz": [0.0, 0.0, round(z_stand, 9)],
        "base_mrp": [0.0, 0.0, 0.0],
        "q_joints": [nominal[j.name] for j in model.joints],
    }
    normals = [[0.0, 0.0, 1.0]] * 4
    task = {
        "pick": {"position": [0.60, 0.20, 0.32], "axis": [0, 0, -1]},
        "place": {"position": [0.60, -0.20, 0.25], "axis": [0, 0, -1]},
    }

    def scenario(name, **kw):
        doc = {
            "name": name,
            "model": "mini.json",
            "duration_s": 2.0,
            "mesh_points": 11,
            "objective": "G3",
            "friction_mu": 0.7,
            "terrain": {"anchors": anchors, "normals": normals},
            "task": task,
            "seed_pose": seed,
            "solver": {},
        }
        doc.update(kw)
        with open(os.path.join(OUT, f"{name}.json"), "w") as f:
            f.write(json.dumps(doc, indent=2) + "\n")

    scenario("flat")
    steps_anchors = [list(a) for a in anchors]
    for i in (0, 1):  # front feet on 6 cm slabs
        steps_anchors[i] = [steps_anchors[i][0], steps_anchors[i][1], round(steps_anchors[i][2] + 0.06, 9)]
    scenario("steps", terrain={"anchors": steps_anchors, "normals": normals})
    scenario("ramp", friction_mu=1.0, incline_deg=15.0, incline_axis=[0.0, 1.0, 0.0])


if __name__ == "__main__":
    main()
