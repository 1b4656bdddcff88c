"""Skeleton layout and pose feature conventions.

A pose frame is a flat vector of D = 4 + 3*(J-1) values:
columns 0..2 root translation (meters), column 3 root heading (radians),
then root-relative xyz for each non-root joint, joint j at columns
4+3*(j-1) .. 4+3*(j-1)+2. Part groups partition the joints; the pelvis
group owns the root joint and with it the translation+heading columns.
"""

import numpy as np

from ..errors import ConfigError

PART_ORDER = ("pelvis", "torso", "legs", "arms", "head")


class Skeleton:
    def __init__(self, joint_count: int, groups: dict, parents, offsets):
        """groups: name -> list of joint indices. offsets: (J,3) meters from parent."""
        self.joint_count = int(joint_count)
        self.groups = {k: tuple(int(j) for j in v) for k, v in groups.items()}
        self.parents = np.asarray(parents, dtype=np.int64)
        self.offsets = np.asarray(offsets, dtype=np.float64)
        self._validate()
        self.rest_relative = self._accumulate_offsets()

    def _validate(self):
        j = self.joint_count
        seen = []
        for name, idxs in self.groups.items():
            seen.extend(idxs)
        if sorted(seen) != list(range(j)):
            raise ConfigError("part groups must be disjoint and cover all joints")
        if self.groups.get("pelvis") != (0,):
            raise ConfigError("pelvis group must be exactly the root joint")
        if self.parents.shape != (j,) or self.offsets.shape != (j, 3):
            raise ConfigError("parents/offsets must have one entry per joint")
        if self.parents[0] != -1 or np.any(self.parents[1:] >= np.arange(1, j)):
            raise ConfigError("parents must precede children (root parent -1)")

    def _accumulate_offsets(self) -> np.ndarray:
        # root-relative rest position of each joint: sum of offsets up the chain
        pos = np.zeros((self.joint_count, 3))
        for j in range(1, self.joint_count):
            pos[j] = pos[self.parents[j]] + self.offsets[j]
        return pos[1:]

    @property
    def feature_dim(self) -> int:
        return 4 + 3 * (self.joint_count - 1)

    def joint_columns(self, joint: int):
        """Feature columns for one non-root joint."""
        if not 1 <= joint < self.joint_count:
            raise ValueError("joint_columns is defined for non-root joints")
        base = 4 + 3 * (joint - 1)
        return list(range(base, base + 3))

    def group_columns(self, name: str):
        """Feature columns owned by a part group, ascending."""
        idxs = self.groups[name]
        cols = []
        for j in idxs:
            if j == 0:
                cols.extend([0, 1, 2, 3])
            else:
                cols.extend(self.joint_columns(j))
        return sorted(cols)

    def columns_for(self, part_names) -> np.ndarray:
        cols = []
        for name in part_names:
            cols.extend(self.group_columns(name))
        return np.array(sorted(cols), dtype=np.int64)


def default_skeleton() -> Skeleton:
    """22-joint body: pelvis(1) torso(4) legs(8) arms(8) head(1)."""
    groups = {
        "pelvis": [0],
        "torso": [1, 2, 3, 4],
        "legs": [5, 6, 7, 8, 9, 10, 11, 12],
        "arms": [13, 14, 15, 16, 17, 18, 19, 20],
        "head": [21],
    }
    parents = [-1,
               0, 1, 2, 3,              # spine chain to neck
               0, 5, 6, 7, 0, 9, 10, 11,  # left leg, right leg
               3, 13, 14, 15, 3, 17, 18, 19,  # left arm, right arm
               4]                        # head
    offsets = np.array([
        [0.00, 0.00, 0.00],
        [0.00, 0.12, 0.00], [0.00, 0.13, 0.00], [0.00, 0.13, 0.00], [0.00, 0.12, 0.00],
        [0.09, -0.05, 0.00], [0.00, -0.40, 0.00], [0.00, -0.42, 0.00], [0.00, -0.05, 0.12],
        [-0.09, -0.05, 0.00], [0.00, -0.40, 0.00], [0.00, -0.42, 0.00], [0.00, -0.05, 0.12],
        [0.16, -0.02, 0.00], [0.02, -0.26, 0.00], [0.01, -0.25, 0.00], [0.00, -0.08, 0.00],
        [-0.16, -0.02, 0.00], [-0.02, -0.26, 0.00], [-0.01, -0.25, 0.00], [0.00, -0.08, 0.00],
        [0.00, 0.10, 0.00],
    ])
    return Skeleton(22, groups, parents, offsets)
