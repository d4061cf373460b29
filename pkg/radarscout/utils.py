import json
import math
import os
from textwrap import dedent

import numpy as np

package_dir = os.path.abspath(os.path.dirname(os.path.abspath(__file__)))

# Named random streams. Keys are folded into the seed sequence so every
# consumer gets an independent generator regardless of call order.
STREAMS = {
    "scenario": 0,
    "measurement": 1,
    "noise": 2,
}


class SingularityError(ArithmeticError):
    pass


class DictAttributes(dict):
    def __getattr__(self, attr):
        try:
            return self[attr]
        except KeyError:
            raise AttributeError(
                "'{}' has no attribute '{}'".format(self.__class__.__name__, attr)
            )


class WhereList(list):
    def where(self, skip_missing=True, missing_default=None, **wheres):
        results = self.__class__()
        for item in self:
            include = True
            for k, v in wheres.items():
                try:
                    item_value = item[k]
                except KeyError:
                    if skip_missing:
                        include = False
                        break
                    item_value = missing_default
                if item_value != v:
                    include = False
                    break
            if include:
                results.append(item)
        return results

    def find(self, *args, **kwargs):
        results = self.where(*args, **kwargs)
        if results:
            return results[0]

    def column(self, key):
        return [item[key] for item in self]


class Tasks(object):
    def task(self, task, content, write_mode=None, context=None):
        self.tasks[task] = {
            "file_mode": write_mode,
            "template": content,
            "context": context,
        }
        return self.tasks[task]

    def task_template(self, task, path, write_mode=None, context=None):
        path = os.path.join(package_dir, self.templates_base, path)
        t = self.task(task, None, write_mode, context)
        t["template_path"] = path
        return t

    def task_content(self, task, content, write_mode=None):
        """Raw content written as-is, bypassing the template engine."""
        t = self.task(task, None, write_mode)
        t["content"] = content
        return t


def generated_header(prefix="#"):
    if prefix:
        prefix = prefix + " "

    return dedent(
        """
            {prefix}This file was automatically generated by radar-scout.
            {prefix}Every value is recomputable from the mission logs next to it.
        """.format(
            prefix=prefix
        )
    ).strip()


def rng_stream(seed, *keys):
    entropy = [int(seed)]
    for key in keys:
        entropy.append(STREAMS[key] if isinstance(key, str) else int(key))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(value):
    return 10.0 * np.log10(value)


def wrap_angle(angle):
    """Wrap to (-pi, pi]."""
    wrapped = np.mod(np.asarray(angle, dtype=float) + math.pi, 2.0 * math.pi) - math.pi
    wrapped = np.where(wrapped == -math.pi, math.pi, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def symmetrize(matrix):
    return 0.5 * (matrix + np.swapaxes(matrix, -1, -2))


def clamp_psd(matrix, floor=0.0):
    """Symmetrize and clip negative eigenvalues produced by round-off."""
    matrix = symmetrize(np.asarray(matrix, dtype=float))
    values, vectors = np.linalg.eigh(matrix)
    if values.min() >= floor:
        return matrix
    values = np.maximum(values, floor)
    return symmetrize((vectors * values) @ vectors.T)


def json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if hasattr(value, "as_dict"):
        return value.as_dict()
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    raise TypeError("{} is not JSON serializable".format(type(value).__name__))


def dumps(record):
    return json.dumps(record, sort_keys=True, default=json_default)


def write_jsonl(path, records):
    with open(path, "w") as fp:
        for record in records:
            fp.write(dumps(record) + "\n")
    return path


def read_jsonl(path):
    with open(path) as fp:
        return [json.loads(line) for line in fp if line.strip()]
