"""File formats for systems, pavings and solution vectors.

Systems
    JSON: ``{"n": .., "d": .., "n_e": .., "A": [row-major floats], "b": [..]}``.
    Matrix Market: the ``n x (d + 1)`` array ``[A | b]`` in ``array real
    general`` format; one comment line ``% blockkaczmarz n_e=<k> perm=<i,j,..>``
    records the equality count and the row permutation applied on load.

Pavings
    JSON: ``{"m": .., "beta": .., "blocks": [[indices], ..]}``.
"""

import json
import re
from pathlib import Path

import numpy as np
import scipy.io

from .paving import RowPaving
from .system import MixedSystem, from_rows, standardize

_MM_TAG = re.compile(r"blockkaczmarz\s+n_e=(\d+)(?:\s+perm=([\d,]*))?")


def system_to_dict(sys):
    return {
        "n": sys.n,
        "d": sys.d,
        "n_e": sys.n_e,
        "A": sys.A.ravel().tolist(),
        "b": sys.b.tolist(),
    }


def system_from_dict(data, standardize_rows=True):
    """Parse the JSON system document.

    `A` may be given flat (row-major) or nested. Rows are standardized
    unless `standardize_rows` is false, in which case they must already be
    unit norm.
    """
    n, d, n_e = int(data["n"]), int(data["d"]), int(data["n_e"])
    A = np.asarray(data["A"], dtype=np.float64).reshape(n, d)
    b = np.asarray(data["b"], dtype=np.float64)
    if b.shape != (n,):
        raise ValueError(f"b has {b.size} entries, expected {n}")
    if standardize_rows:
        A, b = standardize(A, b)
    return MixedSystem(A, b, n_e)


def save_system_json(sys, path):
    Path(path).write_text(json.dumps(system_to_dict(sys)))


def load_system_json(path, standardize_rows=True):
    return system_from_dict(json.loads(Path(path).read_text()), standardize_rows)


def save_system_mm(sys, path, perm=None):
    """Write ``[A | b]`` as a dense Matrix Market array with the n_e/perm tag."""
    perm = np.arange(sys.n) if perm is None else np.asarray(perm)
    tag = f"blockkaczmarz n_e={sys.n_e} perm={','.join(map(str, perm.tolist()))}"
    scipy.io.mmwrite(str(path), np.column_stack([sys.A, sys.b]), comment=tag, field="real", precision=17)


def load_system_mm(path, is_equality=None):
    """Read a system from Matrix Market.

    Without the tag line, `is_equality` (one flag per row) must say which
    rows are equalities; rows are then reordered equalities-first.

    Returns
    -------
    system : MixedSystem
    perm : ndarray
        ``system.A[k]`` is row ``perm[k]`` of the original (pre-reorder) data.
    """
    path = Path(path)
    M = np.asarray(scipy.io.mmread(str(path)), dtype=np.float64)
    if M.ndim != 2 or M.shape[1] < 2:
        raise ValueError("Matrix Market system must hold [A | b] with at least 2 columns")
    A, b = M[:, :-1], M[:, -1]
    tag = None
    with path.open() as fh:
        for line in fh:
            if not line.startswith("%"):
                break
            found = _MM_TAG.search(line)
            if found:
                tag = found
    if tag is not None:
        A, b = standardize(A, b)
        n_e = int(tag.group(1))
        perm = (
            np.array([int(v) for v in tag.group(2).split(",")], dtype=np.intp)
            if tag.group(2)
            else np.arange(A.shape[0])
        )
        return MixedSystem(A, b, n_e), perm
    if is_equality is None:
        raise ValueError(f"{path} has no n_e tag; pass is_equality")
    return from_rows(A, b, is_equality)


def load_system(path):
    """Load a system by extension: ``.json`` or ``.mtx``/``.mm``."""
    suffix = Path(path).suffix.lower()
    if suffix == ".json":
        return load_system_json(path)
    if suffix in (".mtx", ".mm"):
        return load_system_mm(path)[0]
    raise ValueError(f"unknown system file type {suffix!r}")


def save_system(sys, path):
    suffix = Path(path).suffix.lower()
    if suffix in (".mtx", ".mm"):
        save_system_mm(sys, path)
    else:
        save_system_json(sys, path)


def save_paving(T, path):
    Path(path).write_text(json.dumps(T.to_dict()))


def load_paving(path):
    return RowPaving.from_dict(json.loads(Path(path).read_text()))


def save_vector(x, path):
    Path(path).write_text(json.dumps({"x": np.asarray(x, dtype=np.float64).tolist()}))


def load_vector(path):
    data = json.loads(Path(path).read_text())
    return np.asarray(data["x"] if isinstance(data, dict) else data, dtype=np.float64)
