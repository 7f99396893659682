"""Text checkpoints for policy parameters (``metaopt-ckpt v1``).

Line 1 is the header, line 2 the layer dimensions followed by the action
dimension, then one parameter value per line in the flat parameter order
(layer by layer: weights row-major, biases; finally the action log-std).
Values carry 17 significant digits, which round-trips float64 exactly.
"""

import math
import os
from pathlib import Path

from .errors import CheckpointFormatError, InputError
from .policy import PolicyParams, n_params

HEADER = "metaopt-ckpt v1"


def format_checkpoint(theta):
    lines = [HEADER, " ".join(str(d) for d in (*theta.dims, theta.act_dim))]
    lines.extend(f"{v:.17g}" for v in theta.data.tolist())
    return "\n".join(lines) + "\n"


def save_checkpoint(theta, path):
    """Write atomically: a temp file in the same directory, then rename."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(format_checkpoint(theta))
    os.replace(tmp, path)


def parse_checkpoint(text, path="<checkpoint>", output_scale=0.1):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].strip() != HEADER:
        raise CheckpointFormatError(path, 1, f"expected header {HEADER!r}")
    if len(lines) < 2:
        raise CheckpointFormatError(path, 2, "missing dimension line")
    try:
        nums = [int(tok) for tok in lines[1].split()]
    except ValueError:
        raise CheckpointFormatError(path, 2, "dimensions must be integers") from None
    if len(nums) < 3 or min(nums) < 1:
        raise CheckpointFormatError(path, 2, "need at least two layer sizes plus act_dim, all >= 1")
    dims, act_dim = tuple(nums[:-1]), nums[-1]
    if act_dim != dims[-1]:
        raise CheckpointFormatError(
            path, 2, f"act_dim {act_dim} does not match output layer size {dims[-1]}")
    expected = n_params(dims)
    values = []
    for i, raw in enumerate(lines[2:], start=3):
        tok = raw.strip()
        try:
            v = float(tok)
        except ValueError:
            raise CheckpointFormatError(path, i, f"not a number: {tok!r}") from None
        if not math.isfinite(v):
            raise CheckpointFormatError(path, i, f"non-finite value {tok!r}")
        values.append(v)
    if len(values) != expected:
        line = 3 + min(len(values), expected)
        raise CheckpointFormatError(
            path, line, f"expected {expected} parameter values, found {len(values)}")
    return PolicyParams(dims, values, output_scale)


def load_checkpoint(path, output_scale=0.1):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read checkpoint {path}: {exc.strerror}") from None
    return parse_checkpoint(text, str(path), output_scale)
