"""Evaluation of 6D localization, 6D detection and 2D detection submissions."""

import json
import os

from ._poseval import (
    PosevalError,
    ap_dataset_6d,
    ap_from_curve,
    ap_overall,
    ar_dataset,
    ar_overall,
    iou_2d,
    mspd,
    mssd,
    percent_1dp,
    render_depth,
    report_csv,
    vsd,
    write_fixtures,
)
from . import _poseval

__all__ = [
    "PosevalError",
    "ap_dataset_6d",
    "ap_from_curve",
    "ap_overall",
    "ar_dataset",
    "ar_overall",
    "evaluate",
    "iou_2d",
    "mspd",
    "mssd",
    "percent_1dp",
    "render_depth",
    "report_csv",
    "vsd",
    "write_fixtures",
]


def evaluate(task, dataset, targets, submission, jobs=1, grid=None):
    """Score submissions and return the report as a dict.

    `dataset`, `targets` and `submission` are paths, or equal-length lists of
    paths for several datasets. `grid` is an optional dict of threshold overrides.
    """
    if isinstance(dataset, (str, os.PathLike)):
        dataset, targets, submission = [dataset], [targets], [submission]
    if not len(dataset) == len(targets) == len(submission):
        raise ValueError("dataset, targets and submission must have the same length")
    inputs = [(os.fspath(d), os.fspath(t), os.fspath(s)) for d, t, s in zip(dataset, targets, submission)]
    text = _poseval.evaluate_json(task, inputs, jobs, json.dumps(grid) if grid else "")
    return json.loads(text)
