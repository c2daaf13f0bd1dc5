"""Box geometry and the CSV interchange formats for proposals and annotations.

Boxes are zero-indexed and half-open: ``[x_min, x_max) x [y_min, y_max)``.
"""

from __future__ import annotations

import csv
from contextlib import contextmanager
from dataclasses import dataclass
import io
import os

from .exceptions import InvalidBoxError, ParseError

GT_HEADER = ["image_id", "class", "x_min", "y_min", "x_max", "y_max"]
PROPOSAL_HEADER = ["image_id", "x_min", "y_min", "x_max", "y_max"]


@dataclass(frozen=True, order=True)
class BoundingBox:
    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        for name in ("x_min", "y_min", "x_max", "y_max"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if self.x_min < 0 or self.y_min < 0:
            raise InvalidBoxError(f"negative box origin in {self.as_tuple()}")
        if self.x_min >= self.x_max or self.y_min >= self.y_max:
            raise InvalidBoxError(f"empty box {self.as_tuple()}: need x_min < x_max and y_min < y_max")

    @property
    def width(self):
        return self.x_max - self.x_min

    @property
    def height(self):
        return self.y_max - self.y_min

    @property
    def area(self):
        return self.width * self.height

    def as_tuple(self):
        return (self.x_min, self.y_min, self.x_max, self.y_max)


@dataclass(frozen=True)
class Proposal:
    image_id: str
    box: BoundingBox
    rank: int
    source: str = ""


@dataclass(frozen=True)
class GroundTruthAnnotation:
    image_id: str
    box: BoundingBox
    class_label: str

    def __post_init__(self):
        if not self.class_label:
            raise ValueError("class_label must be non-empty")


def iou(a, b):
    """Intersection over union of two boxes; 0.0 when they do not overlap."""
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


@contextmanager
def open_text(file, mode):
    if isinstance(file, (str, os.PathLike)):
        with open(file, mode, encoding="utf-8", newline="") as fh:
            yield fh
    else:
        yield file


def _read_rows(file, header):
    with open_text(file, "r") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None:
            raise ParseError("missing header", line=1)
        if [c.strip() for c in first] != header:
            raise ParseError(f"expected header {','.join(header)!r}, got {','.join(first)!r}", line=1)
        for row in reader:
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            yield reader.line_num, row


def _parse_box(fields, lineno):
    try:
        coords = [int(f) for f in fields]
    except ValueError:
        raise ParseError(f"non-integer coordinate in {fields}", line=lineno) from None
    try:
        return BoundingBox(*coords)
    except InvalidBoxError as exc:
        raise InvalidBoxError(f"line {lineno}: {exc}") from None


def parse_ground_truth(file):
    """Read the ground-truth CSV ``image_id,class,x_min,y_min,x_max,y_max``."""
    out = []
    for lineno, row in _read_rows(file, GT_HEADER):
        if len(row) != 6:
            raise ParseError(f"expected 6 fields, got {len(row)}", line=lineno)
        image_id, label = row[0], row[1]
        if not image_id:
            raise ParseError("empty image_id", line=lineno)
        if not label:
            raise ParseError("empty class label", line=lineno)
        out.append(GroundTruthAnnotation(image_id, _parse_box(row[2:], lineno), label))
    return out


def parse_proposals(file, source_tag=""):
    """Read the proposal CSV; ranks are 1..n per image_id in file order."""
    out = []
    next_rank = {}
    for lineno, row in _read_rows(file, PROPOSAL_HEADER):
        if len(row) != 5:
            raise ParseError(f"expected 5 fields, got {len(row)}", line=lineno)
        image_id = row[0]
        if not image_id:
            raise ParseError("empty image_id", line=lineno)
        rank = next_rank.get(image_id, 0) + 1
        next_rank[image_id] = rank
        out.append(Proposal(image_id, _parse_box(row[1:], lineno), rank, source_tag))
    return out


def group_by_image(proposals):
    """Group proposals into ``{image_id: [Proposal, ...]}`` sorted by rank.

    Images keep their order of first appearance.
    """
    groups = {}
    for p in proposals:
        groups.setdefault(p.image_id, []).append(p)
    for plist in groups.values():
        plist.sort(key=lambda p: p.rank)
    return groups


def write_proposals(proposals, file):
    """Write the proposal CSV; images in first-appearance order, ranks ascending."""
    with open_text(file, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PROPOSAL_HEADER)
        for image_id, plist in group_by_image(proposals).items():
            for p in plist:
                writer.writerow([image_id, *p.box.as_tuple()])


def proposals_to_csv(proposals):
    buf = io.StringIO()
    write_proposals(proposals, buf)
    return buf.getvalue()
