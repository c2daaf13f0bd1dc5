"""Split a proposal budget across ranked sources and merge them per image."""

from __future__ import annotations

from dataclasses import dataclass
import math

from sklearn.base import BaseEstimator

from .boxes import Proposal, group_by_image
from .exceptions import ConfigurationError, InvalidInputError
from .utils.validation import check_positive_int

__all__ = ["BudgetSplit", "split_budget", "combine", "combine_all", "BudgetCombiner"]


@dataclass(frozen=True)
class BudgetSplit:
    """Ordered ``(source_tag, fraction)`` pairs; fractions sum to 1."""

    allocations: tuple

    def __post_init__(self):
        allocs = tuple((str(tag), float(frac)) for tag, frac in self.allocations)
        if not allocs:
            raise InvalidInputError("a budget split needs at least one source")
        tags = [t for t, _ in allocs]
        if len(set(tags)) != len(tags):
            raise InvalidInputError(f"duplicate source tags in split: {tags}")
        if any(not t for t in tags):
            raise InvalidInputError("source tags must be non-empty")
        if any(not (f > 0) or math.isinf(f) for _, f in allocs):
            raise InvalidInputError("split fractions must be positive")
        if abs(math.fsum(f for _, f in allocs) - 1.0) > 1e-9:
            raise InvalidInputError(f"split fractions must sum to 1, got {math.fsum(f for _, f in allocs)}")
        object.__setattr__(self, "allocations", allocs)

    @classmethod
    def parse(cls, text):
        """Parse ``"ss=0.5,eb=0.4,vh=0.1"``."""
        pairs = []
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            tag, sep, frac = item.partition("=")
            if not sep:
                raise InvalidInputError(f"split entry {item!r} is not TAG=FRACTION")
            try:
                pairs.append((tag.strip(), float(frac)))
            except ValueError:
                raise InvalidInputError(f"split fraction {frac!r} is not a number") from None
        return cls(tuple(pairs))

    @property
    def tags(self):
        return [t for t, _ in self.allocations]

    def __str__(self):
        return ",".join(f"{t}={f:g}" for t, f in self.allocations)


def split_budget(total, split):
    """Floor each share, then hand out the remainder one unit at a time in declaration order."""
    total = check_positive_int(total, "total", minimum=0)
    if not isinstance(split, BudgetSplit):
        split = BudgetSplit(tuple(split))
    # tolerance keeps e.g. 0.29 * 100 at 29 despite binary rounding
    counts = [math.floor(frac * total * (1 + 1e-12) + 1e-9) for _, frac in split.allocations]
    i = len(counts) - 1
    while sum(counts) > total:
        if counts[i] > 0:
            counts[i] -= 1
        i = (i - 1) % len(counts)
    remainder = total - sum(counts)
    i = 0
    while remainder > 0:
        counts[i % len(counts)] += 1
        remainder -= 1
        i += 1
    return [(tag, c) for (tag, _), c in zip(split.allocations, counts)]


def combine(per_source, total, split):
    """Merge one image's ranked lists from several sources under a budget.

    Each source contributes its top ``count_i`` proposals (allocation order).
    Exact duplicate boxes are dropped, keeping the first occurrence, and the
    freed slots are refilled round-robin from the sources' next unused
    proposals.  Output is re-ranked from 1 and tagged with the joined source
    tags, e.g. ``"ss+eb+vh"``.
    """
    if not isinstance(split, BudgetSplit):
        split = BudgetSplit(tuple(split))
    missing = [t for t in split.tags if t not in per_source]
    if missing:
        raise ConfigurationError(f"split names unknown sources {missing}; available: {sorted(per_source)}")
    counts = split_budget(total, split)

    lists = {tag: sorted(per_source[tag], key=lambda p: p.rank) for tag in split.tags}
    cursor = {}
    chosen = []
    seen = set()

    def take(p):
        if p.box in seen:
            return False
        seen.add(p.box)
        chosen.append(p)
        return True

    for tag, count in counts:
        head = lists[tag][:count]
        cursor[tag] = len(head)
        for p in head:
            take(p)

    while len(chosen) < total:
        progressed = False
        for tag in split.tags:
            if len(chosen) >= total:
                break
            plist = lists[tag]
            while cursor[tag] < len(plist):
                p = plist[cursor[tag]]
                cursor[tag] += 1
                if take(p):
                    progressed = True
                    break
        if not progressed:
            break

    image_ids = {p.image_id for p in chosen}
    image_id = image_ids.pop() if len(image_ids) == 1 else (chosen[0].image_id if chosen else "")
    tag = "+".join(split.tags)
    return [Proposal(image_id, p.box, rank, tag) for rank, p in enumerate(chosen, start=1)]


def combine_all(sources, total, split):
    """Combine flat per-source proposal lists for every image.

    ``sources`` maps a tag to a list of proposals spanning many images.
    Images appear in sorted ``image_id`` order.
    """
    if not isinstance(split, BudgetSplit):
        split = BudgetSplit(tuple(split))
    missing = [t for t in split.tags if t not in sources]
    if missing:
        raise ConfigurationError(f"split names unknown sources {missing}; available: {sorted(sources)}")
    grouped = {tag: group_by_image(sources[tag]) for tag in split.tags}
    image_ids = sorted(set().union(*(g.keys() for g in grouped.values())))
    out = []
    for image_id in image_ids:
        per_source = {tag: grouped[tag].get(image_id, []) for tag in split.tags}
        merged = combine(per_source, total, split)
        out.extend(Proposal(image_id, p.box, p.rank, p.source) for p in merged)
    return out


class BudgetCombiner(BaseEstimator):
    """Estimator-style front end for :func:`combine_all`.

    ``split`` accepts a :class:`BudgetSplit`, a ``"tag=frac,..."`` string or a
    sequence of ``(tag, fraction)`` pairs.
    """

    def __init__(self, split="ss=0.5,eb=0.4,vh=0.1", total=2000):
        self.split = split
        self.total = total

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.requires_fit = False
        return tags

    def _split(self):
        if isinstance(self.split, BudgetSplit):
            return self.split
        if isinstance(self.split, str):
            return BudgetSplit.parse(self.split)
        return BudgetSplit(tuple(self.split))

    def fit(self, X=None, y=None):
        self.split_ = self._split()
        self.counts_ = split_budget(self.total, self.split_)
        return self

    def transform(self, sources):
        return combine_all(sources, self.total, getattr(self, "split_", None) or self._split())
