import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vhconnect.boxes import BoundingBox, Proposal, iou
from vhconnect.combiner import BudgetCombiner, BudgetSplit, combine, combine_all, split_budget
from vhconnect.exceptions import ConfigurationError, InvalidInputError


def box(i):
    return BoundingBox(i, 0, i + 5, 5)


def ranked(tag, ids, image_id="im"):
    return [Proposal(image_id, box(i), r, tag) for r, i in enumerate(ids, start=1)]


class TestBudgetSplit:
    def test_parse(self):
        s = BudgetSplit.parse("ss=0.5,eb=0.4,vh=0.1")
        assert s.tags == ["ss", "eb", "vh"] and str(s) == "ss=0.5,eb=0.4,vh=0.1"

    @pytest.mark.parametrize("text", ["ss=0.5,eb=0.4", "ss=0.5,ss=0.5", "ss=1.2,eb=-0.2", "ss", "ss=x", ""])
    def test_invalid(self, text):
        with pytest.raises(InvalidInputError):
            BudgetSplit.parse(text)


class TestSplitBudget:
    def test_setting_five(self):
        assert split_budget(2000, BudgetSplit.parse("ss=0.5,eb=0.4,vh=0.1")) == [
            ("ss", 1000), ("eb", 800), ("vh", 200)
        ]

    def test_setting_four(self):
        assert split_budget(2000, [("ss", 0.9), ("vh", 0.1)]) == [("ss", 1800), ("vh", 200)]

    def test_remainder_goes_first(self):
        assert split_budget(1, [("a", 0.5), ("b", 0.5)]) == [("a", 1), ("b", 0)]

    def test_decimal_fraction_not_lost_to_rounding(self):
        assert split_budget(100, [("a", 0.29), ("b", 0.71)]) == [("a", 29), ("b", 71)]

    def test_negative_total(self):
        with pytest.raises(InvalidInputError):
            split_budget(-1, [("a", 1.0)])

    @given(st.integers(0, 10**6), st.lists(st.integers(1, 1000), min_size=1, max_size=6))
    def test_sums_to_total(self, total, weights):
        fracs = [w / sum(weights) for w in weights]
        fracs[-1] = 1.0 - sum(fracs[:-1])
        if fracs[-1] <= 0:
            return
        counts = split_budget(total, [(f"s{i}", f) for i, f in enumerate(fracs)])
        assert sum(c for _, c in counts) == total and all(c >= 0 for _, c in counts)


class TestCombine:
    def test_disjoint_concatenation(self):
        sources = {"a": ranked("a", range(0, 10)), "b": ranked("b", range(100, 110))}
        out = combine(sources, 6, [("a", 0.5), ("b", 0.5)])
        assert [p.box for p in out] == [box(i) for i in (0, 1, 2, 100, 101, 102)]
        assert [p.rank for p in out] == list(range(1, 7))
        assert {p.source for p in out} == {"a+b"}

    def test_duplicate_is_backfilled(self):
        # a: [0, 1, 2]; b: [0, 7, 8]; heads a[0,1] b[0,7] -> dedup drops b's 0 -> backfill a's 2
        sources = {"a": ranked("a", [0, 1, 2]), "b": ranked("b", [0, 7, 8])}
        out = combine(sources, 4, [("a", 0.5), ("b", 0.5)])
        assert [p.box for p in out] == [box(0), box(1), box(7), box(2)]

    def test_empty_source_backfilled_round_robin(self):
        sources = {"a": [], "b": ranked("b", range(10, 15)), "c": ranked("c", range(20, 25))}
        out = combine(sources, 6, [("a", 1 / 3), ("b", 1 / 3), ("c", 1 / 3)])
        assert [p.box for p in out] == [box(i) for i in (10, 11, 20, 21, 12, 22)]

    def test_short_supply(self):
        sources = {"a": ranked("a", [0, 1]), "b": ranked("b", [1, 2])}
        out = combine(sources, 10, [("a", 0.5), ("b", 0.5)])
        assert [p.box for p in out] == [box(0), box(1), box(2)]

    def test_unknown_tag(self):
        with pytest.raises(ConfigurationError):
            combine({"a": []}, 5, [("a", 0.5), ("zz", 0.5)])

    def test_full_split_reproduces_source(self):
        src = ranked("a", [5, 3, 9, 1, 7])
        out = combine({"a": src, "b": ranked("b", [2])}, 3, [("a", 1.0)])
        assert [p.box for p in out] == [p.box for p in src[:3]]

    @settings(max_examples=200)
    @given(
        st.lists(st.integers(0, 30), max_size=25),
        st.lists(st.integers(0, 30), max_size=25),
        st.lists(st.integers(0, 30), max_size=25),
        st.integers(0, 40),
        st.sampled_from([(0.5, 0.4, 0.1), (0.9, 0.05, 0.05), (0.2, 0.3, 0.5)]),
    )
    def test_properties(self, a, b, c, total, fracs):
        sources = {"ss": ranked("ss", a), "eb": ranked("eb", b), "vh": ranked("vh", c)}
        split = list(zip(["ss", "eb", "vh"], fracs))
        out = combine(sources, total, split)
        boxes = [p.box for p in out]
        assert len(boxes) == len(set(boxes)) and len(boxes) <= total
        supply = {p.box for plist in sources.values() for p in plist}
        assert len(boxes) == min(total, len(supply))
        # every allocated head survives (possibly as an earlier duplicate)
        chosen = set(boxes)
        for tag, count in split_budget(total, split):
            for p in sources[tag][:count]:
                assert p.box in chosen
        # hence no ground-truth box ever loses its best overlap
        gt = BoundingBox(3, 0, 9, 5)
        for tag, count in split_budget(total, split):
            head = [p.box for p in sources[tag][:count]]
            if head:
                assert max(iou(gt, q) for q in boxes) >= max(iou(gt, q) for q in head)


class TestCombineAll:
    def test_per_image(self):
        a = ranked("a", [0, 1, 2], "x") + ranked("a", [3], "y")
        b = ranked("b", [5, 6], "x") + ranked("b", [7, 8], "z")
        out = combine_all({"a": a, "b": b}, 2, BudgetSplit.parse("a=0.5,b=0.5"))
        got = [(p.image_id, p.box, p.rank) for p in out]
        assert got == [
            ("x", box(0), 1), ("x", box(5), 2),
            ("y", box(3), 1),
            ("z", box(7), 1), ("z", box(8), 2),
        ]

    def test_estimator(self):
        a = ranked("ss", range(10))
        est = BudgetCombiner(split="ss=1.0", total=4).fit()
        assert est.counts_ == [("ss", 4)]
        assert [p.box for p in est.transform({"ss": a})] == [box(i) for i in range(4)]
        assert est.get_params() == {"split": "ss=1.0", "total": 4}
