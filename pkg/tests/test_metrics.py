import math

import pytest

from stabjgl.core import EdgeSet
from stabjgl.metrics import ConfusionCounts, confusion, mcc, mcc_from_counts, precision_recall


def E(p, *pairs):
    return EdgeSet(p, frozenset(pairs))


def test_confusion_counts():
    truth = E(5, (0, 1), (1, 2), (2, 3))
    est = E(5, (0, 1), (3, 4))
    c = confusion(est, truth)
    assert c == ConfusionCounts(tp=1, fp=1, fn=2, tn=6)
    assert c.total == 10


def test_precision_recall_and_undefined_marker():
    truth = E(4, (0, 1), (2, 3))
    assert precision_recall(confusion(truth, truth)) == (1.0, 1.0)
    prec, rec = precision_recall(confusion(E(4), truth))
    assert prec is None and rec == 0.0
    assert precision_recall(confusion(E(4, (0, 1)), E(4)))[1] is None


def test_p_mismatch():
    with pytest.raises(ValueError):
        confusion(E(3), E(4))


def test_mcc_values():
    a = E(4, (0, 1), (2, 3))
    assert mcc(a, a) == pytest.approx(1.0)
    complement = E(4, (0, 2), (0, 3), (1, 2), (1, 3))
    assert mcc(a, complement) == pytest.approx(-1.0)
    assert mcc(E(4), a) == 0.0
    c = ConfusionCounts(tp=3, fp=1, fn=2, tn=4)
    assert mcc_from_counts(c) == pytest.approx((12 - 2) / math.sqrt(4 * 5 * 5 * 6))
