import json

import numpy as np
import pytest

from lengyel_epstein import verify
from lengyel_epstein.svg import Canvas


def test_check_table():
    assert set(verify.CHECKS) == {str(i) for i in range(1, 13)} | {"L2inv"}
    for suite in verify.SUITES:
        rep = {c for c, (_, _, s) in verify.CHECKS.items() if suite == "all" or suite in s}
        assert rep


def test_unknown_suite():
    with pytest.raises(ValueError):
        verify.run_suite("nope")


def test_run_check_is_seeded():
    a = verify.to_json(verify.run_suite("dulac", seed=3))
    b = verify.to_json(verify.run_suite("dulac", seed=3))
    c = verify.to_json(verify.run_suite("dulac", seed=4))
    assert a == b and a != c
    doc = json.loads(a)
    assert doc["schema"] == 1 and doc["passed"]


def test_clean_makes_json_safe():
    v = verify._clean({"x": np.float64(1.5), "n": np.int64(2), "ok": np.bool_(True), "bad": float("inf"),
                       1: (np.float32(0.25),)})
    assert json.loads(json.dumps(v)) == {"x": 1.5, "n": 2, "ok": True, "bad": "inf", "1": [0.25]}


def test_canvas_mapping_and_output(tmp_path):
    cv = Canvas((0, 10, 0, 5), width=120, height=70, margin=10, title="t & u")
    sx, sy = cv.px(0, 0)
    assert (float(sx), float(sy)) == (10, 60)
    sx, sy = cv.px(10, 5)
    assert (float(sx), float(sy)) == (110, 10)
    cv.polyline([[0, 0], [5, 2.5], [10, 5]], dash="2,2")
    cv.circle(5, 2.5)
    cv.text(1, 1, "<a>")
    cv.polyline([[0, 0]])  # ignored
    out = cv.render("banner")
    assert out.count("<polyline") == 1
    assert "&lt;a&gt;" in out and "t &amp; u" in out
    assert "<!-- banner -->" in out
    cv.save(tmp_path / "x.svg", "banner")
    assert (tmp_path / "x.svg").read_text() == out


def test_canvas_thins_and_clips():
    cv = Canvas((0, 1, 0, 1))
    t = np.linspace(0, 1, 10_000)
    cv.polyline(np.column_stack([t, t]))
    cv.polyline([[0, 0], [1e12, 1e12]])
    pts = cv.items[0].split('"')[1].split()
    assert len(pts) < 4000  # vertices 0.144 px apart, kept every 0.3 px
    assert "e+" not in cv.items[1]


def test_canvas_rejects_empty_window():
    with pytest.raises(ValueError):
        Canvas((1, 1, 0, 1))
