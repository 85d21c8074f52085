"""Tiny deterministic SVG writer (no plotting dependency)."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np


def _f(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".") if abs(v) < 1e9 else f"{v:.6g}"


class Canvas:
    """World window ``[x0, x1] x [y0, y1]`` drawn on a ``width x height`` pixel canvas."""

    def __init__(self, window, width: int = 800, height: int = 800, margin: int = 40, title: str = ""):
        self.x0, self.x1, self.y0, self.y1 = map(float, window)
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError(f"empty window {window}")
        self.w, self.h, self.m = width, height, margin
        self.items: list[str] = []
        self.title = title

    def px(self, x, y):
        sx = self.m + (np.asarray(x, dtype=float) - self.x0) / (self.x1 - self.x0) * (self.w - 2 * self.m)
        sy = self.h - self.m - (np.asarray(y, dtype=float) - self.y0) / (self.y1 - self.y0) * (self.h - 2 * self.m)
        return sx, sy

    def polyline(self, xy, stroke="black", width=1.0, dash=None, opacity=1.0):
        xy = np.asarray(xy, dtype=float)
        if len(xy) < 2:
            return
        # clip far-away points so escaping orbits do not produce huge numbers
        sx, sy = self.px(xy[:, 0], xy[:, 1])
        lim = 4 * max(self.w, self.h)
        sx, sy = np.clip(sx, -lim, lim), np.clip(sy, -lim, lim)
        # drop vertices closer than ~0.3 px to the last kept one
        keep = [0]
        for i in range(1, len(sx) - 1):
            j = keep[-1]
            if abs(sx[i] - sx[j]) + abs(sy[i] - sy[j]) >= 0.3:
                keep.append(i)
        keep.append(len(sx) - 1)
        sx, sy = sx[keep], sy[keep]
        pts = " ".join(f"{_f(a)},{_f(b)}" for a, b in zip(sx, sy))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(f'<polyline points="{pts}" fill="none" stroke="{stroke}" '
                          f'stroke-width="{_f(width)}" stroke-opacity="{_f(opacity)}"{extra}/>')

    def circle(self, x, y, r=4.0, fill="black", stroke="none"):
        sx, sy = self.px(x, y)
        self.items.append(f'<circle cx="{_f(sx)}" cy="{_f(sy)}" r="{_f(r)}" fill="{fill}" stroke="{stroke}"/>')

    def rect(self, x, y, w, h, fill):
        sx0, sy0 = self.px(x, y + h)
        sx1, sy1 = self.px(x + w, y)
        self.items.append(f'<rect x="{_f(sx0)}" y="{_f(sy0)}" width="{_f(sx1 - sx0)}" '
                          f'height="{_f(sy1 - sy0)}" fill="{fill}" stroke="none"/>')

    def text(self, x, y, s, size=12, fill="black", anchor="start"):
        sx, sy = self.px(x, y)
        self.items.append(f'<text x="{_f(sx)}" y="{_f(sy)}" font-size="{size}" fill="{fill}" '
                          f'text-anchor="{anchor}" font-family="sans-serif">{escape(s)}</text>')

    def axes(self, xlabel="x", ylabel="y"):
        self.polyline([[self.x0, self.y0], [self.x1, self.y0], [self.x1, self.y1],
                       [self.x0, self.y1], [self.x0, self.y0]], stroke="#888")
        self.text(self.x0, self.y0, f"{self.x0:g}", size=10, fill="#444")
        self.text(self.x1, self.y0, f"{self.x1:g}", size=10, fill="#444", anchor="end")
        self.text(self.x0, self.y1, f"{self.y1:g}", size=10, fill="#444")
        self.text(0.5 * (self.x0 + self.x1), self.y0, xlabel, size=12, anchor="middle")
        self.text(self.x0, 0.5 * (self.y0 + self.y1), ylabel, size=12)

    def render(self, banner: str = "") -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
                f'viewBox="0 0 {self.w} {self.h}">')
        lines = ['<?xml version="1.0" encoding="UTF-8"?>']
        if banner:
            lines.append(f"<!-- {escape(banner)} -->")
        lines.append(head)
        lines.append(f'<rect width="{self.w}" height="{self.h}" fill="white"/>')
        if self.title:
            lines.append(f'<text x="{self.w // 2}" y="20" font-size="14" text-anchor="middle" '
                         f'font-family="sans-serif">{escape(self.title)}</text>')
        lines.extend(self.items)
        lines.append("</svg>")
        return "\n".join(lines) + "\n"

    def save(self, path, banner: str = "") -> None:
        with open(path, "w") as fh:
            fh.write(self.render(banner))
