#!/usr/bin/env python3
"""Unit square minus the disc B_r(c), triangulated with scipy's Delaunay.

Writes the ASCII mesh format read by fracorder::load_mesh. Markers: bottom 3,
right 4, top 5, left 6 (corners take the first of bottom, top, left, right),
hole boundary 2.

    python3 tools/gen_square_hole_mesh.py 64 data/square_hole_64.mesh
"""

import argparse
import math
import sys

import numpy as np
from scipy.spatial import Delaunay

BOTTOM, RIGHT, TOP, LEFT, OBSTACLE = 3, 4, 5, 6, 2


def build(n, cx=0.5, cy=0.5, r=0.2):
    h = 1.0 / n
    pts, marks = [], []
    # square boundary, counter-clockwise, corners once
    for i in range(n + 1):
        for j in range(n + 1):
            x, y = i * h, j * h
            on = i in (0, n) or j in (0, n)
            d = math.hypot(x - cx, y - cy)
            if on:
                if j == 0:
                    m = BOTTOM
                elif j == n:
                    m = TOP
                elif i == 0:
                    m = LEFT
                else:
                    m = RIGHT
                pts.append((x, y))
                marks.append(m)
            elif d > r + 0.6 * h:
                pts.append((x, y))
                marks.append(0)
    nc = max(8, int(math.ceil(2.0 * math.pi * r / h)))
    first_c = len(pts)
    for k in range(nc):
        th = 2.0 * math.pi * k / nc
        pts.append((cx + r * math.cos(th), cy + r * math.sin(th)))
        marks.append(OBSTACLE)
    p = np.array(pts)
    tri = Delaunay(p)
    keep = []
    for s in tri.simplices:
        g = p[s].mean(axis=0)
        if math.hypot(g[0] - cx, g[1] - cy) < r:
            continue
        a, b, c = p[s]
        area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
        if abs(area) < 1e-14:
            continue
        keep.append(s if area > 0 else s[[0, 2, 1]])
    return p, np.array(keep), np.array(marks), first_c, nc


def check(p, t, marks, first_c, nc, r=0.2):
    edges = {}
    for s in t:
        for a, b in ((s[0], s[1]), (s[1], s[2]), (s[2], s[0])):
            k = (min(a, b), max(a, b))
            edges[k] = edges.get(k, 0) + 1
    if max(edges.values()) > 2:
        raise SystemExit("non-manifold edge")
    for (a, b), c in edges.items():
        if c != 1:
            continue
        if marks[a] == 0 or marks[b] == 0:
            raise SystemExit("boundary edge through an interior node")
        if marks[a] == OBSTACLE and marks[b] == OBSTACLE:
            ia, ib = a - first_c, b - first_c
            if (ia - ib) % nc not in (1, nc - 1):
                raise SystemExit("hole boundary edge skips a node")
    # annulus: V - E + F = 0
    V, E, F = len(p), len(edges), len(t)
    if V - E + F != 0:
        raise SystemExit(f"Euler characteristic {V - E + F} != 0")
    area = 0.0
    for s in t:
        a, b, c = p[s]
        area += 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    polygon = 0.5 * nc * r * r * math.sin(2.0 * math.pi / nc)
    if abs(area - (1.0 - polygon)) > 1e-12:
        raise SystemExit(f"area {area} != {1.0 - polygon}")
    return V, E, F


def write(path, p, t, marks):
    with open(path, "w") as f:
        f.write(f"# unit square minus B_0.2(0.5,0.5)\n")
        nb = int(np.count_nonzero(marks))
        f.write(f"2 {len(p)} {len(t)} {nb}\n")
        for i, (x, y) in enumerate(p):
            f.write(f"{i} {x:.17g} {y:.17g}\n")
        for e, s in enumerate(t):
            f.write(f"{e} {s[0]} {s[1]} {s[2]}\n")
        for i, m in enumerate(marks):
            if m:
                f.write(f"{i} {m}\n")


def main(argv):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("n", type=int, help="cells per side of the background grid")
    ap.add_argument("out")
    args = ap.parse_args(argv)
    p, t, marks, first_c, nc = build(args.n)
    V, E, F = check(p, t, marks, first_c, nc)
    write(args.out, p, t, marks)
    print(f"{args.out}: {V} nodes, {F} triangles, {nc} hole nodes")


if __name__ == "__main__":
    main(sys.argv[1:])
