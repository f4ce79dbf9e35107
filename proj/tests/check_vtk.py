#!/usr/bin/env python3
"""Structural check of a legacy ASCII VTK stress file: counts, connectivity, triangle
orientation and finite cell data. Uses the vtk package as a second reader if present."""
import math
import sys


def fail(msg):
    print("FAIL:", msg)
    sys.exit(1)


def main(path):
    tokens_by_line = [ln.split() for ln in open(path, encoding="ascii").read().splitlines()]
    if tokens_by_line[0] != ["#", "vtk", "DataFile", "Version", "3.0"]:
        fail("bad header")
    if tokens_by_line[2] != ["ASCII"] or tokens_by_line[3] != ["DATASET", "UNSTRUCTURED_GRID"]:
        fail("bad format lines")
    i = 4
    kw, npts, _ = tokens_by_line[i]
    if kw != "POINTS":
        fail("POINTS expected")
    npts = int(npts)
    pts = [tuple(map(float, tokens_by_line[i + 1 + k])) for k in range(npts)]
    i += 1 + npts
    kw, ncells, size = tokens_by_line[i]
    ncells, size = int(ncells), int(size)
    if kw != "CELLS" or size != 4 * ncells:
        fail("CELLS header")
    tris = []
    for k in range(ncells):
        row = list(map(int, tokens_by_line[i + 1 + k]))
        if row[0] != 3 or any(not 0 <= v < npts for v in row[1:]):
            fail(f"bad connectivity at cell {k}")
        a, b, c = (pts[v] for v in row[1:])
        area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
        if not area > 0:
            fail(f"triangle {k} not counter-clockwise")
        tris.append(row[1:])
    i += 1 + ncells
    if tokens_by_line[i] != ["CELL_TYPES", str(ncells)]:
        fail("CELL_TYPES header")
    if any(tokens_by_line[i + 1 + k] != ["5"] for k in range(ncells)):
        fail("cell type must be 5")
    i += 1 + ncells
    if tokens_by_line[i] != ["CELL_DATA", str(ncells)]:
        fail("CELL_DATA header")
    i += 1
    names = []
    while i < len(tokens_by_line) and tokens_by_line[i]:
        head = tokens_by_line[i]
        if head[0] != "SCALARS" or tokens_by_line[i + 1] != ["LOOKUP_TABLE", "default"]:
            fail(f"bad array header at line {i + 1}")
        names.append(head[1])
        conv = int if head[2] == "int" else float
        vals = [conv(tokens_by_line[i + 2 + k][0]) for k in range(ncells)]
        if conv is float and not all(math.isfinite(v) for v in vals):
            fail(f"non-finite values in {head[1]}")
        i += 2 + ncells
    if names != ["sigma_11", "sigma_12", "sigma_21", "sigma_22", "cell_id"]:
        fail(f"arrays {names}")
    try:
        import vtk  # noqa: F401
    except ImportError:
        print(f"OK: {npts} points, {ncells} triangles")
        return
    r = vtk.vtkUnstructuredGridReader()
    r.SetFileName(path)
    r.Update()
    if r.GetOutput().GetNumberOfCells() != ncells:
        fail("vtk reader disagrees on cell count")
    print(f"OK: {npts} points, {ncells} triangles (vtk reader agrees)")


if __name__ == "__main__":
    main(sys.argv[1])
