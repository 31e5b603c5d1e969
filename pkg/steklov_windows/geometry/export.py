"""Mesh export: OFF-like text files and VTK unstructured grids.

Code map:
    write_off()        Counts header, node lines, triangle lines
    read_off()         Parse a file written by write_off()
    write_vtu()        XML unstructured grid with optional point data
"""

from pathlib import Path

import numpy as np
from vtkmodules.util.numpy_support import numpy_to_vtk, numpy_to_vtkIdTypeArray
from vtkmodules.vtkCommonCore import vtkPoints
from vtkmodules.vtkCommonDataModel import VTK_TRIANGLE, vtkCellArray, vtkUnstructuredGrid
from vtkmodules.vtkIOXML import vtkXMLUnstructuredGridWriter

from ..errors import ShapeError
from .mesh import TriMesh


def write_off(mesh: TriMesh, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write("OFF\n")
        f.write(f"{mesh.n_nodes} {len(mesh.triangles)} 0\n")
        for x, y in mesh.nodes:
            f.write(f"{x!r} {y!r} 0.0\n")
        for a, b, c in mesh.triangles:
            f.write(f"3 {a} {b} {c}\n")
    return path


def read_off(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(nodes, triangles)`` from an OFF file."""
    with open(path, "r", encoding="utf-8") as f:
        lines = [line.split() for line in f if line.strip()]
    n_nodes, n_tri, _ = (int(v) for v in lines[1])
    nodes = np.array([[float(v) for v in row[:2]] for row in lines[2 : 2 + n_nodes]])
    triangles = np.array([[int(v) for v in row[1:4]] for row in lines[2 + n_nodes : 2 + n_nodes + n_tri]])
    return nodes, triangles


def _to_grid(mesh: TriMesh, point_data: dict[str, np.ndarray] | None) -> vtkUnstructuredGrid:
    points = vtkPoints()
    coords = np.column_stack([mesh.nodes, np.zeros(mesh.n_nodes)])
    points.SetData(numpy_to_vtk(np.ascontiguousarray(coords), deep=True))

    connectivity = np.column_stack([np.full(len(mesh.triangles), 3), mesh.triangles]).ravel()
    cells = vtkCellArray()
    cells.SetCells(len(mesh.triangles), numpy_to_vtkIdTypeArray(connectivity.astype(np.int64), deep=True))

    grid = vtkUnstructuredGrid()
    grid.SetPoints(points)
    grid.SetCells(VTK_TRIANGLE, cells)

    for name, values in (point_data or {}).items():
        values = np.asarray(values, dtype=float)
        if values.shape != (mesh.n_nodes,):
            raise ShapeError(f"point data '{name}' has shape {values.shape}, mesh has {mesh.n_nodes} nodes")
        array = numpy_to_vtk(np.ascontiguousarray(values), deep=True)
        array.SetName(name)
        grid.GetPointData().AddArray(array)
    return grid


def write_vtu(mesh: TriMesh, path: Path, point_data: dict[str, np.ndarray] | None = None) -> Path:
    """Write the mesh (and nodal fields such as an eigenfunction) as a ``.vtu`` file.

    Args:
        mesh: Mesh to export.
        path: Output file.
        point_data: Optional mapping of field name to nodal values.

    Returns:
        The written path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    writer = vtkXMLUnstructuredGridWriter()
    writer.SetFileName(str(path))
    writer.SetInputData(_to_grid(mesh, point_data))
    writer.Write()
    return path
