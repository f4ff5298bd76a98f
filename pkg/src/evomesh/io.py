"""Mesh file I/O: OFF, OBJ (v/f records), and ASCII/binary PLY.

Writers serialize coordinates with 17 significant digits so save -> load
round-trips reproduce every double bit-exactly.
"""

from __future__ import annotations

import io as _io
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MeshFormatError
from .mesh import SurfaceMesh

FORMATS = ("off", "obj", "ply")


@dataclass
class LoadReport:
    fan_triangulated_faces: int = 0
    source_format: str = ""


def _fan(poly, faces, report):
    if len(poly) < 3:
        raise MeshFormatError(f"face with {len(poly)} vertices")
    if len(poly) == 3:
        faces.append(poly)
        return
    report.fan_triangulated_faces += 1
    for i in range(1, len(poly) - 1):
        faces.append([poly[0], poly[i], poly[i + 1]])


def guess_format(name_or_data) -> str:
    if isinstance(name_or_data, (str, Path)):
        ext = str(name_or_data).rsplit(".", 1)[-1].lower()
        if ext in FORMATS:
            return ext
        raise MeshFormatError(f"cannot infer mesh format from '{name_or_data}'")
    head = bytes(name_or_data[:16])
    if head.startswith(b"ply"):
        return "ply"
    if head.lstrip().upper().startswith(b"OFF") or head.lstrip().upper().startswith(b"COFF"):
        return "off"
    return "obj"


def load_mesh(source, format=None) -> SurfaceMesh:
    """Load a triangle mesh; non-triangle faces are fan-triangulated."""
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
        if format is None:
            try:
                format = guess_format(source)
            except MeshFormatError:
                format = guess_format(data)
    elif hasattr(source, "read"):
        data = source.read()
        if isinstance(data, str):
            data = data.encode()
    else:
        data = bytes(source)
    if format is None:
        format = guess_format(data)
    format = format.lower()
    report = LoadReport(source_format=format)
    if format == "off":
        v, f = _parse_off(data, report)
    elif format == "obj":
        v, f = _parse_obj(data, report)
    elif format == "ply":
        v, f = _parse_ply(data, report)
    else:
        raise MeshFormatError(f"unsupported format '{format}'")
    mesh = SurfaceMesh(v, f)
    mesh.load_report = report
    return mesh


def save_mesh(mesh, target=None, format=None) -> bytes:
    """Serialize a mesh; writes to `target` when given, always returns bytes."""
    if format is None and isinstance(target, (str, Path)):
        format = guess_format(target)
    if format is None:
        format = "off"
    format = format.lower()
    mesh.compact()
    if format == "off":
        data = _write_off(mesh)
    elif format == "obj":
        data = _write_obj(mesh)
    elif format == "ply":
        data = _write_ply(mesh, binary=False)
    elif format in ("ply-binary", "plyb"):
        data = _write_ply(mesh, binary=True)
    else:
        raise MeshFormatError(f"unsupported format '{format}'")
    if target is not None:
        if isinstance(target, (str, Path)):
            Path(target).write_bytes(data)
        else:
            target.write(data)
    return data


# ---------------------------------------------------------------------------
# OFF


def _tokens(data: bytes):
    for raw in data.decode("utf-8", errors="replace").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield from line.split()


def _parse_off(data, report):
    toks = list(_tokens(data))
    if not toks:
        raise MeshFormatError("empty OFF file")
    pos = 0
    if toks[0].upper() in ("OFF", "COFF", "NOFF"):
        pos = 1
    try:
        nv, nf, _ne = int(toks[pos]), int(toks[pos + 1]), int(toks[pos + 2])
        pos += 3
        verts = np.array(toks[pos:pos + 3 * nv], dtype=np.float64).reshape(nv, 3)
        pos += 3 * nv
        faces = []
        for _ in range(nf):
            k = int(toks[pos])
            pos += 1
            poly = [int(t) for t in toks[pos:pos + k]]
            if len(poly) != k:
                raise MeshFormatError("truncated OFF face record")
            pos += k
            _fan(poly, faces, report)
    except (ValueError, IndexError) as exc:
        raise MeshFormatError(f"malformed OFF file: {exc}") from None
    return verts, np.array(faces, dtype=np.int64).reshape(-1, 3)


def _write_off(mesh) -> bytes:
    out = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} {mesh.n_edges}"]
    for p in mesh.positions:
        out.append(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}")
    for f in mesh.faces:
        out.append(f"3 {f[0]} {f[1]} {f[2]}")
    return ("\n".join(out) + "\n").encode()


# ---------------------------------------------------------------------------
# OBJ


def _parse_obj(data, report):
    verts = []
    faces = []
    try:
        for raw in data.decode("utf-8", errors="replace").splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                poly = []
                for tok in parts[1:]:
                    idx = int(tok.split("/", 1)[0])
                    poly.append(idx - 1 if idx > 0 else len(verts) + idx)
                _fan(poly, faces, report)
    except (ValueError, IndexError) as exc:
        raise MeshFormatError(f"malformed OBJ file: {exc}") from None
    return (np.array(verts, dtype=np.float64).reshape(-1, 3),
            np.array(faces, dtype=np.int64).reshape(-1, 3))


def _write_obj(mesh) -> bytes:
    out = []
    for p in mesh.positions:
        out.append(f"v {p[0]:.17g} {p[1]:.17g} {p[2]:.17g}")
    for f in mesh.faces:
        out.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}")
    return ("\n".join(out) + "\n").encode()


# ---------------------------------------------------------------------------
# PLY

_PLY_SIZES = {
    "char": "b", "int8": "b", "uchar": "B", "uint8": "B",
    "short": "h", "int16": "h", "ushort": "H", "uint16": "H",
    "int": "i", "int32": "i", "uint": "I", "uint32": "I",
    "float": "f", "float32": "f", "double": "d", "float64": "d",
}


def _parse_ply(data, report):
    end = data.find(b"end_header")
    if end < 0:
        raise MeshFormatError("PLY header has no end_header")
    body_start = data.find(b"\n", end) + 1
    header = data[:body_start].decode("ascii", errors="replace")
    fmt = None
    elements = []  # (name, count, [(type, name) | ('list', count_t, item_t, name)])
    for line in header.splitlines():
        parts = line.strip().split()
        if not parts:
            continue
        if parts[0] == "format":
            fmt = parts[1]
        elif parts[0] == "element":
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise MeshFormatError("PLY property before element")
            if parts[1] == "list":
                elements[-1][2].append(("list", parts[2], parts[3], parts[4]))
            else:
                elements[-1][2].append((parts[1], parts[2]))
    if fmt not in ("ascii", "binary_little_endian", "binary_big_endian"):
        raise MeshFormatError(f"unsupported PLY format '{fmt}'")

    verts = None
    faces = []
    if fmt == "ascii":
        toks = list(_tokens(data[body_start:]))
        pos = 0
        for name, count, props in elements:
            if name == "vertex":
                fields = [p[-1] for p in props]
                width = len(props)
                try:
                    ix, iy, iz = fields.index("x"), fields.index("y"), fields.index("z")
                except ValueError:
                    raise MeshFormatError("PLY vertex element lacks x/y/z") from None
                arr = np.array(toks[pos:pos + width * count], dtype=np.float64)
                if arr.size != width * count:
                    raise MeshFormatError("truncated PLY vertex data")
                arr = arr.reshape(count, width)
                verts = arr[:, [ix, iy, iz]]
                pos += width * count
            elif name == "face":
                for _ in range(count):
                    k = int(float(toks[pos]))
                    pos += 1
                    poly = [int(float(t)) for t in toks[pos:pos + k]]
                    pos += k
                    _fan(poly, faces, report)
            else:
                width = len(props)
                pos += width * count  # only fixed-width extras are skippable
    else:
        bo = "<" if fmt == "binary_little_endian" else ">"
        off = body_start
        for name, count, props in elements:
            if name == "vertex" and all(p[0] != "list" for p in props):
                codes = [_PLY_SIZES[p[0]] for p in props]
                fields = [p[1] for p in props]
                rec = struct.Struct(bo + "".join(codes))
                try:
                    ix, iy, iz = fields.index("x"), fields.index("y"), fields.index("z")
                except ValueError:
                    raise MeshFormatError("PLY vertex element lacks x/y/z") from None
                verts = np.empty((count, 3))
                for i in range(count):
                    vals = rec.unpack_from(data, off)
                    off += rec.size
                    verts[i] = (vals[ix], vals[iy], vals[iz])
            elif name == "face":
                (tag, count_t, item_t, _pname) = props[0]
                if tag != "list":
                    raise MeshFormatError("PLY face element must be a list property")
                cs = struct.Struct(bo + _PLY_SIZES[count_t])
                for _ in range(count):
                    k = cs.unpack_from(data, off)[0]
                    off += cs.size
                    it = struct.Struct(bo + _PLY_SIZES[item_t] * k)
                    poly = list(it.unpack_from(data, off))
                    off += it.size
                    _fan(poly, faces, report)
            else:
                if any(p[0] == "list" for p in props):
                    raise MeshFormatError(f"cannot skip PLY list element '{name}'")
                width = struct.calcsize(bo + "".join(_PLY_SIZES[p[0]] for p in props))
                off += width * count
    if verts is None:
        raise MeshFormatError("PLY file has no vertex element")
    return verts, np.array(faces, dtype=np.int64).reshape(-1, 3)


def _write_ply(mesh, binary=False) -> bytes:
    nv, nf = mesh.n_vertices, mesh.n_faces
    fmt = "binary_little_endian" if binary else "ascii"
    header = (
        "ply\n"
        f"format {fmt} 1.0\n"
        f"element vertex {nv}\n"
        "property double x\nproperty double y\nproperty double z\n"
        f"element face {nf}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    ).encode()
    if not binary:
        body = []
        for p in mesh.positions:
            body.append(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}")
        for f in mesh.faces:
            body.append(f"3 {f[0]} {f[1]} {f[2]}")
        return header + ("\n".join(body) + "\n").encode()
    buf = _io.BytesIO()
    buf.write(header)
    for p in mesh.positions:
        buf.write(struct.pack("<3d", *p))
    for f in mesh.faces:
        buf.write(struct.pack("<B3i", 3, *[int(x) for x in f]))
    return buf.getvalue()
