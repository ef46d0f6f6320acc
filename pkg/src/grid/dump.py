"""
Field 转储格式

文本头（key:value 行: dimension, n, L, tag, endianness），空行结束，
随后是小端 float64 行主序负载。往返必须逐位一致。
"""

from pathlib import Path
from typing import Union

import numpy as np

from src.grid.models import Field, Grid
from src.utils.exceptions import DataValidationError

HEADER_KEYS = ("dimension", "n", "L", "tag", "endianness")


def dumps_field(f: Field) -> bytes:
    tag = "" if f.tag is None else str(f.tag).replace("\n", " ")
    header = "\n".join([
        f"dimension:{f.grid.d}",
        f"n:{f.grid.n_per_axis}",
        f"L:{f.grid.extent!r}",
        f"tag:{tag}",
        "endianness:little",
    ])
    payload = np.ascontiguousarray(f.values, dtype="<f8").tobytes(order="C")
    return header.encode("utf-8") + b"\n\n" + payload


def loads_field(data: bytes) -> Field:
    try:
        head, payload = data.split(b"\n\n", 1)
    except ValueError:
        raise DataValidationError("Field转储缺少头部结束空行", field_name="header")
    entries = {}
    for line in head.decode("utf-8").splitlines():
        key, _, value = line.partition(":")
        entries[key.strip()] = value
    missing = [k for k in HEADER_KEYS if k not in entries]
    if missing:
        raise DataValidationError(f"Field转储头部缺少字段: {missing}", field_name="header")
    if entries["endianness"].strip() != "little":
        raise DataValidationError("只支持小端负载", field_name="endianness",
                                  expected_format="little")
    grid = Grid(d=int(entries["dimension"]), n_per_axis=int(entries["n"]),
                extent=float(entries["L"]))
    values = np.frombuffer(payload, dtype="<f8")
    if values.size != grid.size:
        raise DataValidationError(f"负载长度 {values.size} 与网格大小 {grid.size} 不符",
                                  field_name="payload")
    tag = entries["tag"] or None
    return Field(grid, values.reshape(grid.shape).astype(float), tag)


def write_field(f: Field, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps_field(f))
    return path


def read_field(path: Union[str, Path]) -> Field:
    return loads_field(Path(path).read_bytes())
