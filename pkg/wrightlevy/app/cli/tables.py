"""
CSV tables and JSON envelopes written by the CLI

A table file starts with '#'-prefixed metadata lines, one `# key: <json>`
per entry, followed by a header row and the data. Floats are written with
settings.OUTPUT_DIGITS significant digits and read back bit for bit.
"""
import io
import json
import sys
from pathlib import Path
from typing import Any, Dict, Optional, TextIO, Tuple, Union

import numpy as np
import pandas as pd

from wrightlevy.app.core.config import settings

PathLike = Union[str, Path]


def _json_default(value: Any) -> Any:
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if hasattr(value, "value"):
        return value.value
    return str(value)


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, default=_json_default)


def format_table(df: pd.DataFrame, meta: Dict[str, Any]) -> str:
    buffer = io.StringIO()
    for key, value in meta.items():
        buffer.write(f"# {key}: {json.dumps(value, default=_json_default)}\n")
    df.to_csv(buffer, index=False, float_format=f"%.{settings.OUTPUT_DIGITS}g", lineterminator="\n")
    return buffer.getvalue()


def write_text(text: str, output: Optional[PathLike] = None, stream: Optional[TextIO] = None) -> None:
    if output:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    else:
        (stream or sys.stdout).write(text if text.endswith("\n") else text + "\n")


def read_table(source: Union[PathLike, TextIO]) -> Tuple[pd.DataFrame, Dict[str, Any]]:
    """Inverse of format_table: (data, metadata)"""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    meta: Dict[str, Any] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, raw = line[1:].strip().partition(":")
            raw = raw.strip()
            try:
                meta[key.strip()] = json.loads(raw)
            except json.JSONDecodeError:
                meta[key.strip()] = raw
        else:
            body.append(line)
    df = pd.read_csv(io.StringIO("\n".join(body)), float_precision="round_trip")
    return df, meta


def envelope(value: float, abs_err: float, method: str, terms: int = 1, **extra: Any) -> Dict[str, Any]:
    """JSON envelope of one computed value"""
    return {"value": value, "abs_err": abs_err, "method": method, "terms": terms, **extra}
