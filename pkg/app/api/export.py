import csv
import io
import json
import logging
from typing import Any, Iterable, Optional, TextIO

from app.schemas.flow import FlowState
from app.schemas.metric import BundleMetricCoeffs, MetricCoeffs

logger = logging.getLogger(__name__)

CSV_HEADER = ["t", "r2", "s2", "k2", "u_re", "u_im", "tr2", "ts2", "tk2"]


def _fmt(value: float) -> str:
    return format(value, ".17g")


def _parse(cell: str) -> Optional[float]:
    return float(cell) if cell != "" else None


def trajectory_rows(states: Iterable[FlowState]) -> list[list[str]]:
    """CSV rows of a trajectory; bundle cells are empty for flat-bundle states."""
    rows = []
    for s in states:
        m = s.omega
        row = [_fmt(s.t), _fmt(m.r2), _fmt(m.s2), _fmt(m.k2), _fmt(m.u.real), _fmt(m.u.imag)]
        row += [_fmt(s.H.tr2), _fmt(s.H.ts2), _fmt(s.H.tk2)] if s.H is not None else ["", "", ""]
        rows.append(row)
    return rows


def write_trajectory_csv(states: Iterable[FlowState], stream: TextIO) -> None:
    """
    Write a trajectory as CSV with 17 significant digits per float.

    Args:
        states: Flow states in time order
        stream: Open text stream
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(trajectory_rows(states))


def trajectory_csv(states: Iterable[FlowState]) -> str:
    buffer = io.StringIO()
    write_trajectory_csv(states, buffer)
    return buffer.getvalue()


def read_trajectory_csv(stream: TextIO) -> list[FlowState]:
    """
    Parse a file written by write_trajectory_csv.

    Raises:
        ValueError: If the header does not match
    """
    reader = csv.reader(stream)
    header = next(reader, None)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected trajectory header {header}")
    states = []
    for row in reader:
        t, r2, s2, k2, u_re, u_im, tr2, ts2, tk2 = (_parse(c) for c in row)
        H = BundleMetricCoeffs(tr2=tr2, ts2=ts2, tk2=tk2) if tr2 is not None else None
        states.append(FlowState(t=t, omega=MetricCoeffs(r2=r2, s2=s2, k2=k2, u=complex(u_re, u_im)), H=H))
    return states


def to_json(payload: dict[str, Any]) -> str:
    """JSON text of a payload whose values may be pydantic models."""
    def default(obj: Any) -> Any:
        if hasattr(obj, "model_dump"):
            return obj.model_dump(mode="json", by_alias=True)
        if isinstance(obj, complex):
            return [obj.real, obj.imag]
        raise TypeError(f"cannot serialize {type(obj).__name__}")

    return json.dumps(payload, default=default, indent=2, ensure_ascii=False)


def trajectory_json(states: Iterable[FlowState], metadata: dict[str, Any]) -> str:
    """Trajectory with a metadata block (params, constants, classification)."""
    return to_json({"metadata": metadata, "states": list(states)})


def write_output(text: str, out: Optional[str]) -> None:
    """Write to a file, or to stdout when no path is given."""
    if out is None:
        print(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.info(f"Wrote {out}")
