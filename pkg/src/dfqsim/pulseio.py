"""File formats: pulse CSV, coupling-map CSV, fidelity tables and itinerary
JSON lines. All writes go through a temp-file + rename so readers never see
partial output."""

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .dynamics import ControlSegment, FidelityTable, PulseSequence
from .geometry import CouplingMaps
from .scheduler import ActuatorItinerary

PULSE_HEADER = ("index", "duration_us", "phase_deg", "amplitude_khz")


def atomic_write_text(path: Union[str, Path], text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def pulse_csv_text(sequence: PulseSequence) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PULSE_HEADER)
    for k, seg in enumerate(sequence.segments):
        writer.writerow(
            [
                k,
                format(seg.duration_us, ".17g"),
                format(np.degrees(seg.axis_phase), ".17g"),
                format(seg.amplitude_khz, ".17g"),
            ]
        )
    return buf.getvalue()


def write_pulse_csv(path: Union[str, Path], sequence: PulseSequence):
    atomic_write_text(path, pulse_csv_text(sequence))


def load_pulse_csv(path: Union[str, Path]) -> PulseSequence:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != PULSE_HEADER:
        raise ValueError(f"{path}: not a pulse CSV (bad header)")
    segments = []
    for row in rows[1:]:
        if not row:
            continue
        _, dur, phase_deg, amp = row
        segments.append(
            ControlSegment(
                duration_us=float(dur),
                axis_phase=float(np.radians(float(phase_deg))),
                amplitude_khz=float(amp),
            )
        )
    return PulseSequence(segments=tuple(segments))


def coupling_maps_csv_text(maps: CouplingMaps) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("quantity", "coupling_khz", "probability_mass"))
    for name, hist in (("A", maps.a_hist), ("B", maps.b_hist), ("B_prime", maps.b_prime_hist)):
        for center, mass in zip(hist.bin_centers, hist.mass):
            writer.writerow((name, format(center, ".6g"), format(mass, ".10g")))
    return buf.getvalue()


def profile_csv_text(rows: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("d_nm", "B1_khz", "B2_khz"))
    for d, b1, b2 in rows:
        writer.writerow((format(d, ".6g"), format(b1, ".10g"), format(b2, ".10g")))
    return buf.getvalue()


def fidelity_table_csv_text(table: FidelityTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("delta1", "jitter_khz", "fidelity"))
    for d1, jit, f in table.rows():
        writer.writerow((format(d1, ".10g"), format(jit, ".10g"), format(f, ".12g")))
    return buf.getvalue()


def itinerary_jsonl_text(itinerary: ActuatorItinerary) -> str:
    lines = []
    for i, step in enumerate(itinerary.steps):
        lines.append(
            json.dumps(
                {
                    "step": i,
                    "kind": step.kind,
                    "target": step.target,
                    "duration_us": step.duration_us,
                    "distance_nm": step.distance_nm,
                },
                sort_keys=True,
            )
        )
    return "\n".join(lines) + "\n"


def json_report_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
