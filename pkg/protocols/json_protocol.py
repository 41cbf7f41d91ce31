"""
Module Name: json_protocol.py
Description: JSON lines format for per-iterate stationarity reports and other structured records.
             Each line is one JSON object {"version": ..., "opcode": ..., "data": {...}}.
Date: 2026-10-19
"""

import json
import math

from configs.config import REPORT_FORMAT_VERSION

PROTOCOL_VERSION = REPORT_FORMAT_VERSION


def _clean(value):
    # JSON has no NaN/inf; write them as null
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _clean(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(item) for item in value]
    return value


def wrap_record(opcode, data):
    """
    Wrap the opcode and data into one JSON line (no trailing newline).
    """
    return json.dumps({"version": PROTOCOL_VERSION, "opcode": opcode, "data": _clean(data)},
                      sort_keys=True)


def parse_record(line):
    """
    Parse one JSON line into version, opcode, and data.

    Returns:
        (version, opcode, data) if valid; otherwise (None, None, {}).
    """
    try:
        obj = json.loads(line)
        return obj["version"], obj["opcode"], obj.get("data", {})
    except (ValueError, KeyError, TypeError):
        return None, None, {}


def write_records(fh, opcode, records):
    for data in records:
        fh.write(wrap_record(opcode, data) + "\n")


def read_records(path, opcode=None):
    """Read the data payloads of a JSONL file, optionally keeping only one opcode."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            version, op, data = parse_record(line)
            if version is None:
                continue
            if opcode is None or op == opcode:
                out.append(data)
    return out
