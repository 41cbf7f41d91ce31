"""
Module Name: custom_protocol.py
Description: Binary wire framing for compressed payloads. Every SparseMessage is framed little-endian as
             [dim: u32][count: u32][count x (index: u32, value: f64)]. An uplink record (one client's
             upload in one round) is [round: u32][client: u32][pieces: u32] followed by the FCC pieces and
             the correction message c, each framed as above. Used for byte accounting cross-checks and
             the optional uplink dumps.
Date: 2026-10-19
"""

import struct

import numpy as np

from configs.errors import DimensionError
from compress.compressors import SparseMessage
from compress.fcc import FccPacket

MESSAGE_HEADER = struct.Struct("<II")
UPLINK_HEADER = struct.Struct("<III")
ENTRY_DTYPE = np.dtype([("index", "<u4"), ("value", "<f8")])


def wrap_message(msg):
    """
    Frame a SparseMessage into bytes.
    """
    entries = np.empty(len(msg), dtype=ENTRY_DTYPE)
    entries["index"] = msg.indices
    entries["value"] = msg.values
    return MESSAGE_HEADER.pack(msg.dim, len(msg)) + entries.tobytes()


def parse_message(data, offset=0):
    """
    Parse one framed SparseMessage starting at offset.

    Returns:
        (message, offset just past the message)
    """
    if len(data) - offset < MESSAGE_HEADER.size:
        raise DimensionError("truncated message header")
    dim, count = MESSAGE_HEADER.unpack_from(data, offset)
    offset += MESSAGE_HEADER.size
    end = offset + count * ENTRY_DTYPE.itemsize
    if end > len(data):
        raise DimensionError("truncated message body")
    entries = np.frombuffer(data, dtype=ENTRY_DTYPE, count=count, offset=offset)
    msg = SparseMessage(dim, entries["index"].astype(np.int64), entries["value"].astype(np.float64))
    return msg, end


def wrap_uplink(t, client, packet, c):
    """
    Frame one client's upload for round t: its FCC pieces followed by c.
    """
    parts = [UPLINK_HEADER.pack(t, client, len(packet.pieces))]
    parts.extend(wrap_message(piece) for piece in packet.pieces)
    parts.append(wrap_message(c))
    return b"".join(parts)


def parse_uplinks(data):
    """
    Parse a concatenation of uplink records.

    Returns:
        list of (t, client, FccPacket, c)
    """
    records = []
    offset = 0
    while offset < len(data):
        if len(data) - offset < UPLINK_HEADER.size:
            raise DimensionError("truncated uplink header")
        t, client, num_pieces = UPLINK_HEADER.unpack_from(data, offset)
        offset += UPLINK_HEADER.size
        pieces = []
        for _ in range(num_pieces):
            piece, offset = parse_message(data, offset)
            pieces.append(piece)
        c, offset = parse_message(data, offset)
        records.append((t, client, FccPacket(tuple(pieces)), c))
    return records
