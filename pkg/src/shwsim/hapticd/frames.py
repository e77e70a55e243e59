"""Haptic frames and the replay log.

The binary log is a sequence of length-prefixed (u32) state packets; its
digest is the SHA-256 of the raw bytes. step_compute_time is diagnostic and
deliberately not part of the wire packet, so digests are identical across
runs. The structured-text export is JSON lines carrying exactly the packet
fields (floats via repr, lossless for f64).
"""

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from . import protocol
from .protocol import StatePacket, WireContact

_LEN = struct.Struct("<I")


@dataclass
class HapticFrame:
    """One control-loop tick."""

    tick: int
    sim_time: float
    pose: object                 # GripPose after motion clamping
    velocity: np.ndarray         # 6-vector, m/s and rad/s
    contacts: list
    wrench: np.ndarray
    tensions: np.ndarray
    solver_status: int
    trigger: bool
    bead_delta: list             # samples appended this tick
    junction_gap: float
    step_compute_time: float = 0.0
    wrench_scale: float = 1.0    # < 1 when the wrench was scaled to capability

    def to_state_packet(self):
        contacts = [
            WireContact(
                point=tuple(np.asarray(c.point, dtype=np.float32)),
                normal=tuple(np.asarray(c.normal, dtype=np.float32)),
                depth=np.float32(c.depth),
            )
            for c in self.contacts[:protocol.MAX_CONTACTS]
        ]
        return StatePacket(
            tick=self.tick,
            sim_time=self.sim_time,
            position=self.pose.position,
            quaternion=self.pose.orientation,
            wrench=self.wrench,
            tensions=self.tensions,
            solver_status=self.solver_status,
            trigger=self.trigger,
            contacts=contacts,
            bead_samples=np.asarray(self.bead_delta, dtype=np.float32).reshape(-1, 3),
        )


class FrameLog:
    """Accumulates encoded frames; writable to disk and exportable as JSONL."""

    def __init__(self):
        self._chunks = []

    def append(self, frame_or_packet):
        pkt = (frame_or_packet.to_state_packet()
               if isinstance(frame_or_packet, HapticFrame) else frame_or_packet)
        data = protocol.encode_state(pkt)
        self._chunks.append(_LEN.pack(len(data)) + data)

    def __len__(self):
        return len(self._chunks)

    def to_bytes(self):
        return b"".join(self._chunks)

    def digest(self):
        """256-bit hex digest of the binary log."""
        return hashlib.sha256(self.to_bytes()).hexdigest()

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @staticmethod
    def load(path):
        log = FrameLog()
        with open(path, "rb") as fh:
            raw = fh.read()
        off = 0
        while off < len(raw):
            if off + 4 > len(raw):
                raise ValueError("truncated frame log")
            (n,) = _LEN.unpack_from(raw, off)
            off += 4
            if off + n > len(raw):
                raise ValueError("truncated frame log record")
            chunk = raw[off:off + n]
            protocol.parse_state(chunk)      # validate
            log._chunks.append(_LEN.pack(n) + chunk)
            off += n
        return log

    def packets(self):
        return [protocol.parse_state(c[4:]) for c in self._chunks]

    def export_jsonl(self, path):
        with open(path, "w") as fh:
            for pkt in self.packets():
                fh.write(json.dumps(_packet_to_lossless_dict(pkt)) + "\n")

    @staticmethod
    def import_jsonl(path):
        log = FrameLog()
        with open(path) as fh:
            for line in fh:
                if line.strip():
                    log.append(_packet_from_lossless_dict(json.loads(line)))
        return log


def _packet_to_lossless_dict(pkt):
    return {
        "tick": int(pkt.tick),
        "sim_time": float(pkt.sim_time),
        "position": [float(x) for x in pkt.position],
        "quaternion": [float(x) for x in pkt.quaternion],
        "wrench": [float(x) for x in pkt.wrench],
        "tensions": [float(x) for x in pkt.tensions],
        "solver_status": int(pkt.solver_status),
        "trigger": bool(pkt.trigger),
        "contacts": [
            {"point": [float(v) for v in c.point],
             "normal": [float(v) for v in c.normal],
             "depth": float(c.depth)} for c in pkt.contacts
        ],
        "bead_delta": [[float(v) for v in s] for s in pkt.bead_samples],
    }


def _packet_from_lossless_dict(doc):
    return StatePacket(
        tick=doc["tick"],
        sim_time=doc["sim_time"],
        position=np.array(doc["position"]),
        quaternion=np.array(doc["quaternion"]),
        wrench=np.array(doc["wrench"]),
        tensions=np.array(doc["tensions"]),
        solver_status=doc["solver_status"],
        trigger=doc["trigger"],
        contacts=[WireContact(point=tuple(np.float32(v) for v in c["point"]),
                              normal=tuple(np.float32(v) for v in c["normal"]),
                              depth=np.float32(c["depth"]))
                  for c in doc["contacts"]],
        bead_samples=np.array(doc["bead_delta"], dtype=np.float32).reshape(-1, 3),
    )
