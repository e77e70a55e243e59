"""Bit-exact little-endian datagram protocol.

Command packet (66 bytes):
    magic "SHW1" | type u8 = 1 | sequence u32 | position 3xf64 |
    quaternion 4xf64 (w, x, y, z) | trigger u8

State packet (variable):
    magic | type u8 = 2 | tick u64 | sim_time f64 | pose 7xf64 (position,
    quaternion w x y z) | wrench 6xf64 | tensions 8xf64 | solver status u8 |
    trigger u8 | contact count u8 | contacts (point 3xf32, normal 3xf32,
    depth f32) | bead-delta count u16 | samples 3xf32 each
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import ProtocolError

MAGIC = b"SHW1"
TYPE_COMMAND = 1
TYPE_STATE = 2

STATUS_OPTIMAL = 0
STATUS_SCALED = 1          # commanded wrench infeasible, scaled to the boundary
STATUS_INFEASIBLE = 2      # not even pretension exists; tensions are zeros

_COMMAND = struct.Struct("<4sBI3d4dB")
_STATE_HEAD = struct.Struct("<4sBQd7d6d8dBBB")
_CONTACT = struct.Struct("<3f3ff")
_BEAD_COUNT = struct.Struct("<H")
_BEAD_SAMPLE = struct.Struct("<3f")

COMMAND_SIZE = _COMMAND.size           # 66
MAX_CONTACTS = 255
MAX_BEAD_SAMPLES = 65535


@dataclass
class CommandPacket:
    sequence: int
    position: np.ndarray
    quaternion: np.ndarray      # (w, x, y, z)
    trigger: bool

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64).reshape(3)
        self.quaternion = np.asarray(self.quaternion, dtype=np.float64).reshape(4)


@dataclass
class WireContact:
    point: tuple
    normal: tuple
    depth: float


@dataclass
class StatePacket:
    tick: int
    sim_time: float
    position: np.ndarray
    quaternion: np.ndarray
    wrench: np.ndarray
    tensions: np.ndarray
    solver_status: int
    trigger: bool
    contacts: list = field(default_factory=list)
    bead_samples: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), np.float32))

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64).reshape(3)
        self.quaternion = np.asarray(self.quaternion, dtype=np.float64).reshape(4)
        self.wrench = np.asarray(self.wrench, dtype=np.float64).reshape(6)
        self.tensions = np.asarray(self.tensions, dtype=np.float64).reshape(8)
        self.bead_samples = np.asarray(self.bead_samples, dtype=np.float32).reshape(-1, 3)


def encode_command(cmd):
    return _COMMAND.pack(
        MAGIC, TYPE_COMMAND, cmd.sequence & 0xFFFFFFFF,
        *cmd.position, *cmd.quaternion, 1 if cmd.trigger else 0)


def parse_command(data):
    if len(data) != COMMAND_SIZE:
        raise ProtocolError(f"command packet must be {COMMAND_SIZE} bytes, "
                            f"got {len(data)}")
    magic, ptype, seq, px, py, pz, qw, qx, qy, qz, trig = _COMMAND.unpack(data)
    if magic != MAGIC:
        raise ProtocolError("bad magic")
    if ptype != TYPE_COMMAND:
        raise ProtocolError(f"expected command type, got {ptype}")
    vals = (px, py, pz, qw, qx, qy, qz)
    if not all(np.isfinite(v) for v in vals):
        raise ProtocolError("non-finite command fields")
    if abs(qw * qw + qx * qx + qy * qy + qz * qz - 1.0) > 1e-6:
        raise ProtocolError("command quaternion not unit")
    if trig not in (0, 1):
        raise ProtocolError("trigger must be 0 or 1")
    return CommandPacket(sequence=seq, position=np.array([px, py, pz]),
                         quaternion=np.array([qw, qx, qy, qz]), trigger=bool(trig))


def encode_state(st):
    if len(st.contacts) > MAX_CONTACTS:
        raise ProtocolError("too many contacts for one packet")
    if len(st.bead_samples) > MAX_BEAD_SAMPLES:
        raise ProtocolError("too many bead samples for one packet")
    head = _STATE_HEAD.pack(
        MAGIC, TYPE_STATE, st.tick, st.sim_time,
        *st.position, *st.quaternion, *st.wrench, *st.tensions,
        st.solver_status, 1 if st.trigger else 0, len(st.contacts))
    parts = [head]
    for c in st.contacts:
        parts.append(_CONTACT.pack(*c.point, *c.normal, c.depth))
    parts.append(_BEAD_COUNT.pack(len(st.bead_samples)))
    for s in st.bead_samples:
        parts.append(_BEAD_SAMPLE.pack(float(s[0]), float(s[1]), float(s[2])))
    return b"".join(parts)


def parse_state(data):
    if len(data) < _STATE_HEAD.size:
        raise ProtocolError("state packet too short")
    fields = _STATE_HEAD.unpack_from(data, 0)
    magic, ptype = fields[0], fields[1]
    if magic != MAGIC:
        raise ProtocolError("bad magic")
    if ptype != TYPE_STATE:
        raise ProtocolError(f"expected state type, got {ptype}")
    tick, sim_time = fields[2], fields[3]
    pose = fields[4:11]
    wrench = fields[11:17]
    tensions = fields[17:25]
    status, trigger, n_contacts = fields[25], fields[26], fields[27]
    if status not in (STATUS_OPTIMAL, STATUS_SCALED, STATUS_INFEASIBLE):
        raise ProtocolError(f"unknown solver status {status}")
    if trigger not in (0, 1):
        raise ProtocolError("trigger must be 0 or 1")
    off = _STATE_HEAD.size
    need = n_contacts * _CONTACT.size + _BEAD_COUNT.size
    if len(data) < off + need:
        raise ProtocolError("state packet truncated in contacts")
    contacts = []
    for _ in range(n_contacts):
        vals = _CONTACT.unpack_from(data, off)
        contacts.append(WireContact(point=vals[0:3], normal=vals[3:6], depth=vals[6]))
        off += _CONTACT.size
    (n_bead,) = _BEAD_COUNT.unpack_from(data, off)
    off += _BEAD_COUNT.size
    if len(data) != off + n_bead * _BEAD_SAMPLE.size:
        raise ProtocolError("state packet length mismatch in bead samples")
    samples = np.zeros((n_bead, 3), dtype=np.float32)
    for i in range(n_bead):
        samples[i] = _BEAD_SAMPLE.unpack_from(data, off)
        off += _BEAD_SAMPLE.size
    return StatePacket(
        tick=tick, sim_time=sim_time,
        position=np.array(pose[:3]), quaternion=np.array(pose[3:]),
        wrench=np.array(wrench), tensions=np.array(tensions),
        solver_status=status, trigger=bool(trigger),
        contacts=contacts, bead_samples=samples)


def parse_packet(data):
    """Dispatch on the type byte; raises ProtocolError for anything invalid."""
    if len(data) < 5:
        raise ProtocolError("packet too short")
    if data[:4] != MAGIC:
        raise ProtocolError("bad magic")
    ptype = data[4]
    if ptype == TYPE_COMMAND:
        return parse_command(data)
    if ptype == TYPE_STATE:
        return parse_state(data)
    raise ProtocolError(f"unknown packet type {ptype}")


def state_to_json_dict(st):
    """Same fields as the binary state packet, for the browser bridge."""
    return {
        "type": "frame",
        "tick": int(st.tick),
        "sim_time": float(st.sim_time),
        "position": [float(x) for x in st.position],
        "quaternion": [float(x) for x in st.quaternion],
        "wrench": [float(x) for x in st.wrench],
        "tensions": [float(x) for x in st.tensions],
        "solver_status": int(st.solver_status),
        "trigger": bool(st.trigger),
        "contacts": [
            {"point": [float(x) for x in c.point],
             "normal": [float(x) for x in c.normal],
             "depth": float(c.depth)} for c in st.contacts
        ],
        "bead_delta": [[float(x) for x in s] for s in st.bead_samples],
    }


def command_from_json_dict(doc):
    try:
        return CommandPacket(
            sequence=int(doc["seq"]),
            position=np.array([float(x) for x in doc["position"]]),
            quaternion=np.array([float(x) for x in doc["quaternion"]]),
            trigger=bool(doc["trigger"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ProtocolError(f"bad command message: {e}") from e
