import numpy as np
import pytest

from shwsim.errors import ProtocolError
from shwsim.hapticd import protocol
from shwsim.hapticd.protocol import (
    CommandPacket,
    StatePacket,
    WireContact,
    encode_command,
    encode_state,
    parse_command,
    parse_packet,
    parse_state,
)


def make_state(rng, n_contacts=2, n_bead=3):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return StatePacket(
        tick=int(rng.integers(0, 2**40)),
        sim_time=float(rng.uniform(0, 100)),
        position=rng.uniform(-1, 1, 3),
        quaternion=q,
        wrench=rng.uniform(-10, 10, 6),
        tensions=rng.uniform(0.5, 30, 8),
        solver_status=int(rng.integers(0, 3)),
        trigger=bool(rng.integers(0, 2)),
        contacts=[WireContact(point=tuple(np.float32(v) for v in rng.uniform(-1, 1, 3)),
                              normal=tuple(np.float32(v) for v in (0, 0, 1)),
                              depth=np.float32(rng.uniform(0, 0.01)))
                  for _ in range(n_contacts)],
        bead_samples=rng.uniform(-1, 1, (n_bead, 3)).astype(np.float32),
    )


def test_command_size():
    cmd = CommandPacket(sequence=7, position=[0.1, 0.2, 0.3],
                        quaternion=[1, 0, 0, 0], trigger=True)
    data = encode_command(cmd)
    assert len(data) == protocol.COMMAND_SIZE == 66
    assert data[:4] == b"SHW1"


def test_command_round_trip_bytes():
    rng = np.random.default_rng(101)
    for _ in range(50):
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        cmd = CommandPacket(sequence=int(rng.integers(0, 2**32)),
                            position=rng.uniform(-2, 2, 3),
                            quaternion=q,
                            trigger=bool(rng.integers(0, 2)))
        data = encode_command(cmd)
        back = parse_command(data)
        assert encode_command(back) == data
        assert np.array_equal(back.position, cmd.position)
        assert np.array_equal(back.quaternion, cmd.quaternion)
        assert back.sequence == cmd.sequence and back.trigger == cmd.trigger


def test_state_round_trip_bytes():
    rng = np.random.default_rng(103)
    for k in range(50):
        st = make_state(rng, n_contacts=k % 5, n_bead=k % 7)
        data = encode_state(st)
        back = parse_state(data)
        assert encode_state(back) == data
        assert back.tick == st.tick
        assert np.array_equal(back.tensions, st.tensions)
        assert len(back.contacts) == len(st.contacts)
        assert np.array_equal(back.bead_samples, st.bead_samples)


def test_parse_packet_dispatch():
    rng = np.random.default_rng(107)
    st = make_state(rng)
    assert isinstance(parse_packet(encode_state(st)), StatePacket)
    cmd = CommandPacket(sequence=1, position=[0, 0, 0],
                        quaternion=[1, 0, 0, 0], trigger=False)
    assert isinstance(parse_packet(encode_command(cmd)), CommandPacket)


def test_rejects_malformed():
    cmd = CommandPacket(sequence=1, position=[0, 0, 0],
                        quaternion=[1, 0, 0, 0], trigger=False)
    good = encode_command(cmd)
    with pytest.raises(ProtocolError):
        parse_packet(b"")
    with pytest.raises(ProtocolError):
        parse_packet(b"XXXX" + good[4:])
    with pytest.raises(ProtocolError):
        parse_packet(good[:-1])
    with pytest.raises(ProtocolError):
        parse_packet(good + b"\0")
    bad_type = bytearray(good)
    bad_type[4] = 9
    with pytest.raises(ProtocolError):
        parse_packet(bytes(bad_type))
    # non-unit quaternion
    bad_q = encode_command(cmd)
    bad_q = bad_q[:17] + b"\0" * 32 + bad_q[49:]
    with pytest.raises(ProtocolError):
        parse_command(bad_q)


def test_fuzzed_parsing_never_crashes():
    rng = np.random.default_rng(109)
    rejected = 0
    for _ in range(3000):
        n = int(rng.integers(0, 300))
        data = rng.integers(0, 256, n, dtype=np.uint8).tobytes()
        if rng.random() < 0.3:
            data = b"SHW1" + data[4:]
        try:
            parse_packet(data)
        except ProtocolError:
            rejected += 1
    assert rejected > 2500


def test_truncated_state_contacts():
    rng = np.random.default_rng(113)
    st = make_state(rng, n_contacts=3, n_bead=2)
    data = encode_state(st)
    for cut in (10, 60, len(data) - 5, len(data) - 1):
        with pytest.raises(ProtocolError):
            parse_state(data[:cut])
