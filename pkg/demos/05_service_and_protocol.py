"""The live service: a loopback client steers the grip over UDP with the
binary protocol while frames stream back, exactly as the browser viewer does
over the websocket bridge.

Run:  python3 demos/05_service_and_protocol.py
"""

import socket
import time

import numpy as np

from shwsim.hapticd.protocol import (
    CommandPacket,
    encode_command,
    parse_packet,
)
from shwsim.hapticd.service import HapticService, ServiceConfig
from shwsim.mesh import make_plate
from shwsim.rig import GripPose, default_rig
from shwsim.scene import SceneModel, SeamPath, default_putty_gun

scene = SceneModel(
    mesh=make_plate(size=(0.8, 0.8), divisions=2),
    seam=SeamPath(points=np.array([[-0.1, 0.0, 0.0], [0.1, 0.0, 0.0]])),
    prop=default_putty_gun(),
)
config = ServiceConfig(rig=default_rig(), scene=scene, udp_port=0, ws_port=0,
                       start_pose=GripPose(np.array([0.0, 0.0, 0.25])))
service = HapticService(config).start()
print(f"service up: udp={service.udp_port} ws={service.ws_port} "
      f"(loop at 1 kHz, frames every 16 ms)")

sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
sock.bind(("127.0.0.1", 0))
sock.settimeout(2.0)

# Steer the grip through a little arc; hold the trigger near the surface.
seq = 0
for k in range(40):
    t = k / 40.0
    pos = np.array([-0.08 + 0.16 * t, 0.0, 0.25 - 0.085 * np.sin(np.pi * t)])
    seq += 1
    cmd = CommandPacket(sequence=seq, position=pos,
                        quaternion=[1, 0, 0, 0], trigger=t > 0.3)
    sock.sendto(encode_command(cmd), ("127.0.0.1", service.udp_port))
    time.sleep(0.03)

# Drain a few frames and show what came back.
frames = []
try:
    while len(frames) < 10:
        data, _ = sock.recvfrom(65536)
        pkt = parse_packet(data)
        frames.append(pkt)
except socket.timeout:
    pass

print(f"\nreceived {len(frames)} state packets; last one:")
last = frames[-1]
print(f"  tick {last.tick}, sim time {last.sim_time:.3f} s")
print(f"  pose {np.round(last.position, 4)}")
print(f"  tensions {np.round(last.tensions, 2)} N "
      f"(status {last.solver_status}, trigger {last.trigger})")
print(f"  contacts: {len(last.contacts)}, bead samples this frame: "
      f"{len(last.bead_samples)}")
print(f"  malformed packets counted by the service: {service.malformed_packets}")

sock.close()
service.stop()
print("\nservice stopped")
