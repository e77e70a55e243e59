"""Long-running frame-stream service.

One real-time thread owns the simulation and mutates it; UDP and websocket
ingress deposit the newest command into a single-slot mailbox; egress fans
downsampled frames out to UDP subscribers (anyone who sent a valid command
recently) and websocket clients through bounded per-connection queues that
drop when full. Malformed packets are counted and dropped, never fatal.
"""

import json
import socket
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from ..errors import BindError, ProtocolError
from ..rig import GripPose
from . import protocol
from .loop import HapticLoop, LoopParams, MailboxPoseSource

SUBSCRIBER_TIMEOUT = 10.0      # s without traffic before a UDP peer is dropped
WS_QUEUE_DEPTH = 4


@dataclass
class ServiceConfig:
    rig: object
    scene: object
    dt: Fraction = Fraction(1, 1000)
    udp_port: int = 47500
    ws_port: int = 47501
    http_port: int = 0            # 0 disables the static server
    http_root: str = ""
    host: str = "127.0.0.1"
    publish_interval: float = 0.016
    start_pose: GripPose = field(default_factory=GripPose.identity)


class _WsClient:
    def __init__(self, conn):
        self.conn = conn
        self.queue = deque(maxlen=WS_QUEUE_DEPTH)   # drops oldest when full
        self.event = threading.Event()
        self.alive = True


class HapticService:
    """Runs the loop plus network endpoints; start()/stop() for embedding."""

    def __init__(self, config):
        self.config = config
        self.loop = HapticLoop(config.rig, config.scene,
                               LoopParams(dt=config.dt, start_pose=config.start_pose))
        self.mailbox = MailboxPoseSource(config.start_pose, trigger=False)
        self.malformed_packets = 0
        self.published_frames = 0
        self.ticks = 0
        self.last_command_time = None
        self._subscribers = {}        # addr -> last seen monotonic
        self._ws_clients = []
        self._ws_lock = threading.Lock()
        self._stop = threading.Event()
        self._threads = []
        self._udp_sock = None
        self._ws_server = None
        self._http_server = None
        self._latest_frame = None
        self._seq_seen = -1
        self._pending_bead = []

    # ---- lifecycle ----

    def start(self):
        cfg = self.config
        try:
            self._udp_sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            self._udp_sock.bind((cfg.host, cfg.udp_port))
            self._udp_sock.settimeout(0.1)
        except OSError as e:
            raise BindError(f"UDP bind {cfg.host}:{cfg.udp_port}: {e}") from e
        self.udp_port = self._udp_sock.getsockname()[1]

        try:
            from websockets.sync.server import serve as ws_serve
            self._ws_server = ws_serve(self._ws_handler, cfg.host, cfg.ws_port)
        except OSError as e:
            self._udp_sock.close()
            raise BindError(f"websocket bind {cfg.host}:{cfg.ws_port}: {e}") from e
        self.ws_port = self._ws_server.socket.getsockname()[1]

        if cfg.http_port or cfg.http_root:
            root = cfg.http_root or "."

            class Handler(SimpleHTTPRequestHandler):
                def __init__(self, *a, **kw):
                    super().__init__(*a, directory=root, **kw)

                def log_message(self, *a):
                    pass

            try:
                self._http_server = ThreadingHTTPServer((cfg.host, cfg.http_port),
                                                        Handler)
            except OSError as e:
                raise BindError(f"http bind {cfg.host}:{cfg.http_port}: {e}") from e
            self.http_port = self._http_server.server_address[1]
            self._threads.append(threading.Thread(
                target=self._http_server.serve_forever, daemon=True))

        self._threads.append(threading.Thread(target=self._udp_ingress, daemon=True))
        self._threads.append(threading.Thread(target=self._ws_server.serve_forever,
                                              daemon=True))
        self._threads.append(threading.Thread(target=self._run_loop, daemon=True))
        for t in self._threads:
            t.start()
        return self

    def stop(self):
        self._stop.set()
        if self._ws_server is not None:
            self._ws_server.shutdown()
        if self._http_server is not None:
            self._http_server.shutdown()
        for t in self._threads:
            t.join(timeout=2.0)
        if self._udp_sock is not None:
            self._udp_sock.close()

    # ---- ingress ----

    def _accept_command(self, cmd):
        # out-of-order datagrams: newest sequence wins
        if cmd.sequence <= self._seq_seen and self._seq_seen - cmd.sequence < 2 ** 31:
            return
        self._seq_seen = cmd.sequence
        try:
            pose = GripPose(cmd.position, cmd.quaternion)
        except ValueError:
            self.malformed_packets += 1
            return
        self.mailbox.put(pose, cmd.trigger)
        self.last_command_time = time.monotonic()

    def _udp_ingress(self):
        while not self._stop.is_set():
            try:
                data, addr = self._udp_sock.recvfrom(65536)
            except socket.timeout:
                continue
            except OSError:
                break
            try:
                pkt = protocol.parse_packet(data)
            except ProtocolError:
                self.malformed_packets += 1
                continue
            if isinstance(pkt, protocol.CommandPacket):
                self._accept_command(pkt)
                self._subscribers[addr] = time.monotonic()
            else:
                # state packets are outbound only
                self.malformed_packets += 1

    def _ws_handler(self, conn):
        client = _WsClient(conn)
        with self._ws_lock:
            self._ws_clients.append(client)
        try:
            conn.send(json.dumps(self.scene_message()))
            writer = threading.Thread(target=self._ws_writer, args=(client,),
                                      daemon=True)
            writer.start()
            for message in conn:
                try:
                    doc = json.loads(message)
                    if doc.get("type") == "command":
                        cmd = protocol.command_from_json_dict(doc)
                        self._accept_command(cmd)
                    elif doc.get("type") == "subscribe":
                        pass         # connection itself subscribes
                    else:
                        self.malformed_packets += 1
                except (json.JSONDecodeError, ProtocolError):
                    self.malformed_packets += 1
        except Exception:
            pass
        finally:
            client.alive = False
            client.event.set()
            with self._ws_lock:
                if client in self._ws_clients:
                    self._ws_clients.remove(client)

    def _ws_writer(self, client):
        while client.alive and not self._stop.is_set():
            if not client.queue:
                client.event.wait(timeout=0.25)
                client.event.clear()
                continue
            try:
                payload = client.queue.popleft()
            except IndexError:
                continue
            try:
                client.conn.send(payload)
            except Exception:
                client.alive = False
                return

    # ---- egress ----

    def scene_message(self):
        """Static scene description sent once per websocket connection."""
        scene = self.config.scene
        rig = self.config.rig
        prop = scene.prop
        skeleton = []
        for prim in prop.nose:
            if hasattr(prim, "center"):
                skeleton.append({"type": "sphere",
                                 "center": prim.center.tolist(),
                                 "radius": prim.radius})
            else:
                skeleton.append({"type": "capsule", "p0": prim.p0.tolist(),
                                 "p1": prim.p1.tolist(), "radius": prim.radius})
        return {
            "type": "scene",
            "motors": rig.motor_positions.tolist(),
            "attachments": rig.attachment_offsets.tolist(),
            "string_pairing": [list(p) for p in rig.string_pairing],
            "tension_bounds": list(rig.tension_bounds),
            "mesh": {
                "vertices": np.round(self.config.scene.mesh.vertices, 6).tolist(),
                "triangles": self.config.scene.mesh.triangles.tolist(),
            },
            "seam": scene.seam.points.tolist(),
            "prop": {
                "nose": skeleton,
                "tip": prop.tip.tolist(),
                "nose_root": prop.nose_root.tolist(),
                "calibration_offset": {
                    "translation": prop.calibration_offset.translation.tolist(),
                    "rotation": prop.calibration_offset.rotation.tolist(),
                },
            },
            "putty_radius": scene.putty_radius,
            "light_direction": [0.3, 0.2, -0.93],
            "ground_plane": {"normal": [0.0, 0.0, 1.0],
                             "offset": float(scene.mesh.bounds[0][2]) - 0.02},
            "dt": self.config.dt.numerator / self.config.dt.denominator,
        }

    def _publish(self, frame):
        pkt = frame.to_state_packet()
        # downsampled stream: carry every bead sample since the last publish,
        # not just the published tick's, so subscribers see the whole tube
        if self._pending_bead:
            pkt.bead_samples = np.asarray(self._pending_bead, dtype=np.float32)
            self._pending_bead = []
        data = protocol.encode_state(pkt)
        now = time.monotonic()
        dead = []
        for addr, seen in list(self._subscribers.items()):
            if now - seen > SUBSCRIBER_TIMEOUT:
                dead.append(addr)
                continue
            try:
                self._udp_sock.sendto(data, addr)
            except OSError:
                dead.append(addr)
        for addr in dead:
            self._subscribers.pop(addr, None)
        if self._ws_clients:
            payload = json.dumps(protocol.state_to_json_dict(pkt))
            with self._ws_lock:
                clients = list(self._ws_clients)
            for c in clients:
                c.queue.append(payload)
                c.event.set()
        self.published_frames += 1

    # ---- the real-time loop ----

    def _run_loop(self):
        dt = self.loop.params.dt_float
        publish_every = max(1, int(round(self.config.publish_interval / dt)))
        next_deadline = time.monotonic()
        while not self._stop.is_set():
            pose, trigger = self.mailbox.sample(None)
            frame = self.loop.step(pose, trigger)
            self._latest_frame = frame
            self.ticks += 1
            if frame.bead_delta:
                self._pending_bead.extend(
                    [np.asarray(s, dtype=np.float32) for s in frame.bead_delta])
            if frame.tick % publish_every == 0:
                self._publish(frame)
            next_deadline += dt
            lag = next_deadline - time.monotonic()
            if lag > 0:
                time.sleep(lag)
            elif lag < -1.0:
                next_deadline = time.monotonic()    # fell far behind; resync


def serve(config):
    """Run a service until interrupted (CLI entry)."""
    service = HapticService(config).start()
    line = f"serving udp={service.udp_port} ws={service.ws_port}"
    if service._http_server is not None:
        line += f" http={service.http_port}"
    print(line, flush=True)
    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        service.stop()
    return service
