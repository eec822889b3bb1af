"""Deterministic named-data content distribution simulator.

Four node kinds (management authority, third-party storage servers,
roadside units, vehicles) sit on a latency-weighted topology.  Requests
address content names, never hosts: an interest is answered by the nearest
node holding a copy, where nearest means smallest total link latency, and
every cache on the delivery path may keep the passing chunks subject to
its capacity and the content's protection category.

Six data categories carry their own protection profile.  Public data rides
on signed directories plus per-file hashes, subscription content adds the
attribute envelope on top, and private or control traffic is confined to
an authenticated channel and never cached.

Everything is driven by a scripted schedule (requests, cache tampering,
topology edits), so a run is a pure function of its config: identical
seeds produce byte-identical event logs, and the metrics can be recomputed
from the log alone.
"""

import hashlib
import math
import re
from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum
from random import Random

import networkx as nx

from .envelope import (
    DirectoryEntry,
    KeyedDigestSigner,
    SignedDirectory,
    build_directory,
    verify_directory,
)


class ScenarioError(ValueError):
    """Malformed scenario configuration."""


class DataCategory(str, Enum):
    V2X_PRIVATE = "v2x-private"
    TRAFFIC_CONTROL = "traffic-control"
    PUBLIC_TRAFFIC = "public-traffic"
    PUBLIC_INFOTAINMENT = "public-infotainment"
    SUBSCRIPTION_INFOTAINMENT = "subscription-infotainment"
    PRIVATE_INFOTAINMENT = "private-infotainment"


class Protection(str, Enum):
    DIRECTORY_HASH = "directory-hash"
    ABE_ENVELOPE = "abe-envelope"
    AUTHENTICATED_CHANNEL = "authenticated-channel"


def dispatch_protection(category: DataCategory) -> Protection:
    """Protection mechanism per data category."""
    if category in (DataCategory.PUBLIC_TRAFFIC, DataCategory.PUBLIC_INFOTAINMENT):
        return Protection.DIRECTORY_HASH
    if category is DataCategory.SUBSCRIPTION_INFOTAINMENT:
        return Protection.ABE_ENVELOPE
    return Protection.AUTHENTICATED_CHANNEL


def is_cacheable(category: DataCategory) -> bool:
    return dispatch_protection(category) is not Protection.AUTHENTICATED_CHANNEL


class Level(str, Enum):
    NOT_APPLICABLE = "not-applicable"
    MODERATE = "moderate"
    IMPORTANT = "important"
    CRITICAL = "critical"
    HIGHLY_CRITICAL = "highly-critical"
    CONDITIONAL = "conditional"


@dataclass(frozen=True)
class QoSSProfile:
    confidentiality: Level
    integrity: Level
    long_term_availability: Level
    short_term_availability: Level


QOSS_PROFILES: dict[DataCategory, QoSSProfile] = {
    DataCategory.V2X_PRIVATE: QoSSProfile(
        Level.HIGHLY_CRITICAL, Level.HIGHLY_CRITICAL, Level.CRITICAL, Level.CRITICAL
    ),
    DataCategory.TRAFFIC_CONTROL: QoSSProfile(
        Level.MODERATE, Level.HIGHLY_CRITICAL, Level.HIGHLY_CRITICAL, Level.HIGHLY_CRITICAL
    ),
    DataCategory.PUBLIC_TRAFFIC: QoSSProfile(
        Level.NOT_APPLICABLE, Level.HIGHLY_CRITICAL, Level.CRITICAL, Level.MODERATE
    ),
    DataCategory.PUBLIC_INFOTAINMENT: QoSSProfile(
        Level.NOT_APPLICABLE, Level.HIGHLY_CRITICAL, Level.IMPORTANT, Level.IMPORTANT
    ),
    DataCategory.SUBSCRIPTION_INFOTAINMENT: QoSSProfile(
        Level.CONDITIONAL, Level.HIGHLY_CRITICAL, Level.IMPORTANT, Level.IMPORTANT
    ),
    DataCategory.PRIVATE_INFOTAINMENT: QoSSProfile(
        Level.HIGHLY_CRITICAL, Level.HIGHLY_CRITICAL, Level.IMPORTANT, Level.IMPORTANT
    ),
}


class NodeKind(str, Enum):
    AUTHORITY = "authority-server"
    THIRD_PARTY = "third-party-server"
    RSU = "rsu"
    VEHICLE = "vehicle"


SERVER_KINDS = (NodeKind.AUTHORITY, NodeKind.THIRD_PARTY)

DEFAULT_LATENCY_MS = 10
DEFAULT_CHUNK_SIZE = 65536
DEFAULT_HOP_BUDGET = 1_000_000


# ----------------------------------------------------------------------
# Configuration.
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class NodeConfig:
    node_id: str
    kind: NodeKind
    capacity: int


@dataclass(frozen=True)
class LinkConfig:
    a: str
    b: str
    latency_ms: int


@dataclass(frozen=True)
class ContentConfig:
    name: str
    origin: str
    size: int
    category: DataCategory
    default: bool = False


@dataclass(frozen=True)
class ScheduledOp:
    time: int
    seq: int
    kind: str  # request | tamper | relink | unlink
    params: dict


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 0
    chunk_size: int = DEFAULT_CHUNK_SIZE
    hop_budget: int = DEFAULT_HOP_BUDGET
    nodes: tuple[NodeConfig, ...] = ()
    links: tuple[LinkConfig, ...] = ()
    contents: tuple[ContentConfig, ...] = ()
    schedule: tuple[ScheduledOp, ...] = ()


_NAME_RE = re.compile(r"^[^\s=]+$")


def _kv(parts: list[str], line_no: int) -> dict[str, str]:
    out = {}
    for part in parts:
        key, sep, value = part.partition("=")
        if not sep or not key:
            raise ScenarioError(f"line {line_no}: expected key=value, got {part!r}")
        out[key] = value
    return out


def _int_field(kv: dict, key: str, line_no: int, default: int | None = None) -> int:
    if key not in kv:
        if default is None:
            raise ScenarioError(f"line {line_no}: missing {key}=")
        return default
    try:
        return int(kv[key])
    except ValueError:
        raise ScenarioError(f"line {line_no}: bad integer for {key}: {kv[key]!r}") from None


def parse_scenario(text: str) -> ScenarioConfig:
    """Parse the line-oriented scenario format.

    Directives: ``seed N``, ``chunk-size N``, ``hop-budget N``,
    ``node ID kind=K capacity=N``, ``link A B latency=N``,
    ``content NAME origin=ID size=N category=C [default=0|1]``,
    ``request t=N requester=ID name=NAME``,
    ``tamper t=N node=ID name=NAME``,
    ``relink t=N a=ID b=ID latency=N`` and ``unlink t=N a=ID b=ID``.
    ``#`` starts a comment.
    """
    seed, chunk_size, hop_budget = 0, DEFAULT_CHUNK_SIZE, DEFAULT_HOP_BUDGET
    nodes, links, contents, schedule = [], [], [], []
    seq = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        directive, rest = parts[0], parts[1:]
        if directive == "seed":
            seed = _int_field({"seed": rest[0] if rest else ""}, "seed", line_no)
        elif directive == "chunk-size":
            chunk_size = _int_field({"v": rest[0] if rest else ""}, "v", line_no)
        elif directive == "hop-budget":
            hop_budget = _int_field({"v": rest[0] if rest else ""}, "v", line_no)
        elif directive == "node":
            if not rest:
                raise ScenarioError(f"line {line_no}: node needs an id")
            node_id = rest[0]
            if not _NAME_RE.match(node_id):
                raise ScenarioError(f"line {line_no}: bad node id {node_id!r}")
            kv = _kv(rest[1:], line_no)
            try:
                kind = NodeKind(kv.get("kind", ""))
            except ValueError:
                raise ScenarioError(
                    f"line {line_no}: bad node kind {kv.get('kind')!r}"
                ) from None
            nodes.append(NodeConfig(node_id, kind, _int_field(kv, "capacity", line_no, 0)))
        elif directive == "link":
            if len(rest) < 2:
                raise ScenarioError(f"line {line_no}: link needs two node ids")
            kv = _kv(rest[2:], line_no)
            links.append(
                LinkConfig(rest[0], rest[1], _int_field(kv, "latency", line_no, DEFAULT_LATENCY_MS))
            )
        elif directive == "content":
            if not rest:
                raise ScenarioError(f"line {line_no}: content needs a name")
            name = rest[0]
            if not _NAME_RE.match(name):
                raise ScenarioError(f"line {line_no}: bad content name {name!r}")
            kv = _kv(rest[1:], line_no)
            try:
                category = DataCategory(kv.get("category", ""))
            except ValueError:
                raise ScenarioError(
                    f"line {line_no}: bad category {kv.get('category')!r}"
                ) from None
            contents.append(
                ContentConfig(
                    name=name,
                    origin=kv.get("origin", ""),
                    size=_int_field(kv, "size", line_no),
                    category=category,
                    default=bool(_int_field(kv, "default", line_no, 0)),
                )
            )
        elif directive in ("request", "tamper", "relink", "unlink"):
            kv = _kv(rest, line_no)
            t = _int_field(kv, "t", line_no)
            seq += 1
            schedule.append(ScheduledOp(t, seq, directive, kv))
        else:
            raise ScenarioError(f"line {line_no}: unknown directive {directive!r}")
    return ScenarioConfig(
        seed=seed,
        chunk_size=chunk_size,
        hop_budget=hop_budget,
        nodes=tuple(nodes),
        links=tuple(links),
        contents=tuple(contents),
        schedule=tuple(schedule),
    )


# Fixed reference topology: a five node line with one origin, three
# roadside caches and one vehicle.
FIVE_NODE_LINE = """
node origin kind=third-party-server capacity=0
node rsu1 kind=rsu capacity=1000000
node rsu2 kind=rsu capacity=1000000
node rsu3 kind=rsu capacity=1000000
node vehicle1 kind=vehicle capacity=0
link origin rsu1 latency=10
link rsu1 rsu2 latency=10
link rsu2 rsu3 latency=10
link rsu3 vehicle1 latency=10
"""


# ----------------------------------------------------------------------
# Runtime state.
# ----------------------------------------------------------------------


@dataclass
class CachedCopy:
    data: bytes
    directory_hash: bytes
    pinned: bool = False

    @property
    def size(self) -> int:
        return len(self.data)


class ContentStore:
    """Byte-capacity-bounded LRU store; pinned items are never evicted."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._items: "OrderedDict[str, CachedCopy]" = OrderedDict()

    def used(self) -> int:
        return sum(item.size for item in self._items.values())

    def get(self, name: str) -> CachedCopy | None:
        item = self._items.get(name)
        if item is not None:
            self._items.move_to_end(name)
        return item

    def peek(self, name: str) -> CachedCopy | None:
        """Lookup without refreshing the entry's recency."""
        return self._items.get(name)

    def names(self) -> list[str]:
        return list(self._items)

    def put(self, name: str, copy: CachedCopy) -> list[str]:
        """Insert and return the names evicted to make room.  Items larger
        than the whole store are not cached."""
        if copy.size > self.capacity:
            return []
        self._items[name] = copy
        self._items.move_to_end(name)
        evicted = []
        while self.used() > self.capacity:
            victim = next(
                (n for n, item in self._items.items() if not item.pinned), None
            )
            if victim is None or victim == name:
                del self._items[name]
                return evicted
            del self._items[victim]
            evicted.append(victim)
        return evicted

    def drop(self, name: str) -> None:
        self._items.pop(name, None)

    def replace(self, name: str, copy: CachedCopy) -> None:
        if name in self._items:
            self._items[name] = copy


@dataclass
class SimNode:
    node_id: str
    kind: NodeKind
    store: ContentStore


@dataclass(frozen=True)
class ContentRecord:
    name: str
    origin: str
    category: DataCategory
    data: bytes
    digest: bytes
    default: bool

    @property
    def size(self) -> int:
        return len(self.data)


@dataclass(frozen=True)
class Interest:
    name: str
    requester: str
    hop_budget: int


@dataclass(frozen=True)
class DataPacket:
    name: str
    chunk: int
    payload: bytes
    provenance: str


@dataclass(frozen=True)
class RequestMetric:
    seq: int
    time: int
    requester: str
    name: str
    outcome: str  # served | not-found
    hops: int
    latency_ms: int
    served_from: str
    served_from_kind: str
    cache_hit: bool
    integrity_retries: int


@dataclass(frozen=True)
class Metrics:
    requests: int
    served: int
    not_found: int
    cache_hits: int
    integrity_events: int
    per_request: tuple[RequestMetric, ...]

    @property
    def hit_ratio(self) -> float:
        return self.cache_hits / self.requests if self.requests else 0.0

    def summary_lines(self) -> list[str]:
        return [
            f"requests={self.requests} served={self.served} "
            f"not_found={self.not_found} cache_hits={self.cache_hits} "
            f"hit_ratio={self.hit_ratio:.4f} integrity_events={self.integrity_events}"
        ] + [
            f"req seq={m.seq} t={m.time} requester={m.requester} name={m.name} "
            f"outcome={m.outcome} hops={m.hops} latency={m.latency_ms} "
            f"from={m.served_from} kind={m.served_from_kind} hit={int(m.cache_hit)} "
            f"retries={m.integrity_retries}"
            for m in self.per_request
        ]


@dataclass(frozen=True)
class SimulationResult:
    metrics: Metrics
    events: tuple[str, ...]


class Simulation:
    """One scenario instance.  Build it, then call run()."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.rng = Random(config.seed)
        self.events: list[str] = []
        self._metrics_rows: list[RequestMetric] = []
        self._integrity_events = 0
        self._seq = 0

        self.nodes: dict[str, SimNode] = {}
        for nc in config.nodes:
            if nc.node_id in self.nodes:
                raise ScenarioError(f"duplicate node id {nc.node_id!r}")
            self.nodes[nc.node_id] = SimNode(nc.node_id, nc.kind, ContentStore(nc.capacity))

        self.graph = nx.Graph()
        self.graph.add_nodes_from(self.nodes)
        for link in config.links:
            for end in (link.a, link.b):
                if end not in self.nodes:
                    raise ScenarioError(f"link references unknown node {end!r}")
            if link.latency_ms < 0:
                raise ScenarioError("link latency must be >= 0")
            self.graph.add_edge(link.a, link.b, latency=link.latency_ms)
        if self.nodes and not nx.is_connected(self.graph):
            raise ScenarioError("topology must be connected")

        self.contents: dict[str, ContentRecord] = {}
        for cc in config.contents:
            if cc.name in self.contents:
                raise ScenarioError(f"duplicate content name {cc.name!r}")
            origin = self.nodes.get(cc.origin)
            if origin is None:
                raise ScenarioError(f"content {cc.name!r} has unknown origin {cc.origin!r}")
            if origin.kind not in SERVER_KINDS:
                raise ScenarioError(f"content origin {cc.origin!r} must be a server")
            data = self.rng.randbytes(cc.size)
            self.contents[cc.name] = ContentRecord(
                name=cc.name,
                origin=cc.origin,
                category=cc.category,
                data=data,
                digest=hashlib.sha256(data).digest(),
                default=cc.default,
            )

        self.directories: dict[str, SignedDirectory] = {}
        self._trusted: dict[str, bytes] = {}
        self._build_directories()
        self._verify_directories()
        self._preload_defaults()

    # ------------------------------------------------------------------

    def _log(self, line: str) -> None:
        self.events.append(line)

    def _dir_secret(self, origin: str) -> bytes:
        return hashlib.sha256(
            b"directory-secret" + self.config.seed.to_bytes(8, "big") + origin.encode()
        ).digest()

    def _build_directories(self) -> None:
        by_origin: dict[str, list[DirectoryEntry]] = {}
        for record in self.contents.values():
            if dispatch_protection(record.category) is Protection.AUTHENTICATED_CHANNEL:
                continue
            by_origin.setdefault(record.origin, []).append(
                DirectoryEntry(
                    name=record.name,
                    file_hash=record.digest,
                    updated_at=0,
                    description="",
                    category=record.category.value,
                )
            )
        for origin in sorted(by_origin):
            secret = self._dir_secret(origin)
            self._trusted[origin] = secret
            self.directories[origin] = build_directory(
                by_origin[origin], KeyedDigestSigner(origin, secret)
            )

    def _verify_directories(self) -> None:
        vehicles = sorted(n for n, node in self.nodes.items() if node.kind is NodeKind.VEHICLE)
        for origin in sorted(self.directories):
            ok = verify_directory(self.directories[origin], self._trusted)
            for vehicle in vehicles:
                self._log(f"ev=dirverify t=0 node={vehicle} issuer={origin} ok={int(ok)}")

    def _preload_defaults(self) -> None:
        """Default public infotainment is pushed out ahead of demand and
        pinned so it survives cache pressure."""
        for name in sorted(self.contents):
            record = self.contents[name]
            if not record.default or not is_cacheable(record.category):
                continue
            for node_id in sorted(self.nodes):
                node = self.nodes[node_id]
                if node.kind not in (NodeKind.RSU, NodeKind.VEHICLE):
                    continue
                if node_id == record.origin:
                    continue
                node.store.put(
                    name, CachedCopy(record.data, record.digest, pinned=True)
                )
                if node.store.peek(name) is not None:
                    self._log(f"ev=preload t=0 node={node_id} name={name}")

    def _directory_hash_for(self, record: ContentRecord) -> bytes | None:
        directory = self.directories.get(record.origin)
        if directory is None:
            return None
        entry = directory.find(record.name)
        return entry.file_hash if entry else None

    # ------------------------------------------------------------------

    def _holders(self, name: str, exclude: set[str]) -> list[str]:
        record = self.contents[name]
        holders = [record.origin]
        for node_id, node in self.nodes.items():
            if node_id != record.origin and node.store.peek(name) is not None:
                holders.append(node_id)
        return sorted(h for h in holders if h not in exclude)

    def _nearest(self, requester: str, holders: list[str]):
        dist, paths = nx.single_source_dijkstra(self.graph, requester, weight="latency")
        best = None
        for holder in holders:
            if holder not in dist:
                continue
            key = (dist[holder], holder)
            if best is None or key < best[0]:
                best = (key, holder, paths[holder])
        if best is None:
            return None
        (latency, _), holder, path = best
        return holder, path, latency

    def _copy_at(self, node_id: str, name: str) -> bytes:
        record = self.contents[name]
        if node_id == record.origin:
            return record.data
        copy = self.nodes[node_id].store.get(name)
        assert copy is not None
        return copy.data

    def submit_interest(self, requester: str, name: str, at_time: int = 0) -> RequestMetric:
        """Resolve one interest; returns the per-request metric row."""
        if requester not in self.nodes:
            raise ScenarioError(f"unknown requester {requester!r}")
        self._seq += 1
        seq = self._seq
        interest = Interest(name, requester, self.config.hop_budget)
        self._log(f"ev=interest t={at_time} seq={seq} requester={requester} name={name}")
        if name not in self.contents:
            return self._finish_not_found(seq, at_time, interest)
        record = self.contents[name]
        expected = self._directory_hash_for(record)
        failed: set[str] = set()
        retries = 0
        while True:
            holders = self._holders(name, failed)
            choice = self._nearest(requester, holders) if holders else None
            if choice is None:
                return self._finish_not_found(seq, at_time, interest)
            holder, path, latency = choice
            hops = len(path) - 1
            if hops > interest.hop_budget:
                return self._finish_not_found(seq, at_time, interest)
            data = self._copy_at(holder, name)
            if expected is not None and hashlib.sha256(data).digest() != expected:
                # Corrupted copy: reject, drop it at the holder, ask the
                # next nearest one.
                self._integrity_events += 1
                retries += 1
                self._log(
                    f"ev=integrity t={at_time} seq={seq} requester={requester} "
                    f"holder={holder} name={name}"
                )
                self.nodes[holder].store.drop(name)
                self._log(f"ev=drop t={at_time} node={holder} name={name}")
                failed.add(holder)
                continue
            return self._deliver(
                seq, at_time, interest, record, holder, path, latency, retries
            )

    def _finish_not_found(self, seq: int, t: int, interest: Interest) -> RequestMetric:
        self._log(
            f"ev=notfound t={t} seq={seq} requester={interest.requester} name={interest.name}"
        )
        metric = RequestMetric(
            seq=seq,
            time=t,
            requester=interest.requester,
            name=interest.name,
            outcome="not-found",
            hops=0,
            latency_ms=0,
            served_from="-",
            served_from_kind="-",
            cache_hit=False,
            integrity_retries=0,
        )
        self._metrics_rows.append(metric)
        return metric

    def _deliver(
        self,
        seq: int,
        t: int,
        interest: Interest,
        record: ContentRecord,
        holder: str,
        path: list[str],
        latency: int,
        retries: int,
    ) -> RequestMetric:
        chunk_size = self.config.chunk_size
        n_chunks = max(1, math.ceil(record.size / chunk_size))
        for chunk in range(n_chunks):
            payload = record.data[chunk * chunk_size : (chunk + 1) * chunk_size]
            packet = DataPacket(record.name, chunk, payload, holder)
            self._log(
                f"ev=data t={t} seq={seq} name={packet.name} chunk={packet.chunk} "
                f"from={packet.provenance} to={interest.requester}"
            )
        if is_cacheable(record.category):
            # Every traversed node except the holder may keep a copy.
            for node_id in reversed(path[:-1]):
                node = self.nodes[node_id]
                if node_id == record.origin or node.store.capacity <= 0:
                    continue
                if node.store.peek(record.name) is not None:
                    continue
                evicted = node.store.put(
                    record.name, CachedCopy(record.data, record.digest)
                )
                if node.store.peek(record.name) is not None:
                    self._log(f"ev=cache t={t} node={node_id} name={record.name}")
                for victim in evicted:
                    self._log(f"ev=evict t={t} node={node_id} name={victim}")
        hit = holder != record.origin
        kind = self.nodes[holder].kind.value
        self._log(
            f"ev=served t={t} seq={seq} requester={interest.requester} "
            f"name={record.name} from={holder} kind={kind} hops={len(path) - 1} "
            f"latency={latency} hit={int(hit)} retries={retries}"
        )
        metric = RequestMetric(
            seq=seq,
            time=t,
            requester=interest.requester,
            name=record.name,
            outcome="served",
            hops=len(path) - 1,
            latency_ms=latency,
            served_from=holder,
            served_from_kind=kind,
            cache_hit=hit,
            integrity_retries=retries,
        )
        self._metrics_rows.append(metric)
        return metric

    # ------------------------------------------------------------------

    def _apply_tamper(self, op: ScheduledOp) -> None:
        node_id = op.params.get("node", "")
        name = op.params.get("name", "")
        node = self.nodes.get(node_id)
        if node is None:
            raise ScenarioError(f"tamper on unknown node {node_id!r}")
        copy = node.store.get(name)
        if copy is None:
            raise ScenarioError(f"no cached copy of {name!r} at {node_id!r} to tamper")
        corrupted = bytes([copy.data[0] ^ 0xFF]) + copy.data[1:] if copy.data else b"\xff"
        node.store.replace(name, CachedCopy(corrupted, copy.directory_hash, copy.pinned))
        self._log(f"ev=tamper t={op.time} node={node_id} name={name}")

    def _apply_relink(self, op: ScheduledOp) -> None:
        a, b = op.params.get("a", ""), op.params.get("b", "")
        latency = int(op.params.get("latency", DEFAULT_LATENCY_MS))
        for end in (a, b):
            if end not in self.nodes:
                raise ScenarioError(f"relink references unknown node {end!r}")
        self.graph.add_edge(a, b, latency=latency)
        self._log(f"ev=relink t={op.time} a={a} b={b} latency={latency}")

    def _apply_unlink(self, op: ScheduledOp) -> None:
        a, b = op.params.get("a", ""), op.params.get("b", "")
        if self.graph.has_edge(a, b):
            self.graph.remove_edge(a, b)
        self._log(f"ev=unlink t={op.time} a={a} b={b}")

    def run(self) -> SimulationResult:
        for op in sorted(self.config.schedule, key=lambda o: (o.time, o.seq)):
            if op.kind == "request":
                self.submit_interest(
                    op.params.get("requester", ""), op.params.get("name", ""), op.time
                )
            elif op.kind == "tamper":
                self._apply_tamper(op)
            elif op.kind == "relink":
                self._apply_relink(op)
            elif op.kind == "unlink":
                self._apply_unlink(op)
            else:
                raise ScenarioError(f"unknown scheduled op {op.kind!r}")
        return SimulationResult(self.metrics(), tuple(self.events))

    def metrics(self) -> Metrics:
        rows = tuple(self._metrics_rows)
        return Metrics(
            requests=len(rows),
            served=sum(1 for m in rows if m.outcome == "served"),
            not_found=sum(1 for m in rows if m.outcome == "not-found"),
            cache_hits=sum(1 for m in rows if m.cache_hit),
            integrity_events=self._integrity_events,
            per_request=rows,
        )


def run_scenario(config: ScenarioConfig) -> SimulationResult:
    return Simulation(config).run()


def _parse_fields(line: str) -> dict[str, str]:
    return dict(part.split("=", 1) for part in line.split())


def metrics_from_events(events) -> Metrics:
    """Recompute the metrics from an event log alone."""
    rows = []
    integrity = 0
    for line in events:
        fields = _parse_fields(line)
        ev = fields.get("ev")
        if ev == "integrity":
            integrity += 1
        elif ev == "served":
            rows.append(
                RequestMetric(
                    seq=int(fields["seq"]),
                    time=int(fields["t"]),
                    requester=fields["requester"],
                    name=fields["name"],
                    outcome="served",
                    hops=int(fields["hops"]),
                    latency_ms=int(fields["latency"]),
                    served_from=fields["from"],
                    served_from_kind=fields["kind"],
                    cache_hit=bool(int(fields["hit"])),
                    integrity_retries=int(fields["retries"]),
                )
            )
        elif ev == "notfound":
            rows.append(
                RequestMetric(
                    seq=int(fields["seq"]),
                    time=int(fields["t"]),
                    requester=fields["requester"],
                    name=fields["name"],
                    outcome="not-found",
                    hops=0,
                    latency_ms=0,
                    served_from="-",
                    served_from_kind="-",
                    cache_hit=False,
                    integrity_retries=0,
                )
            )
    ordered = tuple(sorted(rows, key=lambda m: m.seq))
    return Metrics(
        requests=len(ordered),
        served=sum(1 for m in ordered if m.outcome == "served"),
        not_found=sum(1 for m in ordered if m.outcome == "not-found"),
        cache_hits=sum(1 for m in ordered if m.cache_hit),
        integrity_events=integrity,
        per_request=ordered,
    )
