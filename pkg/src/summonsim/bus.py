"""Deterministic typed publish/subscribe bus.

Topics are registered with a payload type before use. Publishes enqueue; a
dispatch cycle drains everything queued at its start, so publishes issued from
inside handlers land in the next cycle. In deterministic (logical-clock) mode
the whole bus is driven single-threaded through dispatch_cycle().
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass
from typing import Any, Callable, Optional, TextIO

from .messages import payload_to_wire

log = logging.getLogger(__name__)


class BusError(Exception):
    pass


class UnknownTopicError(BusError):
    """Publish or subscribe on a topic that was never registered."""


class TopicTypeError(BusError):
    """Payload does not match the topic's registered type."""


@dataclass(frozen=True)
class Envelope:
    topic: str
    seq: int
    sim_time: float
    payload: Any


class Subscription:
    def __init__(self, topic: str, handler: Callable[[Envelope], None], latched: bool):
        self.topic = topic
        self.handler = handler
        self.latched = latched
        self.active = True

    def cancel(self) -> None:
        self.active = False


class _Topic:
    __slots__ = ("name", "payload_type", "next_seq", "last_time", "last_envelope", "subs")

    def __init__(self, name: str, payload_type: type):
        self.name = name
        self.payload_type = payload_type
        self.next_seq = 0
        self.last_time = 0.0
        self.last_envelope: Optional[Envelope] = None
        self.subs: list[Subscription] = []


class Bus:
    """In-process typed topic bus with deferred-delivery dispatch."""

    def __init__(self, trace_file: Optional[TextIO] = None, high_water: int = 100_000):
        self._topics: dict[str, _Topic] = {}
        self._queue: list[Envelope] = []
        self._lock = threading.RLock()
        self._trace_file = trace_file
        self._high_water = high_water

    def register(self, topic: str, payload_type: type) -> None:
        with self._lock:
            existing = self._topics.get(topic)
            if existing is not None and existing.payload_type is not payload_type:
                raise TopicTypeError(
                    f"topic {topic!r} already registered with {existing.payload_type.__name__}"
                )
            if existing is None:
                if not topic:
                    raise BusError("topic name must be non-empty")
                self._topics[topic] = _Topic(topic, payload_type)

    def register_all(self, mapping: dict[str, type]) -> None:
        for name, tp in mapping.items():
            self.register(name, tp)

    def topics(self) -> list[str]:
        with self._lock:
            return sorted(self._topics)

    def last_value(self, topic: str) -> Optional[Envelope]:
        with self._lock:
            t = self._topics.get(topic)
            return t.last_envelope if t else None

    def publish(self, topic: str, payload: Any, sim_time: float) -> Envelope:
        with self._lock:
            t = self._topics.get(topic)
            if t is None:
                raise UnknownTopicError(f"publish on unregistered topic {topic!r}")
            if t.payload_type is bool:
                ok = isinstance(payload, bool)
            elif t.payload_type is float:
                ok = isinstance(payload, (int, float)) and not isinstance(payload, bool)
            else:
                ok = isinstance(payload, t.payload_type)
            if not ok:
                raise TopicTypeError(
                    f"topic {topic!r} expects {t.payload_type.__name__}, "
                    f"got {type(payload).__name__}"
                )
            if sim_time < t.last_time:
                raise BusError(
                    f"sim_time went backwards on {topic!r}: {sim_time} < {t.last_time}"
                )
            env = Envelope(topic=topic, seq=t.next_seq, sim_time=sim_time, payload=payload)
            t.next_seq += 1
            t.last_time = sim_time
            t.last_envelope = env
            self._queue.append(env)
            if len(self._queue) == self._high_water:
                log.warning("bus queue reached high-water mark (%d)", self._high_water)
            if self._trace_file is not None:
                record = {
                    "seq": env.seq,
                    "sim_time": env.sim_time,
                    "topic": env.topic,
                    "payload": payload_to_wire(payload),
                }
                self._trace_file.write(json.dumps(record, separators=(",", ":")) + "\n")
            return env

    def subscribe(
        self, topic: str, handler: Callable[[Envelope], None], latched: bool = False
    ) -> Subscription:
        with self._lock:
            t = self._topics.get(topic)
            if t is None:
                raise UnknownTopicError(f"subscribe on unregistered topic {topic!r}")
            sub = Subscription(topic, handler, latched)
            t.subs.append(sub)
            cached = t.last_envelope if latched else None
        if cached is not None:
            handler(cached)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        sub.cancel()
        with self._lock:
            t = self._topics.get(sub.topic)
            if t is not None and sub in t.subs:
                t.subs.remove(sub)

    def dispatch_cycle(self) -> int:
        """Deliver everything queued at cycle start; return handler invocations."""
        with self._lock:
            batch, self._queue = self._queue, []
        delivered = 0
        for env in batch:
            with self._lock:
                subs = list(self._topics[env.topic].subs)
            for sub in subs:
                if sub.active:
                    sub.handler(env)
                    delivered += 1
        return delivered

    def dispatch_all(self, max_cycles: int = 64) -> int:
        """Run dispatch cycles until the queue drains; return total deliveries."""
        total = 0
        for _ in range(max_cycles):
            n = self.dispatch_cycle()
            if n == 0 and not self._queue:
                return total
            total += n
        if self._queue:
            raise BusError(f"dispatch did not converge in {max_cycles} cycles")
        return total

    def pending(self) -> int:
        with self._lock:
            return len(self._queue)
