"""Event subscriptions fed by accepted blocks."""
import queue
from dataclasses import dataclass


@dataclass(frozen=True)
class EventFilter:
    """Match on emitter and/or event name; None means any."""
    emitter: bytes | None = None
    name: str | None = None

    def matches(self, event):
        """Check one event against the filter."""
        if self.emitter is not None and event.emitter != self.emitter:
            return False
        return self.name is None or event.name == self.name


class Subscription:
    """
    Ordered stream of events for one subscriber.

    Events arrive through a thread-safe queue, in block order and then in
    execution order within a block.
    """

    def __init__(self, bus, event_filter):
        self._bus = bus
        self.filter = event_filter
        self._queue = queue.Queue()
        self.active = True

    def deliver(self, event):
        """Called by the bus for every matching event."""
        self._queue.put(event)

    def get(self, timeout=None):
        """Block until the next event arrives (or raise queue.Empty)."""
        return self._queue.get(timeout=timeout)

    def drain(self):
        """Return every event delivered so far without blocking."""
        events = []
        while True:
            try:
                events.append(self._queue.get_nowait())
            except queue.Empty:
                return events

    def close(self):
        """Stop receiving events."""
        self._bus.unsubscribe(self)
        self.active = False


class EventBus:
    """Fan-out of accepted-block events to live subscriptions."""

    def __init__(self):
        self._subscriptions = []

    def subscribe(self, emitter=None, name=None):
        """
        Attach a subscriber.

        Only events published after this call are delivered.
        """
        subscription = Subscription(self, EventFilter(emitter, name))
        self._subscriptions.append(subscription)
        return subscription

    def unsubscribe(self, subscription):
        """Detach a subscriber; unknown ones are ignored."""
        if subscription in self._subscriptions:
            self._subscriptions.remove(subscription)

    def publish(self, events):
        """Deliver events, in order, to every matching subscriber."""
        for event in events:
            for subscription in list(self._subscriptions):
                if subscription.filter.matches(event):
                    subscription.deliver(event)
