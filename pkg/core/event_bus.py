import logging
from enum import Enum
from typing import Any, Callable, Dict, List

logger = logging.getLogger("events")


class EventType(Enum):
    RUN_STARTED = "RUN_STARTED"
    RUN_COMMITTED = "RUN_COMMITTED"
    RUN_ROLLED_BACK = "RUN_ROLLED_BACK"
    RUN_REJECTED = "RUN_REJECTED"


class Event:
    def __init__(self, type: EventType, payload: Any):
        self.type = type
        self.payload = payload

    def __repr__(self) -> str:
        return f"Event({self.type.name}, {self.payload!r})"


class EventBus:
    """
    Synchronous publish/subscribe. Subscribers run in subscription order on
    the publishing thread; a failing subscriber is logged and skipped.
    """

    def __init__(self):
        self.subscribers: Dict[EventType, List[Callable]] = {
            event_type: [] for event_type in EventType
        }

    def subscribe(self, event_type: EventType, callback: Callable):
        """Subscribes a callback function to an event type."""
        self.subscribers.setdefault(event_type, []).append(callback)
        logger.debug(f"Subscribed to {event_type.name}")

    def subscribe_all(self, callback: Callable):
        for event_type in EventType:
            self.subscribe(event_type, callback)

    def publish(self, event: Event):
        for callback in list(self.subscribers.get(event.type, [])):
            try:
                callback(event)
            except Exception as e:
                logger.error(f"Error in subscriber for {event.type.name}: {e}")
