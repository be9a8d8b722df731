"""
Memoisation of bound computations.

Solver-path bounds are pure functions of (polynomial, M, solver settings),
and lambda sweeps, property suites and repeated CLI checks ask for the same
bounds many times. Results are immutable, so cached values are shared.

Example:
    from gpbound.cache import memoize

    @memoize("f_gp_ball", key_fn=lambda p, M: (p.key(), M))
    def expensive(p, M):
        ...
"""

from __future__ import annotations

import functools
import threading
from collections import OrderedDict
from collections.abc import Callable, Hashable
from dataclasses import dataclass
from typing import Any, ParamSpec, TypeVar

P = ParamSpec("P")
R = TypeVar("R")


@dataclass
class CacheStats:
    """Statistics for a cache namespace."""

    hits: int = 0
    misses: int = 0
    evictions: int = 0
    entry_count: int = 0

    @property
    def hit_rate(self) -> float:
        total = self.hits + self.misses
        if total == 0:
            return 0.0
        return self.hits / total

    def to_dict(self) -> dict[str, Any]:
        return {
            "hits": self.hits,
            "misses": self.misses,
            "evictions": self.evictions,
            "hit_rate": f"{self.hit_rate:.1%}",
            "entry_count": self.entry_count,
        }


class CacheNamespace:
    """A namespace of cached values with LRU eviction."""

    def __init__(self, name: str, max_entries: int = 1024):
        self.name = name
        self.max_entries = max_entries
        self._cache: OrderedDict[Hashable, Any] = OrderedDict()
        self._stats = CacheStats()
        self._lock = threading.RLock()

    def get(self, key: Hashable) -> tuple[bool, Any]:
        """
        Get a value from the cache.

        Returns:
            Tuple of (found, value). If not found, value is None.
        """
        with self._lock:
            if key not in self._cache:
                self._stats.misses += 1
                return False, None
            self._cache.move_to_end(key)
            self._stats.hits += 1
            return True, self._cache[key]

    def set(self, key: Hashable, value: Any) -> None:
        with self._lock:
            if key in self._cache:
                del self._cache[key]
            while len(self._cache) >= self.max_entries:
                self._cache.popitem(last=False)
                self._stats.evictions += 1
            self._cache[key] = value
            self._stats.entry_count = len(self._cache)

    def clear(self) -> None:
        with self._lock:
            self._cache.clear()
            self._stats.entry_count = 0

    def __len__(self) -> int:
        return len(self._cache)

    @property
    def stats(self) -> CacheStats:
        return self._stats


class CacheManager:
    """Process-wide registry of cache namespaces."""

    _instance: CacheManager | None = None
    _lock = threading.Lock()

    def __new__(cls) -> CacheManager:
        with cls._lock:
            if cls._instance is None:
                cls._instance = super().__new__(cls)
                cls._instance._namespaces = {}
                cls._instance._ns_lock = threading.RLock()
            return cls._instance

    def get_namespace(self, name: str, max_entries: int = 1024) -> CacheNamespace:
        with self._ns_lock:
            if name not in self._namespaces:
                self._namespaces[name] = CacheNamespace(name, max_entries=max_entries)
            return self._namespaces[name]

    def clear_all(self) -> None:
        with self._ns_lock:
            for ns in self._namespaces.values():
                ns.clear()

    def clear_namespace(self, name: str) -> bool:
        with self._ns_lock:
            if name in self._namespaces:
                self._namespaces[name].clear()
                return True
            return False

    def get_all_stats(self) -> dict[str, dict[str, Any]]:
        with self._ns_lock:
            return {name: ns.stats.to_dict() for name, ns in self._namespaces.items()}


_manager = CacheManager()


class _CacheDisabled:
    """Context manager to temporarily bypass memoisation (timing runs)."""

    _disabled = threading.local()

    @classmethod
    def is_disabled(cls) -> bool:
        return getattr(cls._disabled, "value", False)

    def __enter__(self) -> _CacheDisabled:
        self._previous = self.is_disabled()
        self._disabled.value = True
        return self

    def __exit__(self, *args: Any) -> None:
        self._disabled.value = self._previous


def no_cache() -> _CacheDisabled:
    """
    Context manager to bypass memoisation in the current thread.

    Example:
        with no_cache():
            bound = f_gp_ball(p, M)  # always solved
    """
    return _CacheDisabled()


def memoize(
    namespace: str,
    key_fn: Callable[..., Hashable | None],
    max_entries: int = 1024,
) -> Callable[[Callable[P, R]], Callable[P, R]]:
    """
    Memoise a pure function under a named namespace.

    Args:
        namespace: Cache namespace name (visible in get_cache_stats())
        key_fn: Maps the call arguments to a hashable key; None skips the cache
        max_entries: LRU capacity
    """

    def decorator(func: Callable[P, R]) -> Callable[P, R]:
        ns = _manager.get_namespace(namespace, max_entries=max_entries)

        @functools.wraps(func)
        def wrapper(*args: P.args, **kwargs: P.kwargs) -> R:
            key = None if _CacheDisabled.is_disabled() else key_fn(*args, **kwargs)
            if key is None:
                return func(*args, **kwargs)
            found, value = ns.get(key)
            if found:
                return value
            result = func(*args, **kwargs)
            ns.set(key, result)
            return result

        wrapper.cache_clear = ns.clear  # type: ignore[attr-defined]
        wrapper.cache_info = lambda: ns.stats  # type: ignore[attr-defined]
        return wrapper

    return decorator


def clear_all_caches() -> None:
    """Clear all cache namespaces."""
    _manager.clear_all()


def clear_cache(namespace: str) -> bool:
    return _manager.clear_namespace(namespace)


def get_cache_stats() -> dict[str, dict[str, Any]]:
    """Get statistics for all caches."""
    return _manager.get_all_stats()
