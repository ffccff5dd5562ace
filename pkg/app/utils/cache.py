"""
Result memo for the numeric engine.

Provides thread-safe caching for:
- Bound-state spectra
- Zero-energy classifications
- Phase-shift curves and scattering sweeps

Keys are built from frozen potentials and solver configs, and every cached
value is immutable, so hits can be shared between threads.
"""
import logging
import threading
from collections import OrderedDict
from dataclasses import dataclass
from functools import wraps
from typing import Any, Callable, Dict, Hashable, Optional

logger = logging.getLogger(__name__)

_MISSING = object()


@dataclass
class CacheEntry:
    """Single cache entry with hit counter"""
    value: Any
    hits: int = 0

    def touch(self) -> None:
        self.hits += 1


class GlobalCache:
    """
    Thread-safe LRU cache partitioned by category.

    Features:
    - LRU eviction when a category reaches its size limit
    - Thread-safe operations
    - Hit/miss statistics
    """

    DEFAULT_MAX_SIZE = {
        'grids': 16,
        'bound_states': 64,
        'zero_energy': 64,
        'phase_curves': 32,
        'sweeps': 32,
        'default': 128,
    }

    def __init__(self):
        self._cache: Dict[str, "OrderedDict[Hashable, CacheEntry]"] = {}
        self._lock = threading.RLock()
        self._stats = {'hits': 0, 'misses': 0, 'evictions': 0}

    def _category(self, category: str) -> "OrderedDict[Hashable, CacheEntry]":
        if category not in self._cache:
            self._cache[category] = OrderedDict()
        return self._cache[category]

    def get(self, category: str, key: Hashable, default: Any = None) -> Any:
        """Return the cached value, or `default` on a miss"""
        with self._lock:
            cache = self._category(category)
            entry = cache.get(key)
            if entry is None:
                self._stats['misses'] += 1
                return default
            cache.move_to_end(key)
            entry.touch()
            self._stats['hits'] += 1
            logger.debug(f"Cache hit: {category}")
            return entry.value

    def set(self, category: str, key: Hashable, value: Any) -> None:
        """Store a value, evicting the least recently used entry when full"""
        with self._lock:
            cache = self._category(category)
            limit = self.DEFAULT_MAX_SIZE.get(category, self.DEFAULT_MAX_SIZE['default'])
            while len(cache) >= limit:
                cache.popitem(last=False)
                self._stats['evictions'] += 1
                logger.debug(f"Cache eviction: {category}")
            cache[key] = CacheEntry(value=value)

    def clear_category(self, category: str) -> int:
        """Clear all entries in a category, returning how many were dropped"""
        with self._lock:
            count = len(self._cache.get(category, ()))
            self._cache[category] = OrderedDict()
            return count

    def clear_all(self) -> int:
        with self._lock:
            total = sum(len(c) for c in self._cache.values())
            self._cache = {}
            self._stats = {'hits': 0, 'misses': 0, 'evictions': 0}
            logger.info(f"Cache cleared: all ({total} entries)")
            return total

    def get_stats(self) -> Dict[str, Any]:
        """Get cache statistics"""
        with self._lock:
            lookups = self._stats['hits'] + self._stats['misses']
            hit_rate = self._stats['hits'] / lookups * 100 if lookups else 0
            return {
                'total_entries': sum(len(c) for c in self._cache.values()),
                'categories': {k: len(v) for k, v in self._cache.items()},
                'hits': self._stats['hits'],
                'misses': self._stats['misses'],
                'evictions': self._stats['evictions'],
                'hit_rate_percent': round(hit_rate, 2),
            }


# Global singleton instance
_global_cache = GlobalCache()


def get_cache() -> GlobalCache:
    """Get the global cache instance"""
    return _global_cache


def cached(category: str, key_func: Optional[Callable[..., Hashable]] = None):
    """
    Decorator memoizing a pure function in the global cache.

    Args:
        category: Cache category
        key_func: Builds a hashable key from the call arguments
            (default: the positional and keyword arguments themselves)

    Example:
        @cached('bound_states', key_func=lambda p, cfg: (p, cfg))
        def find_bound_states(p, cfg):
            ...
    """
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            if key_func:
                key = (func.__name__, key_func(*args, **kwargs))
            else:
                key = (func.__name__, args, tuple(sorted(kwargs.items())))

            cache = get_cache()
            value = cache.get(category, key, _MISSING)
            if value is not _MISSING:
                return value

            value = func(*args, **kwargs)
            cache.set(category, key, value)
            return value

        wrapper.cache_clear = lambda: get_cache().clear_category(category)
        wrapper.cache_info = lambda: get_cache().get_stats()
        return wrapper
    return decorator
