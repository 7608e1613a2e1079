"""
Memoization of inner Wright values for the CBI double series
"""
import functools
import threading
from typing import Callable, Dict, Hashable, Optional

from cachetools import LRUCache

from wrightlevy.app.core.config import settings
from wrightlevy.app.core.logging import get_logger

logger = get_logger("wrightlevy.app.services.caching")

_cache: LRUCache = LRUCache(maxsize=settings.INNER_CACHE_SIZE)
# Guards the LRU bookkeeping; per-key locks serialize computation of one value
_cache_lock = threading.Lock()
_key_locks: Dict[Hashable, threading.Lock] = {}
_locks_dict_lock = threading.Lock()

_stats = {"hits": 0, "misses": 0}


def cache_key(func_name: str, *args, **kwargs) -> tuple:
    """Hashable key from a function name and its (hashable) arguments"""
    return (func_name, args, tuple(sorted(kwargs.items())))


def memoized(func: Callable) -> Callable:
    """
    Cache a pure function of hashable arguments in the shared LRU

    Concurrent callers asking for the same key wait on a per-key lock and
    re-check the cache, so every caller sees the value computed once.
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        key = cache_key(func.__name__, *args, **kwargs)

        with _cache_lock:
            if key in _cache:
                _stats["hits"] += 1
                return _cache[key]

        with _locks_dict_lock:
            key_lock = _key_locks.setdefault(key, threading.Lock())

        with key_lock:
            with _cache_lock:
                if key in _cache:
                    _stats["hits"] += 1
                    return _cache[key]
            value = func(*args, **kwargs)
            with _cache_lock:
                _cache[key] = value
                _stats["misses"] += 1

        with _locks_dict_lock:
            _key_locks.pop(key, None)
        return value

    return wrapper


def cache_stats() -> Dict[str, int]:
    with _cache_lock:
        return {"hits": _stats["hits"], "misses": _stats["misses"], "size": len(_cache)}


def invalidate_cache(prefix: Optional[str] = None):
    """
    Drop cached values

    Args:
        prefix: Optional function name; only its entries are dropped
    """
    with _cache_lock:
        if prefix:
            for key in [k for k in _cache.keys() if k[0] == prefix]:
                del _cache[key]
        else:
            _cache.clear()
            _stats["hits"] = 0
            _stats["misses"] = 0
    logger.debug(f"Inner value cache invalidated (prefix: {prefix})")
