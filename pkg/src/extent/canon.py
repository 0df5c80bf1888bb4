"""Canonical naming of finite carriers.

Every constructed carrier is the sorted list of its concrete
representations, renamed to ``0..n-1``.  This is the computable stand-in
for a global choice of pullbacks: two constructions of the same data give
identical tables.

``inject_fault`` is a test hook that perturbs the ordering at one named
construction site so that mutation tests can confirm the suite notices.
"""

from __future__ import annotations

import contextlib
import functools
import itertools

SITES = ("pullback", "comprehension", "ext_fiber", "code", "exponential", "local_elements")

_faults: dict[str, itertools.count] = {}
_clearers: list = []


def register_cache(clear) -> None:
    """Register a cache of canonically named objects, dropped whenever a
    fault is switched on or off."""
    _clearers.append(clear)


def cached(maxsize=None):
    def deco(fn):
        wrapped = functools.lru_cache(maxsize=maxsize)(fn)
        register_cache(wrapped.cache_clear)
        return wrapped
    return deco


def _drop_caches():
    for clear in _clearers:
        clear()


def canonical(items, site: str) -> list:
    out = sorted(set(items))
    counter = _faults.get(site)
    if counter is not None and len(out) > 1:
        # rotate by a call-dependent amount: deterministic per call, not across calls
        r = next(counter) % len(out)
        out = out[r:] + out[:r]
    return out


@contextlib.contextmanager
def inject_fault(site: str):
    if site not in SITES:
        raise KeyError(site)
    _drop_caches()
    _faults[site] = itertools.count(1)
    try:
        yield
    finally:
        del _faults[site]
        _drop_caches()
