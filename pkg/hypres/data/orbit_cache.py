"""
File-backed cache of periodic orbits.

Entries are keyed by the sha256 of the system definition plus the energy
written with 17 significant digits; values are PeriodicOrbit records.
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional, Union

import structlog

from hypres.core.hamiltonian import HamiltonianSystem
from hypres.data.serialization import canonical_hash, dumps
from hypres.dynamics.orbits import PeriodicOrbit
from hypres.utils.config import get_config

logger = structlog.get_logger()


class OrbitCache:
    def __init__(self, path: Optional[Union[str, Path]] = None, enabled: Optional[bool] = None):
        settings = get_config()
        self.path = Path(path or settings.cache)
        self.enabled = settings.cache_enabled if enabled is None else enabled
        self.hits = 0
        self.misses = 0
        self.dropped = 0
        self._entries: Optional[Dict[str, Any]] = None

    @staticmethod
    def system_hash(system: HamiltonianSystem) -> str:
        if system.spec is None:
            return canonical_hash({"name": system.name, "n": system.n})
        return canonical_hash(system.spec.to_dict())

    def generate_key(self, system: HamiltonianSystem, energy: float) -> str:
        """Consistent key for (system, energy)."""
        return f"orbit:{self.system_hash(system)}:{format(float(energy), '.17g')}"

    def _load(self) -> Dict[str, Any]:
        if self._entries is not None:
            return self._entries
        self._entries = {}
        if self.path.exists():
            try:
                data = json.loads(self.path.read_text(encoding="utf-8"))
                if not isinstance(data, dict):
                    raise ValueError("cache root is not an object")
                self._entries = data
            except (OSError, ValueError) as e:
                logger.warning("orbit cache unreadable, starting empty", path=str(self.path), error=str(e))
        return self._entries

    def _flush(self) -> None:
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(dumps(self._load()), encoding="utf-8")
        except OSError as e:
            logger.error("orbit cache write failed", path=str(self.path), error=str(e))

    def get(self, system: HamiltonianSystem, energy: float) -> Optional[PeriodicOrbit]:
        """Cached orbit for (system, energy); corrupted entries are dropped."""
        if not self.enabled:
            return None
        key = self.generate_key(system, energy)
        entries = self._load()
        record = entries.get(key)
        if record is None:
            self.misses += 1
            logger.info("orbit cache MISS", key=key)
            return None
        try:
            orbit = PeriodicOrbit.from_dict(record, system)
            if orbit.ref_point.n != system.n:
                raise ValueError("cached orbit has the wrong dimension")
        except (KeyError, TypeError, ValueError) as e:
            logger.warning("orbit cache entry corrupted, recomputing", key=key, error=str(e))
            del entries[key]
            self.dropped += 1
            self.misses += 1
            self._flush()
            return None
        self.hits += 1
        logger.info("orbit cache HIT", key=key)
        return orbit

    def set(self, system: HamiltonianSystem, orbit: PeriodicOrbit) -> bool:
        if not self.enabled:
            return False
        self._load()[self.generate_key(system, orbit.energy)] = orbit.to_dict()
        self._flush()
        return True

    def invalidate(self, system: Optional[HamiltonianSystem] = None) -> int:
        """Remove every entry, or those of one system; returns the number removed."""
        entries = self._load()
        prefix = "orbit:" if system is None else f"orbit:{self.system_hash(system)}:"
        stale = [k for k in entries if k.startswith(prefix)]
        for key in stale:
            del entries[key]
        if stale:
            self._flush()
        return len(stale)

    def note(self) -> str:
        if not self.enabled:
            return "cache disabled"
        return f"cache hits={self.hits} misses={self.misses} dropped={self.dropped}"
