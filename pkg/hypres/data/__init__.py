from hypres.data.orbit_cache import OrbitCache
from hypres.data.run_config import RunConfig, load_run_config
from hypres.data.serialization import SCHEMA_VERSION, canonical_hash, dumps, write_csv, write_json

__all__ = [
    "OrbitCache",
    "RunConfig",
    "load_run_config",
    "SCHEMA_VERSION",
    "canonical_hash",
    "dumps",
    "write_csv",
    "write_json",
]
