"""Run configuration: JSON schema, strict validation, SI-to-internal
conversion, and emission.

The on-disk schema uses the units experiments are quoted in (nm, eV, K,
Joule Fermi level, m^-3 doping, second times); ingestion converts to the
internal (eV, nm, fs) system.  Unknown keys are rejected with their path
(anti-typo), missing values fall back to the reference device defaults,
and emit(ingest(x)) round-trips bit-exactly.
"""

import json
from dataclasses import dataclass, field, asdict

from .constants import EV_PER_JOULE, FS_PER_SECOND, NM3_PER_M3
from .core import BiasSchedule, DeviceGeometry, Grids, PhysicalParams


class ConfigError(ValueError):
    pass


# (default, converter-to-internal) per key; None default means "derived".
_SCHEMA = {
    "geometry": {
        "L_nm": 135.0,
        "a1_nm": 50.0,
        "a2_nm": 60.0,
        "a3_nm": 65.0,
        "b3_nm": 70.0,
        "b2_nm": 75.0,
        "b1_nm": 85.0,
        "v0_eV": 0.3,
    },
    "physics": {
        "rel_mass": 0.067,
        "rel_permittivity": 11.44,
        "temperature_K": 300.0,
        "fermi_level_J": 6.7097e-21,
    },
    "doping": {
        "nD1_m3": 1.0e24,
        "nD2_m3": 5.0e21,
    },
    "mesh": {
        "J": 300,
        "P": 50,
        "P_coarse": None,       # default: P (no coarse/fine split)
        "dt_s": 1.0e-15,
        "t_final_s": 2.0e-12,
        "kM_per_m": None,       # default: sqrt(2m(EF + 7 kB T))/hbar
    },
    "bias": {
        "mode": "constant",
        "B_I_eV": 0.0,
        "B_inf_eV": 0.0,
        "t0_s": 1.0e-12,
    },
    "stationary": {
        "tol": 1.0e-15,
        "max_iterations": 200,
        "V_ref_eV": None,       # default: thermal energy kB T
    },
    "transient": {
        "snapshots": 20,
    },
}

_INT_KEYS = {"J", "P", "P_coarse", "max_iterations", "snapshots"}


@dataclass
class RunConfig:
    """Validated configuration with both the raw (SI) document and the
    internal-unit objects every solver consumes."""

    raw: dict
    params: PhysicalParams
    geom: DeviceGeometry
    bias: BiasSchedule
    grids: Grids
    tol: float
    max_iterations: int
    V_ref: float
    snapshots: int


def _check_keys(doc, schema, path=""):
    if not isinstance(doc, dict):
        raise ConfigError(f"config{path or ' root'} must be an object")
    for key in doc:
        if key not in schema:
            raise ConfigError(f"unknown key '{path}{key}'")


def _resolve(user: dict) -> dict:
    _check_keys(user, _SCHEMA)
    out = {}
    for block, keys in _SCHEMA.items():
        sub = user.get(block, {})
        _check_keys(sub, keys, path=f"{block}.")
        out[block] = {}
        for key, default in keys.items():
            val = sub.get(key, default)
            if val is None and default is None:
                out[block][key] = None
                continue
            if val is None:
                raise ConfigError(f"missing required key '{block}.{key}'")
            if key == "mode":
                if not isinstance(val, str):
                    raise ConfigError(f"'{block}.{key}' must be a string")
            elif key in _INT_KEYS:
                if not isinstance(val, int) or isinstance(val, bool):
                    raise ConfigError(f"'{block}.{key}' must be an integer")
            elif not isinstance(val, (int, float)) or isinstance(val, bool):
                raise ConfigError(f"'{block}.{key}' must be a number")
            out[block][key] = val
    return out


def build_config(user: dict) -> RunConfig:
    raw = _resolve(user)
    g = raw["geometry"]
    ph = raw["physics"]
    dp = raw["doping"]

    params = PhysicalParams.from_material(
        ph["rel_mass"], ph["rel_permittivity"], ph["temperature_K"],
        ph["fermi_level_J"],
    )
    try:
        geom = DeviceGeometry(
            L=g["L_nm"], a1=g["a1_nm"], a2=g["a2_nm"], a3=g["a3_nm"],
            b3=g["b3_nm"], b2=g["b2_nm"], b1=g["b1_nm"], v0=g["v0_eV"],
            nD1=dp["nD1_m3"] * NM3_PER_M3, nD2=dp["nD2_m3"] * NM3_PER_M3,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    b = raw["bias"]
    try:
        bias = BiasSchedule(
            mode={"cubic-ramp": "cubic"}.get(b["mode"], b["mode"]),
            B_I=b["B_I_eV"], B_inf=b["B_inf_eV"],
            t0=b["t0_s"] * FS_PER_SECOND,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    m = raw["mesh"]
    kM = m["kM_per_m"] * 1e-9 if m["kM_per_m"] is not None else params.default_kM()
    try:
        grids = Grids(
            L=geom.L, J=m["J"], P=m["P"],
            P_coarse=m["P_coarse"] if m["P_coarse"] is not None else m["P"],
            dt=m["dt_s"] * FS_PER_SECOND, kM=kM,
            t_final=m["t_final_s"] * FS_PER_SECOND,
        )
        grids.check_stability(params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    st = raw["stationary"]
    v_ref = st["V_ref_eV"] if st["V_ref_eV"] is not None else params.kT
    if v_ref <= 0 or st["tol"] <= 0:
        raise ConfigError("stationary.tol and stationary.V_ref_eV must be positive")

    return RunConfig(
        raw=raw,
        params=params,
        geom=geom,
        bias=bias,
        grids=grids,
        tol=st["tol"],
        max_iterations=st["max_iterations"],
        V_ref=v_ref,
        snapshots=raw["transient"]["snapshots"],
    )


def ingest_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    return build_config(doc)


def emit_config(cfg: RunConfig, path):
    """Write the fully resolved document; ingest(emit(cfg)) == cfg."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cfg.raw, fh, indent=2, sort_keys=True)
        fh.write("\n")
