"""Scenario files, trace CSV and report records.

A scenario file is an INI-style document::

    [guidance]
    tf = 70
    case = D

Sections are ``geometry``, ``interceptor``, ``target``, ``guidance``,
``actuation`` and ``integration``. Angles are in degrees, lengths in metres,
times in seconds. Keys placed before the first section header are looked up by
name across all sections, so a file holding just ``tf = 70`` is valid. Missing
keys take the baseline defaults; unknown keys are errors.
"""

from __future__ import annotations

import configparser
import io
import json
import math
import re
from dataclasses import dataclass

import numpy as np

from .actuation import ActuatorConfig
from .errors import ConfigurationError
from .feasibility import FeasibilityReport
from .guidance_heading import OctantSelector, VirtualInputCase
from .sim_engine import TRACE_COLUMNS, ImpactReport, Law, Scenario, Trace


@dataclass(frozen=True)
class _Key:
    section: str
    name: str
    kind: str  # float, deg, str, auto (float or 'auto')


# (section, key) -> kind; order here is the order render_scenario writes
SCHEMA = (
    _Key("geometry", "interceptor_x", "float"),
    _Key("geometry", "interceptor_y", "float"),
    _Key("geometry", "interceptor_z", "float"),
    _Key("geometry", "target_x", "float"),
    _Key("geometry", "target_y", "float"),
    _Key("geometry", "target_z", "float"),
    _Key("interceptor", "vm", "float"),
    _Key("interceptor", "theta_m0", "deg"),
    _Key("interceptor", "psi_m0", "deg"),
    _Key("target", "speed", "float"),
    _Key("target", "theta_t", "deg"),
    _Key("target", "psi_t", "deg"),
    _Key("guidance", "law", "str"),
    _Key("guidance", "case", "str"),
    _Key("guidance", "octant", "str"),
    _Key("guidance", "tf", "float"),
    _Key("guidance", "k1", "auto"),
    _Key("guidance", "k2", "float"),
    _Key("guidance", "k3", "float"),
    _Key("guidance", "k4", "float"),
    _Key("guidance", "phi", "float"),
    _Key("guidance", "a", "float"),
    _Key("guidance", "switching", "str"),
    _Key("guidance", "sigma_max", "deg"),
    _Key("guidance", "eta", "float"),
    _Key("actuation", "tau", "float"),
    _Key("actuation", "a_max", "float"),
    _Key("integration", "dt", "float"),
    _Key("integration", "r_kill", "float"),
    _Key("integration", "t_limit", "auto"),
)

SECTIONS = tuple(dict.fromkeys(k.section for k in SCHEMA))
_BY_SECTION = {(k.section, k.name): k for k in SCHEMA}
_BY_NAME = {k.name: k for k in SCHEMA}
_TOP = "__top__"

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")


def _line_index(text: str) -> dict:
    """(section, key) -> 1-based line number, for error messages."""
    where = {}
    section = _TOP
    for n, line in enumerate(text.splitlines(), 1):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip().lower()
            continue
        m = _KEY_RE.match(line)
        if m and not line[:1].isspace():
            where.setdefault((section, m.group(1).strip().lower()), n)
    return where


def _has_top_level_keys(text: str) -> bool:
    for line in text.splitlines():
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        return not s.startswith("[")
    return False


def _convert(key: _Key, raw: str, line):
    where = f"line {line}: " if line else ""
    raw = raw.strip()
    try:
        if key.kind == "str":
            if not raw:
                raise ValueError("empty value")
            return raw
        if key.kind == "auto" and raw.lower() in ("", "auto", "none"):
            return None
        in_rad = key.kind == "deg" and raw.lower().endswith(" rad")
        value = float(raw[:-4] if in_rad else raw)
        if math.isnan(value):
            raise ValueError("NaN is not allowed")
        if key.kind == "deg" and not in_rad:
            return math.radians(value)
        return value
    except ValueError as exc:
        raise ConfigurationError(f"{where}key '{key.section}.{key.name}': cannot parse {raw!r} ({exc})") from None


def parse_scenario(text: str, overrides: dict | None = None) -> Scenario:
    """Validated :class:`Scenario` from scenario-file text.

    ``overrides`` maps key names to values in file units (degrees for angles);
    they replace whatever the file says before defaults are resolved, so a case
    override still picks that case's default ``k1``.
    """
    lines = _line_index(text)
    offset = 0
    if _has_top_level_keys(text):
        text = f"[{_TOP}]\n" + text
        offset = 1
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                   default_section="__defaults_unused__")
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        msg = str(exc)
        lineno = getattr(exc, "lineno", None)
        if getattr(exc, "errors", None):
            lineno = exc.errors[0][0]
            bad = text.splitlines()[lineno - 1].strip()
            msg = f"line {lineno - offset}: cannot parse {bad!r}"
        elif lineno is not None:
            msg = f"line {lineno - offset}: {getattr(exc, 'message', msg).splitlines()[0]}"
        raise ConfigurationError(f"malformed scenario file: {msg}") from None

    values = {}
    for section in cp.sections():
        sec = section.lower()
        if sec != _TOP and sec not in SECTIONS:
            raise ConfigurationError(f"unknown section [{section}] (expected one of {', '.join(SECTIONS)})")
        for name, raw in cp.items(section):
            line = lines.get((sec, name))
            key = _BY_NAME.get(name) if sec == _TOP else _BY_SECTION.get((sec, name))
            if key is None:
                where = f"line {line}: " if line else ""
                label = name if sec == _TOP else f"{sec}.{name}"
                raise ConfigurationError(f"{where}unknown key '{label}'")
            if key.name in values:
                raise ConfigurationError(f"line {line}: key '{key.name}' given twice")
            values[key.name] = (_convert(key, raw, line), line)
    for name, raw in (overrides or {}).items():
        key = _BY_NAME.get(name)
        if key is None:
            raise ConfigurationError(f"unknown override key '{name}'")
        values[key.name] = (_convert(key, str(raw), None), None)
    return _build(values)


def _build(values: dict) -> Scenario:
    def get(name, default):
        return values[name][0] if name in values else default

    d = Scenario()
    kwargs = dict(
        interceptor_pos0=(get("interceptor_x", d.interceptor_pos0[0]), get("interceptor_y", d.interceptor_pos0[1]),
                          get("interceptor_z", d.interceptor_pos0[2])),
        target_pos0=(get("target_x", d.target_pos0[0]), get("target_y", d.target_pos0[1]),
                     get("target_z", d.target_pos0[2])),
        target_speed=get("speed", d.target_speed),
        target_heading=(get("theta_t", d.target_heading[0]), get("psi_t", d.target_heading[1])),
        vm=get("vm", d.vm),
        tf=get("tf", d.tf),
        theta_m0=get("theta_m0", d.theta_m0),
        psi_m0=get("psi_m0", d.psi_m0),
        k1=get("k1", None),
        k2=get("k2", d.k2),
        k3=get("k3", d.k3),
        k4=get("k4", d.k4),
        phi=get("phi", d.phi),
        a=get("a", d.a),
        switching=get("switching", d.switching),
        sigma_max=get("sigma_max", d.sigma_max),
        eta=get("eta", d.eta),
        dt=get("dt", d.dt),
        r_kill=get("r_kill", d.r_kill),
        t_limit=get("t_limit", None),
    )

    def lookup(name, fn, default):
        if name not in values:
            return default
        raw, line = values[name]
        try:
            return fn(raw)
        except (ValueError, ConfigurationError) as exc:
            where = f"line {line}: " if line else ""
            raise ConfigurationError(f"{where}key '{name}': {exc}") from None

    kwargs["law"] = lookup("law", _parse_law, d.law)
    kwargs["case"] = lookup("case", lambda s: VirtualInputCase(s.strip().upper()), d.case)
    kwargs["octant"] = lookup("octant", OctantSelector.from_name, d.octant)
    try:
        kwargs["actuator"] = ActuatorConfig(get("tau", d.actuator.tau), get("a_max", d.actuator.a_max))
        return Scenario(**kwargs)
    except ConfigurationError as exc:
        raise ConfigurationError(f"invalid scenario: {exc}") from None


def _parse_law(text: str) -> Law:
    key = text.strip().lower().replace("_", "").replace("-", "")
    for law in Law:
        if law.value.lower() == key or law.value.lower().removesuffix("angle") == key:
            return law
    raise ValueError(f"unknown law {text!r} (expected LeadAngle or HeadingAngle)")


def load_scenario(path, overrides: dict | None = None) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read(), overrides)


def _deg_text(rad: float) -> str:
    """Degree string that parses back to exactly ``rad``.

    A few radian values have no exact degree preimage; those are written with an
    explicit ``rad`` suffix instead.
    """
    d = math.degrees(rad)
    lo = hi = d
    for _ in range(64):
        for cand in (lo, hi):
            if math.radians(cand) == rad:
                return repr(cand)
        lo = math.nextafter(lo, -math.inf)
        hi = math.nextafter(hi, math.inf)
    return f"{rad!r} rad"


def render_scenario(sc: Scenario) -> str:
    """Scenario-file text for ``sc``; ``parse_scenario`` inverts it."""
    vals = {
        "interceptor_x": sc.interceptor_pos0[0], "interceptor_y": sc.interceptor_pos0[1],
        "interceptor_z": sc.interceptor_pos0[2],
        "target_x": sc.target_pos0[0], "target_y": sc.target_pos0[1], "target_z": sc.target_pos0[2],
        "vm": sc.vm, "theta_m0": sc.theta_m0, "psi_m0": sc.psi_m0,
        "speed": sc.target_speed, "theta_t": sc.target_heading[0], "psi_t": sc.target_heading[1],
        "law": sc.law.value, "case": sc.case.value, "octant": sc.octant.name,
        "tf": sc.tf, "k1": sc.k1, "k2": sc.k2, "k3": sc.k3, "k4": sc.k4, "phi": sc.phi, "a": sc.a,
        "switching": sc.switching, "sigma_max": sc.sigma_max, "eta": sc.eta,
        "tau": sc.actuator.tau, "a_max": sc.actuator.a_max,
        "dt": sc.dt, "r_kill": sc.r_kill, "t_limit": sc.t_limit,
    }
    out = []
    for section in SECTIONS:
        out.append(f"[{section}]")
        for key in SCHEMA:
            if key.section != section:
                continue
            v = vals[key.name]
            if v is None:
                text = "auto"
            elif key.kind == "str":
                text = str(v)
            elif key.kind == "deg":
                text = _deg_text(v)
            else:
                text = repr(float(v))
            out.append(f"{key.name} = {text}")
        out.append("")
    return "\n".join(out)


# --- traces -----------------------------------------------------------------

ANGLE_COLUMNS = frozenset(("theta", "psi", "theta_m", "psi_m", "sigma", "sigma_d", "theta_md", "psi_md",
                           "e2", "e3", "e4"))
CSV_HEADER = ",".join(TRACE_COLUMNS)


def _format_column(name: str, values: np.ndarray) -> list:
    if name == "flags":
        return [str(int(v)) for v in values]
    if name in ANGLE_COLUMNS:
        values = np.degrees(values)
    return ["" if v != v else format(v, ".12g") for v in values.tolist()]


def _open_dest(destination):
    if hasattr(destination, "write"):
        return destination, False
    return open(destination, "w", encoding="utf-8", newline=""), True


def write_trace(trace: Trace, destination) -> int:
    """Write ``trace`` as CSV (angles in degrees, inapplicable fields empty).

    ``destination`` is a path or a text stream. Returns the number of bytes written.
    """
    if trace is None or len(trace) == 0:
        raise ValueError("refusing to write an empty trace")
    cols = [_format_column(name, trace.columns[name]) for name in TRACE_COLUMNS]
    body = "\n".join(",".join(row) for row in zip(*cols))
    text = CSV_HEADER + "\n" + body + "\n"
    fh, owned = _open_dest(destination)
    try:
        fh.write(text)
    finally:
        if owned:
            fh.close()
    return len(text.encode("utf-8"))


def read_trace(source) -> dict:
    """Columns of a trace CSV as float arrays, in file units (degrees); empty fields become NaN."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    lines = text.splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("not a trace file: header mismatch")
    rows = [line.split(",") for line in lines[1:] if line]
    out = {}
    for j, name in enumerate(TRACE_COLUMNS):
        out[name] = np.array([float(r[j]) if r[j] else math.nan for r in rows])
    out["flags"] = out["flags"].astype(np.int64)
    return out


# --- reports ----------------------------------------------------------------

def _fmt(v) -> str:
    # human-facing lines carry 12 significant digits; the json line keeps full precision
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def report_fields(report) -> tuple[str, dict]:
    """Record type and the ordered key/value pairs written for ``report``."""
    if isinstance(report, ImpactReport):
        return "impact", report.to_dict()
    if isinstance(report, FeasibilityReport):
        d = report.to_dict()
        flat = {
            "case": d["case"], "k1": d["k1"], "tf": d["tf"], "eta": d["eta"],
            "e3_0": d["e3_0"], "e4_0": d["e4_0"], "t_e2_zero": d["t_e2_zero"],
            "t_necessary_min": d["t_necessary"][0], "t_necessary_max": d["t_necessary"][1],
            "t_min": d["t_sufficient"][0], "t_max": d["t_sufficient"][1],
            "k1_max": d["k1_max"], "tc_bound": d["tc_bound"], "lemma2_ok": d["lemma2_ok"],
            "classification": report.classify(),
        }
        return "feasibility", flat
    raise TypeError(f"cannot serialise {type(report).__name__}")


def format_report(report) -> str:
    kind, flat = report_fields(report)
    lines = [f"type={kind}"] + [f"{k}={_fmt(v)}" for k, v in flat.items()]
    payload = {"type": kind, **report.to_dict()}
    lines.append("json=" + json.dumps(payload, separators=(",", ":")))
    return "\n".join(lines) + "\n"


def write_report(report, destination) -> int:
    """Write a key=value record plus one ``json=`` line; returns bytes written."""
    text = format_report(report)
    fh, owned = _open_dest(destination)
    try:
        fh.write(text)
    finally:
        if owned:
            fh.close()
    return len(text.encode("utf-8"))


def parse_report(text: str):
    """Inverse of :func:`format_report`; reads the ``json=`` line."""
    for line in text.splitlines():
        if line.startswith("json="):
            payload = json.loads(line[5:])
            kind = payload.pop("type", None)
            if kind == "impact":
                return ImpactReport.from_dict(payload)
            if kind == "feasibility":
                return FeasibilityReport.from_dict(payload)
            raise ValueError(f"unknown report type {kind!r}")
    raise ValueError("no json= line in report")


def read_report(path):
    with open(path, encoding="utf-8") as fh:
        return parse_report(fh.read())


def report_values(text: str) -> dict:
    """The key=value lines of a report as strings (the json line excluded)."""
    out = {}
    for line in io.StringIO(text):
        line = line.rstrip("\n")
        if not line or line.startswith("json=") or "=" not in line:
            continue
        k, v = line.split("=", 1)
        out[k] = v
    return out

