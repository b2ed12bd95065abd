"""Run configuration: sectioned key = value text, fully validated.

The format is deliberately tiny: `[section]` headers, `key = value` pairs,
`#` comments, UTF-8.  Parsing collects every error instead of stopping at
the first, and parse -> serialize -> parse is the identity on the result.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .coefficients import LeslieCoefficients, from_independent, preset
from .diagnostics import default_sobolev_index
from .dynamics import SolverConfig, cfl_limit
from .spectral import make_grid

__all__ = ["RunConfig", "ConfigError", "parse_config", "serialize_config", "load_config"]


class ConfigError(ValueError):
    """Carries the full list of validation problems."""

    def __init__(self, errors: list[str]):
        super().__init__("invalid configuration:\n  " + "\n  ".join(errors))
        self.errors = errors


@dataclass(frozen=True)
class RunConfig:
    dim: int
    n: int
    coeffs: LeslieCoefficients
    preset_name: str | None
    dt: float
    integrator: str
    dealias: str
    cfl_safety: float
    picard_max_iters: int
    picard_tol: float
    renormalize_every: int
    kind: str
    amplitude: float
    seed: int
    s: int
    eta_mode: str  # "auto" | "fixed" | "none"
    eta_value: float | None
    eta_constant: float
    sample_every: int
    csv_path: str | None
    snapshot_prefix: str | None
    snapshot_every: int
    t_end: float

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            dt=self.dt,
            integrator=self.integrator,
            dealias=self.dealias,
            cfl_safety=self.cfl_safety,
            picard_max_iters=self.picard_max_iters,
            picard_tol=self.picard_tol,
            renormalize_every=self.renormalize_every,
        )


_SCHEMA = {
    "grid": {"dim", "n"},
    "coefficients": {"preset", "mu1", "mu4", "mu5", "mu6", "lambda1", "rho1", "delta"},
    "solver": {"dt", "integrator", "dealias", "cfl_safety",
               "picard_max_iters", "picard_tolerance", "renormalize_every"},
    "initial": {"kind", "amplitude", "seed"},
    "diagnostics": {"s", "eta", "eta_constant", "sample_every"},
    "output": {"csv", "snapshots", "snapshot_every"},
    "run": {"t_end"},
}

_DEALIAS_NAMES = {"2/3": "rule23", "rule23": "rule23", "full": "full"}


def _parse_sections(text: str, errors: list[str]) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SCHEMA:
                errors.append(f"line {lineno}: unknown section [{current}]")
                sections.setdefault(current, {})
            else:
                sections.setdefault(current, {})
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        if current is None:
            errors.append(f"line {lineno}: key outside any [section]")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        known = _SCHEMA.get(current, set())
        if current in _SCHEMA and key not in known:
            errors.append(f"line {lineno}: unknown key {key!r} in [{current}]")
            continue
        if key in sections[current]:
            errors.append(f"line {lineno}: duplicate key {key!r} in [{current}]")
            continue
        sections[current][key] = value
    return sections


_MISSING = object()
_CONV_NAMES = {"_to_int": "an integer", "_to_float": "a number", "str": "text"}


class _Reader:
    def __init__(self, sections, errors):
        self.sections = sections
        self.errors = errors

    def get(self, section, key, conv, default=_MISSING, required=False):
        sec = self.sections.get(section, {})
        if key not in sec:
            if required:
                self.errors.append(f"missing required key {key!r} in [{section}]")
                return None
            return None if default is _MISSING else default
        raw = sec[key]
        try:
            return conv(raw)
        except (TypeError, ValueError):
            kind = _CONV_NAMES.get(conv.__name__, conv.__name__)
            self.errors.append(f"[{section}] {key} = {raw!r}: expected {kind}")
            return None


def _to_int(raw: str) -> int:
    return int(raw, 10)


def _to_float(raw: str) -> float:
    return float(raw)


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate; raises ConfigError listing every problem."""
    errors: list[str] = []
    sections = _parse_sections(text, errors)
    r = _Reader(sections, errors)

    dim = r.get("grid", "dim", _to_int, required=True)
    n = r.get("grid", "n", _to_int, required=True)

    coeffs = None
    preset_name = None
    co = sections.get("coefficients", {})
    if "preset" in co:
        extra = sorted(set(co) - {"preset", "delta"})
        if extra:
            errors.append(
                f"[coefficients] preset cannot be combined with explicit keys {extra}"
            )
        preset_name = co["preset"]
        try:
            coeffs = preset(preset_name)
        except ValueError as exc:
            errors.append(str(exc))
        delta = r.get("coefficients", "delta", _to_float)
        if coeffs is not None and delta is not None and coeffs.delta != delta:
            try:
                coeffs = replace(coeffs, delta=delta)
            except ValueError as exc:
                errors.append(str(exc))
    elif co:
        vals = {key: r.get("coefficients", key, _to_float, required=True)
                for key in ("mu1", "mu4", "mu5", "mu6", "lambda1", "rho1")}
        delta = r.get("coefficients", "delta", _to_float)
        if all(v is not None for v in vals.values()):
            try:
                coeffs = from_independent(delta=delta, **vals)
            except ValueError as exc:
                errors.append(str(exc))
    else:
        errors.append("missing [coefficients] section (preset or explicit values)")

    dt = r.get("solver", "dt", _to_float, required=True)
    integrator = r.get("solver", "integrator", str, default="if_rk4")
    dealias_raw = r.get("solver", "dealias", str, default="2/3")
    dealias = _DEALIAS_NAMES.get(dealias_raw)
    if dealias is None:
        errors.append(f"[solver] dealias = {dealias_raw!r}: expected 2/3 or full")
    if integrator not in ("rk4", "if_rk4"):
        errors.append(f"[solver] integrator = {integrator!r}: expected rk4 or if_rk4")
    cfl_safety = r.get("solver", "cfl_safety", _to_float, default=0.9)
    picard_max_iters = r.get("solver", "picard_max_iters", _to_int, default=30)
    picard_tol = r.get("solver", "picard_tolerance", _to_float, default=1e-10)
    renormalize_every = r.get("solver", "renormalize_every", _to_int, default=0)

    kind = r.get("initial", "kind", str, default="random")
    amplitude = r.get("initial", "amplitude", _to_float, required=True)
    seed = r.get("initial", "seed", _to_int, required=True)
    if kind not in ("random", "quiescent"):
        errors.append(f"[initial] kind = {kind!r}: expected random or quiescent")

    s = r.get("diagnostics", "s", _to_int,
              default=None if dim is None else default_sobolev_index(dim))
    eta_raw = r.get("diagnostics", "eta", str)
    eta_constant = r.get("diagnostics", "eta_constant", _to_float, default=1.0)
    sample_every = r.get("diagnostics", "sample_every", _to_int, default=1)
    eta_mode, eta_value = "none", None
    if eta_raw is not None:
        if eta_raw == "auto":
            eta_mode = "auto"
        else:
            try:
                eta_value = float(eta_raw)
                eta_mode = "fixed"
            except ValueError:
                errors.append(f"[diagnostics] eta = {eta_raw!r}: expected a number or auto")

    csv_path = r.get("output", "csv", str)
    snapshot_prefix = r.get("output", "snapshots", str)
    snapshot_every = r.get("output", "snapshot_every", _to_int, default=0)

    t_end = r.get("run", "t_end", _to_float, required=True)

    # semantic validation, only when the basics parsed
    if dim is not None and dim not in (2, 3):
        errors.append(f"[grid] dim = {dim}: expected 2 or 3")
    if n is not None and (n < 4 or n % 2):
        errors.append(f"[grid] n = {n}: expected an even integer >= 4")
    if dt is not None and dt <= 0:
        errors.append(f"[solver] dt = {dt}: must be positive")
    if cfl_safety is not None and not 0 < cfl_safety <= 1:
        errors.append(f"[solver] cfl_safety = {cfl_safety}: must lie in (0, 1]")
    if amplitude is not None and amplitude < 0:
        errors.append(f"[initial] amplitude = {amplitude}: must be nonnegative")
    if sample_every is not None and sample_every < 1:
        errors.append(f"[diagnostics] sample_every = {sample_every}: must be >= 1")
    if renormalize_every is not None and renormalize_every < 0:
        errors.append("[solver] renormalize_every must be >= 0")
    if snapshot_every is not None and snapshot_every < 0:
        errors.append("[output] snapshot_every must be >= 0")
    if s is not None and s < 0:
        errors.append(f"[diagnostics] s = {s}: must be >= 0")
    if t_end is not None and t_end <= 0:
        errors.append(f"[run] t_end = {t_end}: must be positive")

    if not errors and dim in (2, 3) and n and dt and t_end:
        nsteps = round(t_end / dt)
        if abs(nsteps * dt - t_end) > 1e-9 * max(1.0, t_end) or nsteps < 1:
            errors.append(f"[run] t_end = {t_end} is not an integer multiple of dt = {dt}")
        elif sample_every and nsteps % sample_every:
            errors.append(
                f"[diagnostics] sample_every = {sample_every} must divide the "
                f"step count {nsteps}"
            )
        grid = make_grid(dim, n)
        limit = cfl_safety * cfl_limit(grid, coeffs, integrator)
        if dt > limit:
            errors.append(
                f"[solver] dt = {dt} exceeds the stability limit {limit:.6g} "
                f"for n = {n} (before any flow contribution)"
            )

    if errors:
        raise ConfigError(errors)

    return RunConfig(
        dim=dim, n=n, coeffs=coeffs, preset_name=preset_name,
        dt=dt, integrator=integrator, dealias=dealias, cfl_safety=cfl_safety,
        picard_max_iters=picard_max_iters, picard_tol=picard_tol,
        renormalize_every=renormalize_every, kind=kind, amplitude=amplitude, seed=seed,
        s=s, eta_mode=eta_mode, eta_value=eta_value, eta_constant=eta_constant,
        sample_every=sample_every,
        csv_path=csv_path, snapshot_prefix=snapshot_prefix,
        snapshot_every=snapshot_every, t_end=t_end,
    )


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text form; parse(serialize(parse(x))) == parse(x)."""
    lines = ["[grid]", f"dim = {cfg.dim}", f"n = {cfg.n}", "", "[coefficients]"]
    if cfg.preset_name is not None:
        lines.append(f"preset = {cfg.preset_name}")
        if cfg.coeffs.delta is not None and (
            preset(cfg.preset_name).delta != cfg.coeffs.delta
        ):
            lines.append(f"delta = {cfg.coeffs.delta!r}")
    else:
        c = cfg.coeffs
        for key in ("mu1", "mu4", "mu5", "mu6", "lambda1", "rho1"):
            lines.append(f"{key} = {getattr(c, key)!r}")
        if c.delta is not None:
            lines.append(f"delta = {c.delta!r}")
    lines += [
        "",
        "[solver]",
        f"dt = {cfg.dt!r}",
        f"integrator = {cfg.integrator}",
        f"dealias = {'2/3' if cfg.dealias == 'rule23' else 'full'}",
        f"cfl_safety = {cfg.cfl_safety!r}",
        f"picard_max_iters = {cfg.picard_max_iters}",
        f"picard_tolerance = {cfg.picard_tol!r}",
        f"renormalize_every = {cfg.renormalize_every}",
        "",
        "[initial]",
        f"kind = {cfg.kind}",
        f"amplitude = {cfg.amplitude!r}",
        f"seed = {cfg.seed}",
        "",
        "[diagnostics]",
        f"s = {cfg.s}",
    ]
    if cfg.eta_mode == "auto":
        lines.append("eta = auto")
    elif cfg.eta_mode == "fixed":
        lines.append(f"eta = {cfg.eta_value!r}")
    lines.append(f"eta_constant = {cfg.eta_constant!r}")
    lines.append(f"sample_every = {cfg.sample_every}")
    lines += ["", "[output]"]
    if cfg.csv_path is not None:
        lines.append(f"csv = {cfg.csv_path}")
    if cfg.snapshot_prefix is not None:
        lines.append(f"snapshots = {cfg.snapshot_prefix}")
    lines.append(f"snapshot_every = {cfg.snapshot_every}")
    lines += ["", "[run]", f"t_end = {cfg.t_end!r}", ""]
    return "\n".join(lines)


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
