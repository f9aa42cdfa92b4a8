"""Run configuration: flat key=value text with section prefixes.

    seq.generator=factorial        # gevrey | factorial | custom | modulated
    seq.pmax=256
    upoly.mode=relaxed
    grid.x_max=32.0
    tol.kernel=1e-10
    output.dir=results

Sequence keys follow the SequenceSpec text form under the seq. prefix.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .errors import InvalidSequenceError, UsageError
from .weights import DEFAULT_PMAX, SequenceSpec, WeightSequence, make_sequence


@dataclass(frozen=True)
class UpolyConfig:
    mode: str = "relaxed"
    flavor: str = "beurling"
    q: int | None = None  # None: first q for which (M.5) holds
    k: float = 1.0
    rprime: float = 2.0
    box: float = 64.0


@dataclass(frozen=True)
class GridConfig:
    x_max: float = 32.0
    N: int = 2 ** 14
    strip_x_max: float = 50.0
    spacing: float = 0.125


@dataclass(frozen=True)
class TolConfig:
    kernel: float = 1e-10
    delta: float = 1e-6
    pair: float = 1e-8
    algebra: float = 1e-5


@dataclass(frozen=True)
class RunConfig:
    seq: SequenceSpec = SequenceSpec("factorial")
    pmax: int = DEFAULT_PMAX
    upoly: UpolyConfig = UpolyConfig()
    grid: GridConfig = GridConfig()
    tol: TolConfig = TolConfig()
    output_dir: str = "results"
    seed: int = 0

    def sequence(self) -> WeightSequence:
        return make_sequence(self.seq, self.pmax)

    def to_dict(self) -> dict:
        """Fully resolved form, embedded in every result record."""
        return {
            "seq": self.seq.to_text(self.pmax, prefix="seq.").splitlines(),
            "upoly": dataclasses.asdict(self.upoly),
            "grid": dataclasses.asdict(self.grid),
            "tol": dataclasses.asdict(self.tol),
            "output": {"dir": self.output_dir},
            "run": {"seed": self.seed},
        }

    def to_text(self) -> str:
        lines = self.seq.to_text(self.pmax, prefix="seq.").splitlines()
        for sec in ("upoly", "grid", "tol"):
            for k, v in dataclasses.asdict(getattr(self, sec)).items():
                if v is not None:
                    lines.append(f"{sec}.{k}={v!r}" if isinstance(v, float) else f"{sec}.{k}={v}")
        lines.append(f"output.dir={self.output_dir}")
        lines.append(f"run.seed={self.seed}")
        return "\n".join(lines) + "\n"


_SECTIONS = {"upoly": UpolyConfig, "grid": GridConfig, "tol": TolConfig}
_SEQ_KEYS = ("generator", "sigma", "values", "lseq", "pmax")


def _coerce(cls, key: str, raw: str, where: str):
    ftype = {f.name: f.type for f in dataclasses.fields(cls)}[key]
    try:
        if "int" in ftype:
            return None if raw.lower() == "none" and "None" in ftype else int(raw)
        if "float" in ftype:
            return float(raw)
    except ValueError:
        raise UsageError(f"{where}: {key}={raw!r} is not a valid {ftype}") from None
    return raw


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse config text; unknown keys and nonpositive tolerances are usage errors."""
    kv: dict[str, tuple[str, int]] = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{source}:{n}: expected key=value, got {line!r}")
        k, v = (t.strip() for t in line.split("=", 1))
        if k in kv:
            raise UsageError(f"{source}:{n}: duplicate key {k}")
        kv[k] = (v, n)

    seq_kv, sec_vals = {}, {s: {} for s in _SECTIONS}
    out_dir, seed = RunConfig.output_dir, RunConfig.seed
    for k, (v, n) in kv.items():
        where = f"{source}:{n}"
        head, _, rest = k.partition(".")
        if head == "seq" and (rest in _SEQ_KEYS or rest.startswith("base.") and rest.split(".")[-1] in _SEQ_KEYS):
            seq_kv[k] = v
        elif head in _SECTIONS and rest in {f.name for f in dataclasses.fields(_SECTIONS[head])}:
            sec_vals[head][rest] = _coerce(_SECTIONS[head], rest, v, where)
        elif k == "output.dir":
            out_dir = v
        elif k == "run.seed":
            try:
                seed = int(v)
            except ValueError:
                raise UsageError(f"{where}: run.seed must be an integer") from None
        else:
            raise UsageError(f"{where}: unknown key {k!r}")

    if seq_kv:
        try:
            spec, pmax = SequenceSpec._from_kv(seq_kv, "seq.")
        except (InvalidSequenceError, ValueError) as e:
            raise UsageError(f"{source}: {e}") from None
    else:
        spec, pmax = RunConfig.seq, None
    tol = TolConfig(**sec_vals["tol"])
    for name, v in dataclasses.asdict(tol).items():
        if not v > 0:
            raise UsageError(f"{source}: tol.{name} must be positive, got {v!r}")
    grid = GridConfig(**sec_vals["grid"])
    if not (grid.x_max > 0 and grid.N > 0 and grid.strip_x_max > 0 and grid.spacing > 0):
        raise UsageError(f"{source}: grid parameters must be positive")
    up = UpolyConfig(**sec_vals["upoly"])
    return RunConfig(spec, DEFAULT_PMAX if pmax is None else pmax, up, grid, tol, out_dir, seed)


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    return parse_config(text, path)
