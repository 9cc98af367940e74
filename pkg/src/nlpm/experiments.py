"""Figure presets and config-file runs, writing CSV and PGM artifacts."""

import os
from dataclasses import dataclass, field

import numpy as np

from . import imageio
from .diagnostics import DiagnosticsRecord, psnr
from .errors import ConfigError, InvalidArgumentError, InvalidSizeError
from .flow import FlowConfig, Formulation, differentiate_state, run_flow
from .spectral import BoundaryCondition, build_spectrum

# -- initial conditions -------------------------------------------------------------

ONE_D_IC = {
    "hat": lambda x: 5.0 - np.abs(10.0 * x - 5.0),
    "hat-osc": lambda x: 5.0 - np.abs(10.0 * x - 5.0) + 0.2 * np.sin(64.0 * np.pi * x),
    "eps": lambda x: 100.0 * x**2 * (1.0 - x**2),
    "eps-symmetric": lambda x: 100.0 * x**2 * (1.0 - x) ** 2,
    "regev": lambda x: np.sin(2.0 * np.pi * x) + 2.0 * np.sin(4.0 * np.pi * x),
    "sin2pi": lambda x: np.sin(2.0 * np.pi * x),
    "const": lambda x: np.ones_like(x),
}
TWO_D_IC = ("cartoon", "cartoon-noisy", "const2d")
NOISE_FRACTION = 0.15


def initial_condition(ic, s, seed=0):
    """Named generator sampled on the grid of ``s``, or a PGM file path."""
    if ic in ONE_D_IC:
        if s.dim != 1:
            raise InvalidArgumentError(f"initial condition {ic!r} is one-dimensional")
        return s.field(ONE_D_IC[ic](s.nodes))
    if ic == "const2d":
        return s.field(np.full(s.shape, 0.5))
    if ic in ("cartoon", "cartoon-noisy"):
        img = imageio.make_cartoon(s.n)
        if ic == "cartoon-noisy":
            img = imageio.salt_pepper(img, NOISE_FRACTION, seed)
        return s.field(img.pixels)
    if ic.lower().endswith(".pgm"):
        img = imageio.read_pgm(ic)
        return s.field(img.pixels)
    raise InvalidArgumentError(f"unknown initial condition {ic!r}")


def _ic_dim(ic):
    if ic in ONE_D_IC:
        return 1
    if ic in TWO_D_IC or ic.lower().endswith(".pgm"):
        return 2
    raise InvalidArgumentError(f"unknown initial condition {ic!r}")


# -- presets ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentPreset:
    id: str
    prefix: str
    ic: str
    n: int
    epsilons: tuple
    config: FlowConfig
    snapshots: tuple = ()
    outputs: tuple = field(default_factory=tuple)


PRESETS = {
    "fig-eps": ExperimentPreset(
        "fig-eps", "eps", "eps", 256, (0.0, 0.1, 0.2, 0.3), FlowConfig(0.0, 0.06, 100),
        outputs=("eps_eps{e}.csv", "eps_eps{e}_diagnostics.csv")),
    "fig-regev": ExperimentPreset(
        "fig-regev", "regev", "regev", 256, (0.3,), FlowConfig(0.3, 0.06, 400),
        snapshots=(0, 25, 50, 100, 200, 400),
        outputs=("regev_eps{e}.csv", "regev_eps{e}_diagnostics.csv")),
    "fig-kink": ExperimentPreset(
        "fig-kink", "kink", "hat", 256, (0.0, 0.1, 0.2, 0.3), FlowConfig(0.0, 0.06, 100),
        outputs=("kink_eps{e}.csv", "kink_eps{e}_diagnostics.csv")),
    "fig-kink-osc": ExperimentPreset(
        "fig-kink-osc", "kink_osc", "hat-osc", 256, (0.0, 0.3), FlowConfig(0.3, 0.01, 200),
        outputs=("kink_osc_eps{e}.csv", "kink_osc_eps{e}_diagnostics.csv")),
    "teaser-2d": ExperimentPreset(
        "teaser-2d", "teaser", "cartoon", 128, (0.6,),
        FlowConfig(0.6, 5e-6, 20, bc=BoundaryCondition.NEUMANN, formulation=Formulation.DIVERGENCE, seed=7),
        outputs=("teaser_clean.pgm", "teaser_noisy.pgm", "teaser_denoised.pgm",
                 "teaser_diagnostics.csv", "teaser_summary.txt")),
}


def eps_tag(eps):
    return format(float(eps), "g")


# -- overrides and config parsing ------------------------------------------------

def _parse_value(key, text):
    text = text.strip()
    try:
        if key in ("n", "steps", "seed", "max_iter"):
            return int(text)
        if key in ("ht", "tol"):
            return float(text)
        if key == "epsilon":
            return tuple(float(t) for t in text.split(","))
        if key == "gamma":
            return None if text.lower() == "none" else float(text)
        if key == "formulation":
            return Formulation(text.lower())
        if key == "bc":
            return BoundaryCondition(text.lower())
        if key == "symmetric_ic":
            if text.lower() not in ("0", "1", "true", "false", "yes", "no"):
                raise ValueError(text)
            return text.lower() in ("1", "true", "yes")
        if key in ("ic", "out", "solver"):
            if not text:
                raise ValueError("empty value")
            return text
    except ValueError as exc:
        raise ValueError(f"cannot parse {key}={text!r}: {exc}") from None
    raise KeyError(key)


OVERRIDE_KEYS = ("n", "steps", "seed", "max_iter", "ht", "tol", "epsilon", "gamma",
                 "formulation", "bc", "solver", "ic", "symmetric_ic")
CONFIG_KEYS = ("formulation", "bc", "n", "epsilon", "gamma", "ht", "steps", "tol", "seed", "ic", "out")
CONFIG_REQUIRED = ("n", "epsilon", "ht", "steps", "ic")


def parse_overrides(items):
    """``["key=value", ...]`` into a dict of parsed values."""
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, text = item.split("=", 1)
        key = key.strip()
        if key not in OVERRIDE_KEYS:
            raise ConfigError(f"unknown override key {key!r}")
        try:
            out[key] = _parse_value(key, text)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return out


def parse_config(text):
    """Parse ``key=value`` lines; returns ``(values, line_numbers)``."""
    values, lines = {}, {}
    for num, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {raw.strip()!r}", line=num)
        key, val = (t.strip() for t in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}", line=num)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", line=num)
        try:
            values[key] = _parse_value(key, val)
        except ValueError as exc:
            raise ConfigError(str(exc), line=num) from None
        lines[key] = num
    for key in CONFIG_REQUIRED:
        if key not in values:
            raise ConfigError(f"missing mandatory key {key!r}")
    if len(values["epsilon"]) != 1:
        raise ConfigError("epsilon takes a single value in config files", line=lines["epsilon"])
    return values, lines


# -- running and writing --------------------------------------------------------------

@dataclass
class RunOutput:
    files: list
    summary: str = ""
    results: dict = field(default_factory=dict)


def _records_columns(records):
    return {k: [getattr(r, k) for r in records] for k in DiagnosticsRecord.FIELDS}


def _write_1d(prefix, out_dir, eps, u0, result, s, manifest, files):
    x = s.nodes
    mean = 0.0
    cols = {
        "x": x,
        "u0": u0.values,
        "u_final": result.state.values,
        "du0": differentiate_state(u0, mean, s).values,
        "du_final": differentiate_state(result.state, mean, s).values,
    }
    for k in sorted(result.snapshots):
        cols[f"u_step{k}"] = result.snapshots[k].values
    path = os.path.join(out_dir, f"{prefix}_eps{eps_tag(eps)}.csv")
    imageio.write_csv(cols, path, manifest=manifest)
    files.append(path)
    path = os.path.join(out_dir, f"{prefix}_eps{eps_tag(eps)}_diagnostics.csv")
    imageio.write_csv(_records_columns(result.records), path, manifest=manifest)
    files.append(path)


def _flow_config(base, ov):
    changes = {}
    for key, attr in (("ht", "h_t"), ("steps", "steps"), ("tol", "solver_tol"), ("seed", "seed"),
                      ("max_iter", "solver_max_iter"), ("formulation", "formulation"), ("bc", "bc"),
                      ("solver", "solver")):
        if key in ov:
            changes[attr] = ov[key]
    if "gamma" in ov:
        changes["gamma_override"] = ov["gamma"]
    return base.replace(**changes)


def run_preset(preset_id, out_dir, overrides=None, observer=None):
    """Run one figure preset and write its artifacts into ``out_dir``."""
    if preset_id not in PRESETS:
        raise ConfigError(f"unknown preset {preset_id!r}; choose from {', '.join(PRESETS)}")
    preset = PRESETS[preset_id]
    ov = dict(overrides or {})
    os.makedirs(out_dir, exist_ok=True)
    n = ov.get("n", preset.n)
    base = _flow_config(preset.config, ov)
    epsilons = ov.get("epsilon", preset.epsilons)
    ic = ov.get("ic", preset.ic)
    if ov.get("symmetric_ic") and ic == "eps":
        ic = "eps-symmetric"
    out = RunOutput(files=[])
    if preset_id == "teaser-2d":
        return _run_teaser(preset, out_dir, n, base, epsilons, ov, observer, out)

    s = build_spectrum(n, base.bc, 1)
    u0 = initial_condition(ic, s)
    snaps = tuple(k for k in preset.snapshots if k <= base.steps)
    for eps in epsilons:
        cfg = base.replace(epsilon=eps)
        manifest = f"preset={preset_id} n={n} ic={ic} " + cfg.manifest()
        result = run_flow(u0, cfg, s, observer=observer, snapshots=snaps)
        out.results[eps] = result
        _write_1d(preset.prefix, out_dir, eps, u0, result, s, manifest, out.files)
    return out


def _run_teaser(preset, out_dir, n, base, epsilons, ov, observer, out):
    s = build_spectrum(n, base.bc, 2)
    clean = imageio.make_cartoon(n)
    noisy = imageio.salt_pepper(clean, NOISE_FRACTION, base.seed)
    cfg = base.replace(epsilon=epsilons[0])
    manifest = f"preset={preset.id} n={n} ic=cartoon noise={NOISE_FRACTION} " + cfg.manifest()
    result = run_flow(s.field(noisy.pixels), cfg, s, observer=observer)
    out.results[cfg.epsilon] = result
    denoised = imageio.field_to_image(result.state)
    for name, img in (("clean", clean), ("noisy", noisy), ("denoised", denoised)):
        path = os.path.join(out_dir, f"{preset.prefix}_{name}.pgm")
        imageio.write_pgm(img, path)
        out.files.append(path)
    path = os.path.join(out_dir, f"{preset.prefix}_diagnostics.csv")
    imageio.write_csv(_records_columns(result.records), path, manifest=manifest)
    out.files.append(path)
    p_noisy = psnr(clean.pixels, noisy.pixels)
    p_flow = psnr(clean.pixels, result.state.values)
    out.summary = (f"psnr_noisy={p_noisy:.4f} psnr_denoised={p_flow:.4f} "
                   f"gain_db={p_flow - p_noisy:.4f} steps={cfg.steps} ht={cfg.h_t!r}")
    path = os.path.join(out_dir, f"{preset.prefix}_summary.txt")
    with open(path, "w", newline="\n") as fh:
        fh.write("# " + manifest + "\n" + out.summary + "\n")
    out.files.append(path)
    return out


def run_custom(config_path, out_dir=None, overrides=None, observer=None):
    """Run the flow described by a ``key=value`` config file."""
    try:
        with open(config_path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {config_path}: {exc}") from None
    values, lines = parse_config(text)
    values.update(overrides or {})
    out_dir = out_dir or values.get("out") or "."
    os.makedirs(out_dir, exist_ok=True)
    ic = values["ic"]
    try:
        dim = _ic_dim(ic)
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc), line=lines.get("ic")) from None
    try:
        cfg = FlowConfig(
            epsilon=values["epsilon"][0], h_t=values["ht"], steps=values["steps"],
            bc=values.get("bc", BoundaryCondition.PERIODIC),
            formulation=values.get("formulation", Formulation.INTEGRATED),
            gamma_override=values.get("gamma"), solver_tol=values.get("tol", 1e-10),
            seed=values.get("seed", 0), solver=values.get("solver", "auto"),
            solver_max_iter=values.get("max_iter", 500))
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from None
    try:
        s = build_spectrum(values["n"], cfg.bc, dim)
    except InvalidSizeError as exc:
        raise ConfigError(str(exc), line=lines.get("n")) from None
    try:
        u0 = initial_condition(ic, s, seed=cfg.seed)
    except (InvalidArgumentError, InvalidSizeError, OSError, ValueError) as exc:
        raise ConfigError(str(exc), line=lines.get("ic")) from None
    manifest = f"config={os.path.basename(config_path)} n={s.n} ic={ic} " + cfg.manifest()
    result = run_flow(u0, cfg, s, observer=observer)
    out = RunOutput(files=[], results={cfg.epsilon: result})
    if dim == 1:
        _write_1d("flow", out_dir, cfg.epsilon, u0, result, s, manifest, out.files)
    else:
        path = os.path.join(out_dir, "flow_final.pgm")
        imageio.write_pgm(imageio.field_to_image(result.state), path)
        out.files.append(path)
        path = os.path.join(out_dir, "flow_final.csv")
        imageio.write_csv({f"row{i}": result.state.values[i] for i in range(s.n)}, path, manifest=manifest)
        out.files.append(path)
        path = os.path.join(out_dir, f"flow_eps{eps_tag(cfg.epsilon)}_diagnostics.csv")
        imageio.write_csv(_records_columns(result.records), path, manifest=manifest)
        out.files.append(path)
    return out


def denoise_file(in_path, out_path, overrides=None):
    """Apply the teaser-2d flow to a square power-of-two PGM image."""
    preset = PRESETS["teaser-2d"]
    ov = dict(overrides or {})
    cfg = _flow_config(preset.config, ov)
    if "epsilon" in ov:
        cfg = cfg.replace(epsilon=ov["epsilon"][0])
    img = imageio.read_pgm(in_path)
    if img.width != img.height:
        raise InvalidSizeError(f"image must be square, got {img.width}x{img.height}")
    s = build_spectrum(img.width, cfg.bc, 2)
    result = run_flow(s.field(img.pixels), cfg, s)
    imageio.write_pgm(imageio.field_to_image(result.state), out_path)
    return result
