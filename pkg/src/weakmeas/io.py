"""Scenario files, deterministic execution, and CSV / summary output.

Scenario files are UTF-8 ``key = value`` lines; ``#`` starts a comment.
Recognised keys and defaults::

    protocol     (required)  ideal | swm | stwm | nswm | validity
    pre          x+          axis spec, see parse_axis
    post         y+
    observable   angle:45
    lambda       0.1
    delta        1
    n_particles  20
    n_trials     100000
    seed         42
    grid_count   1024
    grid_step    (auto)
    output_dir   out
"""

from __future__ import annotations

import csv
import io
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import protocols, spin, validity
from .errors import ValidationError, WeakMeasError
from .pointer import GaussianSpec, GridWavefunction, wavefunction_to_csv
from .protocols import Scenario

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

SUMMARY_FILE = "summary.txt"


class ScenarioError(ValidationError):
    """Scenario text failed validation; ``diagnostics`` lists one message per problem."""

    def __init__(self, diagnostics: list[str]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


# -- values -----------------------------------------------------------------------

_NAMED_AXES = {"x": spin.X_AXIS, "y": spin.Y_AXIS, "z": spin.Z_AXIS}


def parse_axis(text: str) -> tuple[spin.BlochAxis, int]:
    """Parse ``x|y|z|angle:<deg>|axis:nx,ny,nz`` with an optional sign.

    A sign may lead any form (``-x``, ``-angle:45``) or trail a named axis
    (``x+``, ``y-``). Returns ``(axis, sign)``.

    >>> parse_axis("y-")
    (BlochAxis(nx=0.0, ny=1.0, nz=0.0), -1)
    """
    s = text.strip().lower()
    sign = 1
    if s[:1] in "+-" and s:
        sign = -1 if s[0] == "-" else 1
        s = s[1:].strip()
    if s[-1:] in ("+", "-") and s[:-1] in _NAMED_AXES:
        sign *= -1 if s[-1] == "-" else 1
        s = s[:-1]
    if s in _NAMED_AXES:
        return _NAMED_AXES[s], sign
    if s.startswith("angle:"):
        try:
            deg = float(s[6:])
        except ValueError:
            raise ValidationError(f"bad angle in axis spec {text!r}") from None
        return spin.BlochAxis.in_xy_plane(deg), sign
    if s.startswith("axis:"):
        try:
            comps = [float(c) for c in s[5:].split(",")]
        except ValueError:
            raise ValidationError(f"bad components in axis spec {text!r}") from None
        if len(comps) != 3:
            raise ValidationError(f"axis spec {text!r} needs three components")
        return spin.BlochAxis.normalized(*comps), sign
    raise ValidationError(f"unrecognised axis spec {text!r}")


_INT_RE = re.compile(r"^[+-]?\d+$")


def parse_value(text: str):
    """Parse one summary/scenario value: int, float, complex, bool, or bare string."""
    s = text.strip()
    if s in ("true", "false"):
        return s == "true"
    if _INT_RE.match(s):
        return int(s)
    try:
        return float(s)
    except ValueError:
        pass
    try:
        return complex(s)
    except ValueError:
        return s


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, complex):
        return repr(complex(v))
    return str(v)


def format_summary(items: dict) -> str:
    return "".join(f"{k} = {format_value(v)}\n" for k, v in items.items())


def parse_summary(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = parse_value(value)
    return out


# -- scenario files ---------------------------------------------------------------


def _non_negative_float(s):
    v = float(s)
    if not math.isfinite(v) or v < 0:
        raise ValueError("must be a finite number >= 0")
    return v


def _positive_float(s):
    v = float(s)
    if not math.isfinite(v) or v <= 0:
        raise ValueError("must be a finite number > 0")
    return v


def _positive_int(s):
    if not _INT_RE.match(s.strip()):
        raise ValueError("must be an integer")
    v = int(s)
    if v < 1:
        raise ValueError("must be >= 1")
    return v


def _seed(s):
    if not _INT_RE.match(s.strip()):
        raise ValueError("must be an integer")
    v = int(s)
    if not 0 <= v < 2**64:
        raise ValueError("must be a 64-bit unsigned integer")
    return v


def _grid_count(s):
    v = _positive_int(s)
    if v < 64 or v & (v - 1):
        raise ValueError("must be a power of two >= 64")
    return v


def _protocol(s):
    s = s.strip()
    if s not in protocols.PROTOCOLS:
        raise ValueError(f"must be one of {', '.join(protocols.PROTOCOLS)}")
    return s


def _signed_axis(s):
    return parse_axis(s)


def _observable(s):
    axis, sign = parse_axis(s)
    return axis if sign > 0 else -axis


# key -> (Scenario field(s), converter)
_FIELDS = {
    "protocol": ("protocol", _protocol),
    "pre": (("pre_axis", "pre_sign"), _signed_axis),
    "post": (("post_axis", "post_sign"), _signed_axis),
    "observable": ("observable_axis", _observable),
    "lambda": ("lam", _non_negative_float),
    "delta": ("pointer_spread", _positive_float),
    "n_particles": ("particle_count", _positive_int),
    "n_trials": ("trial_count", _positive_int),
    "seed": ("seed", _seed),
    "grid_count": ("grid_count", _grid_count),
    "grid_step": ("grid_step", _positive_float),
    "output_dir": ("output_dir", str.strip),
}


def parse_scenario(text: str) -> Scenario:
    """Parse scenario text into a validated Scenario.

    Raises
    ------
    ScenarioError
        With one line-numbered diagnostic per malformed line, unknown key,
        duplicate key, or out-of-range value, plus ``protocol required`` if
        no protocol was given.
    """
    values: dict = {}
    diags: list[str] = []
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            diags.append(f"line {lineno}: malformed line (expected 'key = value'): {raw.strip()!r}")
            continue
        key, _, value = (p.strip() for p in line.partition("="))
        if key not in _FIELDS:
            diags.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in seen:
            diags.append(f"line {lineno}: duplicate key {key!r} (first on line {seen[key]})")
            continue
        seen[key] = lineno
        if not value:
            diags.append(f"line {lineno}: empty value for {key!r}")
            continue
        target, convert = _FIELDS[key]
        try:
            v = convert(value)
        except (ValueError, ValidationError) as exc:
            diags.append(f"line {lineno}: {key} = {value!r}: {exc}")
            continue
        if isinstance(target, tuple):
            values.update(zip(target, v))
        else:
            values[target] = v
    if "protocol" not in values:
        diags.append("protocol required")
    if diags:
        raise ScenarioError(diags)
    try:
        return Scenario(**values)
    except ValidationError as exc:
        raise ScenarioError([str(exc)]) from None


# -- output helpers ---------------------------------------------------------------


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([f"{v:.17g}" if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def profile_csv(exact: GridWavefunction, approx: GridWavefunction, q_max: float) -> str:
    """``q,re_exact,im_exact,re_approx,im_approx`` rows for |q| <= q_max."""
    q = exact.grid.positions
    keep = np.abs(q) <= q_max
    rows = zip(q[keep], exact.samples.real[keep], exact.samples.imag[keep], approx.samples.real[keep], approx.samples.imag[keep])
    return _csv_text(["q", "re_exact", "im_exact", "re_approx", "im_approx"], ([float(v) for v in r] for r in rows))


def _scenario_summary(s: Scenario) -> dict:
    return {
        "protocol": s.protocol,
        "lambda": float(s.lam),
        "delta": float(s.pointer_spread),
        "seed": int(s.seed),
    }


# -- protocol drivers -------------------------------------------------------------


def _run_ideal(s: Scenario, out: Path) -> dict:
    res = protocols.run_ideal(s)
    _write(out / "peaks.csv", _csv_text(["eigenvalue", "center", "weight"], ([float(v) for v in p] for p in res.peaks)))
    _write(out / "distribution.csv", wavefunction_to_csv(res.distribution))
    summary = {"n_peaks": len(res.peaks), "resolved": res.resolved}
    for i, p in enumerate(res.peaks):
        summary[f"peak{i}_eigenvalue"] = p.eigenvalue
        summary[f"peak{i}_center"] = p.center
        summary[f"peak{i}_weight"] = p.weight
    if res.warning:
        summary["warning"] = res.warning
    return summary


def _run_swm(s: Scenario, out: Path) -> dict:
    res = protocols.run_swm(s)
    _write(out / "readings.csv", _csv_text(["p"], ([float(v)] for v in res.accepted_readings)))
    a_w = spin.weak_value(s.selection, s.observable)
    return {
        "n_trials": res.trial_count,
        "n_accepted": int(res.accepted_readings.size),
        "acceptance_rate": res.acceptance_rate,
        "acceptance_probability": res.acceptance_probability,
        "mean_shift": res.mean_shift,
        "shift": res.mean_shift,
        "standard_error": res.standard_error,
        "estimated_weak_value": res.estimated_weak_value,
        "weak_value_re": a_w.real,
        "weak_value_im": a_w.imag,
    }


def _run_stwm(s: Scenario, out: Path) -> dict:
    res = protocols.stwm_pointer_state(s)
    _write(out / "pointer.csv", wavefunction_to_csv(res.pointer_state))
    return {
        "n_particles": s.particle_count,
        "shift": res.shift,
        "uncertainty": res.uncertainty,
        "success_probability": res.success_probability,
        "weak_value_reference": res.weak_value_reference,
    }


def _nswm_summary(s: Scenario, run: protocols.NswmRun) -> dict:
    wv = run.per_particle_weak_values
    return {
        "n_particles": s.particle_count,
        "cm_coordinate": run.cm_coordinate,
        "shift": run.momentum_shift_exact,
        "shift_formula": run.momentum_shift_formula,
        "l2_error": run.l2_error,
        "fidelity": run.fidelity,
        "selection_probability": abs(run.selection_amplitude) ** 2,
        "mean_weak_value_re": float(np.mean(wv.real)),
        "mean_weak_value_im": float(np.mean(wv.imag)),
        "eccentric": validity.eccentric_run(wv),
    }


def _run_nswm(s: Scenario, out: Path) -> dict:
    run = protocols.nswm_run(s, np.random.default_rng(s.seed))
    _write(out / "nswm.csv", profile_csv(run.reduced_exact_cm_state, run.approx_cm_state, 8 * s.pointer_spread))
    rows = (
        [j, float(q), float(x), float(w.real), float(w.imag)]
        for j, (q, x, w) in enumerate(zip(run.coordinates, run.relative_positions, run.per_particle_weak_values))
    )
    _write(out / "particles.csv", _csv_text(["j", "q", "x", "re_weak_value", "im_weak_value"], rows))
    return _nswm_summary(s, run)


def _run_validity(s: Scenario, out: Path) -> dict:
    alpha = spin.weak_value(s.selection, s.observable).real
    spec = GaussianSpec(0.0, s.pointer_spread)
    grid = s.grid
    rep = validity.regime_check(alpha, s.lam, s.particle_count, spec, grid)
    prof = validity.magnitude_profile(alpha, s.lam, s.particle_count, spec, grid)
    state = validity.uniform_wv_state(alpha, s.lam, s.particle_count, spec, grid)
    rows = ([float(q), float(m), float(z.real), float(z.imag)] for q, m, z in zip(grid.positions, prof, state.samples))
    _write(out / "magnitude.csv", _csv_text(["q", "magnitude", "re", "im"], rows))
    return rep.summary()


_DRIVERS = {
    "ideal": _run_ideal,
    "swm": _run_swm,
    "stwm": _run_stwm,
    "nswm": _run_nswm,
    "validity": _run_validity,
}


def run(scenario: Scenario, output_dir: str | Path | None = None, stderr=None) -> int:
    """Run a scenario, writing ``summary.txt`` and protocol CSVs.

    Returns 0 on success, 1 on validation errors, 2 on runtime errors such as
    a null post-selection.
    """
    stderr = stderr or sys.stderr
    out = Path(output_dir if output_dir is not None else scenario.output_dir)
    try:
        if scenario.protocol is None:
            raise ValidationError("protocol required")
        out.mkdir(parents=True, exist_ok=True)
        summary = _scenario_summary(scenario)
        summary.update(_DRIVERS[scenario.protocol](scenario, out))
    except ValidationError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_VALIDATION
    except WeakMeasError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_RUNTIME
    _write(out / SUMMARY_FILE, format_summary(summary))
    return EXIT_OK


def run_file(path: str | Path, output_dir: str | Path | None = None, stderr=None) -> int:
    stderr = stderr or sys.stderr
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_VALIDATION
    try:
        scenario = parse_scenario(text)
    except ScenarioError as exc:
        for d in exc.diagnostics:
            print(f"{path}: {d}", file=stderr)
        return EXIT_VALIDATION
    return run(scenario, output_dir, stderr)


def figure2(n: int = 20, lam: float = 1.0, seed: int = 42, output_dir: str | Path = "figure2", delta: float = 1.0):
    """Exact vs weak-value CM pointer profiles for one sampled NSWM run.

    Writes ``figure2.csv`` (q in [-8 delta, 8 delta]) and ``summary.txt``;
    returns the NswmRun. The exact profile has the N-particle selection
    amplitude divided out so both curves share the same normalization.
    """
    s = Scenario(protocol="nswm", lam=lam, particle_count=n, seed=seed, pointer_spread=delta)
    run_ = protocols.nswm_run(s, np.random.default_rng(seed))
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "figure2.csv", profile_csv(run_.reduced_exact_cm_state, run_.approx_cm_state, 8 * delta))
    summary = _scenario_summary(s)
    summary.update(_nswm_summary(s, run_))
    _write(out / SUMMARY_FILE, format_summary(summary))
    return run_

