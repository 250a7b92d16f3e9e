"""Run configuration: a single strict JSON document with CLI overrides.

Unknown keys are rejected so that typos cannot silently fall back to
defaults; every module-level precondition is checked at parse time, before
any subcommand starts writing files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .spectral import BeamParams, MemoryKernel
from .dynamics import ConfigError, InitialData, IntegratorConfig

_TOP_KEYS = {"modes", "params", "kernel", "integrator", "initial", "seed"}
_PARAM_KEYS = {"beta", "k", "f_modes"}
_KERNEL_KEYS = {"type", "delta", "kappa", "ds", "values", "path"}
_INTEGRATOR_KEYS = {"backend", "dt", "t_final", "sample_every", "s_max_tol", "ds"}
_INITIAL_KEYS = {"c", "cdot", "history"}
_HISTORY_KEYS = {"ds", "values"}


def _reject_unknown(d: dict, allowed: set, where: str):
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


@dataclass
class RunConfig:
    modes: int
    params: BeamParams
    kernel: MemoryKernel | None
    integrator: IntegratorConfig
    initial: InitialData
    seed: int

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.to_dict() == other.to_dict()

    def to_dict(self) -> dict:
        kernel = {"type": "none"}
        if self.kernel is not None:
            kernel = {"type": self.kernel.kind, "delta": self.kernel.delta,
                      "kappa": self.kernel.kappa}
            if self.kernel.kind == "tabulated":
                kernel["ds"] = self.kernel.ds
                kernel["values"] = list(self.kernel.samples)
        history = "zero"
        if self.initial.eta0 is not None:
            history = {"ds": self.initial.eta0_ds,
                       "values": self.initial.eta0.tolist()}
        cfg = self.integrator
        return {
            "modes": self.modes,
            "params": {"beta": self.params.beta, "k": self.params.k,
                       "f_modes": list(self.params.f_modes)},
            "kernel": kernel,
            "integrator": {"backend": cfg.backend, "dt": cfg.dt,
                           "t_final": cfg.t_final,
                           "sample_every": cfg.sample_every,
                           "s_max_tol": cfg.s_max_tol, "ds": cfg.ds},
            "initial": {"c": self.initial.c0.tolist(),
                        "cdot": self.initial.cdot0.tolist(),
                        "history": history},
            "seed": self.seed,
        }


def _parse_kernel(d: dict, base_dir: Path) -> MemoryKernel | None:
    _reject_unknown(d, _KERNEL_KEYS, "kernel")
    kind = d.get("type", "exponential")
    if kind == "none":
        extras = set(d) - {"type"}
        if extras:
            raise ConfigError(f"kernel type 'none' takes no other keys, got {sorted(extras)}")
        return None
    delta = float(d.get("delta", 1.0))
    kappa = float(d.get("kappa", 0.5))
    if kind == "exponential":
        return MemoryKernel.exponential(delta, kappa)
    if kind == "tabulated":
        if "ds" not in d:
            raise ConfigError("tabulated kernel needs 'ds'")
        if ("values" in d) == ("path" in d):
            raise ConfigError("tabulated kernel needs exactly one of 'values' or 'path'")
        if "path" in d:
            table_path = base_dir / d["path"]
            values = [float(line) for line in table_path.read_text().split()]
        else:
            values = d["values"]
        return MemoryKernel.tabulated(delta, kappa, float(d["ds"]), values)
    raise ConfigError(f"unknown kernel type {kind!r}")


def parse_config(doc: dict, base_dir: Path | str = ".") -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    base_dir = Path(base_dir)
    _reject_unknown(doc, _TOP_KEYS, "config")

    modes = int(doc.get("modes", 16))
    if modes < 1:
        raise ConfigError("modes must be >= 1")

    pd = doc.get("params", {})
    _reject_unknown(pd, _PARAM_KEYS, "params")
    try:
        params = BeamParams(beta=float(pd.get("beta", 0.0)),
                            k=float(pd.get("k", 0.0)),
                            f_modes=tuple(pd.get("f_modes", ())))
        params.f_vector(modes)  # rejects loads longer than the truncation
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    try:
        kernel = _parse_kernel(doc.get("kernel", {}), base_dir)
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from exc

    idd = doc.get("integrator", {})
    _reject_unknown(idd, _INTEGRATOR_KEYS, "integrator")
    integrator = IntegratorConfig(
        backend=idd.get("backend", "ode_reduction"),
        dt=float(idd.get("dt", 1e-3)),
        t_final=float(idd.get("t_final", 10.0)),
        sample_every=int(idd.get("sample_every", 10)),
        s_max_tol=float(idd.get("s_max_tol", 1e-8)),
        ds=None if idd.get("ds") is None else float(idd["ds"]),
    )

    ind = doc.get("initial", {})
    _reject_unknown(ind, _INITIAL_KEYS, "initial")
    c0 = np.zeros(modes)
    given_c = np.asarray(ind.get("c", ()), dtype=float)
    if given_c.size > modes:
        raise ConfigError("initial c has more entries than modes")
    c0[: given_c.size] = given_c
    v0 = np.zeros(modes)
    given_v = np.asarray(ind.get("cdot", ()), dtype=float)
    if given_v.size > modes:
        raise ConfigError("initial cdot has more entries than modes")
    v0[: given_v.size] = given_v

    history = ind.get("history", "zero")
    eta0 = None
    eta0_ds = None
    if history != "zero":
        if not isinstance(history, dict):
            raise ConfigError("initial history must be 'zero' or a table object")
        _reject_unknown(history, _HISTORY_KEYS, "history")
        table = np.asarray(history.get("values"), dtype=float)
        if table.ndim != 2:
            raise ConfigError("history values must be a 2-D table [s, mode]")
        if table.shape[1] > modes:
            raise ConfigError("history table wider than modes")
        eta0 = np.zeros((table.shape[0], modes))
        eta0[:, : table.shape[1]] = table
        eta0_ds = float(history.get("ds", 0.0))
    initial = InitialData(c0, v0, eta0=eta0, eta0_ds=eta0_ds)

    integrator.validate(modes, kernel)
    return RunConfig(modes=modes, params=params, kernel=kernel,
                     integrator=integrator, initial=initial,
                     seed=int(doc.get("seed", 0)))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(doc, base_dir=path.parent)
