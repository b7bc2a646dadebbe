"""Line-based experiment configuration: parsing and validation.

Format: ``key = value`` lines grouped under ``[section]`` headers, ``#``
starts a comment, numeric lists are comma-separated.  Unknown sections or
keys are hard errors; silent typos in sweep configs have burned enough
CPU-days elsewhere.

Sections and keys:

  [grid]        dimension (1|3), kind (log|linear), nodes, k_min, k_max, mu
  [truncation]  modes (optional, defaults to nodes), nmax
  [model]       name (vhm|sb|nelson-fiber|doi-demo), form_factor, coupling,
                sigma, sigma0; sb/doi-demo also A, B (row-major complex
                lists) and kernel (regular|singular); nelson-fiber also P
  [sweep]       parameter (sigma|sigma0|nmax|nodes), values
  [solver]      tol, max_iter, k_lowest, seed
  [output]      path (optional; the command line --out wins)
"""

import math

import numpy as np

from . import spinboson
from .modes import FormFactorSpec, linear_grid, log_grid

MODELS = ("vhm", "sb", "nelson-fiber", "doi-demo")
SWEEP_PARAMS = ("sigma", "sigma0", "nmax", "nodes")

_SECTION_KEYS = {
    "grid": {"dimension", "kind", "nodes", "k_min", "k_max", "mu"},
    "truncation": {"modes", "nmax"},
    "model": {"name", "form_factor", "coupling", "sigma", "sigma0",
              "A", "B", "kernel", "P"},
    "sweep": {"parameter", "values"},
    "solver": {"tol", "max_iter", "k_lowest", "seed"},
    "output": {"path"},
}

_MODEL_KEYS = {
    "vhm": {"name", "form_factor", "coupling", "sigma", "sigma0"},
    "sb": {"name", "form_factor", "coupling", "sigma", "sigma0",
           "A", "B", "kernel"},
    "doi-demo": {"name", "form_factor", "coupling", "sigma", "sigma0",
                 "A", "B", "kernel"},
    "nelson-fiber": {"name", "form_factor", "coupling", "sigma", "sigma0",
                     "P"},
}


class ConfigError(ValueError):
    pass


def _strip_comment(line):
    out = []
    for ch in line:
        if ch == "#":
            break
        out.append(ch)
    return "".join(out)


def _parse_lines(text):
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTION_KEYS:
                raise ConfigError("line %d: unknown section [%s]"
                                  % (lineno, section))
            continue
        if "=" not in line:
            raise ConfigError("line %d: expected 'key = value', got %r"
                              % (lineno, raw.strip()))
        if section is None:
            raise ConfigError("line %d: key outside any [section]" % lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SECTION_KEYS[section]:
            raise ConfigError("line %d: unknown key %r in section [%s]"
                              % (lineno, key, section))
        yield section, key, value, lineno


def _to_float(value, key, lineno):
    try:
        return float(value)
    except ValueError:
        raise ConfigError("line %d: %s must be a number, got %r"
                          % (lineno, key, value)) from None


def _to_int(value, key, lineno):
    f = _to_float(value, key, lineno)
    if f != int(f):
        raise ConfigError("line %d: %s must be an integer, got %r"
                          % (lineno, key, value))
    return int(f)


def _to_complex_list(value, key, lineno):
    out = []
    for tok in value.split(","):
        tok = tok.strip()
        try:
            out.append(complex(tok))
        except ValueError:
            raise ConfigError("line %d: %s entries must be complex numbers, "
                              "got %r" % (lineno, key, tok)) from None
    return out


def _to_float_list(value, key, lineno):
    out = []
    for tok in value.split(","):
        tok = tok.strip()
        if tok:
            out.append(_to_float(tok, key, lineno))
    if not out:
        raise ConfigError("line %d: %s must not be empty" % (lineno, key))
    return out


class ExperimentConfig:
    """Typed view of a parsed sweep configuration."""

    def __init__(self):
        self.model = None
        self.grid = {"dimension": 1, "kind": "log", "nodes": None,
                     "k_min": None, "k_max": None, "mu": 0.0}
        self.truncation = {"modes": None, "nmax": None}
        self.model_params = {"form_factor": "nelson_sharp", "coupling": 1.0,
                             "sigma": math.inf, "sigma0": 0.0,
                             "A": None, "B": None, "kernel": "regular",
                             "P": 0.0}
        self.sweep_param = None
        self.sweep_values = None
        self.solver = {"tol": 1e-10, "max_iter": 5000, "k_lowest": 2,
                       "seed": 0}
        self.output_path = None

    # per-point effective settings

    def point(self, i):
        """Effective (sigma, sigma0, nmax, nodes) at sweep point i."""
        value = self.sweep_values[i]
        sigma = self.model_params["sigma"]
        sigma0 = self.model_params["sigma0"]
        nmax = self.truncation["nmax"]
        nodes = self.grid["nodes"]
        if self.sweep_param == "sigma":
            sigma = value
        elif self.sweep_param == "sigma0":
            sigma0 = value
        elif self.sweep_param == "nmax":
            nmax = int(value)
        elif self.sweep_param == "nodes":
            nodes = int(value)
        return {"sigma": sigma, "sigma0": sigma0, "nmax": nmax,
                "nodes": nodes}

    def modes_for(self, nodes):
        g = self.grid
        build = log_grid if g["kind"] == "log" else linear_grid
        return build(g["dimension"], g["k_min"], g["k_max"], nodes,
                     mass=g["mu"])

    def form_factor_for(self, sigma, sigma0):
        return FormFactorSpec(self.model_params["form_factor"], sigma=sigma,
                              sigma0=sigma0,
                              coupling=self.model_params["coupling"])

    def spin(self):
        mp = self.model_params
        s = int(round(math.sqrt(len(mp["A"]))))
        A = np.array(mp["A"], dtype=complex).reshape(s, s)
        B = np.array(mp["B"], dtype=complex).reshape(s, s)
        return spinboson.SpinSpace(A, B)


def parse_config(text):
    """Parse and validate; raises ConfigError with a line or point name."""
    cfg = ExperimentConfig()
    seen = set()
    for section, key, value, lineno in _parse_lines(text):
        seen.add((section, key))
        if section == "grid":
            if key == "dimension":
                cfg.grid[key] = _to_int(value, key, lineno)
            elif key == "kind":
                if value not in ("log", "linear"):
                    raise ConfigError("line %d: kind must be log or linear"
                                      % lineno)
                cfg.grid[key] = value
            elif key == "nodes":
                cfg.grid[key] = _to_int(value, key, lineno)
            else:
                cfg.grid[key] = _to_float(value, key, lineno)
        elif section == "truncation":
            cfg.truncation[key] = _to_int(value, key, lineno)
        elif section == "model":
            if key == "name":
                if value not in MODELS:
                    raise ConfigError("line %d: unknown model %r (use one "
                                      "of %s)" % (lineno, value,
                                                  ", ".join(MODELS)))
                cfg.model = value
            elif key in ("A", "B"):
                cfg.model_params[key] = _to_complex_list(value, key, lineno)
            elif key == "kernel":
                if value not in ("regular", "singular"):
                    raise ConfigError("line %d: kernel must be regular or "
                                      "singular" % lineno)
                cfg.model_params[key] = value
            elif key == "form_factor":
                cfg.model_params[key] = value
            else:
                cfg.model_params[key] = _to_float(value, key, lineno)
        elif section == "sweep":
            if key == "parameter":
                if value not in SWEEP_PARAMS:
                    raise ConfigError("line %d: sweep parameter must be one "
                                      "of %s" % (lineno,
                                                 ", ".join(SWEEP_PARAMS)))
                cfg.sweep_param = value
            else:
                cfg.sweep_values = _to_float_list(value, key, lineno)
        elif section == "solver":
            if key == "tol":
                cfg.solver[key] = _to_float(value, key, lineno)
            else:
                cfg.solver[key] = _to_int(value, key, lineno)
        elif section == "output":
            cfg.output_path = value
    _validate(cfg, {k for s, k in seen if s == "model"})
    return cfg


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _validate(cfg, model_keys_set=frozenset()):
    if cfg.model is None:
        raise ConfigError("[model] name is required")
    g = cfg.grid
    for key in ("nodes", "k_min", "k_max"):
        if g[key] is None:
            raise ConfigError("[grid] %s is required" % key)
    if g["dimension"] not in (1, 3):
        raise ConfigError("[grid] dimension must be 1 or 3")
    if not 0 <= g["k_min"] < g["k_max"]:
        raise ConfigError("[grid] needs 0 <= k_min < k_max")
    if g["kind"] == "log" and g["k_min"] <= 0:
        raise ConfigError("[grid] log spacing needs k_min > 0")
    if g["mu"] < 0:
        raise ConfigError("[grid] mu must be nonnegative")
    if g["nodes"] < 1:
        raise ConfigError("[grid] nodes must be positive")
    if cfg.truncation["nmax"] is None:
        raise ConfigError("[truncation] nmax is required")
    if cfg.truncation["nmax"] < 0:
        raise ConfigError("[truncation] nmax must be nonnegative")
    if cfg.truncation["modes"] is not None and cfg.sweep_param != "nodes" \
            and cfg.truncation["modes"] != g["nodes"]:
        raise ConfigError("[truncation] modes = %d disagrees with [grid] "
                          "nodes = %d; every grid node is a mode here"
                          % (cfg.truncation["modes"], g["nodes"]))
    if cfg.sweep_param is None or cfg.sweep_values is None:
        raise ConfigError("[sweep] needs both parameter and values")
    if cfg.model_params["form_factor"] not in ("nelson_sharp",
                                               "weisskopf_wigner"):
        raise ConfigError("[model] form_factor must be nelson_sharp or "
                          "weisskopf_wigner in config files")
    if cfg.model_params["coupling"] is None or \
            not math.isfinite(cfg.model_params["coupling"]):
        raise ConfigError("[model] coupling must be finite")
    allowed = _MODEL_KEYS[cfg.model]
    for key in sorted(model_keys_set - allowed):
        raise ConfigError("[model] key %r does not apply to model %s"
                          % (key, cfg.model))
    if cfg.model in ("sb", "doi-demo"):
        if cfg.model_params["A"] is None or cfg.model_params["B"] is None:
            raise ConfigError("[model] %s needs both A and B" % cfg.model)
        for key in ("A", "B"):
            n = len(cfg.model_params[key])
            s = int(round(math.sqrt(n)))
            if s * s != n or s < 1:
                raise ConfigError("[model] %s has %d entries, not a square "
                                  "matrix" % (key, n))
        if len(cfg.model_params["A"]) != len(cfg.model_params["B"]):
            raise ConfigError("[model] A and B must have equal size")
        if int(round(math.sqrt(len(cfg.model_params["A"])))) > 8:
            raise ConfigError("[model] spin dimension capped at 8")
        try:
            cfg.spin()
        except ValueError as exc:
            raise ConfigError("[model] %s" % exc) from None
    for idx in range(len(cfg.sweep_values)):
        value = cfg.sweep_values[idx]
        if cfg.sweep_param in ("nmax", "nodes"):
            if value != int(value) or value < (0 if cfg.sweep_param ==
                                               "nmax" else 1):
                raise ConfigError("sweep point %d: %s must be a nonnegative "
                                  "integer, got %r"
                                  % (idx, cfg.sweep_param, value))
        pt = cfg.point(idx)
        if not 0 <= pt["sigma0"] < pt["sigma"]:
            raise ConfigError("sweep point %d: sigma0 = %g must be below "
                              "sigma = %g" % (idx, pt["sigma0"], pt["sigma"]))
        if cfg.model == "nelson-fiber" and not math.isfinite(pt["sigma"]):
            raise ConfigError("sweep point %d: nelson-fiber needs a finite "
                              "sigma for the self-energy subtraction" % idx)
    if cfg.solver["tol"] <= 0:
        raise ConfigError("[solver] tol must be positive")
    if cfg.solver["max_iter"] < 1:
        raise ConfigError("[solver] max_iter must be at least 1")
    if cfg.solver["k_lowest"] < 1:
        raise ConfigError("[solver] k_lowest must be at least 1")
    return cfg


def summarize(cfg):
    """One-paragraph human summary used by validate-config."""
    pts = ", ".join("%g" % v for v in cfg.sweep_values)
    return ("model %s: %dd %s grid, %d nodes in [%g, %g], mu=%g; cap %s; "
            "sweep %s over [%s]; solver tol %g seed %d"
            % (cfg.model, cfg.grid["dimension"], cfg.grid["kind"],
               cfg.grid["nodes"], cfg.grid["k_min"], cfg.grid["k_max"],
               cfg.grid["mu"], cfg.truncation["nmax"], cfg.sweep_param,
               pts, cfg.solver["tol"], cfg.solver["seed"]))
