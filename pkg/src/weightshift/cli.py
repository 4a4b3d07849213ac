"""Command-line front end.

    weightshift params t=0 k=0 lambda_re=0.25
    weightshift eval which=seed t=2 k=0 lambda_re=-6 u2=0.3 v_min=10 v_max=1000 samples=20
    weightshift verify suite=hde seed=42
    weightshift apply t=2 k=0 lambda_re=-6 s=1.2 u1=0.15 v1=1.3

Arguments are key=value pairs; unknown keys are rejected.  Exit codes: 0 success,
1 suite failure, 2 usage or parity error, 3 convergence refusal.
"""

from __future__ import annotations

import json
import sys

import numpy as np

from .errors import ConvergenceRefused, ParityError, WeightShiftError
from .halfplane import HPoint
from .kernel import KernelInstance, TruncationPolicy, automorphic_kernel_detail, periodized_K0
from .spectral import WeightParameters, convergence_report, derive

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_REFUSED = 0, 1, 2, 3

COMMON = dict(t=0, k=0, q_re=0.0, q_im=0.0, lambda_re=0.25, lambda_im=0.0, period_N=200, coset_Q=40,
              cusp_Y=20.0, seed=42, out_format="json", out="")
EXTRA = {
    "params": dict(C=0.0),
    "eval": dict(which="seed", u1=0.0, v1=1.0, u2=0.3, v2=2.0, v_min=0.0, v_max=0.0, samples=0,
                 route="auto", tail_tol=1e-8),
    "verify": dict(suite="", budget=1.0, timing="on"),
    "apply": dict(s=1.2, u1=0.15, v1=1.3, grid=40, domain_shift=0),
}
INT_KEYS = {"t", "k", "period_N", "coset_Q", "seed", "samples", "grid", "domain_shift"}
STR_KEYS = {"out_format", "out", "which", "route", "suite", "timing"}


class UsageError(Exception):
    pass


def parse_config(command: str, args) -> dict:
    if command not in EXTRA:
        raise UsageError(f"unknown command {command!r}; use one of {', '.join(EXTRA)}")
    cfg = dict(COMMON, **EXTRA[command])
    for arg in args:
        key, sep, val = arg.partition("=")
        if not sep:
            raise UsageError(f"expected key=value, got {arg!r}")
        if key not in cfg:
            raise UsageError(f"unknown key {key!r} for {command}")
        try:
            cfg[key] = val if key in STR_KEYS else int(val) if key in INT_KEYS else float(val)
        except ValueError:
            raise UsageError(f"bad value for {key}: {val!r}") from None
    if cfg["out_format"] not in ("json", "csv"):
        raise UsageError("out_format must be json or csv")
    return cfg


def _params(cfg) -> WeightParameters:
    return WeightParameters(cfg["t"], cfg["k"], complex(cfg["q_re"], cfg["q_im"]),
                            complex(cfg["lambda_re"], cfg["lambda_im"]))


def _emit(text: str, cfg):
    if cfg["out"]:
        with open(cfg["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_params(cfg) -> int:
    prm = _params(cfg)
    data = derive(prm)
    out = dict(data.as_json(), convergence=convergence_report(prm, cfg["C"], data).as_json())
    _emit(json.dumps(out, sort_keys=True) + "\n", cfg)
    return EXIT_OK


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def cmd_eval(cfg) -> int:
    inst = KernelInstance(_params(cfg))
    policy = TruncationPolicy(period_N=cfg["period_N"], coset_Q=cfg["coset_Q"], tail_tol=cfg["tail_tol"])
    t1 = HPoint(cfg["u1"], cfg["v1"])
    if cfg["samples"] > 0:
        if not 0 < cfg["v_min"] < cfg["v_max"]:
            raise UsageError("a ray needs 0 < v_min < v_max")
        vs = np.geomspace(cfg["v_min"], cfg["v_max"], cfg["samples"])
    else:
        vs = np.array([cfg["v2"]])
    rows = []
    for v in vs:
        t2 = HPoint(cfg["u2"], float(v))
        if cfg["which"] == "seed":
            val, tail = complex(inst.K(t1.tau, t2.tau)), 0.0
        elif cfg["which"] == "k0":
            val, tail = periodized_K0(inst, t1, t2, policy)
        elif cfg["which"] == "auto":
            res = automorphic_kernel_detail(inst, t1, t2, policy, route=cfg["route"])
            val, tail = res.value, res.tail
        else:
            raise UsageError("which must be seed, k0 or auto")
        rows.append((t2.u, t2.v, val.real, val.imag, tail))
    if cfg["out_format"] == "json":
        text = json.dumps([dict(zip(("u", "v", "re", "im", "tail"), r)) for r in rows]) + "\n"
    else:
        text = "u,v,re,im,tail\n" + "".join(",".join(_fmt(x) for x in r) + "\n" for r in rows)
    _emit(text, cfg)
    return EXIT_OK


def cmd_verify(cfg) -> int:
    from .verify import SUITES, run_suite
    if cfg["suite"] not in SUITES:
        raise UsageError(f"unknown suite {cfg['suite']!r}; available: {', '.join(SUITES)}")
    rep = run_suite(cfg["suite"], cfg["seed"], cfg["budget"])
    _emit(rep.to_json(timing=cfg["timing"] != "off") + "\n", cfg)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_apply(cfg) -> int:
    from .operator import InputForm, QuadratureSpec, apply_operator_detail
    inst = KernelInstance(_params(cfg))
    spec = QuadratureSpec(cusp_height_Y=cfg["cusp_Y"], grid_u=cfg["grid"], grid_v=cfg["grid"],
                          domain_shift=cfg["domain_shift"])
    res = apply_operator_detail(inst, InputForm.eisenstein(cfg["s"], cfg["coset_Q"]), HPoint(cfg["u1"], cfg["v1"]),
                                spec)
    bd = {k: v for k, v in res.breakdown.items() if k != "pv_partial_sums"}
    out = dict(value_re=res.value.real, value_im=res.value.imag, budget=res.error_budget,
               breakdown={k: [v.real, v.imag] if isinstance(v, complex) else v for k, v in bd.items()})
    _emit(json.dumps(out, sort_keys=True) + "\n", cfg)
    return EXIT_OK


COMMANDS = dict(params=cmd_params, eval=cmd_eval, verify=cmd_verify, apply=cmd_apply)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(__doc__)
        return EXIT_OK if argv else EXIT_USAGE
    try:
        cfg = parse_config(argv[0], argv[1:])
        return COMMANDS[argv[0]](cfg)
    except (UsageError, ParityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceRefused as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except WeightShiftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
