"""Command-line front end: runs verification sweeps and writes a JSON report.

Exit status is 0 when every gating check passes, 1 when any identity check
fails (witnesses are in the report) and 2 on configuration or usage errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass, field
from typing import Callable

from . import __version__
from .algebra import EmptyWindowError, verify_antisymmetry, verify_grading, verify_jacobi
from .checks import CheckResult
from .cohomology import (
    CanonicalCocycle,
    FormCombination,
    coboundary_of,
    coboundary_space_dimension,
    normalize,
    resolve_normalization_sign,
    sample_cocycle,
    sample_functional,
    truncated_h2,
    verify_cocycle,
    verify_normal_form,
)
from .config import Config, ConfigError, load_config
from .exact import ONE
from .leftsym import (
    LsaDenominatorError,
    LsaParams,
    WittLsaParams,
    replay_c_derivation,
    resolve_c_sign,
    structure_equation_residuals,
    verify_compatibility,
    verify_left_symmetry,
    witt_convention_audit,
)

SCHEMA = "hv-loop-report/1"
NORMALIZE_SAMPLES = 5

__all__ = ["run", "main", "build_report", "COMMANDS"]


@dataclass
class RunState:
    cfg: Config
    checks: list[tuple[str, CheckResult]] = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)
    _c_sign: object = None
    _norm_sign: object = None

    def add(self, command: str, check: CheckResult):
        self.checks.append((f"{command}/{check.name}", check))

    @property
    def window(self):
        return self.cfg.window()

    def norm_samples(self):
        rng = random.Random(self.cfg.seed)
        w = self.window
        return [sample_cocycle(w, rng) for _ in range(NORMALIZE_SAMPLES)]

    def c_sign(self, force: bool = False) -> str | None:
        if self.cfg.c_sign != "auto" and not force:
            return self.cfg.c_sign
        if self._c_sign is None:
            m = self.cfg.m
            samples = [m] if m else [m, ONE]
            self._c_sign = resolve_c_sign(self.cfg.epsilon, samples, self.window, self.cfg.convention)
            self.verdicts["c_sign"] = self._c_sign.to_dict()
        return self._c_sign.winner

    def norm_sign(self, force: bool = False) -> str | None:
        if self.cfg.normalization_sign != "auto" and not force:
            return self.cfg.normalization_sign
        if self._norm_sign is None:
            forms = [s[0] for s in self.norm_samples()]
            self._norm_sign = resolve_normalization_sign(forms, self.window)
            self.verdicts["normalization_sign"] = self._norm_sign.to_dict()
        return self._norm_sign.winner


def _unique_check(name: str, winner) -> CheckResult:
    chk = CheckResult(name)
    chk.record_bool(winner is not None, ["resolver"], "no unique variant")
    return chk


def cmd_verify_jacobi(st: RunState):
    cfg, w = st.cfg, st.window
    st.add("verify-jacobi", verify_jacobi(w, cfg.convention, cfg.triple_budget, cfg.seed))
    st.add("verify-jacobi", verify_antisymmetry(w, cfg.convention))
    if cfg.convention.value == "paper":
        st.add("verify-jacobi", verify_grading(w))


def cmd_verify_cocycles(st: RunState):
    cfg, w = st.cfg, st.window
    for k in range(2 * cfg.loop_min, 2 * cfg.loop_max + 1):
        for fam in (1, 2, 3):
            st.add("verify-cocycles", verify_cocycle(CanonicalCocycle(k, fam), w, f"phi_{k}_{fam}",
                                                     cfg.convention, cfg.triple_budget, cfg.seed))
    rng = random.Random(cfg.seed)
    merged = None
    for _ in range(3):
        f = sample_functional(w, rng)
        r = verify_cocycle(coboundary_of(f, cfg.convention), w, "coboundary_forms", cfg.convention,
                           cfg.triple_budget, cfg.seed)
        merged = r if merged is None else merged.merge(r)
    st.add("verify-cocycles", merged)


def _merge_into(acc: dict, checks):
    for c in checks:
        acc[c.name] = c if c.name not in acc else acc[c.name].merge(c)


def cmd_normalize(st: RunState):
    w = st.window
    sign = st.norm_sign()
    st.add("normalize", _unique_check("normalization_sign_resolved", sign))
    if sign is None:
        return
    acc: dict = {}
    match = CheckResult("normalized_equals_class_part")
    for n, (psi, coeffs, _g) in enumerate(st.norm_samples()):
        phi = normalize(psi, w, sign)
        rep = verify_normal_form(phi, w)
        _merge_into(acc, rep.all_checks())
        target = FormCombination([(c, CanonicalCocycle(k, x)) for (k, x), c in sorted(coeffs.items())]).restrict(w)
        match.record_bool(phi == target, [f"sample {n}"], "normalized form differs from its class part")
    for k in range(2 * st.cfg.loop_min, 2 * st.cfg.loop_max + 1):
        for fam in (1, 2, 3):
            _merge_into(acc, verify_normal_form(CanonicalCocycle(k, fam), w).all_checks())
    for name in sorted(acc):
        st.add("normalize", acc[name])
    st.add("normalize", match)


def cmd_h2(st: RunState):
    w = st.window
    rep = truncated_h2(w, st.cfg.convention)
    st.artifacts["h2"] = rep.to_dict()
    reachable = [(k, x) for k in range(2 * w.loop_min, 2 * w.loop_max + 1) for x in (1, 2, 3)]
    base = coboundary_space_dimension(w, (), st.cfg.convention)
    inc = CheckResult("class_raises_coboundary_rank")
    missing = CheckResult("reachable_classes_matched")
    matched = set(rep.matched_classes)
    for k, x in reachable:
        phi = CanonicalCocycle(k, x)
        if not any(phi._raw(a, b) for a, b in _nonzero_probe(w, k)):
            continue  # the class has no support in this window
        d = coboundary_space_dimension(w, (phi,), st.cfg.convention) - base
        inc.record(d - 1, [f"phi_{k}_{x}"])
        missing.record_bool((k, x) in matched, [f"phi_{k}_{x}"], "unmatched")
    st.add("h2", inc)
    st.add("h2", missing)


def _nonzero_probe(w, k):
    from .cohomology import window_pairs

    return [(a, b) for a, b in window_pairs(w) if a.loop + b.loop == k and a.degree + b.degree == 0]


def cmd_verify_lsa(st: RunState):
    cfg, w = st.cfg, st.window
    sign = st.c_sign()
    st.add("verify-lsa", _unique_check("c_sign_resolved", sign))
    if sign is None:
        return
    p = LsaParams(cfg.epsilon, cfg.m, sign, cfg.convention)
    st.add("verify-lsa", verify_left_symmetry(p, w))
    st.add("verify-lsa", verify_compatibility(p, w))
    for c in structure_equation_residuals(p, w, convention=cfg.convention):
        c.name = f"equation_{c.name}"
        st.add("verify-lsa", c)


def cmd_resolve_signs(st: RunState):
    st.add("resolve-signs", _unique_check("c_sign_unique", st.c_sign(force=True)))
    st.add("resolve-signs", _unique_check("normalization_sign_unique", st.norm_sign(force=True)))


def cmd_replay(st: RunState):
    cfg = st.cfg
    tr = replay_c_derivation(st.window, cfg.epsilon, cfg.m)
    for s in tr.steps:
        chk = s.check
        chk.kind = "identity" if s.gating else "diagnostic"
        chk.detail = {**chk.detail, "label": s.label, "claim": s.claim}
        st.add("replay-derivation", chk)
    st.artifacts["replay"] = {"m_target": str(tr.m_target), "m_raw": str(tr.m_raw),
                              "recovered_m": str(tr.recovered_m), "passed": tr.passed}


def cmd_witt_audit(st: RunState):
    bound = int(st.cfg.degree_bound)
    st.verdicts["witt_audit"] = [witt_convention_audit(WittLsaParams(ap, st.cfg.epsilon), bound)
                                 for ap in (0, 1)]


COMMANDS: dict[str, Callable[[RunState], None]] = {
    "verify-jacobi": cmd_verify_jacobi,
    "verify-cocycles": cmd_verify_cocycles,
    "normalize": cmd_normalize,
    "h2": cmd_h2,
    "verify-lsa": cmd_verify_lsa,
    "resolve-signs": cmd_resolve_signs,
    "replay-derivation": cmd_replay,
    "witt-audit": cmd_witt_audit,
}
ALIASES = {"replay-lemma13": "replay-derivation"}


def build_report(st: RunState, commands: list[str], with_timing: bool = False) -> dict:
    checks = sorted((dict(c.to_dict(), name=name) for name, c in st.checks), key=lambda d: d["name"])
    gating = [c for c in checks if c["kind"] != "diagnostic"]
    report = {
        "schema": SCHEMA,
        "tool_version": __version__,
        "config": st.cfg.to_dict(),
        "window": st.window.describe(),
        "commands": commands,
        "checks": checks,
        "summary": {
            "checks": len(gating),
            "failed": sorted(c["name"] for c in gating if not c["passed"]),
            "diagnostics": len(checks) - len(gating),
            "passed": all(c["passed"] for c in gating),
        },
        "verdicts": st.verdicts,
        "artifacts": st.artifacts,
    }
    if with_timing:
        report["timing"] = st.timing
    return report


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--window-a", dest="degree_bound", metavar="RAT")
    common.add_argument("--loop-min", dest="loop_min", metavar="INT")
    common.add_argument("--loop-max", dest="loop_max", metavar="INT")
    common.add_argument("--generators", metavar="R1,R2")
    common.add_argument("--epsilon", metavar="SCALAR")
    common.add_argument("--m", metavar="SCALAR")
    common.add_argument("--c-sign", dest="c_sign", choices=["plus", "minus", "auto"])
    common.add_argument("--norm-sign", dest="normalization_sign", choices=["printed", "corrected", "auto"])
    common.add_argument("--convention", choices=["paper", "reversed"])
    common.add_argument("--seed", metavar="INT")
    common.add_argument("--budget", dest="triple_budget", metavar="INT")
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--timing", action="store_true", help="include wall-clock timing (breaks byte-identical reports)")
    parser = argparse.ArgumentParser(prog="hvloop", description="Exact verification of loop Heisenberg-Virasoro identities.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(COMMANDS) + list(ALIASES) + ["all"]:
        sub.add_parser(name, parents=[common])
    return parser


_OVERRIDES = ("degree_bound", "loop_min", "loop_max", "generators", "epsilon", "m", "c_sign",
              "normalization_sign", "convention", "seed", "triple_budget")


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        cfg = load_config(args.config, {k: getattr(args, k) for k in _OVERRIDES})
        st = RunState(cfg)
        st.window  # surface window errors before any sweep
        command = ALIASES.get(args.command, args.command)
        commands = list(COMMANDS) if command == "all" else [command]
        for name in commands:
            t0 = time.perf_counter()
            COMMANDS[name](st)
            st.timing[name] = round(time.perf_counter() - t0, 3)
    except (ConfigError, EmptyWindowError, LsaDenominatorError) as exc:
        print(f"hvloop: error: {exc}", file=stderr)
        return 2
    report = build_report(st, commands, args.timing)
    text = json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0 if report["summary"]["passed"] else 1


def main() -> None:
    sys.exit(run())
