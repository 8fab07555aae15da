"""Orchestration: experiment configuration, constants, and the per-code pipeline."""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field, replace
from pathlib import Path

from .coding import ChaosReport, encode, separation, verify_shift
from .errors import ConfigError
from .extension import ExtensionField
from .generating import ConstantsBundle, estimate_C, estimate_twist
from .impact_map import estimate_domain
from .racket import Anchors, ForcingSpec, normalize
from .scaffold import (
    ScaffoldSeq,
    SymbolSequence,
    build_scaffold,
    envelopes,
    m_analytic,
    solve_constants,
    symbolic_envelopes,
)
from .stationary import Configuration, certify, find_between, lift_to_orbit

DEFAULT_TOLERANCES = {
    "flow_residual": 1e-8,
    "max_flow_steps": 1_000_000,
    "quadrature": 1e-10,
    "shift": 1e-6,
    "mp_digits": 60,
}
OVERRIDE_KEYS = ("K", "delta", "eps", "C", "M", "m", "Q")


@dataclass
class ExperimentConfig:
    g: float = 1.0
    cos_coeffs: tuple = (0.2,)
    sin_coeffs: tuple = ()
    tolerances: dict = dc_field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    overrides: dict = dc_field(default_factory=dict)
    codes: tuple = ("0", "1", "01", "0110")
    sweep_Q: tuple = (14, 20)
    orbit: dict = dc_field(default_factory=lambda: {"t0": 0.1, "v0": 7.0, "steps": 20, "dps": None})
    output_dir: str = "out"
    seed: int = 0

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        forcing = raw.pop("forcing", {})
        known = {"tolerances", "overrides", "codes", "sweep_Q", "orbit", "output_dir", "seed"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        bad_forcing = set(forcing) - {"g", "cos_coeffs", "sin_coeffs"}
        if bad_forcing:
            raise ConfigError(f"unknown forcing keys: {sorted(bad_forcing)}")
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(raw.get("tolerances", {}))
        if set(tol) - set(DEFAULT_TOLERANCES):
            raise ConfigError(f"unknown tolerances: {sorted(set(tol) - set(DEFAULT_TOLERANCES))}")
        over = {k: v for k, v in raw.get("overrides", {}).items() if v is not None}
        if set(over) - set(OVERRIDE_KEYS):
            raise ConfigError(f"unknown overrides: {sorted(set(over) - set(OVERRIDE_KEYS))}")
        codes = tuple(str(c) for c in raw.get("codes", cls.codes))
        for c in codes:
            if not c or set(c) - {"0", "1"}:
                raise ConfigError(f"code words must be nonempty binary strings, got {c!r}")
        orbit = {"t0": 0.1, "v0": 7.0, "steps": 20, "dps": None}
        orbit.update(raw.get("orbit", {}))
        return cls(
            g=float(forcing.get("g", 1.0)),
            cos_coeffs=tuple(forcing.get("cos_coeffs", (0.2,))),
            sin_coeffs=tuple(forcing.get("sin_coeffs", ())),
            tolerances=tol,
            overrides=over,
            codes=codes,
            sweep_Q=tuple(int(q) for q in raw.get("sweep_Q", cls.sweep_Q)),
            orbit=orbit,
            output_dir=str(raw.get("output_dir", "out")),
            seed=int(raw.get("seed", 0)),
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)

    def forcing(self) -> ForcingSpec:
        try:
            return ForcingSpec(self.g, tuple(self.cos_coeffs), tuple(self.sin_coeffs))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return {
            "forcing": {"g": self.g, "cos_coeffs": list(self.cos_coeffs),
                        "sin_coeffs": list(self.sin_coeffs)},
            "tolerances": self.tolerances,
            "overrides": self.overrides,
            "codes": list(self.codes),
            "sweep_Q": list(self.sweep_Q),
            "orbit": self.orbit,
            "output_dir": self.output_dir,
            "seed": self.seed,
        }


@dataclass
class Base:
    """Everything that does not depend on ``(m, Q)``."""

    spec: ForcingSpec
    anchors: Anchors
    consts: ConstantsBundle
    provenance: dict


@dataclass
class World:
    spec: ForcingSpec
    anchors: Anchors
    consts: ConstantsBundle
    field: ExtensionField
    sub: ScaffoldSeq
    sup: ScaffoldSeq
    w_lower: ScaffoldSeq
    w_upper: ScaffoldSeq
    provenance: dict

    @property
    def M_eff(self):
        return self.consts.M

    def constants_report(self) -> dict:
        c = self.consts
        return {
            "constants": c.to_dict(),
            "derived": {"rho0": c.rho0, "rho1": c.rho1, "Q_minus_8M": c.Q - 8 * c.M},
            "margins": c.inequality_margins(),
            "provenance": self.provenance,
            "anchors": self.anchors.to_dict(),
            "forcing_normalized": self.spec.to_dict(),
        }


def estimate_base(cfg: ExperimentConfig) -> Base:
    spec, anchors = normalize(cfg.forcing())
    over = cfg.overrides
    prov = {}
    K1, v_bar = estimate_domain(spec)
    prov.update(K1="estimated", v_bar="estimated")
    eps = float(over.get("eps", 1.0))
    prov["eps"] = "override" if "eps" in over else "default"
    if "K" in over and "delta" in over:
        K, delta = float(over["K"]), float(over["delta"])
        prov.update(K="override", delta="override")
    else:
        K, delta, info = estimate_twist(spec, K1, eps)
        prov.update(K="estimated", delta="estimated", twist=info)
        if "K" in over:
            K, prov["K"] = float(over["K"]), "override"
        if "delta" in over:
            delta, prov["delta"] = float(over["delta"]), "override"
    consts = ConstantsBundle(g=spec.g, v_bar=v_bar, K1=K1, K=K, delta=delta, eps=eps)
    if "C" in over:
        C = float(over["C"])
        prov["C"] = "override"
    else:
        field = ExtensionField(spec, consts, cfg.tolerances["quadrature"])
        C, info = estimate_C(spec, consts, field)
        prov.update(C="estimated", C_terms=info)
    consts = replace(consts, C=C)
    problems = consts.validate()
    if problems:
        raise ConfigError("; ".join(problems))
    return Base(spec, anchors, consts, prov)


def complete_world(base: Base, cfg: ExperimentConfig, Q=None, m=None, max_rounds: int = 5) -> World:
    """Fix ``(m, Q)``, build the scaffolds and envelopes, and settle ``M_eff``."""
    over = cfg.overrides
    prov = dict(base.provenance)
    Q = Q if Q is not None else over.get("Q")
    m = m if m is not None else over.get("m")
    if m is not None and Q is None:
        raise ConfigError("an override of m needs an override of Q as well")
    M_floor = float(over["M"]) if "M" in over else m_analytic(base.anchors)
    prov["M"] = "override" if "M" in over else "analytic, raised to the observed envelope bound"
    c0 = base.consts
    M_used = M_floor
    for _ in range(max_rounds):
        if Q is None:
            mm, QQ = solve_constants(c0.K, c0.C, M_used, c0.v_bar, c0.g)
            prov["m"] = prov["Q"] = "solved"
        else:
            QQ = int(Q)
            mm = int(m) if m is not None else QQ * QQ
            prov["Q"] = "override"
            prov["m"] = "override" if m is not None else "Q squared"
        consts = replace(c0, m=mm, Q=QQ, M=M_used)
        field = ExtensionField(base.spec, consts, cfg.tolerances["quadrature"])
        sup = build_scaffold("super", consts, base.anchors, base.spec)
        sub = build_scaffold("sub", consts, base.anchors, base.spec)
        w_lo, w_up, M_eff = envelopes((sub, sup), consts, base.anchors)
        M_eff = max(M_eff, M_floor)
        if M_eff <= M_used:
            break
        M_used = M_eff
    consts = replace(consts, M=M_eff)
    field = ExtensionField(base.spec, consts, cfg.tolerances["quadrature"])
    problems = consts.validate()
    if problems:
        raise ConfigError("constants inconsistent: " + "; ".join(problems))
    prov["M_terms"] = w_lo.info
    return World(base.spec, base.anchors, consts, field, sub, sup, w_lo, w_up, prov)


@dataclass
class CodeResult:
    word: str
    config: Configuration
    certificate: dict
    report: ChaosReport
    round_trip: bool


def run_code(world: World, word: str, cfg: ExperimentConfig) -> CodeResult:
    code = SymbolSequence.parse(word)
    xl, xu = symbolic_envelopes(code, world.w_lower, world.w_upper, world.consts)
    tol = cfg.tolerances
    config = find_between(xl, xu, code, world.consts, world.field,
                          tol=tol["flow_residual"], max_steps=int(tol["max_flow_steps"]))
    cert = certify(config, world.consts, world.field)
    lift_to_orbit(config, world.spec, world.consts)
    read = encode(config, world.consts)
    report = verify_shift(config, world.consts, world.spec, dps=int(tol["mp_digits"]))
    return CodeResult(word, config, cert, report, str(read) == word)


def finish_reports(results, world: World):
    """Pairwise separations; each report's margin is the slack over ``Q - 8 M_eff``."""
    c = world.consts
    floor = c.Q - 8 * c.M
    seps = {}
    for i, a in enumerate(results):
        best = float("inf")
        for j, b in enumerate(results):
            if i == j:
                continue
            s = separation(a.config, b.config, c)
            seps[(a.word, b.word)] = s
            best = min(best, s)
        a.report.separation_margin = best - floor
    return seps, floor


def all_checks_pass(results, seps, floor) -> bool:
    ok = all(r.certificate["all_pass"] and r.round_trip and r.report.shift_verified
             for r in results)
    return ok and all(s > floor for s in seps.values())


def energy_band(results):
    Es = [E for r in results for _, E in r.report.K_points]
    return min(Es), max(Es)


def all_words(max_len: int = 4):
    out = []
    for n in range(1, max_len + 1):
        for k in range(2 ** n):
            out.append(format(k, f"0{n}b"))
    return out

