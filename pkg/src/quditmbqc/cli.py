"""Command-line entry point: run verifications and gate simulations, emit
machine-readable JSON reports.

Commands
    verify-cluster   stabilizer, Hamiltonian-generation and product-formula
                     checks for a built-in or file-defined graph
    connectedness    pairwise maximal-connectedness (and, for chains,
                     entanglement-destruction) branch suites
    simulate-gate    run a gate protocol: per-branch table (enumerate) or a
                     single seeded trajectory with output readout (sample)
    certify          exhaustive certification with negative control
    factor-clifford  factor a coprime Weyl conjugation target into the four
                     basic Clifford families

Exit codes: 0 all checks passed, 1 checks failed (report still written),
2 configuration or input error, 3 resource cap exceeded.  The branch cap
defaults to 10^6 and can be overridden with QUDIT_MBQC_BRANCH_CAP.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .algebra import factor_clifford, gen_z, zbar
from .cluster import ClusterGraph, chain, gate_graph, grid_graph, GATE_GRAPH_KINDS
from .measure import BranchCapExceeded, DEFAULT_BRANCH_CAP
from .oracle import (
    certify_protocol,
    connectedness_suite,
    destruction_suite,
    theorem1_suite,
)
from .protocols import (
    GateProtocol,
    protocol_clifford,
    protocol_rot_x,
    protocol_rot_z,
    protocol_t,
    run_gate,
)
from .reports import build_report, canonical_report_bytes, write_json_atomic
from .states import basis_ket, random_state

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_RESOURCE_CAP = 3

PROTOCOL_NAMES = ("rot_x", "rot_z", "u1n", "w", "un1", "t")

BRANCH_CAP_ENV = "QUDIT_MBQC_BRANCH_CAP"


class GraphFormatError(ValueError):
    pass


@dataclass
class RunConfig:
    """Fully serializable description of one CLI run."""

    command: str
    d: int = 2
    graph: str | None = None
    protocol: str | None = None
    alpha: float = 0.0
    lifts: list[int] | None = None
    m: int | None = None
    n: int | None = None
    mode: str = "enumerate"
    seed: int = 0
    tol: float | None = None
    inputs: str = "random:5"
    branch_cap: int = DEFAULT_BRANCH_CAP

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(data: dict) -> "RunConfig":
        return RunConfig(**data)


def _branch_cap_default() -> int:
    raw = os.environ.get(BRANCH_CAP_ENV)
    if raw is None:
        return DEFAULT_BRANCH_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValueError(f"{BRANCH_CAP_ENV} must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ValueError(f"{BRANCH_CAP_ENV} must be positive")
    return cap


def load_graph_file(path: str) -> ClusterGraph:
    """Parse the JSON graph schema, naming the offending field on error."""
    try:
        with open(path) as handle:
            data = json.load(handle)
    except OSError as exc:
        raise GraphFormatError(f"cannot read graph file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"graph file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise GraphFormatError("graph file must contain a JSON object")
    for key in ("d", "sites", "edges"):
        if key not in data:
            raise GraphFormatError(f"graph file missing required field '{key}'")
    try:
        edges = frozenset((int(a), int(b)) for a, b in data["edges"])
    except (TypeError, ValueError) as exc:
        raise GraphFormatError(f"field 'edges' must be a list of site pairs: {exc}") from exc
    try:
        return ClusterGraph(
            int(data["d"]),
            int(data["sites"]),
            edges,
            tuple(int(s) for s in data.get("input", [])),
            tuple(int(s) for s in data.get("output", [])),
        )
    except ValueError as exc:
        field = "edges" if ("loop" in str(exc) or "edge" in str(exc)) else "graph"
        raise GraphFormatError(f"invalid field '{field}': {exc}") from exc


def resolve_graph(d: int, spec: str) -> ClusterGraph:
    """Built-in graph names (chainN, gridRxC, rot5, un1_6, t6) or a file path."""
    if spec in GATE_GRAPH_KINDS:
        return gate_graph(d, spec)
    mc = re.fullmatch(r"chain(\d+)", spec)
    if mc:
        return chain(d, int(mc.group(1)))
    mg = re.fullmatch(r"grid(\d+)x(\d+)", spec)
    if mg:
        return grid_graph(d, int(mg.group(1)), int(mg.group(2)))
    if os.path.exists(spec):
        return load_graph_file(spec)
    raise GraphFormatError(
        f"unknown graph {spec!r}: expected chainN, gridRxC, one of {GATE_GRAPH_KINDS}, or a file path"
    )


def build_protocol(cfg: RunConfig) -> GateProtocol:
    name = (cfg.protocol or "").lower()
    if name not in PROTOCOL_NAMES:
        raise ValueError(f"unknown protocol {cfg.protocol!r}; expected one of {PROTOCOL_NAMES}")
    if name == "rot_x":
        return protocol_rot_x(cfg.d, cfg.alpha, cfg.lifts)
    if name == "rot_z":
        return protocol_rot_z(cfg.d, cfg.alpha, cfg.lifts)
    if name == "u1n":
        return protocol_clifford(cfg.d, "U1n", cfg.n if cfg.n is not None else 1)
    if name == "un1":
        return protocol_clifford(cfg.d, "Un1", cfg.n if cfg.n is not None else 1)
    if name == "w":
        return protocol_clifford(cfg.d, "W")
    return protocol_t(cfg.d)


def _byproduct_dict(bp) -> dict:
    return {
        "z_pows": list(bp.z_pows),
        "x_pows": list(bp.x_pows),
        "phase": [float(np.real(bp.phase)), float(np.imag(bp.phase))],
    }


def execute_config(cfg: RunConfig) -> tuple[int, dict]:
    """Run one configuration; returns (exit_code, report_dict)."""
    started = time.perf_counter()
    tol = cfg.tol

    if cfg.command == "verify-cluster":
        graph = resolve_graph(cfg.d, cfg.graph or "chain4")
        rep = theorem1_suite(graph, tol if tol is not None else 1e-10)
        result = rep.to_dict()
        code = EXIT_OK if rep.passed else EXIT_CHECKS_FAILED

    elif cfg.command == "connectedness":
        graph = resolve_graph(cfg.d, cfg.graph or "chain4")
        suites = [connectedness_suite(graph, tol if tol is not None else 1e-9, cfg.branch_cap)]
        if graph.edges == frozenset((a, a + 1) for a in range(1, graph.n_sites)):
            suites.append(destruction_suite(cfg.d, graph.n_sites, 1e-10, cfg.branch_cap))
        result = {"suites": [s.to_dict() for s in suites]}
        code = EXIT_OK if all(s.passed for s in suites) else EXIT_CHECKS_FAILED

    elif cfg.command == "simulate-gate":
        protocol = build_protocol(cfg)
        rng = np.random.default_rng(cfg.seed)
        psi = random_state(cfg.d, protocol.n_io, rng)
        run_tol = tol if tol is not None else 1e-9
        if cfg.mode == "enumerate":
            results = run_gate(protocol, psi, branch_cap=cfg.branch_cap, tol=run_tol)
        elif cfg.mode == "sample":
            results = run_gate(
                protocol, psi, mode="sample", seed=cfg.seed, tol=run_tol, readout=True
            )
        else:
            raise ValueError(f"mode must be enumerate or sample, got {cfg.mode!r}")
        rows = []
        all_ok = True
        for r in results:
            row = {
                "outcomes": {str(site): s for site, s in sorted(r.record.outcomes.items())},
                "probability": r.record.probability,
                "fidelity": None if r.verified is None else r.fidelity,
                "verified": r.verified,
                "byproduct": _byproduct_dict(r.byproduct),
            }
            if r.readout_digits is not None:
                row["readout_digits"] = list(r.readout_digits)
                if r.corrected_digits is not None:
                    row["corrected_digits"] = list(r.corrected_digits)
            rows.append(row)
            if r.verified is False:
                all_ok = False
        result = {
            "protocol": protocol.name,
            "params": protocol.params,
            "mode": cfg.mode,
            "branches": rows,
        }
        code = EXIT_OK if all_ok else EXIT_CHECKS_FAILED

    elif cfg.command == "certify":
        protocol = build_protocol(cfg)
        if cfg.inputs == "basis":
            inputs = "basis"
        else:
            m = re.fullmatch(r"random:(\d+)", cfg.inputs)
            if not m:
                raise ValueError(f"inputs must be 'basis' or 'random:K', got {cfg.inputs!r}")
            inputs = int(m.group(1))
        rep = certify_protocol(
            protocol, inputs=inputs, seed=cfg.seed,
            branch_cap=cfg.branch_cap, tol=tol if tol is not None else 1e-9,
        )
        result = rep.to_dict()
        code = EXIT_OK if rep.passed else EXIT_CHECKS_FAILED

    elif cfg.command == "factor-clifford":
        if cfg.m is None or cfg.n is None:
            raise ValueError("factor-clifford needs --m and --n")
        word = factor_clifford(cfg.d, cfg.m, cfg.n)
        from .algebra import compose_factor_word

        product = compose_factor_word(cfg.d, word)
        conj = product @ gen_z(cfg.d) @ product.conj().T
        fidelity = abs(np.trace(conj.conj().T @ zbar(cfg.d, cfg.m, cfg.n))) / cfg.d
        result = {
            "d": cfg.d,
            "m": cfg.m % cfg.d,
            "n": cfg.n % cfg.d,
            "word": [{"kind": step.kind, "value": step.value} for step in word],
            "conjugation_fidelity": float(fidelity),
        }
        threshold = tol if tol is not None else 1e-9
        code = EXIT_OK if fidelity >= 1 - threshold else EXIT_CHECKS_FAILED

    else:
        raise ValueError(f"unknown command {cfg.command!r}")

    report = build_report(cfg.to_dict(), result, time.perf_counter() - started)
    return code, report


def rerun_report(report: dict) -> dict:
    """Re-execute a report from its embedded configuration."""
    cfg = RunConfig.from_dict(report["config"])
    _, fresh = execute_config(cfg)
    return fresh


def _parse_lifts(raw: str | None, d: int) -> list[int] | None:
    if raw is None:
        return None
    try:
        values = [int(tok) for tok in raw.split(",")]
    except ValueError as exc:
        raise ValueError(f"--lifts must be comma-separated integers: {exc}") from exc
    if len(values) != d:
        raise ValueError(f"--lifts must list exactly d={d} integers, got {len(values)}")
    return values


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--d", type=int, default=2, help="qudit dimension (default 2)")
    parser.add_argument("--tol", type=float, default=None, help="tolerance override")
    parser.add_argument("--out", type=str, default=None, help="report output path (JSON)")
    parser.add_argument("--seed", type=int, default=0, help="random seed (default 0)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qudit-mbqc",
        description="Simulate and verify measurement-based computation on d-level cluster states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    vc = sub.add_parser("verify-cluster", help="stabilizer / Hamiltonian / product-formula checks")
    vc.add_argument("--graph", type=str, default="chain4", help="chainN, gridRxC, rot5, un1_6, t6, or a JSON file")
    _add_common(vc)

    cn = sub.add_parser("connectedness", help="maximal-connectedness and destruction suites")
    cn.add_argument("--graph", type=str, default="chain4")
    _add_common(cn)

    sg = sub.add_parser("simulate-gate", help="run one gate protocol")
    sg.add_argument("--protocol", type=str, required=True, choices=PROTOCOL_NAMES)
    sg.add_argument("--alpha", type=float, default=0.0, help="rotation exponent")
    sg.add_argument("--lifts", type=str, default=None, help="comma-separated integers, length d")
    sg.add_argument("--n", type=int, default=None, help="Clifford family parameter")
    sg.add_argument("--mode", type=str, default="enumerate", choices=("enumerate", "sample"))
    _add_common(sg)

    ct = sub.add_parser("certify", help="exhaustive certification with negative control")
    ct.add_argument("--protocol", type=str, required=True, choices=PROTOCOL_NAMES)
    ct.add_argument("--alpha", type=float, default=0.0)
    ct.add_argument("--lifts", type=str, default=None)
    ct.add_argument("--n", type=int, default=None)
    ct.add_argument("--inputs", type=str, default="random:5", help="'basis' or 'random:K'")
    _add_common(ct)

    fc = sub.add_parser("factor-clifford", help="factor a coprime (m, n) conjugation target")
    fc.add_argument("--m", type=int, required=True)
    fc.add_argument("--n", type=int, required=True)
    _add_common(fc)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            command=ns.command,
            d=ns.d,
            graph=getattr(ns, "graph", None),
            protocol=getattr(ns, "protocol", None),
            alpha=getattr(ns, "alpha", 0.0),
            lifts=_parse_lifts(getattr(ns, "lifts", None), ns.d),
            m=getattr(ns, "m", None),
            n=getattr(ns, "n", None),
            mode=getattr(ns, "mode", "enumerate"),
            seed=ns.seed,
            tol=ns.tol,
            inputs=getattr(ns, "inputs", "random:5"),
            branch_cap=_branch_cap_default(),
        )
        code, report = execute_config(cfg)
    except BranchCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE_CAP
    except (ValueError, GraphFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    out = getattr(ns, "out", None)
    if out:
        write_json_atomic(out, report)
        print(f"report written to {out}")
    summary = report["result"]
    if "checks" in summary:
        for check in summary["checks"]:
            status = "pass" if check["pass"] else "FAIL"
            print(f"[{status}] {check['name']}: {check['value']:.3e} (threshold {check['threshold']:.1e})")
    elif "suites" in summary:
        for suite in summary["suites"]:
            for check in suite["checks"]:
                status = "pass" if check["pass"] else "FAIL"
                print(f"[{status}] {suite['scenario']}.{check['name']}: {check['value']:.3e}")
    elif "branches" in summary:
        rows = summary["branches"]
        checked = [b for b in rows if b["verified"] is not None]
        if checked:
            verified = sum(1 for b in checked if b["verified"])
            print(f"{summary['protocol']}: {verified}/{len(checked)} branches verified")
        else:
            row = rows[0]
            print(
                f"{summary['protocol']}: sampled outcomes {row['outcomes']}"
                + (f", readout {row['readout_digits']}" if "readout_digits" in row else "")
            )
    elif "word" in summary:
        steps = " ".join(f"{w['kind']}({w['value']})" for w in summary["word"])
        print(f"word: {steps}  fidelity {summary['conjugation_fidelity']:.12f}")
    print(f"exit {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
