"""Command-line driver: exact spectra, QKSD runs, block-encoding checks, scans."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .blockenc import WalkCircuits, chebyshev_circuit, walk_unitary
from .circuit import gate_counts
from .fock import FockState, InvalidStateError, Sector, enumerate_basis, sector_of
from .hamiltonian import (
    BracketError,
    HamiltonianSpec,
    ModelParams,
    build_monomials,
    exact_matrix,
    exact_spectrum,
    find_critical_coupling,
    lowest_sector_eigenvalue,
    squeezed_matrix,
)
from .qksd import DEFAULT_EPS_REL, qksd_ground_energy
from .simulator import projected_block

SIG_DIGITS = 12


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    K: int = 4
    lambda_over_m2: float = 92.4746
    m2: float = 1.0
    sector: str = "both"
    pivot: str | None = None
    krylov_dim: int | None = None
    eps_rel: float = DEFAULT_EPS_REL
    shots: int | None = None
    seed: int | None = None
    backend: str = "auto"
    json_path: str | None = None
    csv_path: str | None = None
    export_circuit: str | None = None
    show_matrix: bool = False
    lo: float | None = None
    hi: float | None = None
    points: int = 21
    tol: float = 1e-3
    max_order: int = 8
    atol: float = 1e-10
    corrupt_monomial: int | None = None
    corrupt_value: float | None = None
    workers: int = 4

    def validate(self) -> None:
        if self.K < 1:
            raise UsageError(f"--K must be a positive integer, got {self.K}")
        if not self.m2 > 0:
            raise UsageError("--m2 must be positive")
        if not self.lambda_over_m2 > 0:
            raise UsageError("--lambda must be positive")
        if self.sector not in ("even", "odd", "both"):
            raise UsageError(f"--sector must be even, odd or both, got {self.sector!r}")
        if self.krylov_dim is not None and self.krylov_dim < 1:
            raise UsageError("--krylov-dim must be >= 1")
        if not self.eps_rel > 0:
            raise UsageError("--eps-rel must be positive")
        if self.shots is not None and self.shots < 1:
            raise UsageError("--shots must be >= 1")
        if self.lo is not None and self.hi is not None and not self.lo < self.hi:
            raise UsageError(f"scan bracket needs lo < hi, got ({self.lo}, {self.hi})")

    @property
    def params(self) -> ModelParams:
        return ModelParams(lambda_over_m2=self.lambda_over_m2, K=self.K, m2=self.m2)

    def sectors(self) -> list[Sector]:
        return list(Sector) if self.sector == "both" else [Sector.parse(self.sector)]


# flat config-file keys -> RunConfig fields
_KEY_ALIASES = {
    "lambda": "lambda_over_m2",
    "epsilon_rel": "eps_rel",
    "json": "json_path",
    "csv": "csv_path",
}


def _coerce(name: str, raw: str) -> Any:
    kinds = {f.name: f.type for f in fields(RunConfig)}
    kind = str(kinds[name])
    if raw.lower() in ("none", ""):
        return None
    if "bool" in kind:
        return raw.lower() in ("1", "true", "yes", "on")
    if "int" in kind and "float" not in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Flat ``key=value`` lines; keys are the flag names without dashes."""
    out: dict[str, Any] = {}
    names = {f.name for f in fields(RunConfig)}
    # also accept the flag spellings with every dash removed, e.g. "krylovdim"
    squashed = {n.replace("_", ""): n for n in names}
    squashed.update({k.replace("_", ""): v for k, v in _KEY_ALIASES.items()})
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        key = _KEY_ALIASES.get(key, key)
        key = squashed.get(key.replace("_", ""), key)
        if key not in names:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def _fmt(x: float) -> float:
    return float(f"{x:.{SIG_DIGITS}g}")


def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return _fmt(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _meta(cfg: RunConfig, spec: HamiltonianSpec, qubits: int | None) -> dict[str, Any]:
    return {
        "K": cfg.K,
        "lambda": cfg.lambda_over_m2,
        "m2": cfg.m2,
        "D": spec.D,
        "Xi": spec.Xi,
        "qubits": qubits,
    }


def _document(cfg: RunConfig, spec: HamiltonianSpec, qubits: int | None, results: dict) -> dict:
    return _clean({"meta": _meta(cfg, spec, qubits), "results": results})


def _write_json(doc: dict, path: str | None) -> None:
    if path:
        Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def _export(walk: WalkCircuits, path: str | None) -> None:
    if path:
        Path(path).write_text(walk.u_h.to_text())


# -- subcommands ------------------------------------------------------------------


def cmd_spectrum(cfg: RunConfig) -> tuple[dict, int]:
    spec = build_monomials(cfg.params)
    basis = enumerate_basis(cfg.K)
    H = exact_matrix(spec, basis)
    per_sector = {}
    for sec in cfg.sectors():
        idx = [i for i, s in enumerate(basis) if sector_of(s) is sec]
        if not idx:
            per_sector[sec.value] = []
            continue
        per_sector[sec.value] = exact_spectrum(H[np.ix_(idx, idx)])
    results: dict[str, Any] = {
        "basis": [s.label for s in basis],
        "sectors": {s.label: sector_of(s).value for s in basis},
        "eigenvalues": exact_spectrum(H) if cfg.sector == "both" else per_sector[cfg.sector],
        "sector_eigenvalues": per_sector,
        "mass_squared": cfg.K * exact_spectrum(H),
    }
    if cfg.show_matrix:
        results["matrix"] = H
    if cfg.export_circuit:
        _export(walk_unitary(spec), cfg.export_circuit)
    return _document(cfg, spec, None, results), 0


def _parse_pivot(cfg: RunConfig) -> FockState | None:
    if cfg.pivot is None:
        return None
    try:
        return FockState.parse(cfg.pivot, cfg.K)
    except InvalidStateError as exc:
        raise UsageError(f"--pivot: {exc}") from None


def cmd_qksd(cfg: RunConfig) -> tuple[dict, int]:
    spec = build_monomials(cfg.params)
    walk = walk_unitary(spec)
    pivot = _parse_pivot(cfg)
    runs = {}
    for sec in cfg.sectors():
        if pivot is not None and sector_of(pivot) is not sec:
            if cfg.sector == "both":
                continue
            raise UsageError(f"pivot {pivot} is not in the {sec.value} sector")
        mode = "shots" if cfg.shots else "exact"
        res = qksd_ground_energy(
            cfg.params,
            sec,
            pivot=pivot,
            krylov_dim=cfg.krylov_dim,
            mode=mode,
            shots=cfg.shots or 0,
            seed=cfg.seed,
            eps_rel=cfg.eps_rel,
            backend=cfg.backend,
            walk=walk,
        )
        sol = res.solution
        runs[sec.value] = {
            "pivot": {s.label: w.real for s, w in res.pivot.items()},
            "mode": mode,
            "shots": cfg.shots,
            "seed": cfg.seed,
            "krylov_dim": sol.matrices.dim,
            "expectations": sol.matrices.expectations,
            "h_prime": sol.matrices.hp,
            "overlap": sol.matrices.s,
            "overlap_eigenvalues": sol.overlap_eigenvalues,
            "retained_dim": sol.retained_dim,
            "threshold": sol.threshold,
            "eigenvalues": sol.eigenvalues,
            "ground": sol.ground,
            "sensitivity": sol.sensitivity,
        }
    _export(walk, cfg.export_circuit)
    results = {
        "runs": runs,
        "gates": {"u_h": gate_counts(walk.u_h), "reflection": gate_counts(walk.reflection)},
        "widths": walk.layout.widths(),
    }
    return _document(cfg, spec, walk.layout.n_qubits, results), 0


def _suspect_monomials(
    spec: HamiltonianSpec, basis: list[FockState], residual: np.ndarray, failing: list, atol: float
) -> set[int]:
    """Monomials that can explain a block-encoding mismatch.

    A candidate must touch every failing pair; among those, the ones whose
    own matrix is proportional to the residual are preferred.
    """
    if not failing:
        return set()
    index = {s: i for i, s in enumerate(basis)}
    mats = [squeezed_matrix(HamiltonianSpec(spec.params, (m,)), basis) for m in spec.monomials]
    touching = {
        j for j, m in enumerate(mats) if all(m[index[G], index[F]] != 0.0 for G, F in failing)
    }
    fitting = set()
    for j in touching:
        m = mats[j]
        alpha = np.vdot(m, residual) / np.vdot(m, m)
        if np.max(np.abs(residual - alpha * m)) <= max(atol, 1e-9 * np.max(np.abs(residual))):
            fitting.add(j)
    return fitting or touching


def cmd_verify(cfg: RunConfig) -> tuple[dict, int]:
    """Block-encoding and Chebyshev checks of the circuits against the oracle."""
    reference = build_monomials(cfg.params)
    spec = reference
    if cfg.corrupt_monomial is not None:
        value = cfg.corrupt_value
        if value is None:
            value = 0.5 * spec.monomials[cfg.corrupt_monomial].coefficient
        spec = reference.with_coefficient(cfg.corrupt_monomial, value)
    walk = walk_unitary(spec)
    basis = enumerate_basis(cfg.K)
    H = exact_matrix(reference, basis)
    hp = H / walk.scale

    block = projected_block(walk.u_h, basis, walk.layout, cfg.backend)
    pairs = []
    failing = []
    for gi, G in enumerate(basis):
        for fi, F in enumerate(basis):
            got = walk.scale * block[gi, fi]
            residual = abs(got - H[gi, fi])
            ok = residual <= cfg.atol
            pairs.append({"G": G.label, "F": F.label, "circuit": got.real, "oracle": H[gi, fi],
                          "residual": residual, "pass": ok})
            if not ok:
                failing.append((G, F))

    cheb = []
    t_prev, t_cur = np.eye(len(basis)), hp
    for n in range(cfg.max_order + 1):
        if n == 0:
            target = np.eye(len(basis))
        elif n == 1:
            target = hp
        else:
            t_prev, t_cur = t_cur, 2 * hp @ t_cur - t_prev
            target = t_cur
        got = projected_block(chebyshev_circuit(walk, n), basis, walk.layout, cfg.backend)
        residual = float(np.max(np.abs(got - target)))
        cheb.append({"order": n, "residual": residual, "pass": residual <= cfg.atol})

    suspects = _suspect_monomials(reference, basis, walk.scale * block.real - H, failing, cfg.atol)
    suspect_list = [
        {"index": j, "label": reference.monomials[j].label(), "coefficient": reference.monomials[j].coefficient}
        for j in sorted(suspects or ())
    ]
    passed = not failing and all(c["pass"] for c in cheb)
    results = {
        "pass": passed,
        "block_encoding": pairs,
        "chebyshev": cheb,
        "suspect_monomials": suspect_list,
        "tolerance": cfg.atol,
    }
    _export(walk, cfg.export_circuit)
    return _document(cfg, reference, walk.layout.n_qubits, results), 0 if passed else 1


def cmd_scan(cfg: RunConfig) -> tuple[dict, int]:
    if cfg.lo is None or cfg.hi is None:
        raise UsageError("scan needs --lo and --hi")
    if cfg.points < 2:
        raise UsageError("--points must be >= 2")
    spec = build_monomials(cfg.params)
    grid = np.linspace(cfg.lo, cfg.hi, cfg.points)
    sectors = cfg.sectors()
    rows = []
    with ThreadPoolExecutor(max_workers=max(1, cfg.workers)) as pool:
        for sec in sectors:
            values = list(pool.map(lambda x: lowest_sector_eigenvalue(cfg.K, sec, float(x), cfg.m2), grid))
            rows += [{"sector": sec.value, "lambda": float(x), "lowest": v} for x, v in zip(grid, values)]
    critical = {}
    status = 0
    for sec in sectors:
        try:
            critical[sec.value] = find_critical_coupling(cfg.K, sec, (cfg.lo, cfg.hi), cfg.tol, cfg.m2)
        except BracketError as exc:
            critical[sec.value] = None
            critical[f"{sec.value}_error"] = str(exc)
            status = 1
    if cfg.csv_path:
        with open(cfg.csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sector", "lambda_over_m2", "lowest_eigenvalue"])
            for r in rows:
                writer.writerow([r["sector"], f"{r['lambda']:.{SIG_DIGITS}g}", f"{r['lowest']:.{SIG_DIGITS}g}"])
    results = {"table": rows, "critical": critical, "tol": cfg.tol}
    return _document(cfg, spec, None, results), status


COMMANDS = {
    "spectrum": cmd_spectrum,
    "qksd": cmd_qksd,
    "verify": cmd_verify,
    "scan": cmd_scan,
}


# -- argument handling --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file; flags override it")
    common.add_argument("--K", dest="K", type=int)
    common.add_argument("--lambda", dest="lambda_over_m2", type=float, help="coupling lambda/m^2")
    common.add_argument("--m2", type=float)
    common.add_argument("--sector", choices=["even", "odd", "both"])
    common.add_argument("--pivot", help='pivot state, e.g. "4^1" or "2^1 1^2"')
    common.add_argument("--krylov-dim", dest="krylov_dim", type=int)
    common.add_argument("--eps-rel", dest="eps_rel", type=float)
    common.add_argument("--shots", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--backend", choices=["auto", "dense", "sparse"])
    common.add_argument("--json", dest="json_path")
    common.add_argument("--csv", dest="csv_path")
    common.add_argument("--export-circuit", dest="export_circuit", help="write U_H as a gate list")
    common.add_argument("--show-matrix", dest="show_matrix", action="store_const", const=True)
    common.add_argument("--lo", type=float)
    common.add_argument("--hi", type=float)
    common.add_argument("--points", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--max-order", dest="max_order", type=int)
    common.add_argument("--atol", type=float)
    common.add_argument("--corrupt-monomial", dest="corrupt_monomial", type=int, help=argparse.SUPPRESS)
    common.add_argument("--corrupt-value", dest="corrupt_value", type=float, help=argparse.SUPPRESS)
    common.add_argument("--workers", type=int)

    parser = argparse.ArgumentParser(
        prog="lfboson", description="Walk-circuit block encoding and Krylov spectra of DLCQ phi^4."
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="exact diagonalization")
    sub.add_parser("qksd", parents=[common], help="Chebyshev Krylov diagonalization from circuits")
    sub.add_parser("verify", parents=[common], help="check circuits against the classical matrix")
    sub.add_parser("scan", parents=[common], help="coupling scan and critical-coupling bisection")
    return parser


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    values: dict[str, Any] = {}
    if ns.config:
        values.update(read_config_file(ns.config))
    for f in fields(RunConfig):
        v = getattr(ns, f.name, None)
        if v is not None:
            values[f.name] = v
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def _print_summary(command: str, doc: dict, out) -> None:
    meta, res = doc["meta"], doc["results"]
    print(f"K={meta['K']}  lambda/m2={meta['lambda']}  m2={meta['m2']}  D={meta['D']}  Xi={meta['Xi']}", file=out)
    if command == "spectrum":
        for label in res["basis"]:
            print(f"  |{label}>  {res['sectors'][label]}", file=out)
        for sec, vals in res["sector_eigenvalues"].items():
            print(f"  {sec:4s} eigenvalues [MeV^2]: " + " ".join(f"{v:.6g}" for v in vals), file=out)
    elif command == "qksd":
        print(f"  qubits={meta['qubits']}  U_H gates={res['gates']['u_h']['total']}", file=out)
        for sec, run in res["runs"].items():
            print(f"  {sec:4s} K_dim={run['krylov_dim']} retained={run['retained_dim']} ground={run['ground']:.6g} MeV^2", file=out)
    elif command == "verify":
        worst = max(p["residual"] for p in res["block_encoding"])
        print(f"  block encoding: {len(res['block_encoding'])} pairs, max residual {worst:.3e}", file=out)
        for c in res["chebyshev"]:
            print(f"  T_{c['order']}: residual {c['residual']:.3e} {'ok' if c['pass'] else 'FAIL'}", file=out)
        for s in res["suspect_monomials"]:
            print(f"  suspect monomial j={s['index']} {s['label']}", file=out)
        print("PASS" if res["pass"] else "FAIL", file=out)
    elif command == "scan":
        for row in res["table"]:
            print(f"  {row['sector']:4s} {row['lambda']:12.6g} {row['lowest']:14.6g}", file=out)
        for key, val in res["critical"].items():
            print(f"  critical {key}: {val}", file=out)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve_config(ns)
        doc, status = COMMANDS[ns.command](cfg)
    except (UsageError, InvalidStateError) as exc:
        print(f"lfboson {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    except BracketError as exc:
        print(f"lfboson {ns.command}: {exc}", file=sys.stderr)
        return 1
    _write_json(doc, cfg.json_path)
    _print_summary(ns.command, doc, sys.stdout)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
