"""Command-line front end.

Exit codes: 0 success, 1 domain error (one-line ``error: Name: ...`` on
stderr), 2 usage or state-file parse error.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

import numpy as np

from . import decompositions as dec
from . import scenarios as scn
from .errors import MixturaError
from .numerics import Tolerance
from .selftest import run_all
from .states import BipartiteDims, DensityOperator, Ket, convex_mix, is_pure, partial_trace, purity
from .stateio import read_state_file

ENV_TOL = "MIXTURA_TOL"


class UsageFailure(Exception):
    """Bad arguments or an unreadable state file (exit 2)."""


class Output:
    """Accumulates a report as text or key=value lines."""

    def __init__(self, fmt: str):
        self.fmt = fmt
        self.lines: list[str] = []

    def scalar(self, key: str, value):
        if self.fmt == "machine":
            if isinstance(value, (float, np.floating)):
                value = repr(float(value))
            self.lines.append(f"{key}={value}")
        elif isinstance(value, (float, np.floating)):
            self.lines.append(f"{key}: {value:.6f}" if abs(value) >= 1e-4 or value == 0
                              else f"{key}: {value:.3e}")
        else:
            self.lines.append(f"{key}: {value}")

    def matrix(self, key: str, m):
        m = np.atleast_2d(np.asarray(m, dtype=np.complex128))
        if self.fmt == "machine":
            flat = m.ravel()
            self.lines.append(f"{key}.shape={m.shape[0]}x{m.shape[1]}")
            self.lines.append(f"{key}=" + ",".join(
                f"{float(z.real)!r},{float(z.imag)!r}" for z in flat))
            return
        cplx = np.max(np.abs(m.imag)) >= 5e-7
        self.lines.append(f"{key} ({m.shape[0]}x{m.shape[1]}):")
        for row in m:
            if cplx:
                cells = [f"{z.real:9.6f}{z.imag:+.6f}j" for z in row]
            else:
                cells = [f"{z.real:9.6f}" for z in row]
            self.lines.append("  " + "  ".join(cells))

    def ket(self, key: str, k):
        amps = k.amps if isinstance(k, Ket) else np.asarray(k)
        if self.fmt == "machine":
            self.lines.append(f"{key}=" + ",".join(
                f"{float(z.real)!r},{float(z.imag)!r}" for z in amps))
            return
        cplx = np.max(np.abs(amps.imag)) >= 5e-7
        cells = [f"{z.real:.6f}{z.imag:+.6f}j" if cplx else f"{z.real:.6f}" for z in amps]
        self.lines.append(f"{key}: [" + ", ".join(cells) + "]")

    def state(self, key: str, obj):
        if isinstance(obj, Ket):
            self.ket(key, obj)
        elif isinstance(obj, DensityOperator):
            self.matrix(key, obj.matrix)
        else:
            self.matrix(key, obj)

    def render(self) -> str:
        return "\n".join(self.lines) + "\n"


# argument plumbing ----------------------------------------------------------

def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--tol", type=float, default=d, help=f"absolute and relative tolerance (env {ENV_TOL})")
    p.add_argument("--cutoff", type=float, default=d, help="Schmidt cutoff (default 1e-12)")
    p.add_argument("--seed", type=int, default=d, help="seed for selftest (default 0)")
    p.add_argument("--format", choices=("text", "machine"), default=d)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixtura", description="Partial traces, purifications and ensemble steering.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, suppress=True)
        return p

    p = add("ptrace", "reduced state of a ket or density file")
    p.add_argument("--file", required=True)
    p.add_argument("--dims")
    p.add_argument("--keep", choices=("A", "B"), default="A")

    p = add("purity", "Tr(rho^2) of a ket or density file")
    p.add_argument("--file", required=True)

    p = add("schmidt", "Schmidt decomposition of a joint ket")
    p.add_argument("--file", required=True)
    p.add_argument("--dims")

    p = add("purify", "purification of a density file")
    p.add_argument("--file", required=True)

    p = add("ghjw", "ancilla basis steering a joint ket into an ensemble")
    p.add_argument("--file", required=True)
    p.add_argument("--dims")
    p.add_argument("--ensemble", required=True)

    p = add("lemma-unitary", "ancilla unitary U with (I x U)|other> = |file>")
    p.add_argument("--file", required=True)
    p.add_argument("--other", required=True)
    p.add_argument("--dims")

    p = add("mix", "density operator of an ensemble file")
    p.add_argument("--file", required=True)

    p = add("scenario", "worked mixture scenarios")
    ssub = p.add_subparsers(dest="scenario", required=True)
    q = ssub.add_parser("despagnat", help="naive four-state mixture vs pure composite")
    _global_flags(q, suppress=True)
    q.add_argument("--a", required=True, help="comma-separated weights on A")
    q.add_argument("--b", required=True, help="comma-separated weights on B")
    q.add_argument("--psi", help="ket file with the joint coefficients (default Schmidt-diagonal)")
    q = ssub.add_parser("preparation", help="system prepared together with its environment")
    _global_flags(q, suppress=True)
    q.add_argument("--file", required=True, help="preparation state file")
    q = ssub.add_parser("premeasure", help="premeasurement by a pointer, pointer traced out")
    _global_flags(q, suppress=True)
    src = q.add_mutually_exclusive_group(required=True)
    src.add_argument("--amps", help="comma-separated system amplitudes (Python complex syntax)")
    src.add_argument("--file", help="ket file with the system amplitudes")

    add("selftest", "run the randomized property suites")
    return parser


def _tolerance(args) -> Tolerance:
    value = getattr(args, "tol", None)
    if value is None:
        env = os.environ.get(ENV_TOL)
        if env is None:
            return Tolerance()
        try:
            value = float(env)
        except ValueError:
            raise UsageFailure(f"{ENV_TOL}={env!r} is not a number")
    try:
        return Tolerance(value, value)
    except ValueError as exc:
        raise UsageFailure(str(exc))


def _load(path: str, *kinds: str):
    try:
        sf = read_state_file(path)
    except OSError as exc:
        raise UsageFailure(f"cannot read {path}: {exc.strerror}")
    except MixturaError as exc:
        raise UsageFailure(f"{path}: {exc.name}: {exc}")
    if kinds and sf.kind not in kinds:
        raise UsageFailure(f"{path}: expected kind {' or '.join(kinds)}, got {sf.kind}")
    return sf, sf.to_object()


def _dims(args, sf, total: int) -> BipartiteDims:
    if args.dims:
        try:
            dims = BipartiteDims.parse(args.dims)
        except (ValueError, MixturaError) as exc:
            raise UsageFailure(f"--dims: {exc}")
    elif len(sf.dims) == 2:
        dims = BipartiteDims(*sf.dims)
    else:
        raise UsageFailure("--dims AxB is required when the file has a single dimension")
    if dims.total != total:
        raise UsageFailure(f"--dims {dims} does not match state dimension {total}")
    return dims


def _floats(text: str, flag: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageFailure(f"{flag} must be comma-separated numbers")


def _report(out: Output, report: scn.ScenarioReport):
    out.scalar("scenario", report.name)
    out.scalar("verdict", str(report.verdict))
    out.scalar("criterion", report.criterion)
    for label, value in report.findings:
        out.scalar(label, value)
    for label, obj in report.states:
        out.state(label, obj)


# commands -------------------------------------------------------------------

def cmd_ptrace(args, out, tol):
    sf, obj = _load(args.file, "ket", "density")
    dims = _dims(args, sf, obj.dim)
    rho = partial_trace(obj, dims, args.keep)
    out.matrix(f"rho_{args.keep}", rho.matrix)
    out.scalar("purity", purity(rho))


def cmd_purity(args, out, tol):
    _, obj = _load(args.file, "ket", "density")
    rho = obj if isinstance(obj, DensityOperator) else DensityOperator(np.outer(obj.amps, obj.amps.conj()))
    out.scalar("purity", purity(rho))
    out.scalar("is_pure", str(is_pure(rho, tol)).lower())


def cmd_schmidt(args, out, tol):
    sf, psi = _load(args.file, "ket")
    sd = dec.schmidt(psi, _dims(args, sf, psi.dim), args.cutoff, tol)
    out.scalar("rank", sd.rank)
    out.matrix("coeffs", sd.coeffs[None, :])
    for j, (p, a) in enumerate(zip(sd.left, sd.right)):
        out.ket(f"left_{j}", p)
        out.ket(f"right_{j}", a)
    out.scalar("reconstruction_residual", float(np.linalg.norm(psi.amps - sd.reconstruct())))


def cmd_purify(args, out, tol):
    _, rho = _load(args.file, "density")
    psi, dims = dec.purify(rho, tol, cutoff=args.cutoff)
    out.scalar("dims", str(dims))
    out.ket("psi", psi)
    back = partial_trace(psi, dims, "A")
    out.scalar("marginal_error", float(np.linalg.norm(back.matrix - rho.matrix)))


def cmd_ghjw(args, out, tol):
    sf, psi = _load(args.file, "ket")
    _, target = _load(args.ensemble, "ensemble")
    res = dec.ghjw_steer(psi, _dims(args, sf, psi.dim), target, tol)
    for j, c in enumerate(res.ancilla_basis):
        out.ket(f"c_{j}", c)
    out.matrix("unitary", res.unitary)
    for j, w in enumerate(res.recovered_weights()):
        out.scalar(f"weight_{j}", w)
    out.scalar("reconstruction_residual", res.reconstruction_error)


def cmd_lemma(args, out, tol):
    sf, psi = _load(args.file, "ket")
    _, phi = _load(args.other, "ket")
    dims = _dims(args, sf, psi.dim)
    u = dec.lemma_unitary(psi, phi, dims, tol, args.cutoff)
    out.matrix("unitary", u)
    out.scalar("unitarity_residual", float(np.linalg.norm(u.conj().T @ u - np.eye(dims.dimB))))
    out.scalar("mapping_residual", float(dec.global_phase_distance(psi.amps, dec.apply_on_b(u, phi, dims))))


def cmd_mix(args, out, tol):
    _, ens = _load(args.file, "ensemble")
    rho = convex_mix(ens)
    out.matrix("rho", rho.matrix)
    out.scalar("purity", purity(rho))


def cmd_scenario(args, out, tol):
    if args.scenario == "despagnat":
        a, b = _floats(args.a, "--a"), _floats(args.b, "--b")
        ua = [Ket.basis(len(a), i) for i in range(len(a))]
        vb = [Ket.basis(len(b), i) for i in range(len(b))]
        coeffs = None
        if args.psi:
            _, psi = _load(args.psi, "ket")
            if psi.dim != len(a) * len(b):
                raise UsageFailure(f"--psi must have {len(a) * len(b)} amplitudes")
            coeffs = psi.amps.reshape(len(a), len(b))
        report = scn.despagnat_scenario(ua, vb, a, b, coeffs, tol)
    elif args.scenario == "preparation":
        _, model = _load(args.file, "preparation")
        report = scn.prepare_with_environment(model, tol)
    else:
        if args.file:
            _, ket = _load(args.file, "ket")
            amps = ket.amps
        else:
            try:
                amps = [complex(x.replace(" ", "")) for x in args.amps.split(",")]
            except ValueError:
                raise UsageFailure("--amps must be comma-separated numbers")
        report = scn.premeasurement(amps, None, tol)
    _report(out, report)


def cmd_selftest(args, out, tol):
    results = run_all(args.seed)
    for r in results:
        if out.fmt == "machine":
            out.scalar(f"{r.name}.passed", str(r.passed).lower())
            out.scalar(f"{r.name}.cases", r.cases)
            for k, v in r.metrics.items():
                out.scalar(f"{r.name}.{k}", v)
        else:
            out.lines.append(r.line())
            out.lines.extend(f"    {f}" for f in r.failures)
    ok = all(r.passed for r in results)
    out.scalar("selftest", "pass" if ok else "fail")
    return 0 if ok else 1


COMMANDS = {
    "ptrace": cmd_ptrace,
    "purity": cmd_purity,
    "schmidt": cmd_schmidt,
    "purify": cmd_purify,
    "ghjw": cmd_ghjw,
    "lemma-unitary": cmd_lemma,
    "mix": cmd_mix,
    "scenario": cmd_scenario,
    "selftest": cmd_selftest,
}


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.format = getattr(args, "format", None) or "text"
    args.seed = 0 if getattr(args, "seed", None) is None else args.seed
    args.cutoff = dec.SCHMIDT_CUTOFF if getattr(args, "cutoff", None) is None else args.cutoff
    out = Output(args.format)
    try:
        if args.cutoff < 0:
            raise UsageFailure("--cutoff must be non-negative")
        tol = _tolerance(args)
        code = COMMANDS[args.command](args, out, tol) or 0
    except UsageFailure as exc:
        print(f"usage error: {exc}", file=stderr)
        return 2
    except MixturaError as exc:
        print(f"error: {exc.name}: {exc}", file=stderr)
        return 1
    stdout.write(out.render())
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
