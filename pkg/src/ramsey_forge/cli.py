"""Command-line front end: compile, embed, solve, analyze, protocol, oracle.

Stages hand off through files (model/embedding/hardware JSON, sample CSV,
results JSON). Exit codes: 0 success, 2 usage or input error, 3 nothing
feasible or found, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .analysis import (
    OracleSolver,
    SamplerSolver,
    histogram,
    logical_energies,
    qa_sampler,
    ramsey_protocol,
    results_record,
    sa_sampler,
)
from .anneal import CoolingSchedule, simulated_anneal
from .chimera import HardwareGraph, default_hardware
from .cost import RamseyInstance, ramsey_energy
from .embedding import EmbeddedModel, LambdaTuningError, embed_model, find_embedding, tune_lambda
from .graphs import parse_graph
from .oracle import exhaustive_ground
from .quantum import MAX_QUBITS, AnnealSchedule, sample_anneal
from .qubo import QuadraticModel, Vartype, compile_instance, to_spin
from .samples import SampleSet

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


# ------------------------------------------------------------------ helpers
def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dump_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _load_json(path: str) -> dict:
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise CliError(f"{path} is not valid JSON: {exc}") from exc


def _load_hardware(path: str | None) -> HardwareGraph:
    return HardwareGraph.from_dict(_load_json(path)) if path else default_hardware()


def _load_problem(path: str) -> tuple[QuadraticModel, EmbeddedModel | None]:
    data = _load_json(path)
    if "embedding" in data and "model" in data:
        emb = EmbeddedModel.from_dict(data)
        return emb.model, emb
    return QuadraticModel.from_dict(data), None


def _spin(model: QuadraticModel) -> QuadraticModel:
    return model if model.domain is Vartype.SPIN else to_spin(model)


def _sa_schedule(args) -> CoolingSchedule:
    return CoolingSchedule(args.t0, args.t1, args.sweeps)


def _qa_schedule(args) -> AnnealSchedule:
    if args.schedule_file:
        return AnnealSchedule.from_text(_read(args.schedule_file), args.tf)
    return AnnealSchedule.linear(args.tf)


def _frac_arg(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text}") from exc


# ------------------------------------------------------------- subcommands
def cmd_compile(args) -> int:
    inst = RamseyInstance(args.N, args.m, args.n)
    model = compile_instance(inst, mu=args.mu, fix_first=args.fix_first)
    _emit(model.dumps(), args.output)
    summary = f"variables={model.num_vars} edges={len(model.quadratic)} domain={model.domain.value}"
    print(summary, file=sys.stderr if args.output is None else sys.stdout)
    return EXIT_OK


def cmd_embed(args) -> int:
    model, _ = _load_problem(args.model)
    spin = _spin(model)
    hw = _load_hardware(args.hardware)
    emb = find_embedding(spin, hw, seed=args.seed, tries=args.tries)
    if emb is None:
        raise CliError(
            f"no embedding found for {spin.num_vars} variables on {len(hw.usable)} usable qubits", EXIT_INFEASIBLE
        )
    trace = None
    if args.tune:
        schedule = _sa_schedule(args)

        def solver(hw_model: QuadraticModel) -> SampleSet:
            return simulated_anneal(hw_model, schedule, reads=args.reads, seed=args.seed, threads=args.threads)

        try:
            tuning = tune_lambda(spin, emb, hw, solver)
        except LambdaTuningError as exc:
            raise CliError(f"{exc}; trace={exc.trace}", EXIT_INFEASIBLE) from exc
        emb, trace = emb.with_lambda(tuning.lam), tuning.trace
    else:
        emb = emb.with_lambda(args.lam)
    embedded = embed_model(spin, emb, hw)
    _emit(emb.dumps(), args.output)
    if args.embedded_output:
        Path(args.embedded_output).write_text(embedded.dumps())
    print(f"qubits={emb.num_qubits} chains={len(emb.chains)} lambda={emb.lam} seed={args.seed}", file=sys.stderr)
    if trace is not None:
        for lam, frac in trace:
            print(f"lambda={lam:g} feasible_fraction={frac:.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_solve(args) -> int:
    model, embedded = _load_problem(args.input)
    model = _spin(model)
    if args.qa:
        if model.num_vars > MAX_QUBITS:
            raise CliError(f"--qa simulates at most {MAX_QUBITS} variables (model has {model.num_vars}); use --sa")
        samples = sample_anneal(model, _qa_schedule(args), reads=args.reads, seed=args.seed, steps=args.steps)
    else:
        samples = simulated_anneal(model, _sa_schedule(args), reads=args.reads, seed=args.seed, threads=args.threads)
    _emit(samples.to_csv(), args.output)
    summary = {
        "seed": args.seed,
        "reads": samples.num_reads,
        "distinct": len(samples),
        "lowest_energy": samples.lowest(),
        "embedded": embedded is not None,
        "metadata": samples.metadata,
    }
    if args.summary:
        Path(args.summary).write_text(_dump_json(summary))
    print(f"reads={samples.num_reads} lowest={samples.lowest():g} seed={args.seed}", file=sys.stderr)
    return EXIT_OK


def cmd_analyze(args) -> int:
    model, embedded = _load_problem(args.model)
    samples = SampleSet.from_csv(_read(args.samples))
    logical_model = embedded.source if embedded else model
    n_vertices = logical_model.n_vertices
    if n_vertices is None:
        raise CliError("model carries no graph size; compile it with this tool")
    inst = RamseyInstance(n_vertices, args.m, args.n)
    spin = _spin(logical_model)
    logical_hist, hardware_hist = histogram(samples, embedded, inst, spin if embedded is None else None)
    energies, ok, codes = logical_energies(samples, spin if embedded is None else None, inst, embedded)
    total = samples.num_reads
    feasible = int(samples.counts[ok].sum())
    if feasible == 0:
        record = results_record(inst, None, 0, args.source, logical_hist, 0.0, 0.0, seed=args.seed)
        _emit(_dump_json(record), args.output)
        print("no feasible reads", file=sys.stderr)
        return EXIT_INFEASIBLE
    e_ok = energies[ok]
    e_gs = int(e_ok.min()) if args.ground is None else args.ground
    at = np.abs(e_ok - e_gs) < 1e-9
    degeneracy = len(np.unique(codes[ok][at]))
    success = float(samples.counts[ok][at].sum() / total)
    record = results_record(inst, e_gs, degeneracy, args.source, logical_hist, feasible / total, success, seed=args.seed)
    _emit(_dump_json(record), args.output)
    if args.histogram_csv:
        Path(args.histogram_csv).write_text(logical_hist.to_csv())
    print("logical energies", file=sys.stderr)
    print(logical_hist.render(), file=sys.stderr)
    if embedded is not None:
        print("hardware energies", file=sys.stderr)
        print(hardware_hist.render(), file=sys.stderr)
    return EXIT_OK


def cmd_protocol(args) -> int:
    if args.solver == "oracle":
        solver = OracleSolver(threads=args.threads)
    elif args.solver == "qa":
        solver = SamplerSolver(qa_sampler(_qa_schedule(args), reads=args.reads, steps=args.steps), source="qa")
    else:
        hw = _load_hardware(args.hardware) if args.solver == "sa-embedded" else None
        sampler = sa_sampler(_sa_schedule(args), reads=args.reads, threads=args.threads)
        solver = SamplerSolver(sampler, source="sa", hardware=hw, lam=args.lam, embed_seed=args.seed)
    result = ramsey_protocol(args.m, args.n, solver, n_start=args.n_start, repetitions=args.repetitions, seed=args.seed)
    print(result.table())
    if args.output:
        rows = [r.__dict__ for r in result.rows]
        report = {"m": args.m, "n": args.n, "R": result.value, "rows": rows, "seed": args.seed, "warnings": result.warnings}
        Path(args.output).write_text(_dump_json(report))
    return EXIT_OK if result.value is not None else EXIT_INFEASIBLE


def cmd_oracle(args) -> int:
    inst = RamseyInstance(args.N, args.m, args.n)
    gt = exhaustive_ground(inst, threads=args.threads, keep=args.keep)
    record = results_record(inst, gt.e_gs, gt.degeneracy, "oracle", {gt.e_gs: gt.degeneracy})
    if args.minimizers and gt.minimizers is not None:
        record["minimizers"] = [g.bitstring() for g in gt.minimizers]
    _emit(_dump_json(record), args.output)
    print(f"N={inst.n_vertices} E_gs={gt.e_gs} D={gt.degeneracy}", file=sys.stderr)
    return EXIT_OK


def cmd_ramsey_energy(args) -> int:
    g = parse_graph(args.graph)
    print(ramsey_energy(g, RamseyInstance(g.n_vertices, args.m, args.n)))
    return EXIT_OK


# ------------------------------------------------------------------ parser
def _add_instance(p, with_n_vertices: bool = True) -> None:
    p.add_argument("-m", type=int, required=True, help="clique order")
    p.add_argument("-n", type=int, required=True, help="independent-set order")
    if with_n_vertices:
        p.add_argument("-N", type=int, required=True, help="number of graph vertices")


def _add_sa(p) -> None:
    p.add_argument("--reads", type=int, default=1000)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--t0", type=float, default=10.0, help="initial temperature")
    p.add_argument("--t1", type=float, default=0.05, help="final temperature")


def _add_qa(p) -> None:
    p.add_argument("--tf", type=float, default=10.0, help="anneal time")
    p.add_argument("--steps", type=int, default=None, help="integrator steps (default: automatic)")
    p.add_argument("--schedule-file", default=None, help="table with header and rows 's A(s) B(s)'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ramsey-forge", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=None, help="worker threads (env RAMSEY_FORGE_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="write the quadratic model of an instance")
    _add_instance(p)
    p.add_argument("--mu", type=_frac_arg, default=Fraction(2), help="ancilla penalty weight")
    p.add_argument("--fix-first", action="store_true", help="pin a_1 = 0 (R(3,3) only)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("embed", help="minor-embed a model onto a Chimera graph")
    p.add_argument("model")
    p.add_argument("--hardware", help="hardware JSON (default: bundled 4x4 Chimera)")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--lambda", dest="lam", type=_frac_arg, default=Fraction(2))
    group.add_argument("--tune", action="store_true", help="raise lambda until F > 0.85")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tries", type=int, default=12)
    _add_sa(p)
    p.add_argument("-o", "--output", help="embedding JSON")
    p.add_argument("--embedded-output", help="embedded model JSON")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("solve", help="sample a model or embedded model")
    p.add_argument("input")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--sa", action="store_true", help="simulated annealing")
    group.add_argument("--qa", action="store_true", help="quantum annealing simulation")
    _add_sa(p)
    _add_qa(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", help="sample CSV")
    p.add_argument("--summary", help="summary JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("analyze", help="histogram and score a sample file")
    p.add_argument("samples")
    p.add_argument("--model", required=True, help="model or embedded model JSON the samples came from")
    _add_instance(p, with_n_vertices=False)
    p.add_argument("--ground", type=float, default=None, help="reference ground energy")
    p.add_argument("--source", choices=("sa", "qa", "oracle"), default="sa")
    p.add_argument("--seed", type=int, default=None, help="seed of the run, echoed in the results")
    p.add_argument("-o", "--output")
    p.add_argument("--histogram-csv")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("protocol", help="increment N until the minimum energy turns positive")
    _add_instance(p, with_n_vertices=False)
    p.add_argument("--solver", choices=("oracle", "sa", "sa-embedded", "qa"), default="oracle")
    p.add_argument("--n-start", type=int, default=None)
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hardware")
    p.add_argument("--lambda", dest="lam", type=_frac_arg, default=None, help="fixed lambda (default: tuned)")
    _add_sa(p)
    _add_qa(p)
    p.add_argument("-o", "--output", help="report JSON")
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("oracle", help="exact ground energy and degeneracy")
    _add_instance(p)
    p.add_argument("--keep", type=int, default=0, help="retain up to this many minimizers")
    p.add_argument("--minimizers", action="store_true", help="list retained minimizers")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("ramsey-energy", help="energy of one graph given as 'N:<n>;bits:<01...>'")
    _add_instance(p, with_n_vertices=False)
    p.add_argument("graph")
    p.set_defaults(func=cmd_ramsey_energy)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is None and os.environ.get("RAMSEY_FORGE_THREADS"):
        args.threads = int(os.environ["RAMSEY_FORGE_THREADS"])
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RuntimeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
