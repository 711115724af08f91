"""``gyni`` command-line front end.

Every command prints a JSON run report on stdout.  Exit status: 0 when all
verdicts pass, 1 when a verdict fails, 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import logging
import os
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from . import facets, game, nlc, nosignalling, quantum
from .exact import decimal_string, format_rational
from .io import InputError, dumps, load_behavior, load_distribution, load_inequality, write_json
from .scenario import Behavior, ScenarioError, evaluate, is_no_signalling

log = logging.getLogger("gyni")

#: ratio omega_ns / omega_c for the parity-promise prior
NS_RATIO_TARGETS = {
    3: Fraction(4, 3),
    4: Fraction(4, 3),
    5: Fraction(16, 11),
    6: Fraction(16, 11),
    7: Fraction(64, 42),
}

SEESAW_SLACK = 1e-6


class UsageError(ValueError):
    pass


@dataclass
class Section:
    """Results and verdicts of one check group."""

    name: str
    decimal: bool = False
    results: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    seed: int | None = None

    def rat(self, v: Fraction) -> Any:
        if self.decimal:
            return {"exact": format_rational(v), "decimal": decimal_string(v)}
        return format_rational(v)

    def claim(self, claim: str, expected, observed, passed: bool):
        def show(v):
            return self.rat(v) if isinstance(v, Fraction) else v

        self.verdicts.append({"claim": claim, "expected": show(expected), "observed": show(observed), "pass": bool(passed)})

    @property
    def passed(self) -> bool:
        return all(v["pass"] for v in self.verdicts)

    def to_json(self) -> dict:
        out = {"name": self.name, "results": self.results, "verdicts": self.verdicts, "pass": self.passed}
        if self.seed is not None:
            out["seed"] = self.seed
        return out


# -- argument helpers ------------------------------------------------------------

def resolve_prior(n: int | None, dist: str):
    if dist in ("promise", "uniform", "cubic4"):
        if n is None:
            if dist != "cubic4":
                raise UsageError("--parties is required for named distributions")
            n = 4
        try:
            return game.instance(n, dist)
        except ScenarioError as exc:
            raise UsageError(str(exc)) from exc
    prior = load_distribution(dist)
    sc = prior.scenario
    if sc.inputs != 2 or sc.outputs != 2:
        raise UsageError("the game needs binary inputs and outputs")
    if n is not None and n != sc.parties:
        raise UsageError(f"--parties {n} disagrees with the distribution file ({sc.parties})")
    return game.GyniInstance(sc.parties, prior)


def _is_promise(g: game.GyniInstance) -> bool:
    return g.prior == game.promise_distribution(g.parties)


# -- check groups ----------------------------------------------------------------

def check_bounds(g: game.GyniInstance, dist: str, ns: bool, decimal: bool, bruteforce: bool | None = None) -> Section:
    s = Section(f"bounds N={g.parties} {dist}", decimal)
    n = g.parties
    wc, y = game.classical_bound_with_witness(g)
    s.results.update(parties=n, distribution=dist, omega_c=s.rat(wc), optimal_y=g.scenario.format_input(y))
    promise = _is_promise(g)
    if promise:
        s.claim(f"omega_c = 1/2^(N-1) for N={n}", Fraction(1, 2 ** (n - 1)), wc, wc == Fraction(1, 2 ** (n - 1)))
    if bruteforce is None:
        bruteforce = n <= 5
    if bruteforce:
        bf, strat = game.classical_bound_bruteforce(g)
        s.results["omega_c_bruteforce"] = s.rat(bf)
        s.claim("brute force equals max_x q(x)+q(~x)", wc, bf, bf == wc)
    attained = game.strategy_value(g, game.strategy_from_string(y, n))
    s.claim("strategy from optimal y attains omega_c", wc, attained, attained == wc)
    if ns:
        nb = nosignalling.ns_bound(g)
        ratio = nb.value / wc
        s.results.update(omega_ns=s.rat(nb.value), ratio=s.rat(ratio), ns_method=nb.method)
        s.claim("no-signalling optimum certified by an exact dual", True, nb.certified, nb.certified)
        if promise and n in NS_RATIO_TARGETS:
            t = NS_RATIO_TARGETS[n]
            s.claim(f"omega_ns/omega_c for N={n}", t, ratio, ratio == t)
    return s


def check_ns_bound(g: game.GyniInstance, dist: str, method: str, decimal: bool, witness: str | None = None) -> Section:
    s = Section(f"ns-bound N={g.parties} {method}", decimal)
    t0 = time.perf_counter()
    nb = nosignalling.ns_bound(g, method)
    log.info("ns-bound N=%d (%s) took %.2fs", g.parties, nb.method, time.perf_counter() - t0)
    wc = game.classical_bound(g)
    ratio = nb.value / wc
    s.results.update(
        parties=g.parties,
        distribution=dist,
        method=nb.method,
        omega_ns=s.rat(nb.value),
        omega_c=s.rat(wc),
        ratio=s.rat(ratio),
        lp=dict(sorted(nb.stats.items())),
    )
    s.claim("dual certificate on the full system", [], list(nb.certificate_problems), nb.certified)
    witness_ok = bool(is_no_signalling(nb.witness, max_violations=1))
    s.claim("witness is no-signalling", True, witness_ok, witness_ok)
    value = evaluate(game.build_inequality(g), nb.witness)
    s.claim("witness reproduces the optimum", nb.value, value, value == nb.value)
    s.claim("omega_c <= omega_ns <= min(1, 2 omega_c)", True, wc <= nb.value <= min(1, 2 * wc), wc <= nb.value <= min(1, 2 * wc))
    if _is_promise(g) and g.parties in NS_RATIO_TARGETS:
        t = NS_RATIO_TARGETS[g.parties]
        s.claim(f"omega_ns/omega_c for N={g.parties}", t, ratio, ratio == t)
    if witness:
        write_json(witness, nb.witness.to_json())
        s.results["witness_path"] = witness
    return s


def check_facet_game(g: game.GyniInstance, dist: str, embedding: str, decimal: bool) -> Section:
    s = Section(f"facet N={g.parties} {dist}", decimal)
    rep = facets.facet_check(game.build_inequality(g), embedding)
    s.results.update(rep.to_json())
    wc = game.classical_bound(g)
    s.claim("max vertex value equals omega_c", wc, rep.max_value, rep.max_value == wc)
    if _is_promise(g) and 3 <= g.parties <= 7:
        s.claim(f"promise inequality is a facet for N={g.parties}", True, rep.is_facet, rep.is_facet)
        D = 3**g.parties - 1
        s.claim("local polytope dimension 3^N - 1", D, rep.dimension, rep.dimension == D)
    if dist == "cubic4":
        s.claim("cubic four-party inequality is valid", True, rep.is_valid, rep.is_valid)
        s.claim("cubic four-party inequality is not a facet", False, rep.is_facet, not rep.is_facet)
    return s


def check_facet_file(path: str, embedding: str, decimal: bool) -> Section:
    s = Section("facet inequality", decimal)
    rep = facets.facet_check(load_inequality(path), embedding)
    s.results.update(rep.to_json())
    return s


def check_boxes(decimal: bool, p1: Behavior | None = None, p2: Behavior | None = None) -> Section:
    s = Section("boxes", decimal)
    boxes = {"P1": p1 or nosignalling.box_p1(), "P2": p2 or nosignalling.box_p2()}
    ineq = game.build_inequality(game.instance(3))
    third = Fraction(1, 3)
    ok_ns = {}
    for name, b in boxes.items():
        ns = bool(is_no_signalling(b, max_violations=1))
        ok_ns[name] = ns
        s.claim(f"{name} is no-signalling and normalized", True, ns, ns)
        v = evaluate(ineq, b)
        s.claim(f"{name} scores 1/3", third, v, v == third)
        if ns:
            rep = nosignalling.extremality_check(b)
            s.results[f"{name}_tight_constraints"] = rep.tight_constraints
            s.claim(f"{name} is a vertex", True, rep.is_vertex, rep.is_vertex)
        else:
            s.claim(f"{name} is a vertex", True, "not no-signalling", False)
    orb = nosignalling.orbit_max_violators(boxes["P1"], boxes["P2"])
    s.results.update(p1_orbit_size=orb.p1_orbit, p2_orbit_size=orb.p2_orbit)
    s.claim("maximal violators in the P1 orbit", 24, orb.p1_maximal, orb.p1_maximal == 24)
    s.claim("maximal violators in the P2 orbit", 8, orb.p2_maximal, orb.p2_maximal == 8)
    s.claim("distinct maximal violators in total", 32, orb.union, orb.union == 32 and orb.disjoint)
    return s


def check_factor_two(decimal: bool, seed: int, samples: int = 100, behaviors: int = 1000) -> Section:
    s = Section("factor-two", decimal)
    s.seed = seed
    for n in (3, 4):
        g = game.instance(n, "uniform")
        rep = nosignalling.check_factor_two(g)
        s.claim(f"uniform prior N={n}: omega_ns = omega_c", rep.omega_c, rep.omega_ns, rep.equal_when_balanced is True and rep.certified)
    rng = random.Random(seed)
    bad, balanced = 0, 0
    for _ in range(samples):
        rep = nosignalling.check_factor_two(game.GyniInstance(3, game.random_distribution(3, rng)))
        bad += not rep.ok
        balanced += rep.balanced_dominated
    s.results.update(random_priors=samples, random_balanced=balanced)
    s.claim(f"omega_ns <= 2 omega_c on {samples} random priors (N=3)", 0, bad, bad == 0)
    vals = [nosignalling.sum_over_inputs_bound(b) for b in nosignalling.random_ns_behaviors(behaviors, seed)]
    top = max(vals)
    s.results["max_sum_over_inputs"] = s.rat(top)
    s.claim(f"sum_x P(win|x) <= 2 on {behaviors} random no-signalling boxes", True, top <= 2, top <= 2)
    return s


def check_odd_even(odd_n: int, decimal: bool) -> Section:
    s = Section(f"odd-even N={odd_n}", decimal)
    rep = nosignalling.check_odd_even(odd_n)
    s.results.update(
        omega_ns=[s.rat(v) for v in rep.omega_ns],
        omega_c=[s.rat(v) for v in rep.omega_c],
        ratios=[s.rat(v) for v in rep.ratios],
        extension_value=s.rat(rep.extension_value),
        omega_ns_literally_equal=rep.omega_ns[0] == rep.omega_ns[1],
    )
    s.claim("ratios for N and N+1 agree", rep.ratios[0], rep.ratios[1], rep.ratios_equal)
    if odd_n in NS_RATIO_TARGETS:
        t = NS_RATIO_TARGETS[odd_n]
        s.claim(f"ratio equals the tabulated value for N={odd_n}", t, rep.ratios[0], rep.ratios[0] == t)
    s.claim("copier extension attains the N+1 optimum", rep.omega_ns[1], rep.extension_value, rep.extension_attains_optimum)
    s.claim("both optima certified", True, rep.certified, rep.certified)
    return s


def check_sos(cases: list[tuple[int, str]], decimal: bool, seed: int | None = None, samples: int = 0) -> Section:
    s = Section("sos-check", decimal)
    for n, dist in cases:
        v = quantum.verify_sos_identity(game.instance(n, dist).prior)
        s.claim(f"identity holds: {dist} N={n}", True, v.ok, v.ok)
    if samples:
        s.seed = seed
        rng = random.Random(seed)
        fails = sum(not quantum.verify_sos_identity(game.random_distribution(3, rng)).ok for _ in range(samples))
        s.claim(f"identity holds on {samples} random priors (N=3)", 0, fails, fails == 0)
    return s


def check_seesaw(g: game.GyniInstance, dist: str, dims: list[int], restarts: int, seed: int, decimal: bool) -> Section:
    s = Section(f"seesaw N={g.parties} {dist}", decimal)
    s.seed = seed
    wc = game.classical_bound(g)
    for d in dims:
        r = quantum.seesaw_search(g, d, restarts, seed)
        s.results[f"best_dim{d}"] = f"{r.best:.12g}"
        ok = r.best <= float(wc) + SEESAW_SLACK
        s.claim(f"see-saw stays below omega_c + 1e-6 (dim {d}, {restarts} restarts)", f"<= {float(wc):.12g}", f"{r.best:.12g}", ok)
    return s


def check_nlc(n: int, decimal: bool, with_entries: bool = False) -> Section:
    s = Section(f"nlc-audit n={n}", decimal)
    lem = nlc.check_linear_correspondence(n)
    s.claim("correlator identity for every linear strategy", True, lem.identity_holds, lem.identity_holds)
    s.claim("deterministic correlation points match linear strategies", 2 ** (n + 1), lem.point_count, lem.points_match_linear)
    audit = nlc.audit_nlc_facets(n)
    summary = audit.to_json()
    entries = summary.pop("entries")
    s.results.update(summary)
    s.results["trivial_candidates"] = sum(e.trivial for e in audit.entries)
    s.results["min_dimension_gap"] = min(e.report.gap for e in audit.entries)
    D = (2**n + 1) ** 2 - 1
    s.claim("local polytope dimension", D, audit.dimension, audit.dimension == D)
    s.claim("linear strategies reach the deterministic maximum", True, audit.all_linear_optimal, audit.all_linear_optimal)
    corr = all(e.correlation_facet for e in audit.entries)
    s.claim("candidates are full-correlation facets", True, corr, corr)
    s.claim("facet-defining candidates", 0, audit.facets, audit.facets == 0)
    if with_entries:
        s.results["entries"] = entries
    return s


# -- reproduce-all ---------------------------------------------------------------

def reproduce_all(profile: str, seed: int, decimal: bool, workers: int = 1) -> list[Section]:
    tasks: list[Callable[[], Section]] = []
    for n in range(3, 8):
        tasks.append(lambda n=n: check_bounds(game.instance(n), "promise", False, decimal))
    ns_range = range(3, 6) if profile == "core" else range(3, 8)
    for n in ns_range:
        tasks.append(lambda n=n: check_ns_bound(game.instance(n), "promise", "auto", decimal))
    if profile == "core":
        tasks.append(lambda: check_ns_bound(game.instance(4), "promise", "symmetric", decimal))
    tasks.append(lambda: check_factor_two(decimal, seed))
    tasks.append(lambda: check_boxes(decimal))
    tasks.append(lambda: check_odd_even(3, decimal))
    if profile == "extended":
        tasks.append(lambda: check_odd_even(5, decimal))
    facet_range = range(3, 6) if profile == "core" else range(3, 8)
    for n in facet_range:
        tasks.append(lambda n=n: check_facet_game(game.instance(n), "promise", "auto", decimal))
    tasks.append(lambda: check_facet_game(game.instance(4, "cubic4"), "cubic4", "auto", decimal))
    sos_cases = [(n, "promise") for n in range(3, 6)] + [(n, "uniform") for n in range(2, 6)]
    tasks.append(lambda: check_sos(sos_cases, decimal, seed, 100))
    for dist in ("promise", "uniform"):
        tasks.append(lambda dist=dist: check_seesaw(game.instance(3, dist), dist, [2, 3], 50, seed, decimal))
    for n in (2, 3):
        tasks.append(lambda n=n: check_nlc(n, decimal))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda t: t(), tasks))
    return [t() for t in tasks]


# -- entry point -----------------------------------------------------------------

def _threads() -> int:
    raw = os.environ.get("GYNI_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise UsageError(f"GYNI_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--decimal", action="store_true", help="add 12-digit decimals next to exact values")
    common.add_argument("--emit-report", metavar="PATH", help="also write the run report to PATH")
    common.add_argument("--timings", action="store_true", help="include wall-clock time (breaks byte stability)")
    common.add_argument("-v", "--verbose", action="store_true")

    game_args = argparse.ArgumentParser(add_help=False)
    game_args.add_argument("--parties", type=int)
    game_args.add_argument("--dist", default="promise", help="promise, uniform, cubic4 or a distribution JSON file")

    p = argparse.ArgumentParser(prog="gyni", description="Exact bounds and audits for the neighbour-guessing game.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", parents=[common, game_args], help="classical bound (and --ns)")
    b.add_argument("--ns", action="store_true", help="also solve the no-signalling LP")

    nb = sub.add_parser("ns-bound", parents=[common, game_args], help="exact no-signalling optimum")
    nb.add_argument("--method", choices=["auto", "full", "symmetric"], default="auto")
    nb.add_argument("--witness", metavar="PATH", help="write the optimal behaviour as JSON")

    f = sub.add_parser("facet", parents=[common, game_args], help="facet test against the local polytope")
    f.add_argument("--inequality", metavar="PATH")
    f.add_argument("--embedding", choices=facets.EMBEDDINGS, default="auto")

    bx = sub.add_parser("boxes", parents=[common], help="extremal box checks")
    bx.add_argument("action", choices=["verify"])
    bx.add_argument("--p1", metavar="PATH", help="replacement table for P1")
    bx.add_argument("--p2", metavar="PATH", help="replacement table for P2")

    c = sub.add_parser("appendix-c", aliases=["odd-even"], parents=[common], help="odd/even no-signalling comparison")
    c.add_argument("--odd-n", type=int, default=3)

    sub.add_parser("sos-check", parents=[common, game_args], help="exact sum-of-squares identity")

    ss = sub.add_parser("seesaw", parents=[common, game_args], help="see-saw search for quantum strategies")
    ss.add_argument("--dim", type=int, default=2, choices=[2, 3])
    ss.add_argument("--restarts", type=int, default=50)
    ss.add_argument("--seed", type=int, default=0)

    nl = sub.add_parser("nlc-audit", parents=[common], help="facet audit of NLC inequalities")
    nl.add_argument("--n", type=int, choices=[2, 3], required=True)

    ra = sub.add_parser("reproduce-all", parents=[common], help="run every check")
    ra.add_argument("--profile", choices=["core", "extended"], default="core")
    ra.add_argument("--seed", type=int, default=0)
    return p


def run(args: argparse.Namespace) -> dict:
    cmd = args.command
    dec = args.decimal
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "decimal", "emit_report", "timings", "verbose")}
    if cmd == "bounds":
        g = resolve_prior(args.parties, args.dist)
        sections = [check_bounds(g, args.dist, args.ns, dec)]
    elif cmd == "ns-bound":
        g = resolve_prior(args.parties, args.dist)
        sections = [check_ns_bound(g, args.dist, args.method, dec, args.witness)]
    elif cmd == "facet":
        if args.inequality:
            sections = [check_facet_file(args.inequality, args.embedding, dec)]
        else:
            g = resolve_prior(args.parties, args.dist)
            sections = [check_facet_game(g, args.dist, args.embedding, dec)]
    elif cmd == "boxes":
        p1 = load_behavior(args.p1) if args.p1 else None
        p2 = load_behavior(args.p2) if args.p2 else None
        for b in (p1, p2):
            if b is not None and b.scenario != game.binary_scenario(3):
                raise UsageError("box tables must be three-party binary behaviours")
        sections = [check_boxes(dec, p1, p2)]
    elif cmd in ("appendix-c", "odd-even"):
        if args.odd_n % 2 == 0 or args.odd_n < 3:
            raise UsageError("--odd-n must be odd and at least 3")
        sections = [check_odd_even(args.odd_n, dec)]
    elif cmd == "sos-check":
        g = resolve_prior(args.parties, args.dist)
        s = Section("sos-check", dec)
        v = quantum.verify_sos_identity(g.prior)
        s.results["omega_c"] = s.rat(v.omega_c)
        s.results["mismatches"] = [[w, s.rat(a), s.rat(b)] for w, a, b in v.mismatches]
        s.claim("identity holds", True, v.ok, v.ok)
        sections = [s]
    elif cmd == "seesaw":
        g = resolve_prior(args.parties, args.dist)
        if g.parties > 4:
            raise UsageError("see-saw supports at most four players")
        sections = [check_seesaw(g, args.dist, [args.dim], args.restarts, args.seed, dec)]
    elif cmd == "nlc-audit":
        sections = [check_nlc(args.n, dec, with_entries=True)]
    elif cmd == "reproduce-all":
        sections = reproduce_all(args.profile, args.seed, dec, _threads())
    else:  # pragma: no cover - argparse rejects unknown commands
        raise UsageError(cmd)
    report = {
        "command": cmd,
        "parameters": params,
        "sections": [s.to_json() for s in sections],
        "pass": all(s.passed for s in sections),
        "failures": [{"section": s.name, "claim": v["claim"]} for s in sections for v in s.verdicts if not v["pass"]],
    }
    return report


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr, format="%(message)s")
    try:
        threads = _threads()
        try:
            import flint

            flint.ctx.threads = threads
        except (ImportError, AttributeError):  # pragma: no cover
            pass
        t0 = time.perf_counter()
        report = run(args)
        if args.timings:
            report["duration_s"] = round(time.perf_counter() - t0, 3)
        if args.emit_report:
            write_json(args.emit_report, report)
    except (UsageError, InputError, ScenarioError) as exc:
        print(f"gyni: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(dumps(report))
    return 0 if report["pass"] else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
