"""Command-line experiment runner.

    metineq growth --group heis --rank 1 --radius 14
    metineq gasket-decay --level 8
    metineq riesz --n 2 --x 0,0 --levels 6
    metineq weaktype --n 2 --masses masses.json --tmin 0.5 --tmax 5
    metineq isoperimetric --shape cube --n 2
    metineq sphere-poincare --n 3 --kind cr --samples 100000 --seed 7
    metineq padic --p 3 --series-k 5
    metineq padic-norms --graph g.json --matrix a.json --p 2 --trials 100 --seed 1

Every subcommand accepts ``--output``, ``--format csv|json``, ``--seed``,
``--workers`` and ``--config`` (a JSON object of flag values; explicit flags
win). Exit status: 0 ok, 2 invalid input, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import euclid, fractals, groups, padic
from ._util import DEFAULT_MAX_ELEMENTS, DEFAULT_MAX_SAMPLES, DEFAULT_MAX_VERTICES, ResourceLimitError

EXIT_OK, EXIT_INVALID, EXIT_CAP = 0, 2, 3


class Table:
    def __init__(self, columns, rows):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps({"columns": self.columns, "rows": [[_jsonable(v) for v in r] for r in self.rows]},
                              indent=2) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()


class Document:
    """Free-form JSON report (CSV output is not offered)."""

    def __init__(self, payload):
        self.payload = payload

    def render(self, fmt: str) -> str:
        return json.dumps(_jsonable(self.payload), indent=2, sort_keys=True) + "\n"


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, Fraction):
        return padic.format_rational(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return padic.format_rational(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


def _floats(text: str) -> list[float]:
    return [float(x) for x in str(text).split(",") if x.strip()]


# -- subcommands --------------------------------------------------------

def cmd_growth(a) -> Table:
    kind = {"heis": "heisenberg", "heisenberg": "heisenberg", "lattice": "lattice", "box": "lattice-in-box"}[a.group]
    if kind == "lattice-in-box":
        if not a.bounds:
            raise ValueError("--group box needs --bounds lo:hi,lo:hi,...")
        bounds = [tuple(int(x) for x in b.split(":")) for b in a.bounds.split(",")]
        spec = groups.GroupSpec.box(bounds)
    else:
        spec = groups.GroupSpec(kind, a.rank)
    table = groups.ball_sizes(spec, a.radius, a.max_elements)
    return Table(["radius", "size"], table.rows())


def cmd_gasket_decay(a) -> Table:
    deltas = _floats(a.deltas) if a.deltas else [2.0**-k for k in range(1, 6)]
    rows = fractals.decay_table(a.level, deltas, workers=a.workers, max_vertices=a.max_vertices)
    return Table(["delta", "eps", "integral_D_eps", "mean_oscillation", "ratio"],
                 [[r.delta, r.eps, r.integral_d_eps, r.mean_oscillation, r.ratio] for r in rows])


def cmd_riesz(a) -> Table:
    x = np.array(_floats(a.x))
    if x.size != a.n:
        raise ValueError(f"--x needs {a.n} coordinates")
    f = euclid.bump(a.n, k=a.k)
    quad = euclid.QuadratureSpec(levels=a.levels, n_angles=a.angles)
    rec, rec_err = euclid.riesz_reconstruct(f, x, quad, with_error=True)
    bnd, bnd_err = euclid.riesz_upper_bound(f, x, quad, with_error=True)
    exact = float(f(x))
    return Table(["x", "f_exact", "reconstruct", "reconstruct_err_est", "abs_error", "upper_bound", "upper_bound_err_est"],
                 [[" ".join(repr(float(c)) for c in x), exact, rec, rec_err, abs(rec - exact), bnd, bnd_err]])


def _load_masses(path, n) -> euclid.PointMassMeasure:
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, dict):
        mu = euclid.PointMassMeasure(doc["points"], doc["masses"])
    else:
        arr = np.asarray(doc, dtype=float)
        mu = euclid.PointMassMeasure(arr[:, :-1], arr[:, -1])
    if mu.n != n:
        raise ValueError(f"mass points are {mu.n}-dimensional, --n is {n}")
    return mu


def cmd_weaktype(a) -> Table:
    if a.masses:
        mu = _load_masses(a.masses, a.n)
    else:
        mu = euclid.PointMassMeasure(np.zeros((1, a.n)), [1.0])
    if not 0 < a.tmin <= a.tmax:
        raise ValueError("need 0 < tmin <= tmax")
    ts = np.geomspace(a.tmin, a.tmax, a.tcount)
    fine = euclid.GridSpec(cells=a.cells)
    coarse = euclid.GridSpec(cells=a.cells // 2)
    rows = []
    for t in ts:
        r_f = euclid.weak_type_ratio(mu, [t], fine)
        r_c = euclid.weak_type_ratio(mu, [t], coarse)
        rows.append([float(t), r_f, abs(r_f - r_c), euclid.superlevel_volume(mu, t, fine)])
    best = max(r[1] for r in rows)
    rows.append(["sup", best, max(r[2] for r in rows), ""])
    return Table(["t", "ratio", "ratio_err_est", "volume"], rows)


def cmd_isoperimetric(a) -> Table:
    if a.shape == "ball":
        shape = euclid.ShapeSpec.ball(a.n, a.r)
    elif a.shape == "cube":
        shape = euclid.ShapeSpec.cube(a.n, a.side)
    else:
        if not a.sides:
            raise ValueError("--shape box needs --sides")
        shape = euclid.ShapeSpec.box(_floats(a.sides))
        if shape.n != a.n:
            raise ValueError(f"--sides gives {shape.n} sides, --n is {a.n}")
    vol, area = shape.volume_and_area()
    return Table(["shape", "n", "size", "volume", "area", "c_n", "ratio", "method"],
                 [[shape.kind, shape.n, " ".join(repr(s) for s in shape.size), vol, area,
                   euclid.isoperimetric_constant(shape.n), euclid.isoperimetric_check(shape), "closed-form"]])


_SPHERE_FUNCS = {
    "w1": lambda d: euclid.SphereFunction.coordinate(d, 0),
    "w1w2": lambda d: euclid.SphereFunction.product(d, 0, 1),
}


def cmd_sphere_poincare(a) -> Table:
    dim = a.n + 1
    f = _SPHERE_FUNCS[a.function](dim)
    est = euclid.sphere_poincare_ratio(f, a.kind, N=a.samples, seed=a.seed, workers=a.workers,
                                       max_samples=a.max_samples)
    return Table(["n", "kind", "function", "samples", "seed", "ratio", "ratio_stderr", "numerator", "denominator",
                  "denominator_stderr"],
                 [[a.n, a.kind, a.function, a.samples, a.seed, est.ratio, est.stderr, est.numerator,
                   est.denominator, est.denominator_stderr]])


def cmd_padic(a) -> Table:
    rows = []
    for k in range(a.series_k + 1):
        lhs, rhs, dist = padic.geometric_series_check(a.p, k)
        rows.append([a.p, k, lhs, rhs, lhs == rhs, dist, "exact"])
    return Table(["p", "k", "lhs", "rhs", "equal", "padic_distance_to_minus_one", "exactness"], rows)


def cmd_padic_norms(a) -> Document:
    rng = random.Random(a.seed)
    if a.graph or a.matrix:
        if not (a.graph and a.matrix):
            raise ValueError("--graph and --matrix go together")
        A = padic.GraphOperator.load(a.graph, a.matrix)
    else:
        A = padic.random_graph_operator(a.vertices, rng, p_bias=a.p)
    trials = []
    all_hold = True
    for _ in range(a.trials):
        f = padic.random_function(A.n_vertices, rng, p_bias=a.p)
        sup_r = padic.check_sup_bounds(A, f, a.p)
        sum_r = padic.check_sum_bounds(A, f, a.p)
        all_hold &= sup_r.holds and sum_r.holds
        trials.append({
            "sup": {"lhs": sup_r.lhs, "rhs": sup_r.rhs, "holds": sup_r.lhs <= sup_r.rhs},
            "sup_p": {"lhs": sup_r.lhs_p, "rhs": sup_r.rhs_p, "holds": sup_r.lhs_p <= sup_r.rhs_p},
            "sum": {"lhs": sum_r.lhs, "rhs": sum_r.rhs, "holds": sum_r.lhs <= sum_r.rhs},
            "sum_p": {"lhs": sum_r.lhs_p, "rhs": sum_r.rhs_p, "holds": sum_r.lhs_p <= sum_r.rhs_p},
        })
    sharp = _sharpness(A, a.p)
    return Document({"p": a.p, "n_vertices": A.n_vertices, "trials": trials, "all_hold": all_hold,
                     "sharpness": sharp, "exactness": "exact rational arithmetic"})


def _sharpness(A: padic.GraphOperator, p: int) -> dict:
    absp = padic.PAdicAbs(p)
    sup_ok, sum_ok = True, True
    for v in range(A.n_vertices):
        col = A.column(v)
        if not col:
            continue
        fa = padic.sup_sharpness_witness(A, v, "archimedean")
        sup_ok &= padic.apply_operator(A, fa)[v] == sum(abs(x) for x in col.values())
        fp = padic.sup_sharpness_witness(A, v, "padic", p)
        sup_ok &= absp(padic.apply_operator(A, fp)[v]) == max(absp(x) for x in col.values())
    for y in range(A.n_vertices):
        Af = padic.apply_operator(A, {y: 1})
        row = A.row(y)
        sum_ok &= sum(abs(x) for x in Af.values()) == sum((abs(x) for x in row.values()), Fraction(0))
        sum_ok &= sum(absp(x) for x in Af.values()) == sum((absp(x) for x in row.values()), Fraction(0))
    return {"sup_witnesses_equal": sup_ok, "sum_witnesses_equal": sum_ok}


# -- parser -------------------------------------------------------------

def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", help="write here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--config", help="JSON file of flag values; explicit flags win")
    common.add_argument("--max-elements", type=int, default=DEFAULT_MAX_ELEMENTS)
    common.add_argument("--max-vertices", type=int, default=DEFAULT_MAX_VERTICES)
    common.add_argument("--max-samples", type=int, default=DEFAULT_MAX_SAMPLES)

    parser = argparse.ArgumentParser(prog="metineq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        subs[name] = p
        return p

    p = add("growth", cmd_growth, "ball sizes of Heisenberg groups and lattices")
    p.add_argument("--group", choices=("heis", "heisenberg", "lattice", "box"), default="heis")
    p.add_argument("--rank", type=int, default=1)
    p.add_argument("--radius", type=int, default=8)
    p.add_argument("--bounds", help="box bounds lo:hi,... one per axis (use --bounds=... when lo is negative)")

    p = add("gasket-decay", cmd_gasket_decay, "difference-quotient integrals of the cut concentrator")
    p.add_argument("--level", type=int, default=8)
    p.add_argument("--deltas", help="comma-separated deltas (default 2^-1..2^-5)")

    p = add("riesz", cmd_riesz, "recover a bump from its gradient")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--x", default="0,0")
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--angles", type=int, default=64)

    p = add("weaktype", cmd_weaktype, "superlevel volumes of a Riesz potential")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--masses", help="JSON {points, masses} or [[x.., m], ...]; default one unit mass at 0")
    p.add_argument("--tmin", type=float, default=0.5)
    p.add_argument("--tmax", type=float, default=5.0)
    p.add_argument("--tcount", type=int, default=10)
    p.add_argument("--cells", type=int, default=801)

    p = add("isoperimetric", cmd_isoperimetric, "isoperimetric ratio of a closed-form shape")
    p.add_argument("--shape", choices=("ball", "cube", "box"), default="ball")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--side", type=float, default=1.0)
    p.add_argument("--sides", help="comma-separated box sides")

    p = add("sphere-poincare", cmd_sphere_poincare, "Monte Carlo Poincare ratio on S^n")
    p.add_argument("--n", type=int, default=2, help="sphere dimension")
    p.add_argument("--kind", choices=("tangential", "cr"), default="tangential")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--function", choices=sorted(_SPHERE_FUNCS), default="w1")

    p = add("padic", cmd_padic, "geometric series approximating -1 p-adically")
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--series-k", type=int, default=5)

    p = add("padic-norms", cmd_padic_norms, "sup/sum operator-norm bounds and sharpness, exactly")
    p.add_argument("--graph", help="JSON with n_points and edges")
    p.add_argument("--matrix", help="JSON list of [u, v, numerator, denominator]")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--vertices", type=int, default=20, help="size of the random operator when no files are given")
    return parser, subs


def parse(argv):
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
        if not isinstance(cfg, dict):
            raise ValueError("config must be a JSON object")
        sp = subs[args.command]
        known = {a.dest for a in sp._actions}
        unknown = set(k.replace("-", "_") for k in cfg) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        sp.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
        args = parser.parse_args(argv)
    if args.workers < 1:
        raise ValueError("--workers must be positive")
    return args


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = parse(argv)
        result = args.func(args)
        text = result.render(args.format)
    except SystemExit as e:  # argparse usage errors
        return int(e.code) if isinstance(e.code, int) else EXIT_INVALID
    except ResourceLimitError as e:
        print(f"metineq: {e}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, KeyError, NotImplementedError, FileNotFoundError, ArithmeticError) as e:
        print(f"metineq: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    if args.output:
        Path(args.output).write_text(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
