"""Command-line entry point.

    schemeq scheme build|verify|params
    schemeq spectral idempotents|krein|hypergroup
    schemeq qmc op|restrict|walk
    schemeq emc build|expect|entangled
    schemeq ifs jacobi|moments|stratify|multimode|grassmann-report

Exit codes: 0 success, 2 validation error (one JSON line on stderr),
3 resource cap exceeded, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

import numpy as np

from . import io
from .entangled import (
    EntangledChainSpec,
    LocalObservable,
    build_state,
    is_entangled,
    local_expectation,
    qmc_evaluate,
)
from .errors import ParameterError, ResourceError, SchemeqError
from .groups import named_group
from .ifs import (
    JacobiData,
    closed_walks,
    grassmann_mode_parameters,
    mode_sum_check,
    multimode_ifs,
    quantum_decomposition,
    radial_jacobi,
    stratify,
    three_term_check,
    vacuum_moments,
)
from .qmc import (
    ClassicalChain,
    choi_psd_check,
    make_transition_operator,
    restrict_to_subalgebra,
    trajectory_csv,
    walk,
)
from .scheme import (
    build_conjugacy_scheme,
    build_grassmann,
    build_group_scheme,
    build_johnson,
    intersection_numbers,
    verify_axioms,
)
from .spectral import hypergroup, krein_parameters, primitive_idempotents, spectral_residuals
from .tolerances import DEFAULT_SEED, Tolerances

EXIT_OK, EXIT_INVALID, EXIT_CAP, EXIT_USAGE = 0, 2, 3, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise UsageError(message)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tolerance-eig", type=float, default=1e-8)
    p.add_argument("--tolerance-zero", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--out", "-o", default=None)
    p.add_argument("--cap-vertices", type=int, default=None)
    return p


def _ints(text: str) -> list:
    return [int(x) for x in text.split(",") if x.strip()]


def _floats(text: str) -> list:
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    root = _Parser(prog="schemeq", description="Association schemes and quantum probability")
    top = root.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def command(group, name, handler, help_text):
        p = group.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        return p

    sc = top.add_parser("scheme", help="build and check schemes").add_subparsers(
        dest="command", required=True, parser_class=_Parser
    )
    p = command(sc, "build", cmd_scheme_build, "construct a scheme")
    p.add_argument("--family", required=True, choices=("group", "conjugacy", "johnson", "grassmann"))
    p.add_argument("--group-name", "--group", dest="group_name")
    p.add_argument("--group-file")
    p.add_argument("--v", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--q", type=int)
    p = command(sc, "verify", cmd_scheme_verify, "check the axioms")
    p.add_argument("--in", dest="inp", required=True)
    p = command(sc, "params", cmd_scheme_params, "intersection numbers")
    p.add_argument("--in", dest="inp", required=True)

    sp = top.add_parser("spectral", help="idempotents, Krein parameters, hypergroup").add_subparsers(
        dest="command", required=True, parser_class=_Parser
    )
    for name, handler in (
        ("idempotents", cmd_spectral_idempotents),
        ("krein", cmd_spectral_krein),
        ("hypergroup", cmd_spectral_hypergroup),
    ):
        p = command(sp, name, handler, name)
        p.add_argument("--in", dest="inp", required=True)
        if name == "idempotents":
            p.add_argument("--matrices", action="store_true", help="include E_j")

    qp = top.add_parser("qmc", help="quantum Markov chains").add_subparsers(
        dest="command", required=True, parser_class=_Parser
    )
    for name, handler in (("op", cmd_qmc_op), ("restrict", cmd_qmc_restrict), ("walk", cmd_qmc_walk)):
        p = command(qp, name, handler, name)
        p.add_argument("--in", dest="inp")
        p.add_argument("--weights", type=_floats)
        p.add_argument("--basis", type=int, help="use weights delta_i")
        if name != "op":
            p.add_argument("--p0", type=_floats)
        if name == "walk":
            p.add_argument("--chain")
            p.add_argument("--steps", type=int, default=10)

    ep = top.add_parser("emc", help="entangled Markov chains").add_subparsers(
        dest="command", required=True, parser_class=_Parser
    )
    p = command(ep, "build", cmd_emc_build, "truncated state")
    p.add_argument("--chain", required=True)
    p.add_argument("--n", type=int, required=True)
    p = command(ep, "expect", cmd_emc_expect, "local expectation")
    p.add_argument("--chain", required=True)
    p.add_argument("--obs", required=True)
    p.add_argument("--n", type=int, required=True)
    p = command(ep, "entangled", cmd_emc_entangled, "P(I) != I test")
    p.add_argument("--chain", required=True)

    fp = top.add_parser("ifs", help="interacting Fock spaces").add_subparsers(
        dest="command", required=True, parser_class=_Parser
    )
    p = command(fp, "jacobi", cmd_ifs_jacobi, "radial Jacobi sequence of a rooted graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--root", type=int, default=0)
    p = command(fp, "moments", cmd_ifs_moments, "vacuum moments")
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--in", dest="inp", help="Jacobi JSON (omega, alpha, terminated)")
    p.add_argument("--graph")
    p.add_argument("--root", type=int, default=0)
    p = command(fp, "stratify", cmd_ifs_stratify, "distance partition and quantum decomposition")
    p.add_argument("--graph", required=True)
    p.add_argument("--root", type=int, default=0)
    p = command(fp, "multimode", cmd_ifs_multimode, "graded CAP blocks of a scheme")
    p.add_argument("--scheme", "--in", dest="inp", required=True)
    p.add_argument("--modes", type=_ints)
    p = command(fp, "grassmann-report", cmd_ifs_grassmann, "Grassmann mode parameters")
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--v", type=int, default=4)
    p.add_argument("--d", type=int, default=2)
    return root


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _tol(args) -> Tolerances:
    try:
        return Tolerances(eig=args.tolerance_eig, zero=args.tolerance_zero)
    except ValueError as exc:
        raise ParameterError(str(exc)) from None


def _emit(args, payload=None, csv_text=None, default="json") -> None:
    fmt = args.format or default
    if fmt == "csv":
        if csv_text is None:
            raise ParameterError(f"csv output not available for {args.group} {args.command}")
        text = csv_text() if callable(csv_text) else csv_text
    else:
        text = io.dumps(payload() if callable(payload) else payload)
    io.write_text(text, args.out)


def _scheme(args):
    return io.scheme_from_dict(io.read_json(args.inp))


def _tensor_csv(T: np.ndarray, name: str) -> str:
    rows = [(k, i, j, T[k, i, j]) for k, i, j in np.ndindex(*T.shape)]
    return io.rows_csv(["k", "i", "j", name], rows)


def _weights(args, size: int) -> np.ndarray:
    if args.basis is not None:
        if not 0 <= args.basis < size:
            raise ParameterError(f"basis index must lie in 0..{size - 1}")
        w = np.zeros(size)
        w[args.basis] = 1.0
        return w
    if args.weights is None:
        raise ParameterError("give --weights or --basis")
    return np.asarray(args.weights)


def _operator(args):
    tol = _tol(args)
    s = _scheme(args)
    sd = primitive_idempotents(s, tol, seed=args.seed)
    T = make_transition_operator(s, sd, _weights(args, sd.size), tol)
    return s, sd, T, tol


def _chain_from_args(args) -> ClassicalChain:
    s, sd, T, tol = _operator(args)
    chain = restrict_to_subalgebra(T, sd, tol=tol)
    if getattr(args, "p0", None) is not None:
        chain = ClassicalChain(chain.t, np.asarray(args.p0))
    return chain


def _spec(args) -> EntangledChainSpec:
    p0, t = io.chain_from_dict(io.read_json(args.chain))
    return EntangledChainSpec(p0, t)


# ---------------------------------------------------------------------------
# handlers
# ---------------------------------------------------------------------------

def cmd_scheme_build(args) -> None:
    fam = args.family
    if fam in ("group", "conjugacy"):
        if args.group_file:
            g = io.group_from_dict(io.read_json(args.group_file))
        elif args.group_name:
            g = named_group(args.group_name)
        else:
            raise ParameterError("give --group NAME or --group-file")
        s = build_group_scheme(g) if fam == "group" else build_conjugacy_scheme(g)
    elif fam == "johnson":
        if args.v is None or args.k is None:
            raise ParameterError("johnson needs --v and --k")
        s = build_johnson(args.v, args.k)
    else:
        if None in (args.q, args.v, args.d):
            raise ParameterError("grassmann needs --q, --v and --d")
        s = build_grassmann(args.q, args.v, args.d)
    _emit(args, io.scheme_to_dict(s))


def cmd_scheme_verify(args) -> int:
    report = verify_axioms(_scheme(args))
    payload = {
        "axioms": {
            str(k): {"passed": r.passed, "witness": r.witness} for k, r in report.results().items()
        },
        "is_scheme": report.is_scheme,
    }
    _emit(args, payload)
    if not report.is_scheme:
        k, witness = report.first_failure()
        _diagnostic("axiom", {"axiom": k, "detail": witness})
        return EXIT_INVALID
    return EXIT_OK


def cmd_scheme_params(args) -> None:
    pt = intersection_numbers(_scheme(args))
    _emit(
        args,
        {"p": pt.p, "valencies": pt.valencies, "transpose_map": list(pt.transpose_map)},
        lambda: _tensor_csv(pt.p, "p"),
    )


def cmd_spectral_idempotents(args) -> None:
    tol = _tol(args)
    s = _scheme(args)
    sd = primitive_idempotents(s, tol, seed=args.seed)

    def payload():
        out = {
            "m": list(sd.m),
            "eigenmatrix": io.complex_pairs(sd.eigenmatrix),
            "seed": sd.seed,
            "residuals": spectral_residuals(s, sd),
        }
        if args.matrices:
            out["E"] = [io.complex_pairs(E) for E in sd.E]
        out["tolerances"] = {"eig": tol.eig, "zero": tol.zero, "num": tol.num, "gs": tol.gs}
        return out

    def csv():
        P = sd.eigenmatrix
        header = ["j", "m"] + [f"P_{i}_{part}" for i in range(P.shape[1]) for part in ("re", "im")]
        rows = [[j, sd.m[j]] + [x for z in P[j] for x in (z.real, z.imag)] for j in range(sd.size)]
        return io.rows_csv(header, rows)

    _emit(args, payload, csv)


def cmd_spectral_krein(args) -> None:
    tol = _tol(args)
    s = _scheme(args)
    sd = primitive_idempotents(s, tol, seed=args.seed)
    kt = krein_parameters(s, sd, tol)
    _emit(
        args,
        lambda: io.tensor_dict("q", kt.q, tol, m=list(sd.m), residual=kt.residual),
        lambda: _tensor_csv(kt.q, "q"),
    )


def cmd_spectral_hypergroup(args) -> None:
    tol = _tol(args)
    s = _scheme(args)
    sd = primitive_idempotents(s, tol, seed=args.seed)
    ht = hypergroup(s, sd, tol)
    D = sd.size

    def csv():
        header = ["i", "j"] + [f"h_{k}" for k in range(D)]
        rows = [[i, j] + list(ht.h[i, j]) for i in range(D) for j in range(D)]
        return io.rows_csv(header, rows)

    _emit(
        args,
        lambda: io.tensor_dict("h", ht.h, tol, m=list(sd.m), residual=ht.residual),
        csv,
    )


def cmd_qmc_op(args) -> None:
    s, sd, T, tol = _operator(args)
    rep = choi_psd_check(T, tol)
    _emit(args, lambda: {
        "weights": T.weights,
        "multiplier": io.complex_pairs(T.multiplier) if np.iscomplexobj(T.multiplier) else T.multiplier,
        "choi": {"min_eigenvalue": rep.min_eigenvalue, "mode": rep.mode,
                 "completely_positive": rep.completely_positive},
    })


def cmd_qmc_restrict(args) -> None:
    chain = _chain_from_args(args)
    _emit(
        args,
        lambda: io.chain_to_dict(chain.p0, chain.t),
        lambda: io.rows_csv([f"t_{k}" for k in range(chain.size)], chain.t),
    )


def cmd_qmc_walk(args) -> None:
    if args.chain:
        p0, t = io.chain_from_dict(io.read_json(args.chain))
        chain = ClassicalChain(t, p0 if args.p0 is None else np.asarray(args.p0))
    elif args.inp:
        chain = _chain_from_args(args)
    else:
        raise ParameterError("give --chain or --in with weights")
    traj = walk(chain, args.steps)
    _emit(args, lambda: {"trajectory": traj}, lambda: trajectory_csv(traj), default="csv")


def cmd_emc_build(args) -> None:
    spec = _spec(args)
    st = build_state(spec, args.n)
    _emit(args, lambda: {"level": st.level, "norm": st.norm(), "amplitudes": st.amplitudes})


def cmd_emc_expect(args) -> None:
    spec = _spec(args)
    obs = io.observables_from_json(io.read_json(args.obs))
    if len(obs) == 1:
        A = LocalObservable(obs[0], spec.size)
        payload = {"level": args.n, "window": A.window, "value": local_expectation(spec, A, args.n)}
    else:
        A = LocalObservable.product(obs)
        payload = {
            "level": args.n,
            "window": A.window,
            "value": local_expectation(spec, A, args.n),
            "qmc_value": qmc_evaluate(spec, obs),
        }
    _emit(args, payload)


def cmd_emc_entangled(args) -> None:
    _, t = io.chain_from_dict(io.read_json(args.chain))
    rep = is_entangled(t, _tol(args))
    _emit(args, {"entangled": rep.entangled,
                 "witness": None if rep.witness is None else list(rep.witness),
                 "value": rep.value})


def _graph(args):
    return io.graph_from_dict(io.read_json(args.graph))


def cmd_ifs_jacobi(args) -> None:
    tol = _tol(args)
    sg = stratify(_graph(args), args.root)
    rj = radial_jacobi(sg, tol)
    _emit(args, {
        "root": args.root,
        "omega": list(rj.jacobi.omega),
        "alpha": list(rj.jacobi.alpha),
        "terminated": rj.jacobi.terminated,
        "drg_consistent": rj.drg_consistent,
        "strata_sizes": sg.sizes,
        "excluded": sg.excluded,
    })


def cmd_ifs_moments(args) -> None:
    tol = _tol(args)
    payload = {"m_max": args.m}
    if args.graph:
        A = _graph(args)
        rj = radial_jacobi(stratify(A, args.root), tol)
        jd = rj.jacobi
        walks = closed_walks(A, args.root, args.m)
        payload["closed_walks"] = walks
        payload["drg_consistent"] = rj.drg_consistent
    elif args.inp:
        data = io.read_json(args.inp)
        jd = JacobiData(tuple(data["omega"]), tuple(data["alpha"]), bool(data.get("terminated", False)))
        walks = None
    else:
        raise ParameterError("give --in jacobi.json or --graph g.json")
    moments = vacuum_moments(jd, args.m)
    payload["moments"] = moments
    if walks is not None:
        payload["match"] = all(
            abs(a - b) <= tol.num * max(1, abs(b)) for a, b in zip(moments, walks)
        )
    _emit(
        args,
        payload,
        lambda: io.rows_csv(["m", "moment"], list(enumerate(moments))),
    )


def cmd_ifs_stratify(args) -> None:
    sg = stratify(_graph(args), args.root)
    Ap, Am, A0 = quantum_decomposition(sg)
    _emit(args, {
        "root": args.root,
        "strata": [V.tolist() for V in sg.strata],
        "excluded": sg.excluded,
        "edges_plus": [[int(x), int(y)] for x, y in np.argwhere(Ap)],
        "edges_zero": [[int(x), int(y)] for x, y in np.argwhere(np.triu(A0))],
    })


def cmd_ifs_multimode(args) -> None:
    tol = _tol(args)
    s = _scheme(args)
    mm = multimode_ifs(s, args.modes, tol)

    def payload():
        modes = []
        for j in mm.modes:
            plus, zero, minus = mm.caps(j)
            modes.append({"mode": j, "plus": plus, "zero": zero, "minus": minus})
        out = {
            "degrees": mm.degrees,
            "basis": mm.basis,
            "three_term": three_term_check(mm),
            "modes": modes,
        }
        if args.modes is None:
            out["mode_sum"] = mode_sum_check(mm)
        return out

    _emit(args, payload)


def cmd_ifs_grassmann(args) -> None:
    report = grassmann_mode_parameters(args.q, args.v, args.d, _tol(args))

    def csv():
        header = ["quantity", "n", "k", "i", "j", "paper_formula", "paper_value", "computed", "match"]
        lines = [",".join(header)]
        for c in report["comparisons"]:
            k, i, j = c["index"]
            lines.append(",".join(str(x) for x in (
                c["quantity"], c["n"], k, i, j, f'"{c["paper_formula"]}"',
                c["paper_value"], c["computed"], str(c["match"]).lower(),
            )))
        return "\n".join(lines) + "\n"

    _emit(args, report, csv)


# ---------------------------------------------------------------------------

def _diagnostic(code: str, witness) -> None:
    sys.stderr.write(io.dumps({"error": code, "witness": witness}))


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    saved = os.environ.get("SCHEMEQ_CAP_VERTICES")
    if args.cap_vertices is not None:
        os.environ["SCHEMEQ_CAP_VERTICES"] = str(args.cap_vertices)
    try:
        return _dispatch(args)
    finally:
        if saved is None:
            os.environ.pop("SCHEMEQ_CAP_VERTICES", None)
        else:
            os.environ["SCHEMEQ_CAP_VERTICES"] = saved


def _dispatch(args) -> int:
    try:
        code = args.handler(args)
    except ResourceError as exc:
        _diagnostic(exc.code, exc.witness if exc.witness is not None else str(exc))
        return EXIT_CAP
    except SchemeqError as exc:
        _diagnostic(exc.code, exc.witness if exc.witness is not None else str(exc))
        return EXIT_INVALID
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        _diagnostic("input", f"{type(exc).__name__}: {exc}")
        return EXIT_INVALID
    return EXIT_OK if code is None else code


def main() -> None:
    sys.exit(run())
