"""``level-lab``: JSON problem files in, JSON or text reports out.

Exit codes: 0 success, 2 schema or input error, 3 hypothesis violation,
4 cross-check mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from typing import Dict, List, Optional

import jsonschema

from levellab import catalog, levels
from levellab.fieldlin import FieldSpec
from levellab.grcalg import AlgebraMap, Element, GradedAlgebra, GradedModule
from levellab.koszul import (FiltrationCertificate, HypothesisError, check_semifree_filtration, koszul_filtration,
                             koszul_tor)
from levellab.levels import Bounds, ChainProblem, PullbackProblem
from levellab.resolve import minimal_free_resolution, projective_dimension, tor_table
from levellab.simplicial import SimplicialComplex, dj_level, hochster_tor, stanley_reisner_module

EXIT_SCHEMA, EXIT_HYPOTHESIS, EXIT_MISMATCH = 2, 3, 4

# command -> payload kind in the schema
PAYLOAD_KIND = {
    "tor": "module", "resolve": "module", "level-graded": "module", "level-one-test": "module",
    "hochster": "complex", "dj-level": "complex",
    "level-pullback": "pullback", "level-fibre": "pullback", "level-chain": "chain",
    "filtration-check": "filtration", "torus-check": "torus",
}


class CliError(Exception):
    def __init__(self, code: int, message: str, witness=None):
        super().__init__(message)
        self.code = code
        self.witness = witness


def load_schema() -> dict:
    return json.loads(resources.files("levellab").joinpath("data/problem.schema.json").read_text())


def _validator(kind: str) -> jsonschema.Draft7Validator:
    schema = load_schema()
    return jsonschema.Draft7Validator({"definitions": schema["definitions"], "$ref": f"#/definitions/{kind}"})


def validate(data, kind: str):
    errors = sorted(_validator(kind).iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise CliError(EXIT_SCHEMA, f"schema error at {path}: {e.message}")


def read_problem(path: str, command: str) -> dict:
    """Load ``path`` as an envelope or a bare payload for ``command``; returns an envelope."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(EXIT_SCHEMA, f"cannot read {path}: {exc}")
    if isinstance(data, dict) and "version" in data and "command" in data:
        validate(data, "envelope")
        if data["command"] != command:
            raise CliError(EXIT_SCHEMA, f"file holds a '{data['command']}' problem, not '{command}'")
    else:
        data = {"version": 1, "command": command, "payload": data}
    validate(data["payload"], PAYLOAD_KIND[command])
    return data


# decoding

def element(alg: GradedAlgebra, terms) -> Element:
    out: Element = {}
    for c, mono in terms:
        out = alg.elem_add(out, {tuple(mono): alg.field(c)})
    return out


def decode_algebra(data: dict, field: Optional[FieldSpec]) -> GradedAlgebra:
    if field is None and "field" not in data:
        field = FieldSpec.rationals()
    return GradedAlgebra.from_json(data, field)


def decode_module(data: dict, field: Optional[FieldSpec]) -> GradedModule:
    if field is None and "field" not in data:
        field = FieldSpec.rationals()
    return GradedModule.from_json(data, field)


def decode_map(src: GradedAlgebra, tgt: GradedAlgebra, images) -> AlgebraMap:
    return AlgebraMap.from_elements(src, tgt, [element(tgt, im) for im in images])


def decode_pullback(data: dict, field: Optional[FieldSpec]) -> PullbackProblem:
    B = decode_algebra(data["B"], field)
    X = decode_algebra(data["X"], field or B.field)
    case = data.get("case", "i")
    if case == "ii":
        if "psi_star" not in data:
            raise CliError(EXIT_SCHEMA, "case (ii) needs psi_star")
        from levellab.koszul import tensor_algebra
        P = tensor_algebra(B, B)
        psi = [element(X, im) for im in data["psi_star"]]
        if len(psi) != P.ngens:
            raise CliError(EXIT_SCHEMA, f"psi_star needs {P.ngens} images")
        return PullbackProblem(None, B, X, case="ii", psi_images=psi, d_max=data.get("d_max"))
    for key in ("E", "q_star", "phi_star"):
        if key not in data:
            raise CliError(EXIT_SCHEMA, f"case (i) needs {key}")
    E = decode_algebra(data["E"], field or B.field)
    return PullbackProblem(E, B, X, decode_map(B, E, data["q_star"]), decode_map(B, X, data["phi_star"]),
                           d_max=data.get("d_max"))


def decode_chain(data: dict, field: Optional[FieldSpec]) -> ChainProblem:
    X = decode_algebra(data["total_cohomology"], field)
    R = N = None
    if "loop_homology" in data:
        R = decode_algebra(data["loop_homology"], field or X.field)
        if "fibre_homology" not in data:
            raise CliError(EXIT_SCHEMA, "loop_homology needs fibre_homology")
        N = GradedModule.from_json(data["fibre_homology"], algebra=R)
    return ChainProblem(X, R, N, bool(data.get("fibre_is_point", False)))


# encoding

def encode_chain(p: ChainProblem) -> dict:
    out = {"total_cohomology": p.total_cohomology.to_json(), "fibre_is_point": p.fibre_is_point}
    if p.loop_homology is not None:
        out["loop_homology"] = p.loop_homology.to_json()
        out["fibre_homology"] = p.fibre_homology.to_json()
    return out


def encode_map(phi: AlgebraMap, basis: List[Element]) -> dict:
    return {"source": phi.source.to_json(), "target": phi.target.to_json(), "images": phi.to_json(),
            "basis": [[[str(c), list(m)] for m, c in sorted(b.items())] for b in basis]}


def emit(name: str, params: dict) -> dict:
    """A problem envelope for a catalog entry."""
    if name == "torus_su2":
        F = FieldSpec.parse(params.get("field", "q"))
        t = catalog.torus_su2(params.get("h", "T"), params.get("k", "T"), F)
        payload = {"full": t.full.to_json(), "torus": t.torus.to_json(), "splitting": encode_map(t.splitting, t.basis),
                   "k_splitting": encode_map(*t.k_splitting)}
        return {"version": 1, "command": "torus-check", "payload": payload,
                "scenario": {"name": name, "params": params, "expected": t.expected}}
    sc = catalog.scenario(name, params)
    if sc.kind in ("pullback", "fibre"):
        command = "level-pullback" if sc.kind == "pullback" else "level-fibre"
        payload = sc.problem.to_json()
    elif sc.kind == "chain":
        command, payload = "level-chain", encode_chain(sc.problem)
    elif sc.kind == "graded":
        command, payload = "level-graded", sc.problem[1].to_json()
    else:
        command, payload = "dj-level", sc.problem.to_json()
    env = {"version": 1, "command": command, "payload": payload, "scenario": sc.to_json()}
    if sc.kind == "graded":
        env["bounds"] = {"n_max": sc.params["n_max"], "d_max": None}
    return env


# running

def _bounds(env: dict, args) -> Bounds:
    if getattr(args, "bounds", None):
        try:
            return Bounds.parse(args.bounds)
        except ValueError:
            raise CliError(EXIT_SCHEMA, f"bad --bounds {args.bounds!r}; use N,D")
    b = env.get("bounds") or {}
    return Bounds(b.get("n_max"), b.get("d_max"))


def _field(env: dict, args) -> Optional[FieldSpec]:
    text = getattr(args, "field", None)
    if text:
        return FieldSpec.parse(text)
    if "field" in env:
        return FieldSpec.from_json(env["field"])
    return None


def _shared_mismatch(a: Dict, b: Dict, n_max: int, d_max: Optional[int]) -> Optional[list]:
    keys = set(a) | set(b)
    for key in sorted(keys):
        i, j = key
        if i > n_max or (d_max is not None and j > d_max):
            continue
        if a.get(key, 0) != b.get(key, 0):
            return [i, j, a.get(key, 0), b.get(key, 0)]
    return None


def run_command(command: str, env: dict, args) -> dict:
    field = _field(env, args)
    bounds = _bounds(env, args)
    payload = env["payload"]
    oracle = bool(getattr(args, "oracle", False))
    result: dict = {}
    if PAYLOAD_KIND[command] == "module":
        M = decode_module(payload, field)
        A = M.algebra
        if command == "tor":
            tab = tor_table(M, bounds.n_max, bounds.d_max)
            result = {"tor": tab.to_json(), "table": tab.format_text()}
            if oracle and A.is_polynomial:
                kt = koszul_tor(A, M, tab.d_max)
                bad = _shared_mismatch(tab.dims, kt.dims, tab.n_max, tab.d_max)
                result["oracle"] = {"koszul": kt.to_json(), "agree": bad is None}
                if bad:
                    raise CliError(EXIT_MISMATCH, "resolution and Koszul Tor disagree", bad)
        elif command == "resolve":
            res = minimal_free_resolution(M, bounds.n_max, bounds.d_max)
            pd = projective_dimension(M, bounds.n_max, bounds.d_max)
            result = {"generator_degrees": res.gen_degrees, "terminated": res.terminated,
                      "projective_dimension": pd.to_json(), "dd_defect": res.dd_defect(),
                      "exactness_defect": res.exactness_defect(), "resolution": res.to_json()}
            if oracle and (res.dd_defect() or res.exactness_defect() or res.unit_entries()):
                raise CliError(EXIT_MISMATCH, "resolution failed its self-checks")
        elif command == "level-graded":
            r = levels.level_graded_module(A, M, bounds)
            result = {"level": r.to_json(), "text": r.format_text()}
        else:
            ob = levels.level_one_obstruction(A, M, bounds)
            result = {"obstruction": ob.to_json(), "text": str(ob)}
    elif PAYLOAD_KIND[command] == "complex":
        s = SimplicialComplex.from_json(payload)
        F = field or FieldSpec.rationals()
        tab = hochster_tor(s, F)
        if oracle:
            base, M = stanley_reisner_module(s, F)
            kt = koszul_tor(base, M)
            rt = tor_table(M, s.m, 2 * s.m)
            checks = {"koszul": _shared_mismatch(tab.dims, kt.dims, s.m, None),
                      "resolution": _shared_mismatch(tab.dims, rt.dims, s.m, 2 * s.m)}
            result["oracle"] = {k: v is None for k, v in checks.items()}
            for k, v in checks.items():
                if v:
                    raise CliError(EXIT_MISMATCH, f"Hochster and {k} Tor disagree", v)
        if command == "hochster":
            result.update({"tor": tab.to_json(), "table": tab.format_text()})
        else:
            v = dj_level(s, F)
            result.update({"level": v, "text": f"level = {v}", "tor": tab.to_json()})
    elif command in ("level-pullback", "level-fibre"):
        p = decode_pullback(payload, field)
        r = levels.pullback_level_bound(p, bounds) if command == "level-pullback" else levels.fibre_level(p, bounds)
        dt, _ = p.tensor(bounds.d_max)
        result = {"level": r.to_json(), "text": r.format_text(),
                  "homology_dims": {str(k): v for k, v in sorted(dt.homology_dims().items())}}
    elif command == "level-chain":
        r = levels.chain_level_sandwich(decode_chain(payload, field), bounds)
        result = {"level": r.to_json(), "text": r.format_text()}
    elif command == "filtration-check":
        p = decode_pullback(payload["problem"], field)
        dt, gamma = p.tensor(bounds.d_max)
        if "gamma" in payload:
            gamma = payload["gamma"]
        cert = koszul_filtration(dt, gamma)
        if "stages" in payload:
            stages = tuple(frozenset(tuple(w) for w in st) for st in payload["stages"])
            cert = FiltrationCertificate(cert.ambient, stages, payload.get("declared_class", len(stages) - 1),
                                         cert.d_max, dict(cert.notes), cert.caveats)
        chk = check_semifree_filtration(cert)
        result = {"certificate": cert.to_json(), "check": chk.to_json(),
                  "text": (f"class {chk.verified_class}, level <= {chk.level_upper}" if chk.ok
                           else f"rejected: {chk.failure}")}
        if not chk.ok:
            result["exit"] = EXIT_HYPOTHESIS
    elif command == "torus-check":
        full = decode_pullback(payload["full"], field)
        torus = decode_pullback(payload["torus"], field)

        def mp(d):
            src = decode_algebra(d["source"], field)
            tgt = decode_algebra(d["target"], field)
            return decode_map(src, tgt, d["images"]), [element(tgt, b) for b in d["basis"]]

        split, basis = mp(payload["splitting"])
        ksplit = mp(payload["k_splitting"]) if "k_splitting" in payload else None
        # the maps must use the problems' own algebras
        split = AlgebraMap.from_elements(full.X_alg, torus.X_alg, [split.image(i) for i in range(full.X_alg.ngens)])
        if ksplit is not None:
            ksplit = (AlgebraMap.from_elements(full.E_alg, torus.E_alg,
                                               [ksplit[0].image(i) for i in range(full.E_alg.ngens)]), ksplit[1])
        rep = levels.torus_reduction_check(full, torus, split, basis, bounds, ksplit)
        result = {"report": rep.to_json(),
                  "text": f"full {rep.full}, torus {rep.torus}: {'equal' if rep.equal else 'MISMATCH'}"}
        if not rep.equal:
            raise CliError(EXIT_MISMATCH, "torus reduction mismatch", result["report"])
    return {"command": command, "field": str(field) if field else None, "bounds": bounds.to_json(),
            "input": payload, "result": result}


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2, default=str)
    res = report.get("result", {})
    lines = [f"# {report.get('command')}  field={report.get('field') or 'from input'}  "
             f"bounds n_max={report['bounds']['n_max']} d_max={report['bounds']['d_max']}"]
    for key in ("text", "table"):
        if key in res:
            lines.append(str(res[key]))
    if "oracle" in res:
        lines.append(f"oracle: {json.dumps(res['oracle'], sort_keys=True, default=str)}")
    if "check" in report:
        lines.append(report["check"])
    return "\n".join(lines)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.add_argument("--field", help="fp:P or q (overrides the file)")
    p.add_argument("--bounds", help="N,D: homological and internal-degree bounds")
    p.add_argument("--oracle", action="store_true", help="cross-check independent computation paths")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="level-lab", description="Levels of DG modules from cohomology data.")
    sub = parser.add_subparsers(dest="cmd", required=True)
    for name, flag in (("tor", "--module"), ("resolve", "--module"), ("hochster", "--complex"),
                       ("dj-level", "--complex"), ("torus-check", "--problem")):
        p = sub.add_parser(name)
        p.add_argument(flag, dest="path", required=True)
        _common(p)
    lv = sub.add_parser("level").add_subparsers(dest="sub", required=True)
    for name, flag in (("graded", "--module"), ("one-test", "--module"), ("pullback", "--problem"),
                       ("fibre", "--problem"), ("chain", "--problem")):
        p = lv.add_parser(name)
        p.add_argument(flag, dest="path", required=True)
        _common(p)
    fl = sub.add_parser("filtration").add_subparsers(dest="sub", required=True)
    p = fl.add_parser("check")
    p.add_argument("--problem", dest="path", required=True)
    _common(p)
    p = sub.add_parser("run", help="run an envelope problem file")
    p.add_argument("path")
    _common(p)
    cat = sub.add_parser("catalog").add_subparsers(dest="sub", required=True)
    cat.add_parser("list")
    p = cat.add_parser("emit")
    p.add_argument("name")
    p.add_argument("--param", action="append", default=[], help="key=value")
    p.add_argument("--out")
    p = sub.add_parser("scenario")
    p.add_argument("name")
    for key in ("n", "p", "k", "l", "a", "complex", "deg", "n_max"):
        p.add_argument(f"--{key.replace('_', '-')}", dest=key)
    p.add_argument("--check", action="store_true", help="compare with the expected answer")
    _common(p)
    return parser


def _command_name(args) -> str:
    if args.cmd == "level":
        return "level-" + args.sub
    if args.cmd == "filtration":
        return "filtration-check"
    return args.cmd


def _scenario(args) -> dict:
    params = {}
    for key in ("n", "p", "k", "l", "a", "complex", "deg", "n_max"):
        v = getattr(args, key)
        if v is not None:
            params[key] = v if key == "complex" else int(v)
    if args.field:
        params["field"] = args.field
    sc = catalog.scenario(args.name, params)
    r = catalog.solve(sc, Bounds.parse(args.bounds))
    report = {"command": "scenario", "field": None, "bounds": Bounds.parse(args.bounds).to_json(),
              "input": sc.to_json(), "result": {"level": r.to_json(), "text": r.format_text()}}
    if args.check:
        ok = str(r) == sc.expected
        report["check"] = f"{r}, {'matches paper' if ok else 'does NOT match expected ' + str(sc.expected)}"
        if not ok:
            report["exit"] = EXIT_MISMATCH
    return report


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    fmt = getattr(args, "format", "json")
    try:
        if args.cmd == "catalog":
            if args.sub == "list":
                names = catalog.list_scenarios() + ["torus_su2"]
                print("\n".join(sorted(names)))
                return 0
            params = dict(kv.split("=", 1) for kv in args.param)
            text = json.dumps(emit(args.name, params), sort_keys=True, indent=2)
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text + "\n")
            else:
                print(text)
            return 0
        if args.cmd == "scenario":
            report = _scenario(args)
        else:
            command = _command_name(args)
            if args.cmd == "run":
                try:
                    with open(args.path) as fh:
                        command = json.load(fh).get("command", "")
                except (OSError, json.JSONDecodeError, AttributeError) as exc:
                    raise CliError(EXIT_SCHEMA, f"cannot read {args.path}: {exc}")
                if command not in PAYLOAD_KIND:
                    raise CliError(EXIT_SCHEMA, f"unknown command {command!r}")
            env = read_problem(args.path, command)
            report = run_command(command, env, args)
        code = report.get("result", {}).pop("exit", None) or report.pop("exit", None) or 0
        print(render(report, fmt))
        return code
    except CliError as exc:
        _fail(exc.code, str(exc), exc.witness, fmt)
        return exc.code
    except HypothesisError as exc:
        _fail(EXIT_HYPOTHESIS, str(exc), exc.witness, fmt)
        return EXIT_HYPOTHESIS
    except (ValueError, KeyError, ZeroDivisionError) as exc:
        _fail(EXIT_SCHEMA, f"invalid input: {exc}", None, fmt)
        return EXIT_SCHEMA


def _fail(code: int, message: str, witness, fmt: str):
    if fmt == "json":
        print(json.dumps({"error": message, "exit": code, "witness": witness}, sort_keys=True, indent=2, default=str))
    else:
        print(f"error: {message}" + (f"\nwitness: {witness}" if witness is not None else ""), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
