"""Command-line front end.

Subcommands: ``solve``, ``oracle``, ``gen``, ``match``, ``verify``. Reports are
JSON. Exit status is 0 on success, 1 on bad input, 2 when a solver output
fails its own certificate check.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from collections import Counter
from pathlib import Path
from typing import Sequence

from .balance2 import solve_maxflow_counts, solve_mcnf_counts
from .core import (Dataset, Sample, imbalance, imbalance_of_ids, index_levels,
                   intersection_counts, kappa_expand, materialize)
from .errors import (BadGroupValue, CertificateError, CovbalError, DuplicateId, EmptyTreatment,
                     MalformedRow, MissingColumn, TooLarge, WrongSelectionSize)
from .matchbal import assign_controls, read_distance_csv
from .oracle import exact_min_imbalance, gen_3dm_dataset, random_3dm_instance, random_instance

log = logging.getLogger("covbal")

GROUPS = ("treatment", "control")


class UnknownId(CovbalError):
    pass


class ObjectiveMismatch(CertificateError):
    code = "ObjectiveMismatch"


def ingest_csv(path: str | Path, covariates: Sequence[str]) -> Dataset:
    """Read ``id,group,<covariates...>`` rows; labels are taken verbatim after trimming."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MissingColumn("file has no header", 1)
    header = [h.strip() for h in rows[0]]
    for col in ("id", "group", *covariates):
        if col not in header:
            raise MissingColumn(f"missing column {col!r}", 1)
    pos = {h: i for i, h in enumerate(header)}
    groups: dict[str, list[Sample]] = {g: [] for g in GROUPS}
    seen: dict[str, set[str]] = {g: set() for g in GROUPS}
    for r, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise MalformedRow(f"expected {len(header)} fields, got {len(row)}", r)
        if any("," in x for x in row):
            raise MalformedRow("embedded commas are not allowed", r)
        fields = [x.strip() for x in row]
        group = fields[pos["group"]]
        if group not in GROUPS:
            raise BadGroupValue(f"group must be 'treatment' or 'control', got {group!r}", r)
        sid = fields[pos["id"]]
        if sid in seen[group]:
            raise DuplicateId(f"duplicate {group} id {sid!r}", r)
        seen[group].add(sid)
        groups[group].append(Sample(sid, tuple(fields[pos[c]] for c in covariates)))
    if not groups["treatment"]:
        raise EmptyTreatment("no treatment rows")
    return Dataset(tuple(covariates), tuple(groups["treatment"]), tuple(groups["control"]))


def write_csv(dataset: Dataset, path: str | Path | None) -> None:
    lines = [",".join(("id", "group", *dataset.covariates))]
    for group, samples in (("treatment", dataset.treatment), ("control", dataset.control)):
        lines += [",".join((s.id, group, *s.levels)) for s in samples]
    _emit("\n".join(lines) + "\n", path)


def _emit(text: str, path: str | Path | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def level_rows(dataset: Dataset, index, counts) -> list[dict]:
    rep = imbalance(index, counts)
    return [{"covariate": dataset.covariates[lv.covariate], "level": lv.label,
             "ell": lv.target, "selected": lv.selected, "excess": lv.excess,
             "deficit": lv.deficit} for lv in rep.levels]


def solve_report(dataset: Dataset, method: str = "maxflow", q: int | None = None,
                 kappa: int = 1, seed: int = 0) -> dict:
    work = kappa_expand(dataset, kappa)
    q = work.n if q is None else q
    index = index_levels(work)
    cells = intersection_counts(work, index)
    start = time.perf_counter()
    f_star = s_plus = unique_count = None
    if method == "mcnf":
        res = solve_mcnf_counts(index, cells, q)
        counts, objective = res.selection.counts, res.objective
    elif method == "maxflow":
        res = solve_maxflow_counts(index, cells, q)
        counts, objective = res.selection.counts, res.objective
        f_star, s_plus = res.f_star, res.s_plus_size
    elif method == "oracle":
        orc = exact_min_imbalance(work, q)
        counts, objective, unique_count = orc.counts, orc.objective, orc.optimal_count
    else:
        raise ValueError(f"unknown method {method!r}")
    log.info("%s solve: n=%d n'=%d q=%d objective=%d in %.3fs", method, work.n,
             work.n_control, q, objective, time.perf_counter() - start)
    ids = materialize(work, counts, seed, index)
    recheck = imbalance_of_ids(work, ids)
    if recheck != objective:
        raise CertificateError(
            f"reported objective {objective} but selected ids have imbalance {recheck}")
    report = {"method": method, "q": q, "kappa": kappa, "objective": objective,
              "f_star": f_star, "s_plus": s_plus, "levels": level_rows(work, index, counts),
              "selected_ids": ids}
    if unique_count is not None:
        report["unique_count"] = unique_count
    return report


def _read_selection(path: str | Path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return {"selected_ids": [ln.strip() for ln in text.splitlines() if ln.strip()]}
    if isinstance(data, list):
        return {"selected_ids": data}
    if not isinstance(data, dict) or "selected_ids" not in data:
        raise MalformedRow("selection file has no 'selected_ids'")
    return data


def _check_ids(dataset: Dataset, ids: list[str]) -> None:
    known = {s.id for s in dataset.control}
    unknown = [j for j in ids if j not in known]
    if unknown:
        raise UnknownId(f"not control ids: {unknown[:5]}")
    dup = [j for j, c in Counter(ids).items() if c > 1]
    if dup:
        raise DuplicateId(f"ids selected twice: {dup[:5]}")


def verify_report(dataset: Dataset, selection: dict, q: int | None = None,
                  kappa: int | None = None) -> dict:
    kappa = kappa or selection.get("kappa") or 1
    work = kappa_expand(dataset, kappa)
    q = q if q is not None else selection.get("q", work.n)
    ids = list(selection["selected_ids"])
    _check_ids(work, ids)
    if len(ids) != q:
        raise WrongSelectionSize(f"selection has {len(ids)} ids, expected q={q}")
    objective = imbalance_of_ids(work, ids)
    claimed = selection.get("objective")
    certificates: dict[str, bool] = {}
    optimum = None
    index = index_levels(work)
    cells = intersection_counts(work, index)
    if work.P == 2:
        # both solvers raise CertificateError on a failed check
        a = solve_mcnf_counts(index, cells, q)
        b = solve_maxflow_counts(index, cells, q)
        certificates = {"mcnf": True, "maxflow": True}
        if a.objective != b.objective:
            raise CertificateError(f"solvers disagree: mcnf {a.objective}, maxflow {b.objective}")
        optimum = a.objective
    else:
        try:
            optimum = exact_min_imbalance(work, q).objective
        except TooLarge:
            log.info("instance too large for the oracle; optimality not checked")
    report = {"q": q, "kappa": kappa, "selected": len(ids), "objective": objective,
              "reported_objective": claimed, "optimum": optimum,
              "optimal": None if optimum is None else objective == optimum,
              "certificates": certificates}
    if claimed is not None and claimed != objective:
        raise ObjectiveMismatch(
            f"selection claims objective {claimed} but recomputes to {objective}")
    return report


def match_report(dataset: Dataset, selection: dict, distances_path: str | Path,
                 kappa: int | None = None, scale: int = 1) -> dict:
    kappa = kappa or selection.get("kappa") or 1
    work = kappa_expand(dataset, kappa)
    ids = list(selection["selected_ids"])
    _check_ids(dataset, ids)
    index = index_levels(dataset)
    by_id = {s.id: s for s in dataset.control}
    sizes = Counter(index.cell_of(by_id[j]) for j in ids)
    distances = read_distance_csv(distances_path, scale)
    result = assign_controls(dataset, sizes, kappa, distances)
    try:
        unique_count = exact_min_imbalance(work, kappa * dataset.n).optimal_count
    except TooLarge:
        unique_count = None
    return {"kappa": kappa, "total_cost": result.total_cost,
            "stage1_unique_count": unique_count,
            "stage1_unique": None if unique_count is None else unique_count == 1,
            "assignments": [{"treatment": t, "controls": list(cs)}
                            for t, cs in sorted(result.controls.items())]}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="CSV with id,group,<covariates>")
    common.add_argument("--covariates", required=True, help="comma-separated column names")
    common.add_argument("--q", type=int, default=None, help="selection size (default kappa*n)")
    common.add_argument("--kappa", type=int, default=None, help="controls per treated sample")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", default=None)

    p = argparse.ArgumentParser(prog="covbal", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", parents=[common], help="minimum-imbalance selection")
    s.add_argument("--method", choices=("mcnf", "maxflow", "oracle"), default="maxflow")
    sub.add_parser("oracle", parents=[common], help="exhaustive optimum and uniqueness count")
    g = sub.add_parser("gen", help="write a random or 3DM-reduction instance as CSV")
    g.add_argument("--kind", choices=("random", "3dm"), default="random")
    g.add_argument("--P", type=int, default=2)
    g.add_argument("--n", type=int, default=4)
    g.add_argument("--n-control", type=int, default=8)
    g.add_argument("--k", default="3", help="levels per covariate, one value or comma list")
    g.add_argument("--size", type=int, default=3, help="3dm: elements per coordinate")
    g.add_argument("--extra", type=int, default=2, help="3dm: random triples beyond the planted ones")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output", default=None)
    m = sub.add_parser("match", parents=[common], help="stage-2 distance assignment")
    m.add_argument("--selection", required=True, help="JSON report from solve")
    m.add_argument("--distances", required=True, help="distance CSV")
    m.add_argument("--scale", type=int, default=1,
                   help="fixed-point factor for real distances (1 = integers expected)")
    v = sub.add_parser("verify", parents=[common], help="recheck a selection")
    v.add_argument("--selection", required=True, help="JSON report or one id per line")
    return p


def run(argv: Sequence[str] | None = None) -> tuple[int, dict | None]:
    args = _parser().parse_args(argv)
    try:
        if args.command == "gen":
            if args.kind == "random":
                ks = [int(x) for x in args.k.split(",")]
                ds = random_instance(args.P, args.n, args.n_control,
                                     ks[0] if len(ks) == 1 else ks, args.seed)
            else:
                ds = gen_3dm_dataset(random_3dm_instance(args.size, args.extra, args.seed))
            write_csv(ds, args.output)
            return 0, None
        covariates = [c.strip() for c in args.covariates.split(",") if c.strip()]
        dataset = ingest_csv(args.input, covariates)
        if args.command in ("solve", "oracle"):
            method = "oracle" if args.command == "oracle" else args.method
            report = solve_report(dataset, method, args.q, args.kappa or 1, args.seed)
        elif args.command == "verify":
            report = verify_report(dataset, _read_selection(args.selection), args.q, args.kappa)
        else:
            report = match_report(dataset, _read_selection(args.selection), args.distances,
                                  args.kappa, args.scale)
    except (CovbalError, OSError) as exc:
        return _fail(1, getattr(exc, "code", type(exc).__name__), str(exc), args)
    except CertificateError as exc:
        return _fail(2, exc.code, str(exc), args)
    _emit(_dump(report), args.output)
    return 0, report


def _fail(status: int, code: str, message: str, args) -> tuple[int, dict]:
    print(f"covbal {args.command}: {code}: {message}", file=sys.stderr)
    report = {"error": code, "message": message}
    _emit(_dump(report), getattr(args, "output", None))
    return status, report


def main(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("COVBAL_LOG", "error").upper()
    logging.basicConfig(level=getattr(logging, level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s")
    return run(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
