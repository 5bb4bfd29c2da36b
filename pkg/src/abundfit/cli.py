"""Command-line pipeline: ingest, fit, test, rank, summarize, cluster.

Subcommands write tab/comma-separated reports into an output directory; every
command is deterministic (identical inputs and flags give byte-identical
outputs).  Exit status is 0 only when all requested outputs were written and
every fit converged.  ``DISTFIT_THREADS`` caps fit-grid parallelism; command
line flags take precedence over the environment, which takes precedence over
defaults.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import cluster as clustermod
from . import families, gof, mle, stats
from .dataset import builtin_corpus, load_corpus, pool

DEFAULT_POOLED_LABEL = "Magnoliopsida"


def _parse_families(args) -> list[str]:
    names: list[str] = []
    if getattr(args, "families", None):
        names += [n.strip() for n in args.families.split(",") if n.strip()]
    for n in getattr(args, "family", None) or []:
        names.append(n.strip())
    if not names or any(n.upper() == "ALL" for n in names):
        return list(families.FAMILY_IDS)
    for n in names:
        if n not in families.FAMILY_IDS:
            raise ValueError(
                f"unknown family {n!r}; valid names: {', '.join(families.FAMILY_IDS)}"
            )
    return names


def _load_corpus(args):
    if args.builtin:
        return builtin_corpus()
    if not args.input:
        raise ValueError("either --builtin or --input PATH is required")
    if not os.path.exists(args.input):
        raise ValueError(f"input file not found: {args.input}")
    if args.meta and not os.path.exists(args.meta):
        raise ValueError(f"metadata file not found: {args.meta}")
    return load_corpus(args.input, args.meta)


def _fit_config(args) -> mle.FitConfig:
    return mle.FitConfig(
        max_evaluations=args.mle_max_evals,
        tolerance=args.mle_tol,
        restarts=args.mle_restarts,
    )


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("DISTFIT_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"DISTFIT_THREADS must be an integer, got {env!r}") from None
    return 1


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def _param_format(args):
    return "{:.4f}".format if args.precision == "paper" else "{:.17g}".format


def _grid_failures(grid) -> list[str]:
    bad = []
    for (fam, label), res in grid.items():
        if isinstance(res, mle.FitSkipped):
            bad.append(f"{fam}/{label}: skipped ({res.reason})")
        elif not res.converged:
            bad.append(f"{fam}/{label}: not converged")
    return sorted(bad)


def _report_failures(bad: list[str]) -> int:
    if bad:
        print(f"{len(bad)} fit cell(s) failed:", file=sys.stderr)
        for line in bad:
            print(f"  {line}", file=sys.stderr)
        return 1
    return 0


def _format_fit_grid(grid, family_list, corpus, args) -> str:
    num = _param_format(args)
    lines = ["Dist\tSpecies\tParams\tLogLik\tConverged\tEvaluations"]
    for fam in family_list:
        for sample in corpus:
            res = grid[(fam, sample.species_label)]
            if isinstance(res, mle.FitSkipped):
                lines.append(
                    f"{fam}\t{sample.species_label}\t-\tnan\tskipped\t0"
                )
                continue
            params = ";".join(
                f"{name}={num(value)}"
                for name, value in zip(families.PARAM_NAMES[fam], res.params)
            )
            lines.append(
                f"{fam}\t{sample.species_label}\t{params}\t{res.loglik:.6f}"
                f"\t{'true' if res.converged else 'false'}\t{res.evaluations}"
            )
    return "\n".join(lines) + "\n"


def cmd_fit(args) -> int:
    corpus = _load_corpus(args)
    family_list = _parse_families(args)
    grid = mle.fit_all(corpus, family_list, _fit_config(args), threads=_threads(args))
    _write(_outdir(args) / "fitted_params.tsv", _format_fit_grid(grid, family_list, corpus, args))
    return _report_failures(_grid_failures(grid))


def cmd_gof_table(args) -> int:
    corpus = _load_corpus(args)
    family_list = _parse_families(args)
    grid = mle.fit_all(corpus, family_list, _fit_config(args), threads=_threads(args))
    bad = _grid_failures(grid)
    if bad:
        return _report_failures(bad)
    rows = gof.gof_table(corpus, grid, family_list)
    _write(_outdir(args) / "gof_table.tsv", gof.format_gof_table(rows, args.precision))
    return 0


def _summary_rows(corpus, args, include_pooled=None):
    cfg = _fit_config(args)
    alphas = tuple(float(a) for a in args.alphas.split(","))
    rows = []
    failures = []
    for sample in corpus:
        try:
            fit = mle.fit("Lognormal_2P", sample, cfg)
            rows.append(stats.summarize(fit, sample.species_label, alphas))
        except ValueError as exc:
            failures.append(f"Lognormal_2P/{sample.species_label}: {exc}")
    if include_pooled is None:
        include_pooled = not args.no_pooled
    if include_pooled:
        pooled = pool(corpus, args.pooled_label)
        fit = mle.fit("Lognormal_2P", pooled, cfg)
        rows.append(stats.summarize(fit, pooled.species_label, alphas))
    return rows, failures


def cmd_summary(args) -> int:
    corpus = _load_corpus(args)
    rows, failures = _summary_rows(corpus, args)
    _write(_outdir(args) / "summary.tsv", stats.format_summary_table(rows, args.precision))
    return _report_failures(failures)


def cmd_curves(args) -> int:
    corpus = _load_corpus(args)
    cfg = _fit_config(args)
    family = args.curve_family
    if family not in families.FAMILY_IDS:
        raise ValueError(f"unknown family {family!r}")
    out = _outdir(args)
    grid = np.geomspace(args.x_min, args.x_max, args.points)
    num = "{:.10g}".format if args.precision == "paper" else "{:.17g}".format
    failures = []
    for sample in corpus:
        try:
            fit = mle.fit(family, sample, cfg)
        except ValueError as exc:
            failures.append(f"{family}/{sample.species_label}: {exc}")
            continue
        if not fit.converged:
            failures.append(f"{family}/{sample.species_label}: not converged")
            continue
        density = families.pdf(family, fit.params, grid)
        lines = ["x,pdf"]
        lines += [f"{num(x)},{num(p)}" for x, p in zip(grid, density)]
        _write(out / f"curve_{sample.species_label}.csv", "\n".join(lines) + "\n")
    return _report_failures(failures)


def _write_dendrogram(out: Path, stem: str, dgm) -> None:
    _write(out / f"{stem}.nwk", clustermod.to_newick(dgm) + "\n")
    _write(out / f"{stem}.dot", clustermod.to_dot(dgm))
    _write(out / f"{stem}_merges.tsv", clustermod.format_merge_table(dgm))


def cmd_cluster(args) -> int:
    corpus = _load_corpus(args)
    out = _outdir(args)
    status = 0
    if args.mode in ("stats", "both"):
        # Leaves are the individual samples; the pooled row never clusters.
        rows, failures = _summary_rows(corpus, args, include_pooled=False)
        if failures:
            return _report_failures(failures)
        fm = clustermod.feature_matrix(rows, scaling=args.scaling)
        dgm = clustermod.single_linkage(clustermod.distance_matrix(fm), fm.row_labels)
        _write_dendrogram(out, "cluster_stats", dgm)
    if args.mode in ("taxonomy", "both"):
        if args.taxonomy:
            tax_path = Path(args.taxonomy)
            if not tax_path.exists():
                raise ValueError(f"taxonomy file not found: {tax_path}")
            text = tax_path.read_text(encoding="utf-8")
        elif args.builtin:
            from .dataset import _read_data

            text = _read_data("cronquist.csv")
        else:
            raise ValueError("taxonomy mode needs --taxonomy PATH (no bundled table for custom corpora)")
        entries = clustermod.parse_taxonomy(text)
        fm, codebook = clustermod.encode_taxonomy(entries)
        dgm = clustermod.single_linkage(clustermod.distance_matrix(fm), fm.row_labels)
        _write_dendrogram(out, "cluster_taxonomy", dgm)
        _write(out / "taxonomy_codebook.tsv", clustermod.format_codebook(codebook))
    return status


def cmd_all(args) -> int:
    status = 0
    corpus = _load_corpus(args)
    family_list = _parse_families(args)
    grid = mle.fit_all(corpus, family_list, _fit_config(args), threads=_threads(args))
    out = _outdir(args)
    _write(out / "fitted_params.tsv", _format_fit_grid(grid, family_list, corpus, args))
    bad = _grid_failures(grid)
    if bad:
        status = _report_failures(bad)
    else:
        rows = gof.gof_table(corpus, grid, family_list)
        _write(out / "gof_table.tsv", gof.format_gof_table(rows, args.precision))
    status = max(status, cmd_summary(args))
    status = max(status, cmd_curves(args))
    status = max(status, cmd_cluster(args))
    return status


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--builtin", action="store_true", help="use the bundled ten-species corpus")
    p.add_argument("--input", help="observations CSV (species,abundance)")
    p.add_argument("--meta", help="metadata CSV (species,species_name,source_ref)")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--families", help="comma-separated family names, or ALL")
    p.add_argument("--family", action="append", help="one family name (repeatable)")
    p.add_argument("--mle-tol", type=float, default=1e-9, help="simplex tolerance")
    p.add_argument("--mle-max-evals", type=int, default=20000, help="objective evaluation cap")
    p.add_argument("--mle-restarts", type=int, default=5, help="jittered simplex restarts")
    p.add_argument("--threads", type=int, default=None, help="fit-grid worker threads")
    p.add_argument(
        "--precision",
        choices=("paper", "full"),
        default="paper",
        help="numeric output precision (default: fixed report precision)",
    )
    p.add_argument("--alphas", default="0.5,1,2,3", help="entropy orders for summaries")
    p.add_argument("--no-pooled", action="store_true", help="omit the pooled-corpus row")
    p.add_argument(
        "--pooled-label", default=DEFAULT_POOLED_LABEL, help="label for the pooled-corpus row"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abundfit",
        description="Fit parametric distributions to abundance samples, score and rank them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit families to every sample, write parameter table")
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("gof-table", help="goodness-of-fit battery and family ranking")
    _add_common(p)
    p.set_defaults(func=cmd_gof_table)

    p = sub.add_parser("summary", help="lognormal summary statistics per sample")
    _add_common(p)
    p.set_defaults(func=cmd_summary)

    p = sub.add_parser("curves", help="sampled density curves on a log-spaced grid")
    _add_common(p)
    p.add_argument("--curve-family", default="Lognormal_2P", help="family to sample")
    p.add_argument("--points", type=int, default=200, help="grid points per species")
    p.add_argument("--x-min", type=float, default=0.01)
    p.add_argument("--x-max", type=float, default=100.0)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("cluster", help="single-linkage dendrograms")
    _add_common(p)
    p.add_argument("--mode", choices=("stats", "taxonomy", "both"), default="both")
    p.add_argument("--scaling", choices=("raw", "zscore"), default="raw")
    p.add_argument("--taxonomy", help="taxonomy CSV (species,rank,category)")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("all", help="run the whole pipeline into one directory")
    _add_common(p)
    p.add_argument("--curve-family", default="Lognormal_2P")
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--x-min", type=float, default=0.01)
    p.add_argument("--x-max", type=float, default=100.0)
    p.add_argument("--mode", choices=("stats", "taxonomy", "both"), default="both")
    p.add_argument("--scaling", choices=("raw", "zscore"), default="raw")
    p.add_argument("--taxonomy", help="taxonomy CSV (species,rank,category)")
    p.set_defaults(func=cmd_all)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
