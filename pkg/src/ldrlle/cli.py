"""Command-line interface: generate samples, embed them, run the studies.

Exit codes: 0 success, 2 usage or input-format problems, 3 disconnected
neighbor graph, 4 general-position violation, 5 numerical failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import datasets, diagnostics, embedding, neighbors, weights
from .errors import (
    DisconnectedGraphError,
    GeneralPositionError,
    LdrLleError,
)

EXIT_USAGE = 2
EXIT_DISCONNECTED = 3
EXIT_GENERAL_POSITION = 4
EXIT_NUMERICAL = 5


def _write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def cmd_generate(args) -> int:
    sample = datasets.generate(args.name, args.n, args.seed)
    out = args.out if args.out is not None else Path(f"{args.name}.csv")
    datasets.save_sample(sample, out)
    n, D = sample.points.shape
    print(f"wrote {out} ({n} x {D}) and {datasets.preimage_path(out)}")
    return 0


def _load_points(args):
    """Points plus (preimage or None) from --input or --generator."""
    if args.generator is not None:
        sample = datasets.generate(args.generator, args.n, args.seed)
        return sample.points, sample.preimage
    X = datasets.load_csv(args.input)
    preimage = None
    pre_path = args.preimage
    if pre_path is None:
        sibling = datasets.preimage_path(args.input)
        if sibling.exists():
            pre_path = sibling
    if pre_path is not None:
        preimage = datasets.load_csv(pre_path)
        if preimage.shape[0] != X.shape[0]:
            raise ValueError(
                f"preimage has {preimage.shape[0]} rows but input has {X.shape[0]}"
            )
    return X, preimage


def cmd_embed(args) -> int:
    X, preimage = _load_points(args)
    graph = neighbors.knn(X, args.k)
    W, spectra = weights.assemble_weight_matrix(
        X, graph, args.method, d=args.d, delta=args.delta
    )
    emb = embedding.embed(W, args.d)
    diag = diagnostics.linear_projection_diagnostic(
        X, emb.Y, weights=W, preimage=preimage
    )

    meta = {
        "command": "embed",
        "input": str(args.input) if args.input is not None else None,
        "generator": args.generator,
        "n": int(X.shape[0]),
        "K": args.k,
        "d": args.d,
        "method": args.method,
        "delta": args.delta,
        "seed": args.seed,
        "output": str(args.out),
        "phi": diag.phi_value,
        "linear_r2": diag.linear_r2,
        "rank_correlation": diag.rank_correlation,
    }
    if spectra:
        alphas = np.array([s.alpha for s in spectra])
        meta["alpha"] = {
            "min": float(alphas.min()),
            "mean": float(alphas.mean()),
            "max": float(alphas.max()),
        }
        meta["r_max"] = float(max(s.radius for s in spectra))
        meta["gap_warnings"] = [int(s.center_index) for s in spectra if s.gap_warning]
    else:
        meta["alpha"] = None
        meta["r_max"] = None
        meta["gap_warnings"] = None

    embedding.save_embedding(emb, args.out, metadata=meta)
    if args.dump_neighbors is not None:
        neighbors.save_neighbor_graph(graph, args.dump_neighbors)
    if args.dump_weights is not None:
        weights.save_weight_matrix(W, args.dump_weights)
    if args.dump_spectra is not None and spectra:
        weights.save_spectra(spectra, args.dump_spectra)
    print(
        f"wrote {args.out} ({X.shape[0]} x {args.d}), "
        f"phi = {diag.phi_value:.6e}, linear_r2 = {diag.linear_r2:.4f}"
    )
    return 0


def cmd_perturb(args) -> int:
    reports = diagnostics.perturbation_experiment(
        epsilons=args.epsilons, trials=args.trials, seed=args.seed
    )
    config = {
        "command": "perturb",
        "epsilons": list(args.epsilons),
        "trials": args.trials,
        "seed": args.seed,
        "output": str(args.out),
    }
    payload = diagnostics.perturbation_report_dict(reports, config=config)
    _write_json(args.out, payload)
    if args.csv is not None:
        lines = ["epsilon,trial,classical,ldr"]
        for r in reports:
            for t in range(r.trials):
                lines.append(
                    f"{r.epsilon!r},{t},"
                    f"{r.distances_classical[t]!r},{r.distances_ldr[t]!r}"
                )
        Path(args.csv).write_text("\n".join(lines) + "\n")

    total_violations = 0
    for row in payload["reports"]:
        bound = "n/a" if row["bound"] is None else f"{row['bound']:.3e}"
        print(
            f"epsilon {row['epsilon']:.0e}: median classical "
            f"{row['classical']['median']:.3e}, median rank-d "
            f"{row['ldr']['median']:.3e}, bound {bound}, "
            f"violations {row['violations']}"
        )
        if row["violations"]:
            total_violations += row["violations"]
    if total_violations:
        print(f"error: {total_violations} bound violations", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


def cmd_theorem2(args) -> int:
    rows = []
    if args.generator is not None:
        for n in args.n_list:
            sample = datasets.generate(args.generator, n, args.seed)
            graph = neighbors.knn(sample.points, args.k)
            W, spectra = weights.assemble_weight_matrix(
                sample.points, graph, "ldr", d=args.d
            )
            result = diagnostics.theorem2_check_from_parts(sample.preimage, W, spectra)
            null = diagnostics.permuted_preimage_null(
                W, sample.preimage, permutations=args.permutations, seed=args.seed
            )
            rows.append(_theorem2_row(n, result, null))
    else:
        if args.preimage is None:
            print(
                "error: --input requires --preimage: the objective-value check "
                "scores ground-truth parameters, which an arbitrary CSV does not carry",
                file=sys.stderr,
            )
            return EXIT_USAGE
        X = datasets.load_csv(args.input)
        Z = datasets.load_csv(args.preimage)
        if Z.shape[0] != X.shape[0]:
            raise ValueError(
                f"preimage has {Z.shape[0]} rows but input has {X.shape[0]}"
            )
        graph = neighbors.knn(X, args.k)
        W, spectra = weights.assemble_weight_matrix(X, graph, "ldr", d=args.d)
        result = diagnostics.theorem2_check_from_parts(Z, W, spectra)
        null = diagnostics.permuted_preimage_null(
            W, Z, permutations=args.permutations, seed=args.seed
        )
        rows.append(_theorem2_row(X.shape[0], result, null))

    bounded = None
    if len(rows) > 1:
        first = rows[0]["ratio"]
        bounded = bool(
            np.isfinite(first) and all(r["ratio"] <= 2.0 * first for r in rows)
        )
    config = {
        "command": "theorem2",
        "generator": args.generator,
        "input": str(args.input) if args.input is not None else None,
        "K": args.k,
        "d": args.d,
        "seed": args.seed,
        "permutations": args.permutations,
        "output": str(args.out),
    }
    _write_json(args.out, {"config": config, "rows": rows, "bounded": bounded})
    for r in rows:
        print(
            f"n {r['n']}: phi/n {r['phi_z_over_n']:.3e}, ratio {r['ratio']:.3e}, "
            f"null/phi {r['null_over_phi']:.1f}"
        )
    if bounded is not None:
        print(f"ratio bounded (within 2x of smallest n): {bounded}")
    return 0


def _theorem2_row(n, result, null) -> dict:
    return {
        "n": int(n),
        "phi_z_over_n": result.phi_z_over_n,
        "max_lambda_dp1": result.max_lambda_dp1,
        "r_max": result.r_max,
        "ratio": result.ratio,
        "null_phi_z_over_n": null,
        "null_over_phi": (null / result.phi_z_over_n
                          if result.phi_z_over_n > 0.0 else float("inf")),
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ldrlle",
        description="Locally linear embedding with classical or rank-d "
                    "neighborhood weights, plus verification studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic sample (+ preimage sidecar)")
    p.add_argument("name", choices=sorted(datasets.GENERATORS))
    p.add_argument("--n", type=int, default=2000, help="sample size (default 2000)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None, help="default <name>.csv")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("embed", help="embed a sample and write Y + JSON sidecar")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="points CSV (headerless)")
    src.add_argument("--generator", choices=sorted(datasets.GENERATORS))
    p.add_argument("--n", type=int, default=2000, help="sample size with --generator")
    p.add_argument("--k", type=int, default=12, help="neighbors per point (default 12)")
    p.add_argument("--d", type=int, default=2, help="output dimension (default 2)")
    p.add_argument("--method", choices=("classical", "ldr"), default="ldr")
    p.add_argument("--delta", type=float, default=weights.DEFAULT_DELTA,
                   help="classical regularization scale (default 1e-9)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preimage", type=Path,
                   help="ground-truth parameter CSV for quality statistics "
                        "(auto-discovered next to --input when present)")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--dump-neighbors", type=Path, help="also write the neighbor lists")
    p.add_argument("--dump-weights", type=Path, help="also write W as i,j,value text")
    p.add_argument("--dump-spectra", type=Path, help="also write per-point spectra")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("perturb", help="grid-cross weight-stability study")
    p.add_argument("--epsilons", type=float, nargs="+",
                   default=list(diagnostics.DEFAULT_EPSILONS))
    p.add_argument("--trials", type=int, default=diagnostics.DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--csv", type=Path, help="also dump raw per-trial distances")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("theorem2",
                       help="preimage objective-value scaling check")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--generator", choices=sorted(datasets.GENERATORS))
    src.add_argument("--input", type=Path, help="points CSV (needs --preimage)")
    p.add_argument("--preimage", type=Path, help="ground-truth parameter CSV")
    p.add_argument("--n-list", type=int, nargs="+", default=[500, 1000, 2000],
                   dest="n_list", help="sample sizes with --generator")
    p.add_argument("--k", type=int, default=12)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--permutations", type=int, default=20)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_theorem2)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DisconnectedGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DISCONNECTED
    except GeneralPositionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GENERAL_POSITION
    except (ValueError, OSError) as exc:
        # CsvFormatError is a ValueError; missing files land here too.
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LdrLleError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
