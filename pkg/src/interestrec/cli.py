"""Command-line front end.

Every subcommand writes its outputs into the ``--out`` directory together
with ``manifest.json``, which records the configuration, the seed and
SHA-256 digests of all inputs and outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from interestrec import dimred, evaluation, gmm, lsa, pvec, recommend
from interestrec.corpus import load_corpus, load_profiles, write_corpus, write_profiles
from interestrec.embeddings import EmbeddingMatrix, load_embeddings, save_embeddings
from interestrec.pipeline import EmbedOptions, embed
from interestrec.synth import synth_corpus

DEFAULT_SEED = 2017
_log = logging.getLogger("interestrec")


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _emb_name(args) -> str:
    return "embeddings.csv" if args.format == "csv" else "embeddings.emb"


def _pv_config(args) -> pvec.PvConfig:
    return pvec.PvConfig(
        dim=args.dim, epochs=args.epochs, negatives=args.negatives, window=args.window,
        lr_start=args.lr_start, lr_end=args.lr_end, seed=args.seed,
    )


def _gmm_config(args) -> gmm.GmmConfig:
    return gmm.GmmConfig(k=args.gmm_k, covariance=args.gmm_cov, reg=args.gmm_reg, n_init=args.gmm_n_init, seed=args.seed)


def _embed_options(args) -> EmbedOptions:
    return EmbedOptions(
        rank=args.rank, score_range=tuple(args.score_range), pv=_pv_config(args),
        kpca_components=args.kpca_components, gamma=args.gamma, seed=args.seed,
    )


def _min_docs(args, default):
    return default if args.min_docs is None else args.min_docs


def cmd_synth(args, out):
    corpus, profiles, _ = synth_corpus(
        args.topics, args.docs_per_topic, args.users, args.docs_per_user, args.topics_per_user, args.seed
    )
    write_corpus(out / "corpus.jsonl", corpus)
    write_profiles(out / "profiles.jsonl", profiles)
    return ["corpus.jsonl", "profiles.jsonl"]


def cmd_ingest(args, out):
    corpus = load_corpus(args.corpus, args.min_chars)
    write_corpus(out / "corpus.jsonl", corpus)
    written = ["corpus.jsonl"]
    if args.profiles:
        write_profiles(out / "profiles.jsonl", load_profiles(args.profiles, corpus, _min_docs(args, 50)))
        written.append("profiles.jsonl")
    return written


def cmd_embed_lsa(args, out):
    corpus = load_corpus(args.corpus, args.min_chars)
    save_embeddings(out / _emb_name(args), embed(corpus, "lsa", _embed_options(args)))
    return [_emb_name(args)]


def cmd_embed_pv(args, out):
    corpus = load_corpus(args.corpus, args.min_chars)
    model = pvec.init_model(corpus, _pv_config(args))
    pvec.train(model, progress=sys.stderr)
    save_embeddings(out / _emb_name(args), pvec.export_vectors(model))
    return [_emb_name(args)]


def cmd_reduce(args, out):
    emb = load_embeddings(args.emb)
    reduced, model = dimred.kpca_reduce(emb, args.kpca_components, args.gamma, args.seed)
    save_embeddings(out / _emb_name(args), reduced)
    meta = {
        "gamma": model.gamma,
        "requested_components": model.requested_components,
        "components": model.components,
        "eigenvalues": [float(v) for v in model.eigenvalues],
    }
    (out / "kpca.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return [_emb_name(args), "kpca.json"]


def cmd_fit_user(args, out):
    emb = load_embeddings(args.emb)
    profiles = load_profiles(args.profiles, emb.doc_ids, _min_docs(args, 1))
    if args.user:
        profiles = [p for p in profiles if p.user_id == args.user]
        if not profiles:
            raise ValueError(f"user {args.user!r} not found")
    config = _gmm_config(args)
    models = {p.user_id: gmm.fit(emb.rows(sorted(p.doc_ids)), config) for p in profiles}
    if args.user:
        text = models[args.user].to_json() + "\n"
    else:
        text = "{\n" + ",\n".join(f"  {json.dumps(u)}: {m.to_json()}" for u, m in models.items()) + "\n}\n"
    (out / "gmm.json").write_text(text, encoding="utf-8")
    return ["gmm.json"]


def cmd_recommend(args, out):
    emb = load_embeddings(args.emb)
    obj = json.loads(Path(args.model).read_text(encoding="utf-8"))
    if "weights" not in obj:
        if not args.user:
            raise ValueError("--user is required when the model file holds several users")
        obj = obj[args.user]
    model = gmm.GmmModel.from_dict(obj)
    excluded = set()
    if args.exclude_train:
        if not (args.profiles and args.user):
            raise ValueError("--exclude-train needs --profiles and --user")
        for p in load_profiles(args.profiles, emb.doc_ids, 1):
            if p.user_id == args.user:
                excluded = set(p.doc_ids)
    recs = recommend.recommend(model, emb, args.n, excluded, args.seed)
    recommend.write_recommendations(out / "recommendations.csv", recs)
    return ["recommendations.csv"]


def cmd_evaluate(args, out):
    corpus = load_corpus(args.corpus, args.min_chars)
    profiles = load_profiles(args.profiles, corpus, _min_docs(args, 50))
    reps = ["lsa", "pvec"] if args.rep in (None, "both") else [args.rep]
    if args.emb and len(reps) != 1:
        raise ValueError("--emb requires a single --rep")
    reports = []
    for rep in reps:
        emb = load_embeddings(args.emb) if args.emb else embed(corpus, rep, _embed_options(args), sys.stderr)
        config = evaluation.EvalConfig(
            folds=args.folds, gmm=_gmm_config(args), seed=args.seed,
            exclude_train=args.exclude_train, representation="lsa" if rep == "lsa" else "learned",
        )
        reports.append(evaluation.evaluate_all(profiles, emb, config, threads=args.threads))
    table = evaluation.render_table(reports)
    sys.stdout.write(table)
    (out / "report.txt").write_text(table, encoding="utf-8")
    (out / "report.json").write_text(evaluation.report_json(reports), encoding="utf-8")
    return ["report.txt", "report.json"]


def cmd_export_2d(args, out):
    import csv

    points = dimred.project_2d(load_embeddings(args.emb))
    with (out / "points_2d.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "x", "y"])
        for doc_id, (x, y) in zip(points.doc_ids, points.vectors):
            writer.writerow([doc_id, format(float(x), ".17g"), format(float(y), ".17g")])
    return ["points_2d.csv"]


COMMANDS = {
    "synth": (cmd_synth, "generate the seeded synthetic benchmark corpus and profiles"),
    "ingest": (cmd_ingest, "load and filter a corpus (and profiles)"),
    "embed-lsa": (cmd_embed_lsa, "tf-idf, term filter and truncated SVD"),
    "embed-pv": (cmd_embed_pv, "train paragraph vectors"),
    "reduce": (cmd_reduce, "RBF kernel PCA of an embedding file"),
    "fit-user": (cmd_fit_user, "fit a Gaussian mixture per user"),
    "recommend": (cmd_recommend, "sample recommendations from a fitted model"),
    "evaluate": (cmd_evaluate, "cross-validated hit rate for one or both representations"),
    "export-2d": (cmd_export_2d, "linear 2-D projection for plotting"),
}

INPUT_FLAGS = ("corpus", "profiles", "emb", "model")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", required=True, help="output directory (created if missing)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--format", choices=("emb1", "csv"), default="emb1", help="embedding output format")
    common.add_argument("-v", "--verbose", action="store_true")

    inputs = argparse.ArgumentParser(add_help=False)
    inputs.add_argument("--corpus")
    inputs.add_argument("--profiles")
    inputs.add_argument("--emb", help="embedding file (EMB1 or .csv)")
    inputs.add_argument("--min-chars", type=int, default=500)
    inputs.add_argument("--min-docs", type=int, default=None)

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--rep", choices=("lsa", "pvec", "both"))
    model.add_argument("--rank", type=int, default=lsa.DEFAULT_RANK)
    model.add_argument("--score-range", type=float, nargs=2, default=list(lsa.DEFAULT_SCORE_RANGE), metavar=("LOW", "HIGH"))
    defaults = pvec.PvConfig()
    model.add_argument("--dim", type=int, default=defaults.dim)
    model.add_argument("--epochs", type=int, default=defaults.epochs)
    model.add_argument("--negatives", type=int, default=defaults.negatives)
    model.add_argument("--window", type=int, default=defaults.window)
    model.add_argument("--lr-start", type=float, default=defaults.lr_start)
    model.add_argument("--lr-end", type=float, default=defaults.lr_end)
    model.add_argument("--kpca-components", type=int, default=dimred.DEFAULT_COMPONENTS)
    model.add_argument("--gamma", type=float, default=None)
    model.add_argument("--gmm-k", type=int, default=2)
    model.add_argument("--gmm-cov", choices=gmm.COVARIANCE_TYPES, default="diagonal")
    model.add_argument("--gmm-reg", type=float, default=1e-6)
    model.add_argument("--gmm-n-init", type=int, default=4)
    model.add_argument("--folds", type=int, default=5)
    model.add_argument("--exclude-train", action="store_true")
    model.add_argument("--model", help="GMM JSON file (recommend)")
    model.add_argument("--user")
    model.add_argument("--n", type=int, default=10, help="number of recommendations")

    parser = argparse.ArgumentParser(prog="interestrec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common, inputs, model], help=help_text)
        if name == "synth":
            p.add_argument("--topics", type=int, default=6)
            p.add_argument("--docs-per-topic", type=int, default=100)
            p.add_argument("--users", type=int, default=20)
            p.add_argument("--docs-per-user", type=int, default=60)
            p.add_argument("--topics-per-user", type=int, default=2)
    return parser


REQUIRED = {
    "ingest": ("corpus",),
    "embed-lsa": ("corpus",),
    "embed-pv": ("corpus",),
    "reduce": ("emb",),
    "fit-user": ("emb", "profiles"),
    "recommend": ("emb", "model"),
    "evaluate": ("corpus", "profiles"),
    "export-2d": ("emb",),
}


def _validate_paths(parser, args):
    for flag in REQUIRED.get(args.command, ()):
        if getattr(args, flag) is None:
            parser.error(f"{args.command} requires --{flag}")
    for flag in INPUT_FLAGS:
        value = getattr(args, flag, None)
        if value is not None and not Path(value).is_file():
            parser.error(f"--{flag}: no such file: {value}")


def _write_manifest(args, out, outputs):
    config = {k: v for k, v in sorted(vars(args).items()) if k != "verbose"}
    manifest = {
        "command": args.command,
        "seed": args.seed,
        "config": config,
        "inputs": {f: {"path": getattr(args, f), "sha256": _digest(getattr(args, f))}
                   for f in INPUT_FLAGS if getattr(args, f, None)},
        "outputs": {name: _digest(out / name) for name in outputs},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate_paths(parser, args)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        handler = COMMANDS[args.command][0]
        outputs = handler(args, out)
        _write_manifest(args, out, outputs)
    except (ValueError, OSError, FloatingPointError) as exc:
        print(f"interestrec {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
