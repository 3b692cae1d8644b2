"""Command line entry points.

Exit codes: 0 success, 1 usage or configuration problem, 2 data problem
(unreadable input, empty corpus, nothing mined yet), 3 unreadable or
incompatible state file.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace

from .errors import (
    ConfigError,
    StateFormatError,
    StyleMirrorError,
)
from .embedding import UnigramTable
from .evaluator import evaluate, report_to_csv, report_to_summary, summary_to_json, train_lm
from .ingest import Sentence, normalize, read_corpus_file
from .miner import mine_batch, style_ngrams
from .patterns import PatternStore, rebuild
from .session import (
    Config,
    Session,
    SessionLock,
    canonical_json,
    corpus_log_path_for,
)
from .transformer import GecHook, TransformResult, transform

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_STATE = 3

NO_PATTERNS_MSG = "no patterns available; ingest more data"


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage by default; 2 means data error here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _shared_options() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    g = shared.add_argument_group("session options")
    g.add_argument("--config", metavar="PATH", help="config file of key = value lines")
    g.add_argument("--state", metavar="PATH", help="session state file")
    g.add_argument("--support", metavar="FRACTION", help="minimum support, e.g. 0.006 or 3/500")
    g.add_argument("--chunk-mode", choices=("token", "phrase"), dest="chunk_mode")
    g.add_argument("--embedder", metavar="NAME", help="'builtin' or 'remote:<url>'")
    g.add_argument("--lm-order", type=int, dest="lm_order", metavar="N")
    g.add_argument("--smoothing-k", type=float, dest="smoothing_k", metavar="K")
    g.add_argument("--candidate-cap", type=int, dest="candidate_cap", metavar="N")
    g.add_argument("--stopwords", metavar="PATH", dest="stopword_path")
    g.add_argument("--word-vectors", metavar="PATH", dest="word_vector_path")
    g.add_argument("--gec-command", metavar="CMD", dest="gec_command")
    g.add_argument("--seed", type=int, metavar="N")
    g.add_argument("--dim", type=int, dest="embedding_dim", metavar="N")
    return shared


def build_parser() -> _Parser:
    shared = _shared_options()
    parser = _Parser(prog="stylemirror", description="Speaker-style sentence rewriting.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p_ing = sub.add_parser("ingest", parents=[shared], help="mine new corpus text into the session")
    p_ing.add_argument("paths", nargs="+", metavar="FILE")
    fmt = p_ing.add_mutually_exclusive_group()
    fmt.add_argument("--lines", action="store_true", default=None,
                     help="one sentence per line (default)")
    fmt.add_argument("--prose", action="store_true", default=None,
                     help="free text; split on sentence boundaries")

    p_tr = sub.add_parser("transform", parents=[shared], help="restyle a sentence")
    p_tr.add_argument("sentence", nargs="*", metavar="TEXT")
    p_tr.add_argument("--file", metavar="PATH", help="transform each line of a file")
    p_tr.add_argument("--repl", action="store_true", help="read sentences from stdin until EOF")
    p_tr.add_argument("--verbose", action="store_true",
                      help="show the chosen pattern and ranked candidates")

    p_ev = sub.add_parser("eval", parents=[shared], help="score outputs against the mined style")
    p_ev.add_argument("--inputs", required=True, metavar="PATH", help="one input sentence per line")
    how = p_ev.add_mutually_exclusive_group(required=True)
    how.add_argument("--run", action="store_true", help="transform the inputs here, then score")
    how.add_argument("--outputs", metavar="PATH", help="score pre-produced outputs")
    p_ev.add_argument("--fractions", metavar="LIST",
                      help="comma list of corpus prefix fractions, e.g. 0.05,0.10,0.20,1.0")
    p_ev.add_argument("--csv", metavar="PATH", default="eval_report.csv")
    p_ev.add_argument("--json", metavar="PATH", default="eval_report.json")

    # shared options live only on the leaf parsers: a nested subparser parse
    # would otherwise reset values already captured at the outer level
    p_st = sub.add_parser("state", help="inspect or move session state")
    st_sub = p_st.add_subparsers(dest="state_command", required=True, metavar="ACTION")
    st_sub.add_parser("show", parents=[shared])
    p_save = st_sub.add_parser("save", parents=[shared])
    p_save.add_argument("--to", required=True, metavar="PATH")
    p_load = st_sub.add_parser("load", parents=[shared])
    p_load.add_argument("--from", required=True, metavar="PATH", dest="source")
    return parser


_FLAG_FIELDS = (
    "state_path", "min_support", "chunk_mode", "embedder", "lm_order",
    "smoothing_k", "candidate_cap", "stopword_path", "word_vector_path",
    "gec_command", "seed", "embedding_dim",
)


def effective_config(args: argparse.Namespace) -> Config:
    """defaults < config file < environment < command line flags"""
    cfg = Config.from_file(args.config) if args.config else Config()
    cfg = cfg.with_env_overrides()
    overrides = {}
    for name in _FLAG_FIELDS:
        arg_name = {"state_path": "state", "min_support": "support"}.get(name, name)
        value = getattr(args, arg_name, None)
        if value is not None:
            overrides[name] = value
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg.validate()


def _load_session(cfg: Config, *, required: bool) -> Session:
    if os.path.exists(cfg.state_path):
        return Session.load(cfg.state_path, config=cfg)
    if required:
        raise StyleMirrorError(NO_PATTERNS_MSG)
    return Session(cfg)


def _read_inputs(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [ln.strip() for ln in fh if ln.strip()]


# commands ------------------------------------------------------------------


def cmd_ingest(args, cfg: Config) -> int:
    as_lines = not args.prose
    batches: list[list[Sentence]] = []
    for path in args.paths:
        batches.append(read_corpus_file(path, lines=as_lines))
    sentences = [s for batch in batches for s in batch]
    with SessionLock(cfg.state_path):
        session = _load_session(cfg, required=False)
        summary = session.ingest(sentences)
        session.save()
    print(f"ingested {summary.new_sentences} new sentences "
          f"({session.state.total_sentences} total)")
    print(f"promotions: {summary.promotions}  demotions: {summary.demotions}")
    rebuilt = "rebuilt" if summary.style_changed else "unchanged style, appended"
    print(f"patterns: {summary.pattern_count} ({rebuilt})")
    print(f"state written to {cfg.state_path}")
    return EXIT_OK


def _print_verbose(result: TransformResult) -> None:
    print(f"  pattern: {result.pattern.canonical_text}")
    print(f"  selection score: {result.selection_score:.6f}")
    print(f"  chunk mode: {result.chunk_mode}")
    print(f"  candidates ({len(result.candidates)}):")
    for cand in result.candidates[:10]:
        print(f"    {cand.score:.6f}  {' '.join(cand.tokens)}")
    if len(result.candidates) > 10:
        print(f"    ... {len(result.candidates) - 10} more")


def cmd_transform(args, cfg: Config) -> int:
    session = _load_session(cfg, required=True)
    cfg = session.config
    if not any(r.pattern.wildcard_count >= 1 for r in session.store.records.values()):
        raise StyleMirrorError(NO_PATTERNS_MSG)
    embedder = session.embedder()
    gec = GecHook(cfg.gec_command) if cfg.gec_command else None

    def run_one(raw: str) -> None:
        result = transform(raw, session.store, embedder,
                           chunk_mode=cfg.chunk_mode,
                           candidate_cap=cfg.candidate_cap,
                           gec_hook=gec)
        if args.verbose:
            _print_verbose(result)
        print(result.gec_output if result.gec_output is not None else result.output.raw)

    if args.repl:
        for line in sys.stdin:
            line = line.strip()
            if not line:
                continue
            try:
                run_one(line)
            except StyleMirrorError as exc:
                print(f"error: {exc}", file=sys.stderr)
        return EXIT_OK
    if args.file:
        for raw in _read_inputs(args.file):
            run_one(raw)
        return EXIT_OK
    if not args.sentence:
        raise ConfigError("transform needs a sentence, --file, or --repl")
    run_one(" ".join(args.sentence))
    return EXIT_OK


def _parse_fractions(text: str) -> list[float]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            value = float(part)
        except ValueError as exc:
            raise ConfigError(f"bad fraction {part!r}") from exc
        if not (0 < value <= 1):
            raise ConfigError(f"fractions must be in (0, 1], got {part}")
        out.append(value)
    if not out:
        raise ConfigError("no fractions given")
    return out


def _eval_once(session: Session, cfg: Config, corpus: list[Sentence],
               input_raws: list[str], output_raws: list[str] | None):
    """Score against the style mined from `corpus` alone."""
    state = mine_batch(corpus, cfg.min_support)
    style = style_ngrams(state, session.stopwords)
    store = rebuild(PatternStore(), corpus, style)
    table = UnigramTable.from_sentences(corpus)
    embedder = session.builtin_embedder(table)
    inputs = [normalize(r) for r in input_raws]
    if output_raws is None:
        outputs = []
        for raw in input_raws:
            result = transform(raw, store, embedder,
                               chunk_mode=cfg.chunk_mode,
                               candidate_cap=cfg.candidate_cap)
            outputs.append(result.output)
    else:
        outputs = [normalize(r) for r in output_raws]
    lm = train_lm(corpus, order=cfg.lm_order, k=cfg.smoothing_k)
    return evaluate(inputs, outputs, lm, embedder)


def cmd_eval(args, cfg: Config) -> int:
    session = _load_session(cfg, required=True)
    cfg = session.config  # mining-determining settings stay with the state
    input_raws = _read_inputs(args.inputs)
    if not input_raws:
        raise StyleMirrorError(f"no input sentences in {args.inputs}")
    output_raws = None if args.run else _read_inputs(args.outputs)
    corpus = list(session.state.corpus.sentences)

    if args.fractions:
        fractions = _parse_fractions(args.fractions)
        csv_parts: list[str] = []
        json_entries = []
        for i, frac in enumerate(fractions):
            size = max(1, math.ceil(frac * len(corpus)))
            report = _eval_once(session, cfg, corpus[:size], input_raws, output_raws)
            text = report_to_csv(report, fraction=frac)
            if i > 0:
                text = text.split("\n", 1)[1]
            csv_parts.append(text)
            entry = {"fraction": frac, "sentences": size}
            entry.update(report_to_summary(report))
            json_entries.append(entry)
            print(f"fraction {frac}: {size} sentences, "
                  f"median perplexity {entry['median_perplexity']:.3f}, "
                  f"mean similarity {entry['mean_similarity']:.4f}")
        csv_text = "".join(csv_parts)
        json_text = canonical_json({"fractions": json_entries})
    else:
        report = _eval_once(session, cfg, corpus, input_raws, output_raws)
        csv_text = report_to_csv(report)
        summary = report_to_summary(report)
        json_text = summary_to_json(summary)
        print(f"rows: {summary['n']}  median perplexity {summary['median_perplexity']:.3f}  "
              f"mean similarity {summary['mean_similarity']:.4f}")

    with open(args.csv, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text)
    with open(args.json, "w", encoding="utf-8") as fh:
        fh.write(json_text)
    print(f"wrote {args.csv} and {args.json}")
    return EXIT_OK


def cmd_state(args, cfg: Config) -> int:
    if args.state_command == "show":
        session = _load_session(cfg, required=True)
        state = session.state
        print(f"state file: {cfg.state_path}")
        print(f"sentences: {state.total_sentences}")
        print(f"min support: {state.min_support_repr} "
              f"(threshold {state.threshold()} of {state.total_sentences})")
        by_len: dict[int, int] = {}
        for gram in state.frequent:
            by_len[len(gram)] = by_len.get(len(gram), 0) + 1
        sizes = "  ".join(f"{n}-grams: {c}" for n, c in sorted(by_len.items()))
        print(f"frequent: {len(state.frequent)} ({sizes})")
        print(f"negative border: {len(state.border)}")
        print(f"patterns: {len(session.store)}")
        top = sorted(state.frequent.items(), key=lambda kv: (-kv[1], kv[0]))[:10]
        if top:
            print("most frequent:")
            for gram, count in top:
                print(f"  {count:6d}  {' '.join(gram)}")
        return EXIT_OK

    if args.state_command == "save":
        session = _load_session(cfg, required=True)
        session.save(args.to)
        print(f"saved to {args.to} (+ {corpus_log_path_for(args.to)})")
        return EXIT_OK

    # load: validate the source bundle fully, then adopt it as current state
    session = Session.load(args.source, config=cfg)
    with SessionLock(cfg.state_path):
        session.save(cfg.state_path)
    print(f"loaded {args.source} into {cfg.state_path} "
          f"({session.state.total_sentences} sentences, {len(session.store)} patterns)")
    return EXIT_OK


_COMMANDS = {
    "ingest": cmd_ingest,
    "transform": cmd_transform,
    "eval": cmd_eval,
    "state": cmd_state,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = effective_config(args)
        return _COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"stylemirror: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StateFormatError as exc:
        print(f"stylemirror: {exc}", file=sys.stderr)
        return EXIT_STATE
    except StyleMirrorError as exc:
        print(f"stylemirror: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"stylemirror: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"stylemirror: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
