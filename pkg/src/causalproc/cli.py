"""Terminal entry points sharing the service's engine.

Exit codes: 0 success, 1 domain failure (violations, zero evidence,
conversion problems), 2 unreadable or unparseable input file, 3 exact
computation too large without --sample.
"""
from __future__ import annotations

import json
import sys

import click

from . import elicitation
from .algebra import SynergySpec, expand_synergy, validate_synergy
from .dgraph import import_dgraph_doc
from .errors import (
    CausalProcError,
    ModelFormatError,
    ModelTooLarge,
    NetImportError,
    NoAcceptedSamples,
    OutOfRange,
    SingletonDefault,
    UndefinedConditional,
    ZeroEvidence,
)
from .inference import (
    Query,
    dump_lines,
    estimate_query,
    joint_distribution,
    joint_with_elimination,
)
from .inference import query as run_query
from .model import (
    build_model,
    model_to_doc,
    parse_model,
    save_model,
    validate_model,
)


@click.group()
def main():
    """Process/simple-event causal models: validation, exact and sampled
    queries, net import, and guided table elicitation."""


def _read_doc(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"cannot read {path}: {exc}", err=True)
        sys.exit(2)


def _load_model(path: str):
    doc = _read_doc(path)
    try:
        return build_model(doc)
    except CausalProcError as exc:
        click.echo(f"invalid model {path}: {exc}", err=True)
        sys.exit(2)


def _split_tokens(value: str) -> list[str]:
    """Split a comma list without breaking ids like s_{a,b}."""
    out: list[str] = []
    cur: list[str] = []
    depth = 0
    for ch in value:
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
            continue
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth = max(0, depth - 1)
        cur.append(ch)
    out.append("".join(cur))
    return [t for t in (s.strip() for s in out) if t]


def _split_ids(values: tuple[str, ...]) -> frozenset[str]:
    return frozenset(x for v in values for x in _split_tokens(v))


@main.command()
@click.argument("model_file", type=click.Path())
def validate(model_file):
    """Check a model file; print OK or one line per violation."""
    doc = _read_doc(model_file)
    try:
        model = parse_model(doc)
    except ModelFormatError as exc:
        click.echo(f"cannot parse {model_file}: {exc}", err=True)
        sys.exit(2)
    violations = validate_model(model)
    if violations:
        for v in violations:
            click.echo(f"{v.rule} at {v.location}: {v.message}")
        sys.exit(1)
    click.echo("OK")


@main.command("query")
@click.argument("model_file", type=click.Path())
@click.option("--target", "targets", multiple=True, help="target event ids (comma separable, repeatable)")
@click.option("--true", "true_ids", multiple=True, help="evidence events that occurred")
@click.option("--false", "false_ids", multiple=True, help="evidence events that did not occur")
@click.option("--sample", "sample_n", type=int, default=None, help="estimate with N forward samples instead of exact computation")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="emit full-precision JSON")
def query_cmd(model_file, targets, true_ids, false_ids, sample_n, seed, as_json):
    """pr(all targets occur | evidence) for a stored model."""
    model = _load_model(model_file)
    try:
        q = Query(
            targets=_split_ids(targets),
            true=_split_ids(true_ids),
            false=_split_ids(false_ids),
        )
        if sample_n is not None:
            est, se = estimate_query(model, q, n=sample_n, seed=seed)
            if as_json:
                click.echo(json.dumps(
                    {"estimate": est, "standard_error": se, "n": sample_n, "seed": seed}
                ))
            else:
                click.echo(f"{est:.6f}")
                click.echo(f"standard error {se:.6f}", err=True)
            return
        try:
            p = run_query(model, q)
        except ModelTooLarge as exc:
            click.echo(f"{exc}; rerun with --sample N", err=True)
            sys.exit(3)
        if as_json:
            click.echo(json.dumps({"probability": p}))
        else:
            click.echo(f"{p:.6f}")
    except (ZeroEvidence, NoAcceptedSamples) as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    except CausalProcError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)


@main.command("import-dgraph")
@click.argument("net_file", type=click.Path())
@click.option("-o", "--output", required=True, type=click.Path())
def import_dgraph_cmd(net_file, output):
    """Convert a binary Bayes-net JSON file into a causal model."""
    doc = _read_doc(net_file)
    try:
        model = import_dgraph_doc(doc)
    except NetImportError as exc:
        click.echo(f"cannot convert: {exc}", err=True)
        sys.exit(1)
    save_model(model, output)
    click.echo(
        f"events: {len(model.events)} "
        f"({len(model.processes)} processes, {len(model.simples)} simple)"
    )
    click.echo(f"edges: {len(model.causes)} causes, {len(model.triggers)} triggers")
    click.echo(f"wrote {output}")


@main.command()
@click.argument("model_file", type=click.Path())
@click.option("--process", "process", required=True, help="process whose emission table to elicit")
@click.option("-o", "--output", type=click.Path(), default=None, help="updated model path (default: in place)")
@click.option("--session-file", type=click.Path(), default=None, help="where to save the session when quitting early")
def elicit(model_file, process, output, session_file):
    """Walk the marginal sequence for one process's effects on stdin.

    Per turn: a value, 'default', '<value> given <ids>', or 'quit'.
    """
    model = _load_model(model_file)
    if process not in model.kinds or not model.is_process(process):
        click.echo(f"{process!r} is not a process in the model", err=True)
        sys.exit(1)
    effects = sorted(model.effects_of[process])
    try:
        session = elicitation.start_session(process, effects)
    except CausalProcError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)

    while not session.done:
        rng = elicitation.next_range(session)
        sub = ",".join(sorted(session.current))
        click.echo(f"pr({sub})  legal range [{rng.lo:.6f}, {rng.hi:.6f}]")
        try:
            line = click.prompt("value", default="", show_default=False).strip()
        except (click.Abort, EOFError):
            line = "quit"
        if line in ("quit", "q"):
            path = session_file or f"{model_file}.session.json"
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(elicitation.session_to_doc(session), fh, indent=2)
                fh.write("\n")
            click.echo(f"model untouched; session saved to {path}")
            return
        try:
            if line == "default":
                session = elicitation.default_current(session)
            elif " given " in line:
                value_str, given_str = line.split(" given ", 1)
                session = elicitation.commit_conditional(
                    session,
                    [g for g in given_str.split(",") if g],
                    float(value_str),
                )
            else:
                session = elicitation.commit(session, float(line))
        except OutOfRange as exc:
            click.echo(f"rejected: {exc}")
        except (SingletonDefault, UndefinedConditional) as exc:
            click.echo(f"rejected: {exc}")
        except ValueError:
            click.echo(
                "enter a value, 'default', '<value> given <ids>', or 'quit'"
            )

    table = elicitation.complete(session)
    doc = model_to_doc(model)
    doc["causal"][process] = [
        {"subset": sorted(k), "p": v}
        for k, v in sorted(table.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
    ]
    built = build_model(doc)
    dest = output or model_file
    save_model(built, dest)
    click.echo(f"installed emission table for {process!r}; wrote {dest}")


@main.command("expand-effectual")
@click.argument("spec_file", type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def expand_effectual(spec_file, as_json):
    """Expand a compressed occurrence-table spec into explicit rows."""
    doc = _read_doc(spec_file)
    try:
        spec = SynergySpec.from_doc(doc)
    except ModelFormatError as exc:
        click.echo(f"cannot parse {spec_file}: {exc}", err=True)
        sys.exit(2)
    violations = validate_synergy(spec)
    if violations:
        for v in violations:
            click.echo(f"{v.rule} at {v.location}: {v.message}")
        sys.exit(1)
    table = expand_synergy(spec)
    entries = sorted(table.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
    if as_json:
        click.echo(json.dumps(
            [{"subset": sorted(k), "p": v} for k, v in entries]
        ))
    else:
        for k, v in entries:
            ids = ",".join(sorted(k)) or "-"
            click.echo(f"{ids}\t{v!r}")


@main.command()
@click.argument("model_file", type=click.Path())
@click.option("--keep", default=None, help="comma-separated events to keep (others summed out)")
@click.option("--cap", type=int, default=20, show_default=True)
def dump(model_file, keep, cap):
    """Print the joint (or a marginal) in the stable dump format."""
    model = _load_model(model_file)
    try:
        if keep:
            jd = joint_with_elimination(model, _split_tokens(keep), cap=cap)
        else:
            jd = joint_distribution(model, cap=cap)
    except ModelTooLarge as exc:
        click.echo(f"{exc}; restrict with --keep", err=True)
        sys.exit(3)
    except CausalProcError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    for line in dump_lines(jd):
        click.echo(line)


@main.command()
@click.option("--dir", "store_dir", default="./causalproc-store", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(store_dir, host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(store_dir), host=host, port=port)


if __name__ == "__main__":
    main()
