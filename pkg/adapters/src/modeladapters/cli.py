"""Command-line entry points: materialize candidate and embedding files,
or serve the translation/embedding HTTP contracts for live runs."""

from __future__ import annotations

from pathlib import Path

import click

from .backends import PIVOTS, make_embedder, make_translator
from .emit import emit_backtranslations, emit_embeddings
from .errors import AdapterError


@click.group()
def main() -> None:
    """Run pretrained translation/embedding models and write their
    outputs in the scoring pipeline's file formats."""


@main.command()
@click.option(
    "--corpus",
    "corpus_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="Corpus file (JSON array or JSONL).",
)
@click.option(
    "--pivot",
    required=True,
    help=f"Pivot language ({', '.join(PIVOTS)}), or 'all' for every pinned pivot.",
)
@click.option(
    "--out",
    "out_path",
    required=True,
    help="Output candidate JSONL; use '{pivot}' as a placeholder with --pivot all.",
)
@click.option(
    "--backend",
    default="stub",
    show_default=True,
    type=click.Choice(["stub", "opus-mt"]),
    help="Translation backend.",
)
def backtranslate(corpus_path: str, pivot: str, out_path: str, backend: str) -> None:
    """Write back-translated candidates for one pivot or all of them."""
    pivots = list(PIVOTS) if pivot == "all" else [pivot]
    if len(pivots) > 1 and "{pivot}" not in out_path:
        raise click.ClickException("--pivot all needs '{pivot}' in --out")
    try:
        translator = make_translator(backend)
        for p in pivots:
            target = Path(out_path.replace("{pivot}", p))
            n = emit_backtranslations(corpus_path, p, target, translator)
            click.echo(f"wrote {n} candidates for en-{p} to {target}")
    except AdapterError as exc:
        raise click.ClickException(str(exc)) from exc


@main.command()
@click.option(
    "--texts",
    "texts_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="UTF-8 text file, one sentence per line.",
)
@click.option("--out", "out_path", required=True, help="Output vector-store JSONL.")
@click.option(
    "--backend",
    default="stub",
    show_default=True,
    type=click.Choice(["stub", "minilm"]),
    help="Embedding backend.",
)
def embeddings(texts_path: str, out_path: str, backend: str) -> None:
    """Embed one text per line into a vector file store."""
    try:
        n = emit_embeddings(texts_path, out_path, make_embedder(backend))
    except AdapterError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"wrote {n} vectors to {out_path}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8720, show_default=True, type=int)
@click.option(
    "--translate-backend",
    default="stub",
    show_default=True,
    type=click.Choice(["stub", "opus-mt"]),
)
@click.option(
    "--embed-backend",
    default="stub",
    show_default=True,
    type=click.Choice(["stub", "minilm"]),
)
def serve(host: str, port: int, translate_backend: str, embed_backend: str) -> None:
    """Serve POST /translate and POST /embed over HTTP."""
    import uvicorn

    from .service import create_app

    try:
        app = create_app(make_translator(translate_backend), make_embedder(embed_backend))
    except AdapterError as exc:
        raise click.ClickException(str(exc)) from exc
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
