"""Command-line entry points: serve, repl, replay, and the colorcode tools."""

from __future__ import annotations

import datetime as dt
import sys
from pathlib import Path

import click

from . import colorcode
from .repl import format_replay, replay_script, run_repl
from .service import SessionStore, create_app
from .world import WorldStore, bundled_assets_root


def _store(world_dir: str | None, log_dir: str | None = None) -> SessionStore:
    root = Path(world_dir) if world_dir else bundled_assets_root()
    return SessionStore(WorldStore(root), Path(log_dir) if log_dir else None)


@click.group()
def main() -> None:
    """Situated-dialogue engine and simulator."""


@main.command()
@click.option("--world-dir", type=click.Path(exists=True), default=None, help="Assets root (defaults to bundled worlds).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True)
@click.option("--log-dir", type=click.Path(), default=None, help="Append JSONL transcripts here.")
@click.option("--ui-dir", type=click.Path(exists=True), default=None, help="Serve a built web UI from this directory.")
def serve(world_dir, host, port, log_dir, ui_dir) -> None:
    """Run the HTTP+JSON session API."""
    import uvicorn

    app = create_app(_store(world_dir, log_dir), Path(ui_dir) if ui_dir else None)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--world", default="library", show_default=True)
@click.option("--world-dir", type=click.Path(exists=True), default=None)
@click.option("--date", default=None, help="Session date override, YYYY-MM-DD.")
def repl(world, world_dir, date) -> None:
    """Interactive terminal session."""
    override = dt.date.fromisoformat(date) if date else None
    run_repl(_store(world_dir), world, override)


@main.command()
@click.argument("script", type=click.Path(exists=True))
@click.option("--world-dir", type=click.Path(exists=True), default=None)
def replay(script, world_dir) -> None:
    """Replay a scenario script and diff every expected output."""
    result = replay_script(_store(world_dir), script)
    click.echo(format_replay(result))
    if not result.ok:
        sys.exit(1)


@main.group()
def colorcode_group() -> None:
    """Encode, render, and decode stripe codes."""


main.add_command(colorcode_group, name="colorcode")


@colorcode_group.command()
@click.argument("object_id", type=int)
def encode(object_id) -> None:
    """Print the stripe pattern for an ID (R = red, B = blue)."""
    try:
        click.echo(str(colorcode.encode_id(object_id)))
    except ValueError as exc:
        raise click.ClickException(str(exc))


@colorcode_group.command()
@click.argument("object_id", type=int)
@click.option("--width", default=360, show_default=True)
@click.option("--noise", default=0, show_default=True, help="Additive noise amplitude, 0-128.")
@click.option("--jitter", default=0.0, show_default=True, help="Stripe-width jitter fraction, 0.0-0.4.")
@click.option("--seed", default=0, show_default=True)
@click.option("--height", default=24, show_default=True, help="Rows in the output image.")
@click.option("--out", type=click.Path(), required=True, help="Output PPM (P6) file.")
def render(object_id, width, noise, jitter, seed, height, out) -> None:
    """Render an ID's stripe code into a PPM image."""
    try:
        spec = colorcode.NoiseSpec(amplitude=noise, jitter=jitter, seed=seed)
        line = colorcode.render_scanline(colorcode.encode_id(object_id), width, spec)
        Path(out).write_bytes(colorcode.scanline_to_ppm(line, height=height))
    except ValueError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"wrote {out}")


@colorcode_group.command()
@click.argument("ppm", type=click.Path(exists=True))
def decode(ppm) -> None:
    """Decode the object ID from a PPM image (middle row)."""
    try:
        object_id = colorcode.decode_ppm(Path(ppm).read_bytes())
    except ValueError as exc:
        raise click.ClickException(str(exc))
    click.echo("NOCODE" if object_id is None else str(object_id))


if __name__ == "__main__":
    main()
