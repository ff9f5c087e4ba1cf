"""embed-bridge command line: serve the protocol or export EMBX files."""

from __future__ import annotations

import json
import sys

import click

from .encoders import InputParseError, ModelLoadError
from .export import export_embeddings
from .registry import Registry, RegistryError


@click.group()
def cli() -> None:
    """Run pretrained encoders and hand their embeddings to the fusion tool."""


@cli.command()
@click.option("--registry", "registry_path", required=True, help="Registry config JSON.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8600, show_default=True)
def serve(registry_path: str, host: str, port: int) -> None:
    """Serve the /v1/embed protocol for the registered models."""
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(Registry.from_file(registry_path)), host=host, port=port)


@cli.command()
@click.option("--registry", "registry_path", required=True)
@click.option("--model", "model_id", required=True)
@click.option("--prompts", "prompts_file", default=None, help="Prompt JSONL or one sentence per line.")
@click.option("--images-dir", default=None, help="Directory of images (clip-image role).")
@click.option("--out", required=True)
@click.option("--f64", is_flag=True, default=False, help="Store float64 instead of float32.")
@click.option("--apply-log-map", is_flag=True, default=False,
              help="Map hyperbolic output to Euclidean space before writing (default: export raw).")
def export(registry_path, model_id, prompts_file, images_dir, out, f64, apply_log_map) -> None:
    """Embed prompts or images and write an EMBX file + manifest."""
    registry = Registry.from_file(registry_path)
    manifest = export_embeddings(
        registry,
        model_id,
        out,
        prompts_file=prompts_file,
        images_dir=images_dir,
        dtype="f8" if f64 else "f4",
        apply_log_map=apply_log_map,
    )
    click.echo(json.dumps({"path": out, **manifest}, indent=2, sort_keys=True))


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.ClickException as err:
        print(json.dumps({"error": "UsageError", "message": err.format_message()}), file=sys.stderr)
        return 1
    except (RegistryError, InputParseError, KeyError, FileNotFoundError) as err:
        print(json.dumps({"error": type(err).__name__, "message": str(err)}), file=sys.stderr)
        return 2
    except ModelLoadError as err:
        print(json.dumps({"error": "ModelLoadError", "message": str(err)}), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
