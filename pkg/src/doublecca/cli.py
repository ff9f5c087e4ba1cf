"""Thin command-line client for the fusion service.

All work happens in the service handlers; the CLI only parses flags into
request models and dispatches, either in-process (default) or to a running
service when --service-url / DCCA_SERVICE_URL is set. Failures print one
machine-parseable JSON line on stderr and exit 1 (usage), 2 (data/shape), or
3 (numerical failure).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

from .errors import EXIT_CODES, DccaError, exit_code_for
from .service import handlers
from .service import schemas as sm

_ROUTES = {
    "prompts": ("/v1/prompts", handlers.handle_prompts, sm.PromptsResponse),
    "embed": ("/v1/embeddings/fetch", handlers.handle_embed_fetch, sm.EmbedFetchResponse),
    "fuse": ("/v1/fuse", handlers.handle_fuse, sm.FuseResponse),
    "eval": ("/v1/eval", handlers.handle_eval, sm.EvalResponse),
    "synth": ("/v1/synth", handlers.handle_synth, sm.SynthResponse),
    "sweep": ("/v1/sweep", handlers.handle_sweep, sm.SweepResponse),
}


class RemoteError(DccaError):
    """Error body relayed from a remote service, category preserved."""

    def __init__(self, name: str, message: str, category: str):
        super().__init__(message)
        self._name = name
        self.category = category if category in EXIT_CODES else "data"

    @property
    def name(self) -> str:
        return self._name


def _dispatch(service_url: str | None, op: str, req):
    route, handler, resp_model = _ROUTES[op]
    if not service_url:
        return handler(req)
    resp = httpx.post(
        service_url.rstrip("/") + route, json=req.model_dump(mode="json"), timeout=600.0
    )
    if resp.status_code == 200:
        return resp_model.model_validate(resp.json())
    try:
        body = resp.json()
    except ValueError:
        raise RemoteError("HttpError", f"service returned {resp.status_code}", "data")
    if "error" in body:
        raise RemoteError(body["error"], body.get("message", ""), body.get("category", "data"))
    # FastAPI request-validation detail: the invocation itself was bad.
    raise RemoteError("InvalidRequest", json.dumps(body.get("detail", body)), "usage")


def _emit(result) -> None:
    click.echo(result.model_dump_json(indent=2))


def _csv_ints(value: str) -> list[int]:
    return [int(v) for v in value.split(",") if v.strip()]


@click.group()
@click.option(
    "--service-url",
    envvar="DCCA_SERVICE_URL",
    default=None,
    help="Run against a remote service instead of in-process.",
)
@click.pass_context
def cli(ctx: click.Context, service_url: str | None) -> None:
    """Fuse text-embedding families into a zero-shot head and evaluate it."""
    ctx.obj = service_url


@cli.command()
@click.option("--classes", default=None,
              help="Comma-separated class names, or the path of a JSON class list.")
@click.option("--classes-file", default=None, help="JSON array of class names.")
@click.option("--template", default="waffle_chars", type=click.Choice(["plain", "waffle_words", "waffle_chars"]))
@click.option("--k", default=500, show_default=True, help="Random sentences per class.")
@click.option("--seed", default=0, show_default=True)
@click.option("--wordlist-file", default=None)
@click.option("--attributes", default=None, help="Comma-separated context attributes to cross with classes.")
@click.option("--out", required=True)
@click.pass_obj
def prompts(service_url, classes, classes_file, template, k, seed, wordlist_file, attributes, out):
    """Generate original + random prompts as JSONL."""
    if classes and classes_file is None and Path(classes).is_file():
        classes, classes_file = None, classes
    req = sm.PromptsRequest(
        classes=[c.strip() for c in classes.split(",")] if classes else None,
        classes_file=classes_file,
        template=template,
        k=k,
        seed=seed,
        wordlist_file=wordlist_file,
        attributes=[a.strip() for a in attributes.split(",")] if attributes else None,
        out=out,
    )
    _emit(_dispatch(service_url, "prompts", req))


@cli.command()
@click.option("--prompts", "prompts_file", required=True)
@click.option("--model", "model_id", required=True)
@click.option("--endpoint", default=None, help="Embedding service URL (default: $DCCA_EMBED_ENDPOINT).")
@click.option("--space", default="euclidean", type=click.Choice(["euclidean", "hyperbolic"]))
@click.option("--select", default="all", type=click.Choice(["originals", "randoms", "all"]))
@click.option("--normalize/--no-normalize", default=None, help="Override the role default.")
@click.option("--log-map/--no-log-map", default=None, help="Override the hyperbolic default.")
@click.option("--seed", default=None, type=int)
@click.option("--out", required=True)
@click.pass_obj
def embed(service_url, prompts_file, model_id, endpoint, space, select, normalize, log_map, seed, out):
    """Fetch embeddings for a prompt file and store them as EMBX."""
    req = sm.EmbedFetchRequest(
        prompts_file=prompts_file,
        model_id=model_id,
        endpoint=endpoint,
        space=space,
        select=select,
        normalize=normalize,
        log_map=log_map,
        seed=seed,
        out=out,
    )
    _emit(_dispatch(service_url, "embed", req))


@cli.command()
@click.option("--prompts", "prompts_file", required=True)
@click.option("--clip-class", required=True)
@click.option("--se-class", required=True)
@click.option("--clip-rand", required=True)
@click.option("--se-rand", required=True)
@click.option("--d-cca", default=64, show_default=True)
@click.option("--k", default=None, type=int, help="Defaults to the prompt file's count.")
@click.option("--seed", default=0, show_default=True)
@click.option("--reg-eps", default=1e-4, show_default=True)
@click.option("--center-mode", default="raw", type=click.Choice(["raw", "centered"]))
@click.option("--first-cca-only", is_flag=True, default=False)
@click.option("--out", required=True)
@click.pass_obj
def fuse(service_url, prompts_file, clip_class, se_class, clip_rand, se_rand, d_cca, k, seed, reg_eps, center_mode, first_cca_only, out):
    """Fuse the two embedding families into a classifier head."""
    req = sm.FuseRequest(
        prompts_file=prompts_file,
        clip_class=clip_class,
        se_class=se_class,
        clip_rand=clip_rand,
        se_rand=se_rand,
        d_cca=d_cca,
        k=k,
        seed=seed,
        reg_eps=reg_eps,
        center_mode=center_mode,
        first_cca_only=first_cca_only,
        out=out,
    )
    _emit(_dispatch(service_url, "fuse", req))


@cli.command(name="eval")
@click.option("--head", required=True)
@click.option("--images", required=True)
@click.option("--labels", required=True)
@click.option("--rows-per-class", default=1, show_default=True, help="Weight rows per class (attribute expansion).")
@click.option("--aggregation", default="max", type=click.Choice(["max", "mean"]))
@click.option("--out", default=None)
@click.pass_obj
def eval_cmd(service_url, head, images, labels, rows_per_class, aggregation, out):
    """Score an evaluation set and report group metrics."""
    req = sm.EvalRequest(
        head=head,
        images=images,
        labels=labels,
        rows_per_class=rows_per_class,
        aggregation=aggregation,
        out=out,
    )
    _emit(_dispatch(service_url, "eval", req))


@cli.command()
@click.option("--out-dir", required=True)
@click.option("--seed", default=1234, show_default=True)
@click.option("--n-classes", default=2, show_default=True)
@click.option("--n-groups", default=2, show_default=True)
@click.option("--d", default=64, show_default=True)
@click.option("--d-se", default=96, show_default=True)
@click.option("--spurious-strength", default=0.7, show_default=True)
@click.option("--majority-fraction", default=0.95, show_default=True)
@click.option("--m", default=4000, show_default=True)
@click.option("--k", default=500, show_default=True)
@click.pass_obj
def synth(service_url, out_dir, seed, n_classes, n_groups, d, d_se, spurious_strength, majority_fraction, m, k):
    """Generate the synthetic spurious-correlation benchmark files."""
    req = sm.SynthRequest(
        out_dir=out_dir,
        seed=seed,
        n_classes=n_classes,
        n_groups=n_groups,
        d=d,
        d_se=d_se,
        spurious_strength=spurious_strength,
        majority_fraction=majority_fraction,
        m=m,
        k=k,
    )
    _emit(_dispatch(service_url, "synth", req))


@cli.command()
@click.option("--out-dir", required=True)
@click.option("--k-values", default="10,100,500,1000", show_default=True)
@click.option("--d-cca-values", default="64", show_default=True)
@click.option("--seed", default=1234, show_default=True)
@click.option("--n-classes", default=2, show_default=True)
@click.option("--n-groups", default=2, show_default=True)
@click.option("--d", default=64, show_default=True)
@click.option("--d-se", default=96, show_default=True)
@click.option("--spurious-strength", default=0.7, show_default=True)
@click.option("--majority-fraction", default=0.95, show_default=True)
@click.option("--m", default=4000, show_default=True)
@click.option("--reg-eps", default=1e-4, show_default=True)
@click.pass_obj
def sweep(service_url, out_dir, k_values, d_cca_values, seed, n_classes, n_groups, d, d_se, spurious_strength, majority_fraction, m, reg_eps):
    """Sweep (k, d_cca) over the synthetic benchmark; write CSV + reports."""
    req = sm.SweepRequest(
        out_dir=out_dir,
        k_values=_csv_ints(k_values),
        d_cca_values=_csv_ints(d_cca_values),
        seed=seed,
        n_classes=n_classes,
        n_groups=n_groups,
        d=d,
        d_se=d_se,
        spurious_strength=spurious_strength,
        majority_fraction=majority_fraction,
        m=m,
        reg_eps=reg_eps,
    )
    _emit(_dispatch(service_url, "sweep", req))


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host: str, port: int):
    """Run the fusion service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


def _fail(name: str, message: str, code: int) -> int:
    print(json.dumps({"error": name, "message": message}), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Abort:
        return _fail("Aborted", "interrupted", EXIT_CODES["usage"])
    except click.ClickException as err:
        return _fail("UsageError", err.format_message(), EXIT_CODES["usage"])
    except DccaError as err:
        return _fail(err.name, str(err), exit_code_for(err))
    except FileNotFoundError as err:
        return _fail("FileNotFound", str(err), EXIT_CODES["data"])
    except (json.JSONDecodeError, KeyError) as err:
        return _fail(type(err).__name__, str(err), EXIT_CODES["data"])
    except ValueError as err:
        return _fail("InvalidValue", str(err), EXIT_CODES["usage"])
    except httpx.HTTPError as err:
        return _fail("ServiceUnreachable", str(err), EXIT_CODES["data"])


if __name__ == "__main__":
    sys.exit(main())
