"""Service operations: every endpoint and every CLI subcommand lands here.

Handlers take a request model, do the file I/O and core computation, and
return a response model; domain failures raise DccaError subclasses that the
app (or the CLI) maps to status/exit codes.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .. import __version__
from ..client import remote_embed
from ..errors import DccaError, UsageError
from ..evaluation import (
    AttributeSpec,
    GroupedEvalSet,
    evaluate,
    expand_with_attributes,
    load_labels,
    save_labels,
    save_metrics,
)
from ..pipeline import (
    PipelineConfig,
    first_stage,
    run_doublecca,
    second_stage,
    simulate_logits,
)
from ..prompts import build_prompt_set, get_template, read_prompt_jsonl, write_prompt_jsonl
from ..provenance import (
    input_digests,
    provenance_path,
    sha256_file,
    sha256_json,
    write_provenance,
)
from ..store import EmbeddingManifest, EmbeddingMatrix, ingest, read_embx, write_embx
from ..synth import SynthSpec, TextViewConfig, build_instance, synth_generate, synth_text_views
from . import schemas as sm

ENDPOINT_ENV = "DCCA_EMBED_ENDPOINT"


def _load_class_names(req: sm.PromptsRequest) -> list[str]:
    if (req.classes is None) == (req.classes_file is None):
        raise UsageError("provide exactly one of classes / classes_file")
    if req.classes is not None:
        return list(req.classes)
    data = json.loads(Path(req.classes_file).read_text(encoding="utf-8"))
    if isinstance(data, dict):
        data = data.get("classes")
    if not isinstance(data, list):
        raise UsageError(f"{req.classes_file} must hold a JSON array of class names")
    return [str(c) for c in data]


def handle_prompts(req: sm.PromptsRequest) -> sm.PromptsResponse:
    names = _load_class_names(req)
    rows_per_class = 1
    if req.attributes:
        names, _ = expand_with_attributes(names, AttributeSpec(tuple(req.attributes)))
        rows_per_class = len(req.attributes)
    wordlist = None
    if req.wordlist_file:
        wordlist = [
            w for w in Path(req.wordlist_file).read_text(encoding="utf-8").split() if w
        ]
    ps = build_prompt_set(names, get_template(req.template), req.k, req.seed, wordlist)
    write_prompt_jsonl(ps, req.out)
    return sm.PromptsResponse(
        path=req.out,
        n_classes=ps.n_classes,
        n_records=ps.n_classes * (1 + ps.k),
        rows_per_class=rows_per_class,
        digest=sha256_file(req.out),
    )


def handle_embed_fetch(req: sm.EmbedFetchRequest) -> sm.EmbedFetchResponse:
    endpoint = req.endpoint or os.environ.get(ENDPOINT_ENV)
    if not endpoint:
        raise UsageError(f"no embedding endpoint given and {ENDPOINT_ENV} is unset")
    pf = read_prompt_jsonl(req.prompts_file)
    if req.select == "originals":
        texts = list(pf.originals)
    elif req.select == "randoms":
        texts = list(pf.randoms)
    else:
        texts = list(pf.originals) + list(pf.randoms)
    emb = remote_embed(
        endpoint,
        req.model_id,
        texts,
        req.space,
        prompt_file=req.prompts_file,
        seed=req.seed,
    )
    emb = ingest(emb, normalize=req.normalize, log_map=req.log_map)
    emb.manifest.prompt_file = req.prompts_file
    emb.manifest.seed = req.seed
    write_embx(emb, req.out)
    return sm.EmbedFetchResponse(
        path=req.out, rows=emb.rows, cols=emb.cols, digest=sha256_file(req.out)
    )


def handle_fuse(req: sm.FuseRequest) -> sm.FuseResponse:
    pf = read_prompt_jsonl(req.prompts_file)
    clip_class = read_embx(req.clip_class)
    se_class = read_embx(req.se_class)
    clip_rand = read_embx(req.clip_rand)
    se_rand = read_embx(req.se_rand)

    config = PipelineConfig(
        d_cca=req.d_cca,
        k=req.k if req.k is not None else pf.k,
        seed=req.seed,
        reg_eps=req.reg_eps,
        center_mode=req.center_mode,
        first_cca_only=req.first_cca_only,
    )
    provenance = {
        "config_digest": sha256_json(config.to_json()),
        "input_files": input_digests(
            {
                "prompts": req.prompts_file,
                "clip_class": req.clip_class,
                "se_class": req.se_class,
                "clip_rand": req.clip_rand,
                "se_rand": req.se_rand,
            }
        ),
    }
    fused = run_doublecca(pf, clip_class, se_class, clip_rand, se_rand, config, provenance)

    head = EmbeddingMatrix(
        fused.weights,
        EmbeddingManifest(
            model_id="fused-head", prompt_file=req.prompts_file, seed=req.seed, normalized=False
        ),
    )
    write_embx(head, req.out)
    prov_path = provenance_path(req.out)
    write_provenance(prov_path, fused.provenance)
    return sm.FuseResponse(
        path=req.out,
        n_classes=fused.weights.shape[0],
        dim=fused.weights.shape[1],
        correlations_first=fused.provenance["correlations_first"],
        correlations_second=fused.provenance["correlations_second"],
        digest=sha256_file(req.out),
        provenance_path=str(prov_path),
    )


def _metrics_model(report) -> sm.MetricsModel:
    return sm.MetricsModel(
        avg=report.avg_acc,
        worst=report.worst_acc,
        gap=report.gap,
        groups=[
            sm.GroupReportModel(name=g.name, acc=g.acc, count=g.count)
            for g in report.per_group
        ],
        config_digest=report.config_digest,
    )


def handle_eval(req: sm.EvalRequest) -> sm.EvalResponse:
    head = read_embx(req.head)
    images = read_embx(req.images)
    labels, groups, group_names = load_labels(req.labels)
    if group_names is None:
        group_names = [f"group{i}" for i in range(int(groups.max()) + 1 if groups.size else 0)]
    eval_set = GroupedEvalSet(images=images, labels=labels, groups=groups, group_names=group_names)
    digest = sha256_json(
        {
            "head": sha256_file(req.head),
            "images": sha256_file(req.images),
            "labels": sha256_file(req.labels),
            "rows_per_class": req.rows_per_class,
            "aggregation": req.aggregation,
        }
    )
    report = evaluate(
        head.matrix,
        eval_set,
        rows_per_class=req.rows_per_class,
        aggregation=req.aggregation,
        config_digest=digest,
    )
    if req.out:
        save_metrics(report, req.out)
    return sm.EvalResponse(report=_metrics_model(report), path=req.out)


def _synth_spec(req: sm.SynthRequest | sm.SweepRequest, k: int, seed: int) -> SynthSpec:
    return SynthSpec(
        n_classes=req.n_classes,
        n_groups=req.n_groups,
        d=req.d,
        spurious_strength=req.spurious_strength,
        majority_fraction=req.majority_fraction,
        m=req.m,
        k=k,
        seed=seed,
        text=TextViewConfig(d_se=req.d_se),
    )


def handle_synth(req: sm.SynthRequest) -> sm.SynthResponse:
    out = Path(req.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = _synth_spec(req, req.k, req.seed)
    eval_set, _, _, views = build_instance(spec)
    clip_class, se_class, clip_rand, se_rand = views

    paths = {
        "images": out / "images.embx",
        "labels": out / "labels.json",
        "clip_class": out / "clip_class.embx",
        "se_class": out / "se_class.embx",
        "clip_rand": out / "clip_rand.embx",
        "se_rand": out / "se_rand.embx",
    }
    write_embx(eval_set.images, paths["images"])
    save_labels(paths["labels"], eval_set.labels, eval_set.groups, eval_set.group_names)
    write_embx(clip_class, paths["clip_class"])
    write_embx(se_class, paths["se_class"])
    write_embx(clip_rand, paths["clip_rand"])
    write_embx(se_rand, paths["se_rand"])
    write_provenance(
        out / "synth.provenance.json",
        {"spec": spec.to_json(), "files": input_digests({k: str(v) for k, v in paths.items()})},
    )
    return sm.SynthResponse(
        images=str(paths["images"]),
        labels=str(paths["labels"]),
        clip_class=str(paths["clip_class"]),
        se_class=str(paths["se_class"]),
        clip_rand=str(paths["clip_rand"]),
        se_rand=str(paths["se_rand"]),
        digest=sha256_file(paths["images"]),
    )


def handle_sweep(req: sm.SweepRequest) -> sm.SweepResponse:
    """Run the synthetic benchmark over a (k, d_cca) grid.

    Every requested grid point gets exactly one CSV row; points that fail
    keep their row with empty metric cells and the error name is reported in
    the response. Successful points also write a per-point report JSON.
    """
    out = Path(req.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    eval_set, class_dirs, group_dirs = synth_generate(
        req.n_classes,
        req.n_groups,
        req.d,
        req.spurious_strength,
        req.majority_fraction,
        req.m,
        req.seed,
    )

    rows: list[sm.SweepRow] = []
    for k in req.k_values:
        views = synth_text_views(
            class_dirs, group_dirs, k, req.seed, TextViewConfig(d_se=req.d_se)
        )
        clip_class, se_class, clip_rand, se_rand = views
        for d_cca in req.d_cca_values:
            config = PipelineConfig(d_cca=d_cca, k=k, seed=req.seed, reg_eps=req.reg_eps)
            try:
                s1 = first_stage(clip_class, se_class, clip_rand, se_rand, config)
                x_a, x_b = simulate_logits(s1, clip_rand.matrix)
                fused = second_stage(x_a, x_b, s1, config)
                report = evaluate(
                    fused.weights,
                    eval_set,
                    config_digest=sha256_json(config.to_json()),
                )
            except DccaError as err:
                rows.append(sm.SweepRow(k=k, d_cca=d_cca, error=err.name))
                continue
            save_metrics(report, out / f"report_k{k}_d{d_cca}.json")
            rows.append(
                sm.SweepRow(
                    k=k, d_cca=d_cca, avg=report.avg_acc, worst=report.worst_acc, gap=report.gap
                )
            )

    csv_path = out / "sweep.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "d_cca", "avg", "worst", "gap"])
        for row in rows:
            writer.writerow(
                [
                    row.k,
                    row.d_cca,
                    "" if row.avg is None else repr(row.avg),
                    "" if row.worst is None else repr(row.worst),
                    "" if row.gap is None else repr(row.gap),
                ]
            )
    return sm.SweepResponse(csv_path=str(csv_path), rows=rows)


def handle_health() -> sm.HealthResponse:
    return sm.HealthResponse(status="ok", version=__version__)
