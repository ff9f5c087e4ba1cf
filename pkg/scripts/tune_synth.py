"""Dev-only: explore synthetic-benchmark knobs so the fixture constants give a
stable fused-vs-plain worst-group margin. Not part of the package."""

import itertools
import sys
import time

import numpy as np

from doublecca.evaluation import evaluate
from doublecca.pipeline import PipelineConfig, first_stage, second_stage, simulate_logits
from doublecca.synth import SynthSpec, TextViewConfig, build_instance


def run_once(spec: SynthSpec, d_cca=64):
    eval_set, class_dirs, group_dirs, views = build_instance(spec)
    clip_class, se_class, clip_rand, se_rand = views
    cfg = PipelineConfig(d_cca=d_cca, k=spec.k, seed=spec.seed)
    s1 = first_stage(clip_class, se_class, clip_rand, se_rand, cfg)
    x_a, x_b = simulate_logits(s1, clip_rand.matrix)
    fused = second_stage(x_a, x_b, s1, cfg)

    plain = evaluate(clip_class.matrix, eval_set)
    first_only = evaluate(s1.text_head, eval_set)
    merged = evaluate(fused.weights, eval_set)
    return plain, first_only, merged


def sweep_knobs():
    base = dict(n_classes=2, n_groups=2, d=64, spurious_strength=0.7,
                majority_fraction=0.95, m=4000, k=500)
    grid = {
        "text_spurious": [1.0, 1.2, 1.4],
        "context_drift_clip": [0.6, 0.9, 1.2],
        "context_drift_se": [0.4, 0.6],
    }
    keys = list(grid)
    for combo in itertools.product(*grid.values()):
        tv = TextViewConfig(**dict(zip(keys, combo)))
        margins, plains, fworsts = [], [], []
        for seed in (1234, 7, 99, 2024, 555):
            spec = SynthSpec(seed=seed, text=tv, **base)
            plain, first_only, merged = run_once(spec)
            margins.append(merged.worst_acc - plain.worst_acc)
            plains.append(plain.worst_acc)
            fworsts.append(merged.worst_acc)
        print(
            f"{dict(zip(keys, combo))} -> plain_worst={np.round(plains,1)} "
            f"merged_worst={np.round(fworsts,1)} margin={np.round(margins,1)} "
            f"min_margin={min(margins):.1f}"
        )


def detail(seed=1234):
    spec = SynthSpec(seed=seed)
    t0 = time.time()
    plain, first_only, merged = run_once(spec)
    dt = time.time() - t0
    print(f"seed={seed}  ({dt:.2f}s)")
    for name, rep in (("plain", plain), ("first-only", first_only), ("merged", merged)):
        accs = {g.name: round(g.acc, 2) for g in rep.per_group}
        print(f"  {name:10s} avg={rep.avg_acc:6.2f} worst={rep.worst_acc:6.2f} "
              f"gap={rep.gap:6.2f} {accs}")


if __name__ == "__main__":
    if len(sys.argv) > 1 and sys.argv[1] == "grid":
        sweep_knobs()
    else:
        for seed in (1234, 7, 99, 2024, 555):
            detail(seed)
