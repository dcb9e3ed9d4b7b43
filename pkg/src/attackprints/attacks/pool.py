"""Attack pool generation: every (attack class x source image) attempt,
filtered to successful records, persisted as blobs plus a JSON manifest."""

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import nn
from ..blob import read_blob, write_blob
from ..data import LabeledDataset
from ..errors import FormatError, InvalidInputError
from ..nn import Model
from ..seeds import derive_seed
from ..taxonomy import (
    FGSM,
    PATCH,
    PGD,
    SQUARE,
    AttackClass,
    AttackPreset,
    Taxonomy,
)
from ..victim import predict_labels
from .patch import patch_apply, patch_attack_train
from .records import AdversarialRecord, finalize_perturbation
from .square import square_attack_batch
from .whitebox import fgsm_batch, pgd_batch


@dataclass
class PoolResult:
    records: list[AdversarialRecord]
    per_class_counts: dict[int, int]
    warnings: list[str]
    attempted_images: int
    patch: np.ndarray | None = None
    split: str = "train"


def generate_pool(
    model: Model,
    dataset: LabeledDataset,
    taxonomy: Taxonomy,
    preset: AttackPreset,
    pool_seed: int,
    n_images: int | None = None,
    patch: np.ndarray | None = None,
    clean_predictions: np.ndarray | None = None,
) -> PoolResult:
    """Attack the first ``n_images`` correctly-classified images with every
    class in the taxonomy; keep successful records only.

    ``patch`` lets the caller reuse a patch trained on another split (the
    universal patch is trained once); when absent one is trained on this
    dataset's eligible images.
    """
    if clean_predictions is None:
        clean_predictions = predict_labels(model, dataset.images)
    eligible = np.flatnonzero(clean_predictions == dataset.labels)
    if n_images is not None:
        eligible = eligible[:n_images]
    xs = dataset.images[eligible]
    labels = dataset.labels[eligible]
    ids = dataset.ids[eligible].astype(np.int64)

    records: list[AdversarialRecord] = []
    warnings: list[str] = []
    counts: dict[int, int] = {}
    h, w, c = xs.shape[1:] if len(xs) else (0, 0, 0)

    patch_out = patch
    for cls in taxonomy.classes:
        if len(xs) == 0:
            batch_records = []
        elif cls.algorithm == FGSM:
            batch_records = fgsm_batch(model, xs, labels, cls.eps, cls, ids)
        elif cls.algorithm == PGD:
            batch_records = pgd_batch(
                model, xs, labels, cls.norm, cls.eps, preset.pgd_steps, None, cls, ids
            )
        elif cls.algorithm == SQUARE:
            batch_records = _square_class(model, xs, labels, ids, cls, preset, pool_seed)
        elif cls.algorithm == PATCH:
            if patch_out is None:
                side = math.ceil(preset.patch.side_frac * min(h, w))
                patch_out, _ = patch_attack_train(
                    model,
                    xs,
                    preset.patch.target_label,
                    side,
                    preset.patch.iters,
                    preset.patch.alpha,
                    derive_seed(pool_seed, "patch-train"),
                    preset.patch.train_batch,
                )
            batch_records = _patch_class(model, xs, labels, ids, cls, preset, patch_out, pool_seed)
        else:
            raise InvalidInputError(f"unknown attack algorithm {cls.algorithm!r}")
        kept = [r for r in batch_records if r.success]
        counts[cls.class_index] = len(kept)
        if not kept:
            warnings.append(f"class {cls.class_index} ({cls.label()}) produced zero successful records")
        records.extend(kept)
    return PoolResult(records, counts, warnings, len(xs), patch_out, dataset.split)


def _square_class(model, xs, labels, ids, cls, preset, pool_seed):
    score_fn = lambda batch: nn.forward(model, batch)  # noqa: E731 - scores only, no gradients
    seeds = [derive_seed(pool_seed, cls.class_index, int(i)) for i in ids]
    results = square_attack_batch(score_fn, xs, labels, cls.eps, preset.square_budget, seeds)
    deltas = np.empty_like(xs)
    primes = np.empty_like(xs)
    for i, res in enumerate(results):
        deltas[i], primes[i] = finalize_perturbation(xs[i], res.adv)
    pred_after = predict_labels(model, primes)
    records = []
    for i, res in enumerate(results):
        records.append(
            AdversarialRecord(
                source_id=int(ids[i]),
                x=xs[i],
                delta=deltas[i],
                x_prime=primes[i],
                attack_class=cls,
                success=bool(int(pred_after[i]) != int(labels[i])),  # eligible => pred_before == label
                true_label=int(labels[i]),
                pred_before=int(labels[i]),
                pred_after=int(pred_after[i]),
                queries=res.queries,
                seed=res.seed,
                info={"accepted_margins": res.accepted_margins},
            )
        )
    return records


def _patch_class(model, xs, labels, ids, cls, preset, patch, pool_seed):
    records = []
    target = preset.patch.target_label
    for i in range(len(xs)):
        if int(labels[i]) == target:
            continue  # pasting the target class onto itself is a degenerate success
        loc_seed = derive_seed(pool_seed, cls.class_index, int(ids[i]))
        records.append(
            patch_apply(
                model,
                xs[i],
                int(labels[i]),
                patch,
                target,
                loc_seed,
                cls,
                int(ids[i]),
                pred_before=int(labels[i]),
            )
        )
    return records


# --- persistence --------------------------------------------------------------


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_pool(result: PoolResult, out_dir, taxonomy: Taxonomy, config_echo: dict) -> dict:
    """Blob per record under {split}/{class_index}/{source_id}.bin plus a manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for rec in result.records:
        rel = f"{result.split}/{rec.attack_class.class_index}/{rec.source_id}.bin"
        path = out / rel
        write_blob(path, np.stack([rec.x, rec.delta]))
        entry = {
            "path": rel,
            "sha256": _sha256(path),
            "source_id": rec.source_id,
            "class_index": rec.attack_class.class_index,
            "split": result.split,
            "true_label": rec.true_label,
            "pred_before": rec.pred_before,
            "pred_after": rec.pred_after,
            "queries": rec.queries,
            "seed": rec.seed,
            "linf": rec.linf(),
            "l2": rec.l2(),
        }
        if rec.info:
            entry["info"] = rec.info
        entries.append(entry)
    if result.patch is not None:
        write_blob(out / f"{result.split}/patch.bin", result.patch)
    manifest = {
        "kind": "pool",
        "split": result.split,
        "taxonomy": taxonomy_to_json(taxonomy),
        "config": config_echo,
        "attempted_images": result.attempted_images,
        "per_class_counts": {str(k): v for k, v in sorted(result.per_class_counts.items())},
        "warnings": result.warnings,
        "records": entries,
    }
    manifest_path = out / f"manifest_{result.split}.json"
    manifest_path.write_text(json.dumps(manifest, indent=1, sort_keys=True))
    return manifest


def taxonomy_to_json(taxonomy: Taxonomy) -> dict:
    return {
        "version": taxonomy.version,
        "classes": [
            {"algorithm": c.algorithm, "norm": c.norm, "eps": c.eps, "class_index": c.class_index}
            for c in taxonomy.classes
        ],
    }


def taxonomy_from_json(data: dict) -> Taxonomy:
    classes = tuple(
        AttackClass(c["algorithm"], c["norm"], c["eps"], c["class_index"])
        for c in data["classes"]
    )
    return Taxonomy(data["version"], classes)


def load_pool_manifest(pool_dir, split: str) -> dict:
    path = Path(pool_dir) / f"manifest_{split}.json"
    if not path.exists():
        raise FormatError(f"no pool manifest at {path}")
    return json.loads(path.read_text())


def load_pool_records(pool_dir, split: str) -> tuple[list[AdversarialRecord], Taxonomy, dict]:
    """Rebuild records from blobs; x_prime is recomputed from (x, delta)."""
    manifest = load_pool_manifest(pool_dir, split)
    taxonomy = taxonomy_from_json(manifest["taxonomy"])
    records = []
    for entry in manifest["records"]:
        stacked = read_blob(Path(pool_dir) / entry["path"])
        x, delta = stacked[0], stacked[1]
        x_prime = np.clip(x + delta, 0.0, 1.0).astype(np.float32)
        records.append(
            AdversarialRecord(
                source_id=entry["source_id"],
                x=x,
                delta=delta,
                x_prime=x_prime,
                attack_class=taxonomy.by_index(entry["class_index"]),
                success=True,
                true_label=entry["true_label"],
                pred_before=entry["pred_before"],
                pred_after=entry["pred_after"],
                queries=entry["queries"],
                seed=entry["seed"],
                info=entry.get("info", {}),
            )
        )
    return records, taxonomy, manifest
