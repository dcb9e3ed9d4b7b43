from .patch import patch_apply, patch_attack_train, patch_location
from .pool import PoolResult, generate_pool, load_pool_records, write_pool
from .records import AdversarialRecord, finalize_perturbation
from .square import CountingScoreFn, SquareResult, margin_loss, p_schedule, square_attack, square_attack_batch
from .whitebox import fgsm, fgsm_batch, pgd, pgd_batch

__all__ = [
    "AdversarialRecord",
    "CountingScoreFn",
    "PoolResult",
    "SquareResult",
    "fgsm",
    "fgsm_batch",
    "finalize_perturbation",
    "generate_pool",
    "load_pool_records",
    "margin_loss",
    "p_schedule",
    "patch_apply",
    "patch_attack_train",
    "patch_location",
    "pgd",
    "pgd_batch",
    "square_attack",
    "square_attack_batch",
    "write_pool",
]
