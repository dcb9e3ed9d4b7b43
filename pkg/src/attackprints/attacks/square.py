"""Score-based black-box attack: random search with square-shaped updates.

The attack only ever sees a score callback (image batch -> logits); it has
no access to the model object or its gradients. Each image owns its own RNG
stream, so attacking a batch produces bit-identical results to attacking
each image alone, while sharing one forward pass per iteration.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError
from ..taxonomy import AttackClass, LINF
from .records import AdversarialRecord, finalize_perturbation

P_INIT = 0.8
# p halves once each time the iteration count passes these fractions of budget
P_HALVING_FRACTIONS = (0.02, 0.1, 0.25, 0.5)


def p_schedule(iteration: int, budget: int, p_init: float = P_INIT) -> float:
    frac = iteration / budget
    halvings = sum(frac >= f for f in P_HALVING_FRACTIONS)
    return p_init / (2**halvings)


def margin_loss(logits: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Logit margin of the true class over the best other class; < 0 means misclassified."""
    z = logits.astype(np.float64)
    n = len(labels)
    true = z[np.arange(n), labels].copy()
    z[np.arange(n), labels] = -np.inf
    other = z.max(axis=1)
    return true - other


@dataclass
class SquareResult:
    adv: np.ndarray
    success: bool
    queries: int
    accepted_margins: list[float]  # margin after init and after each accepted proposal
    seed: int


def square_attack_batch(
    score_fn,
    xs: np.ndarray,
    labels: np.ndarray,
    eps: float,
    query_budget: int,
    seeds,
) -> list[SquareResult]:
    if query_budget < 1:
        raise InvalidInputError("query budget must be >= 1")
    n, h, w, c = xs.shape
    side_max = min(h, w)
    rngs = [np.random.Generator(np.random.PCG64(int(s))) for s in seeds]
    eps32 = np.float32(eps)

    # init: full-height vertical stripes of +-eps, one sign per (column, channel)
    adv = np.empty_like(xs)
    for i in range(n):
        stripes = rngs[i].choice(np.array([-eps32, eps32]), size=(1, w, c))
        adv[i] = np.clip(xs[i] + stripes, 0.0, 1.0)
    margins = margin_loss(score_fn(adv), labels)
    queries = np.ones(n, dtype=np.int64)
    accepted = [[float(m)] for m in margins]

    active = (margins >= 0) & (queries < query_budget)
    iteration = 0
    while active.any():
        iteration += 1
        p = p_schedule(iteration, query_budget)
        side = int(np.ceil(np.sqrt(p * h * w)))
        side = max(1, min(side, side_max))
        idx = np.flatnonzero(active)
        proposals = np.empty((len(idx), h, w, c), dtype=np.float32)
        for k, i in enumerate(idx):
            r = int(rngs[i].integers(0, h - side + 1))
            col = int(rngs[i].integers(0, w - side + 1))
            signs = rngs[i].choice(np.array([-eps32, eps32]), size=(1, 1, c))
            prop = adv[i].copy()
            prop[r : r + side, col : col + side, :] = np.clip(
                xs[i, r : r + side, col : col + side, :] + signs, 0.0, 1.0
            )
            proposals[k] = prop
        new_margins = margin_loss(score_fn(proposals), labels[idx])
        queries[idx] += 1
        for k, i in enumerate(idx):
            if new_margins[k] < margins[i]:
                adv[i] = proposals[k]
                margins[i] = new_margins[k]
                accepted[i].append(float(new_margins[k]))
        active = (margins >= 0) & (queries < query_budget)

    return [
        SquareResult(
            adv=adv[i],
            success=bool(margins[i] < 0),
            queries=int(queries[i]),
            accepted_margins=accepted[i],
            seed=int(seeds[i]),
        )
        for i in range(n)
    ]


def square_attack(
    score_fn,
    x: np.ndarray,
    label: int,
    eps: float,
    query_budget: int,
    seed: int,
    attack_class: AttackClass | None = None,
    source_id: int = 0,
    pred_before: int | None = None,
) -> AdversarialRecord:
    """Attack one image through a score callback; black-box by construction.

    ``pred_before`` (the victim's clean prediction) may be passed in to avoid
    an extra query; if omitted it costs one callback invocation.
    """
    if attack_class is None:
        attack_class = AttackClass("square", LINF, float(eps), 0)
    if pred_before is None:
        pred_before = int(score_fn(x[None]).argmax(axis=1)[0])
    result = square_attack_batch(score_fn, x[None], np.array([label]), eps, query_budget, [seed])[0]
    delta, x_prime = finalize_perturbation(x, result.adv)
    pred_after = int(score_fn(x_prime[None]).argmax(axis=1)[0])
    return AdversarialRecord(
        source_id=int(source_id),
        x=x.astype(np.float32),
        delta=delta,
        x_prime=x_prime,
        attack_class=attack_class,
        success=bool(pred_before == label and pred_after != label),
        true_label=int(label),
        pred_before=pred_before,
        pred_after=pred_after,
        queries=result.queries,
        seed=int(seed),
        info={"accepted_margins": result.accepted_margins},
    )


class CountingScoreFn:
    """Wrap a logits function; counts queries and hides everything else."""

    def __init__(self, fn):
        self._fn = fn
        self.queries = 0

    def __call__(self, batch: np.ndarray) -> np.ndarray:
        self.queries += len(batch)
        return self._fn(batch)
