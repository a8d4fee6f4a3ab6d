"""Construction of augmented-class scenarios from labeled sources."""
import logging
from typing import Optional, Sequence

import numpy as np

from lac_risk.core import Dataset, LacScenario, ScenarioConfig, ScenarioError, SyntheticSpec

logger = logging.getLogger(__name__)


def shift_multipliers(alpha: float) -> tuple[float, ...]:
    return (1.0 - alpha, 1.0 - alpha / 2.0, 1.0, 1.0 + alpha / 2.0, 1.0 + alpha / 2.0)


SPLITS = ("labeled", "unlabeled", "test")


def apply_prior_shift(base_priors: Sequence[float], alpha: float) -> np.ndarray:
    """Reshape known-class priors with the shift pattern, keeping their total mass.

    Multipliers 1-a, 1-a/2, 1, 1+a/2, 1+a/2 are applied to the known classes in
    order (cyclically when there are more or fewer than five), then the vector
    is rescaled to the original sum.
    """
    if not 0.0 <= alpha < 1.0:
        raise ScenarioError(f"prior shift alpha must lie in [0, 1), got {alpha}")
    base = np.asarray(base_priors, dtype=np.float64)
    if np.any(base < 0):
        raise ScenarioError("base priors must be nonnegative")
    pattern = shift_multipliers(alpha)
    multipliers = np.array([pattern[i % len(pattern)] for i in range(base.size)])
    shifted = base * multipliers
    total = shifted.sum()
    if total == 0:
        return shifted
    return shifted * (base.sum() / total)


def validate_known_classes(known_class_ids: Sequence[int], class_count: int) -> None:
    for c in known_class_ids:
        if not 1 <= c <= class_count:
            raise ScenarioError(f"known class id {c} outside 1..{class_count}")
    if len(set(known_class_ids)) >= class_count:
        raise ScenarioError("known classes cover every class; at least one augmented class is required")


def split_priors(
    class_count: int,
    known_class_ids: Sequence[int],
    alpha: float,
    theta: Optional[float] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-source-class priors for the labeled split and the unlabeled/test mixture.

    Arrays are indexed by source class id minus one. Without theta every class
    gets 1/K in the mixture.
    """
    known_idx = np.array(known_class_ids, dtype=np.int64) - 1
    ac_mask = np.ones(class_count, dtype=bool)
    ac_mask[known_idx] = False

    labeled = np.zeros(class_count)
    labeled[known_idx] = 1.0 / len(known_idx)

    mixture = np.zeros(class_count)
    if theta is None:
        mixture[:] = 1.0 / class_count
    else:
        mixture[known_idx] = theta / len(known_idx)
        mixture[ac_mask] = (1.0 - theta) / ac_mask.sum()
    mixture[known_idx] = apply_prior_shift(mixture[known_idx], alpha)
    return labeled, mixture


def draw_split_counts(
    rng: np.random.Generator, config: ScenarioConfig, labeled_priors: np.ndarray, mixture_priors: np.ndarray
) -> dict[str, np.ndarray]:
    return {
        "labeled": rng.multinomial(config.n_labeled, labeled_priors),
        "unlabeled": rng.multinomial(config.m_unlabeled, mixture_priors),
        "test": rng.multinomial(config.n_test, mixture_priors),
    }


def make_scenario(source: Dataset, config: ScenarioConfig) -> LacScenario:
    """Split a labeled source into labeled, unlabeled and test sets.

    Without prior shift the labeled set is a uniform draw from the known
    classes and the unlabeled and test sets are uniform draws from the rest.
    With prior shift each split's class counts are drawn from its priors first.
    """
    if source.labels is None:
        raise ScenarioError("scenario source must be labeled")
    validate_known_classes(config.known_class_ids, source.class_count)

    rng = np.random.default_rng(config.seed)
    counts = None
    if config.prior_shift_alpha > 0:
        labeled_p, mixture_p = split_priors(
            source.class_count, config.known_class_ids, config.prior_shift_alpha
        )
        counts = draw_split_counts(rng, config, labeled_p, mixture_p)
    return assemble_scenario(source, config, rng, counts)


def make_synthetic_gaussians(config: ScenarioConfig) -> LacScenario:
    """Sample isotropic Gaussian classes, then split them like make_scenario.

    The known-class mass of the mixture is synthetic_spec.theta (k/K when unset);
    the labeled split is uniform over known classes.
    """
    spec: Optional[SyntheticSpec] = config.synthetic_spec
    if spec is None:
        raise ScenarioError("synthetic_spec is required for synthetic scenarios")
    validate_known_classes(config.known_class_ids, spec.class_count)

    rng = np.random.default_rng(config.seed)
    theta = spec.theta if spec.theta is not None else config.k / spec.class_count
    labeled_p, mixture_p = split_priors(
        spec.class_count, config.known_class_ids, config.prior_shift_alpha, theta
    )
    counts = draw_split_counts(rng, config, labeled_p, mixture_p)

    totals = sum(counts.values())
    means = np.asarray(spec.means, dtype=np.float64)
    blocks = [
        means[c] + spec.std * rng.standard_normal((int(totals[c]), spec.dimension))
        for c in range(spec.class_count)
    ]
    labels = np.repeat(np.arange(1, spec.class_count + 1), totals)
    source = Dataset(features=np.vstack(blocks), labels=labels, class_count=spec.class_count)
    return assemble_scenario(source, config, rng, counts)


def assemble_scenario(
    source: Dataset,
    config: ScenarioConfig,
    rng: np.random.Generator,
    counts: Optional[dict[str, np.ndarray]] = None,
) -> LacScenario:
    """Draw disjoint split indices and relabel them."""
    assert source.labels is not None
    labels = source.labels
    known = config.known_class_ids
    k = len(known)

    relabel = np.full(source.class_count + 1, k + 1, dtype=np.int64)
    for scenario_label, original in enumerate(known, start=1):
        relabel[original] = scenario_label
    class_map = {c: int(relabel[c]) for c in range(1, source.class_count + 1)}

    if counts is None:
        indices = _draw_uniform(rng, labels, config)
    else:
        indices = _draw_by_class(rng, labels, source.class_count, counts, source.label_names)

    unlabeled_labels = relabel[labels[indices["unlabeled"]]]
    known_counts = np.bincount(unlabeled_labels, minlength=k + 2)[1 : k + 1]
    theta_true = float(known_counts.sum()) / config.m_unlabeled
    known_priors = tuple(float(c) / config.m_unlabeled for c in known_counts)

    scenario = LacScenario(
        labeled=Dataset(
            features=source.features[indices["labeled"]],
            labels=relabel[labels[indices["labeled"]]],
            class_count=k,
        ),
        unlabeled=Dataset(features=source.features[indices["unlabeled"]], labels=None, class_count=k + 1),
        test=Dataset(
            features=source.features[indices["test"]],
            labels=relabel[labels[indices["test"]]],
            class_count=k + 1,
        ),
        k=k,
        theta_true=theta_true,
        class_map=class_map,
        seed=config.seed,
        known_priors=known_priors,
        indices=indices,
    )
    logger.debug(
        "Built scenario seed=%d k=%d n=%d m=%d test=%d theta_true=%.4f",
        config.seed, k, scenario.labeled.n, scenario.unlabeled.n, scenario.test.n, theta_true,
    )
    return scenario


def _draw_uniform(rng: np.random.Generator, labels: np.ndarray, config: ScenarioConfig) -> dict[str, np.ndarray]:
    known_rows = np.flatnonzero(np.isin(labels, config.known_class_ids))
    if known_rows.size < config.n_labeled:
        raise ScenarioError(
            f"known classes {list(config.known_class_ids)} have {known_rows.size} examples, "
            f"{config.n_labeled} labeled examples requested"
        )
    labeled = rng.choice(known_rows, size=config.n_labeled, replace=False)

    used = np.zeros(labels.size, dtype=bool)
    used[labeled] = True
    rest = rng.permutation(np.flatnonzero(~used))
    needed = config.m_unlabeled + config.n_test
    if rest.size < needed:
        raise ScenarioError(
            f"{rest.size} examples left after the labeled split, {needed} unlabeled+test examples requested"
        )
    return {
        "labeled": labeled,
        "unlabeled": rest[: config.m_unlabeled],
        "test": rest[config.m_unlabeled : needed],
    }


def _draw_by_class(
    rng: np.random.Generator,
    labels: np.ndarray,
    class_count: int,
    counts: dict[str, np.ndarray],
    label_names: Optional[tuple[str, ...]],
) -> dict[str, np.ndarray]:
    pools = [rng.permutation(np.flatnonzero(labels == c)) for c in range(1, class_count + 1)]
    cursors = [0] * class_count
    indices: dict[str, np.ndarray] = {}
    for split in SPLITS:
        parts = []
        for c in range(class_count):
            need = int(counts[split][c])
            if cursors[c] + need > pools[c].size:
                name = label_names[c] if label_names else str(c + 1)
                raise ScenarioError(
                    f"class {name} has {pools[c].size} examples, "
                    f"{cursors[c] + need} needed through the {split} split"
                )
            parts.append(pools[c][cursors[c] : cursors[c] + need])
            cursors[c] += need
        indices[split] = rng.permutation(np.concatenate(parts))
    return indices
