"""Tests for the LAC risk estimators, penalty variants and the exact-risk oracle."""
import math

import numpy as np
import pytest

from lac_risk.core import (
    DiscreteDistributionSpec,
    LossKind,
    LossSpec,
    PriorShiftConfig,
    RiskConfig,
    RiskVariant,
)
from lac_risk.losses import loss_values_and_grads
from lac_risk.risk import (
    eulac_ovr_risk,
    exact_risk_oracle,
    lac_risk,
    objective,
    pac_risk,
    parse_risk_config,
    penalty,
    prior_shift_risk,
    resample_lac_risks,
    support_losses,
)

OVR = LossSpec(LossKind.OVR)
GCE = LossSpec(LossKind.GCE, q=0.7)

LABELED = np.array([[1.0, 0.2], [0.5, 0.4]])
UNLABELED = np.array([0.3, 0.7])


def _random_losses(rng, n=20, m=30):
    return rng.uniform(0, 2, size=(n, 2)), rng.uniform(0, 2, size=m)


def test_lac_risk_hand_example():
    """0.5 * mean true loss + mean unlabeled - 0.5 * mean labeled ac loss."""
    assert lac_risk(LABELED, UNLABELED, 0.5) == pytest.approx(0.725, abs=1e-15)


def test_lac_risk_theta_zero_is_unlabeled_mean():
    """theta = 0 drops the labeled terms."""
    assert lac_risk(LABELED, UNLABELED, 0.0) == pytest.approx(0.5, abs=1e-15)


def test_lac_risk_equal_losses_cancel():
    """When every loss equals c the estimate is c."""
    labeled = np.full((5, 2), 0.8)
    unlabeled = np.full(7, 0.8)
    assert lac_risk(labeled, unlabeled, 0.37) == pytest.approx(0.8, abs=1e-15)


def test_lac_risk_rejects_empty_and_bad_theta():
    """Empty batches and theta outside [0, 1] are errors."""
    with pytest.raises(ValueError):
        lac_risk(np.zeros((0, 2)), UNLABELED, 0.5)
    with pytest.raises(ValueError):
        lac_risk(LABELED, np.zeros(0), 0.5)
    with pytest.raises(ValueError):
        lac_risk(LABELED, UNLABELED, 1.5)


def test_pac_risk_examples():
    """pac = mean unlabeled ac loss - theta * mean labeled ac loss."""
    assert pac_risk(np.array([0.2, 0.4]), UNLABELED, 0.5) == pytest.approx(0.35, abs=1e-15)
    assert pac_risk(np.array([0.2, 0.4]), UNLABELED, 0.0) == pytest.approx(0.5, abs=1e-15)
    assert pac_risk(np.array([0.3, 0.7]), np.array([0.7, 0.3]), 1.0) == pytest.approx(0.0, abs=1e-15)


def test_penalty_examples():
    """Zero for nonnegative pac, (-pac)^t otherwise."""
    assert penalty(0.3, 1.0) == 0.0
    assert penalty(-0.5, 2.0) == pytest.approx(0.25)
    assert penalty(-0.5, 1.0) == pytest.approx(0.5)


def test_parse_risk_config():
    """Risk strings carry the variant and penalty parameters."""
    config = parse_risk_config("nrpr:t=2,lambda=0.5", theta_hat=0.3)
    assert config == RiskConfig(theta_hat=0.3, lam=0.5, t=2.0, variant=RiskVariant.URE_PENALTY)
    assert parse_risk_config("relu", 0.5).variant is RiskVariant.RELU_CORRECTED
    assert str(config) == "nrpr:t=2.0,lambda=0.5"
    with pytest.raises(ValueError):
        parse_risk_config("relu:t=1", 0.5)
    with pytest.raises(ValueError):
        parse_risk_config("nrpr:gamma=1", 0.5)
    with pytest.raises(ValueError):
        parse_risk_config("bogus", 0.5)


def test_lambda_zero_equals_lac_risk_exactly():
    """The penalized objective with lambda = 0 is the plain estimate."""
    rng = np.random.default_rng(0)
    for _ in range(20):
        labeled, unlabeled = _random_losses(rng)
        theta = float(rng.uniform())
        result = objective(labeled, unlabeled, RiskConfig(theta_hat=theta, lam=0.0))
        assert result.value == lac_risk(labeled, unlabeled, theta)


@pytest.mark.parametrize(
    "lam,variant",
    [(1.0, RiskVariant.RELU_CORRECTED), (2.0, RiskVariant.ABS_CORRECTED)],
)
def test_penalty_special_cases(lam, variant):
    """t = 1 with lambda 1 or 2 reproduces the ReLU and ABS corrections."""
    rng = np.random.default_rng(3)
    negative_seen = 0
    for _ in range(100):
        labeled, unlabeled = _random_losses(rng, n=int(rng.integers(2, 30)), m=int(rng.integers(2, 30)))
        theta = float(rng.uniform())
        penalized = objective(labeled, unlabeled, RiskConfig(theta_hat=theta, lam=lam, t=1.0))
        corrected = objective(labeled, unlabeled, RiskConfig(theta_hat=theta, variant=variant))
        negative_seen += penalized.pac < 0

        assert penalized.value == pytest.approx(corrected.value, abs=1e-12)
        np.testing.assert_allclose(penalized.labeled_true_weights, corrected.labeled_true_weights, atol=1e-12)
        np.testing.assert_allclose(penalized.labeled_ac_weights, corrected.labeled_ac_weights, atol=1e-12)
        np.testing.assert_allclose(penalized.unlabeled_ac_weights, corrected.unlabeled_ac_weights, atol=1e-12)
    assert negative_seen > 0


def test_penalized_objective_weights_when_pac_negative():
    """With pac < 0 the penalty flips the ac-loss weights for t = 1, lambda = 2."""
    labeled = np.array([[0.1, 2.0], [0.1, 2.0]])
    unlabeled = np.array([0.1, 0.1])

    result = objective(labeled, unlabeled, RiskConfig(theta_hat=1.0, lam=2.0, t=1.0))

    assert result.pac == pytest.approx(-1.9)
    assert result.penalty == pytest.approx(1.9)
    assert result.value == pytest.approx(0.1 + 1.9)
    np.testing.assert_allclose(result.labeled_ac_weights, [0.5, 0.5])
    np.testing.assert_allclose(result.unlabeled_ac_weights, [-0.5, -0.5])


def test_objective_value_is_weighted_sum_of_losses_for_linear_variants():
    """URE is linear in the losses, so value equals the dot product with its weights."""
    rng = np.random.default_rng(5)
    labeled, unlabeled = _random_losses(rng)
    result = objective(labeled, unlabeled, RiskConfig(theta_hat=0.4, variant=RiskVariant.URE))

    rebuilt = (
        np.dot(result.labeled_true_weights, labeled[:, 0])
        + np.dot(result.labeled_ac_weights, labeled[:, 1])
        + np.dot(result.unlabeled_ac_weights, unlabeled)
    )
    assert result.value == pytest.approx(rebuilt, abs=1e-12)


def test_supervised_objective_is_mean_labeled_loss():
    """SUPERVISED ignores the unlabeled batch."""
    result = objective(LABELED, UNLABELED, RiskConfig(theta_hat=1.0, variant=RiskVariant.SUPERVISED))
    assert result.value == pytest.approx(0.75)
    np.testing.assert_array_equal(result.unlabeled_ac_weights, [0.0, 0.0])


def test_eulac_zero_scores():
    """All-zero scores, k = 2: the labeled bracket vanishes and the unlabeled term is 3 ln 2."""
    value = eulac_ovr_risk(np.zeros((4, 3)), np.array([1, 2, 1, 2]), np.zeros((5, 3)), 0.5, OVR)
    assert value == pytest.approx(3 * math.log(2), abs=1e-12)


def test_eulac_theta_zero_is_unlabeled_term():
    """theta = 0 keeps only the unlabeled term."""
    rng = np.random.default_rng(7)
    unlabeled = rng.normal(size=(6, 3))
    value = eulac_ovr_risk(rng.normal(size=(4, 3)), np.array([1, 2, 2, 1]), unlabeled, 0.0, OVR)
    ac_losses, _ = loss_values_and_grads(OVR, unlabeled, np.full(6, 3))
    assert value == pytest.approx(ac_losses.mean(), abs=1e-12)


def test_eulac_matches_lac_risk_with_ovr_loss():
    """Plugging OVR into the general estimate gives the one-vs-rest form."""
    rng = np.random.default_rng(11)
    for _ in range(100):
        k = int(rng.integers(2, 7))
        n, m = int(rng.integers(1, 25)), int(rng.integers(1, 25))
        labeled_scores = rng.normal(scale=2.0, size=(n, k + 1))
        unlabeled_scores = rng.normal(scale=2.0, size=(m, k + 1))
        labels = rng.integers(1, k + 1, size=n)
        theta = float(rng.uniform())

        true_losses, _ = loss_values_and_grads(OVR, labeled_scores, labels)
        ac_losses, _ = loss_values_and_grads(OVR, labeled_scores, np.full(n, k + 1))
        unlabeled_ac, _ = loss_values_and_grads(OVR, unlabeled_scores, np.full(m, k + 1))
        expected = lac_risk(np.column_stack([true_losses, ac_losses]), unlabeled_ac, theta)

        assert eulac_ovr_risk(labeled_scores, labels, unlabeled_scores, theta, OVR) == pytest.approx(
            expected, abs=1e-10
        )


def test_eulac_requires_ovr_loss():
    """Other losses are rejected."""
    with pytest.raises(ValueError):
        eulac_ovr_risk(np.zeros((2, 3)), np.array([1, 2]), np.zeros((2, 3)), 0.5, GCE)


def test_prior_shift_single_class_is_lac_risk():
    """k = 1 with theta_te = [theta] collapses to the plain estimate."""
    rng = np.random.default_rng(13)
    labeled, unlabeled = _random_losses(rng)
    value = prior_shift_risk(labeled, np.ones(20, dtype=int), PriorShiftConfig((0.6,)), unlabeled)
    assert value == pytest.approx(lac_risk(labeled, unlabeled, 0.6), abs=1e-12)


def test_prior_shift_balanced_classes_is_lac_risk():
    """Equal class counts with theta_te = theta/k match the plain estimate."""
    rng = np.random.default_rng(17)
    labeled, unlabeled = _random_losses(rng, n=30)
    labels = np.tile([1, 2, 3], 10)
    value = prior_shift_risk(labeled, labels, PriorShiftConfig((0.2, 0.2, 0.2)), unlabeled)
    assert value == pytest.approx(lac_risk(labeled, unlabeled, 0.6), abs=1e-12)


def test_prior_shift_zero_priors_is_unlabeled_mean():
    """All-zero test priors leave only the unlabeled ac term."""
    value = prior_shift_risk(LABELED, np.array([1, 2]), PriorShiftConfig((0.0, 0.0)), UNLABELED)
    assert value == pytest.approx(0.5)


def test_prior_shift_missing_class():
    """A class with positive prior and no labeled examples is an error."""
    with pytest.raises(ValueError):
        prior_shift_risk(LABELED, np.array([1, 1]), PriorShiftConfig((0.3, 0.3)), UNLABELED)


def test_prior_shift_objective_is_penalized():
    """The shift objective adds lambda * penalty like the plain penalized one."""
    labeled = np.array([[0.1, 2.0], [0.1, 2.0]])
    unlabeled = np.array([0.1, 0.1])
    shift = PriorShiftConfig((0.5, 0.5))

    result = objective(
        labeled, unlabeled, RiskConfig(theta_hat=1.0, lam=1.0, variant=RiskVariant.PRIOR_SHIFT),
        labeled_labels=np.array([1, 2]), prior_shift=shift,
    )

    assert result.pac == pytest.approx(-1.9)
    assert result.value == pytest.approx(0.1 - 1.9 + 1.9)


def _six_point_distribution():
    dist = DiscreteDistributionSpec(
        theta=0.4,
        kc_probs=(0.5, 0.3, 0.2),
        kc_labels=(1, 2, 1),
        ac_probs=(0.2, 0.3, 0.5),
    )
    rng = np.random.default_rng(21)
    return dist, rng.normal(size=(3, 3)), rng.normal(size=(3, 3))


def test_oracle_theta_extremes():
    """theta = 1 and theta = 0 keep a single expectation."""
    _, kc_scores, ac_scores = _six_point_distribution()
    kc_losses, _ = loss_values_and_grads(GCE, kc_scores, np.array([1, 2, 1]))
    ac_losses, _ = loss_values_and_grads(GCE, ac_scores, np.full(3, 3))

    only_kc = DiscreteDistributionSpec(1.0, (0.5, 0.3, 0.2), (1, 2, 1), (0.2, 0.3, 0.5))
    only_ac = DiscreteDistributionSpec(0.0, (0.5, 0.3, 0.2), (1, 2, 1), (0.2, 0.3, 0.5))
    assert exact_risk_oracle(only_kc, kc_scores, ac_scores, GCE) == pytest.approx(np.dot([0.5, 0.3, 0.2], kc_losses))
    assert exact_risk_oracle(only_ac, kc_scores, ac_scores, GCE) == pytest.approx(np.dot([0.2, 0.3, 0.5], ac_losses))


def test_oracle_hand_enumeration():
    """Two known points and one augmented point at theta = 0.5, zero scores."""
    dist = DiscreteDistributionSpec(theta=0.5, kc_probs=(0.25, 0.75), kc_labels=(1, 2), ac_probs=(1.0,))
    value = exact_risk_oracle(dist, np.zeros((2, 3)), np.zeros((1, 3)), OVR)
    assert value == pytest.approx(3 * math.log(2))


def test_lac_risk_is_unbiased():
    """The mean over resampled datasets lies within 4 standard errors of the exact risk."""
    dist, kc_scores, ac_scores = _six_point_distribution()
    kc_losses, ac_losses = support_losses(dist, kc_scores, ac_scores, GCE)

    risks = resample_lac_risks(dist, kc_losses, ac_losses, n=50, m=50, repeats=10_000, rng=np.random.default_rng(0))
    exact = exact_risk_oracle(dist, kc_scores, ac_scores, GCE)

    stderr = risks.std(ddof=1) / math.sqrt(risks.size)
    assert abs(risks.mean() - exact) <= 4 * stderr
