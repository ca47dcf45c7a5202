"""Regime hypothesis test via Bayes factors.

Both hypotheses have the same parameter dimension, so the Schwarz
approximation reduces the log Bayes factor to the difference of the
observed-sequence log-likelihoods evaluated at the regime-specific maximum
likelihood estimates. The likelihoods come from the forward particle
recursion; with modest particle counts the estimate is noisy, so the test
averages over independent trials.
"""

from dataclasses import dataclass, field

from .filtering import filter_loglik
from .inference import EmConfig, ModelParams, em_fit
from .process import Regime
from .rng import Rng, derive_seed

__all__ = ["forward_loglik", "TrialResult", "TestResult", "TestConfig", "bayes_factor_test"]

_TAG_TRIAL = 31
_TAG_FIT = 32
_TAG_FWD = 33


def forward_loglik(series, params: ModelParams, regime: Regime,
                   n_particles: int, rng: Rng) -> float:
    """Particle estimate of log P(observations at times 2..M | first state)."""
    if n_particles < 1:
        raise ValueError("need at least one particle")
    return filter_loglik(series, params, regime, n_particles, rng)


@dataclass
class TrialResult:
    loglik_er: float
    loglik_pr: float
    params_er: ModelParams
    params_pr: ModelParams

    @property
    def log_bf(self) -> float:
        return self.loglik_er - self.loglik_pr


@dataclass
class TestResult:
    """Trial-averaged log-likelihoods; decision is ER iff log_bf > 0."""

    __test__ = False  # not a pytest class, despite the name

    loglik_er: float
    loglik_pr: float
    log_bf: float
    decision: Regime
    params_er: ModelParams
    params_pr: ModelParams
    n_trials: int
    trials: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "loglik_er": self.loglik_er,
            "loglik_pr": self.loglik_pr,
            "log_bf": self.log_bf,
            "decision": self.decision.value,
            "params_er": self.params_er.to_dict(),
            "params_pr": self.params_pr.to_dict(),
            "n_trials": self.n_trials,
            "trials": [{"loglik_er": t.loglik_er, "loglik_pr": t.loglik_pr,
                        "log_bf": t.log_bf,
                        "params_er": t.params_er.to_dict(),
                        "params_pr": t.params_pr.to_dict()} for t in self.trials],
        }


@dataclass
class TestConfig:
    __test__ = False  # not a pytest class, despite the name

    trials: int = 10
    em: EmConfig = field(default_factory=EmConfig)
    forward_particles: int = None  # defaults to the EM particle count


def bayes_factor_test(series, config: TestConfig = None, rng: Rng = None) -> TestResult:
    """Fit both regimes per trial, evaluate each likelihood at its MLE, and
    average the log Bayes factor over trials."""
    if config is None:
        config = TestConfig()
    if rng is None:
        rng = Rng(0)
    if config.trials < 1:
        raise ValueError("need at least one trial")
    b_fwd = config.forward_particles or config.em.n_particles
    root = int(rng.state)
    rng.u01()
    trials = []
    for t in range(config.trials):
        fits = {}
        logliks = {}
        for regime in (Regime.ER, Regime.PR):
            fit_rng = Rng._from_state(derive_seed(root, _TAG_TRIAL, t, _TAG_FIT, regime.code))
            fits[regime], _ = em_fit(series, regime, config.em, fit_rng)
            fwd_rng = Rng._from_state(derive_seed(root, _TAG_TRIAL, t, _TAG_FWD, regime.code))
            logliks[regime] = forward_loglik(series, fits[regime], regime, b_fwd, fwd_rng)
        trials.append(TrialResult(logliks[Regime.ER], logliks[Regime.PR],
                                  fits[Regime.ER], fits[Regime.PR]))
    mean_er = sum(t.loglik_er for t in trials) / len(trials)
    mean_pr = sum(t.loglik_pr for t in trials) / len(trials)
    log_bf = mean_er - mean_pr
    decision = Regime.ER if log_bf > 0 else Regime.PR
    return TestResult(mean_er, mean_pr, log_bf, decision,
                      trials[-1].params_er, trials[-1].params_pr,
                      len(trials), trials)
