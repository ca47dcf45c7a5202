"""Percolation hidden Markov models for noisy dynamic networks.

Simulation of continuous-time uniform (ER) and product-rule (PR)
birth-death percolation, EM parameter estimation with particle filtering
and MCMC path augmentation, Bayes-factor regime testing, and automatic
segment finding for network time series.
"""

from .backend import NUMBA_ENABLED
from .graph import ComponentView, DynGraph
from .process import LatentState, ProcessParams, Regime, TransitionEvent, simulate_interval
from .noise import ConfusionCounts, NoiseParams, confusion_counts, corrupt, obs_loglik
from .series import NetworkSeries, curve_table, load_series, save_series
from .paths import SamplePath, initial_path, mcmc_path_sampler, path_pmf_log
from .filtering import ParticleCloud, draw_ancestral_lines, particle_filter
from .inference import (EmConfig, EmDiagnostics, ModelParams, SufficientStats,
                        accumulate_stats, em_fit, m_step)
from .selection import TestConfig, TestResult, bayes_factor_test, forward_loglik
from .segmentation import Roi, Segment, find_segments, intersect_segments
from .exact import exact_embedded_kernel, exact_interval_kernel
from .experiment import ExperimentGrid, m_for_tprime, run_experiment, simulate_series
from .rng import Rng

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED", "Rng", "__version__",
    "DynGraph", "ComponentView",
    "Regime", "ProcessParams", "LatentState", "TransitionEvent", "simulate_interval",
    "NoiseParams", "ConfusionCounts", "corrupt", "confusion_counts", "obs_loglik",
    "NetworkSeries", "load_series", "save_series", "curve_table",
    "SamplePath", "path_pmf_log", "initial_path", "mcmc_path_sampler",
    "ParticleCloud", "particle_filter", "draw_ancestral_lines",
    "ModelParams", "SufficientStats", "EmConfig", "EmDiagnostics",
    "accumulate_stats", "m_step", "em_fit",
    "forward_loglik", "TestConfig", "TestResult", "bayes_factor_test",
    "Roi", "Segment", "find_segments", "intersect_segments",
    "exact_embedded_kernel", "exact_interval_kernel",
    "ExperimentGrid", "simulate_series", "m_for_tprime", "run_experiment",
]
