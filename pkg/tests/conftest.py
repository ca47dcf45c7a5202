import numpy as np
import pytest

from percohmm import DynGraph, ModelParams, NetworkSeries, NoiseParams, ProcessParams, Rng


@pytest.fixture
def rng():
    return Rng(12345)


def graph_from_mask(n: int, mask: int) -> DynGraph:
    pairs = [(i, j) for j in range(n) for i in range(j)]
    return DynGraph(n, [pairs[k] for k in range(len(pairs)) if mask >> k & 1])


def tiny_series(times, masks, n=3) -> NetworkSeries:
    return NetworkSeries(np.asarray(times, float), [graph_from_mask(n, m) for m in masks])


def params(p=0.7, q=0.3, gamma=2.0, alpha=0.03, beta=0.01) -> ModelParams:
    return ModelParams(ProcessParams(p, q, gamma), NoiseParams(alpha, beta))
