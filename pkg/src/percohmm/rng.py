"""Counter-based random number generation (splitmix64).

All stochastic code in the package draws from one small generator so that
the numba kernels and the pure-Python fallback produce bit-identical
streams. The generator is splitmix64: the state advances by a fixed odd
constant and each output is a finalizer hash of the new state, so a block
of ``k`` sequential draws equals the vectorized evaluation over a counter
range (used by :meth:`Rng.u01_array`).

Seed derivation for parallel work is a pure function of (state, keys):
``derive_seed(s, k1, k2, ...)`` folds each key into the state with the
same finalizer, so any replicate/component/task stream can be
reconstructed in isolation. Kernel-facing functions (:func:`u01`,
:func:`randint`, :func:`exponential`) thread an explicit uint64 state and
are compiled when the numba backend is active.
"""

import math

import numpy as np

from .backend import NUMBA_ENABLED, jit

__all__ = ["Rng", "derive_seed", "spawn_seeds", "u01", "randint", "exponential"]

GOLDEN = 0x9E3779B97F4A7C15
_MULT1 = 0xBF58476D1CE4E5B9
_MULT2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


def _mix_int(x: int) -> int:
    """One splitmix64 step output for state ``x`` (python-int arithmetic)."""
    z = (x + GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _MULT1) & _MASK
    z = ((z ^ (z >> 27)) * _MULT2) & _MASK
    return z ^ (z >> 31)


if NUMBA_ENABLED:

    @jit
    def u01(state):
        state = np.uint64(state) + np.uint64(GOLDEN)
        z = state
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MULT1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MULT2)
        z = z ^ (z >> np.uint64(31))
        return (z >> np.uint64(11)) * _INV53, state

    @jit
    def randint(state, bound):
        state = np.uint64(state) + np.uint64(GOLDEN)
        z = state
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MULT1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MULT2)
        z = z ^ (z >> np.uint64(31))
        # modulo bias is ~bound/2**64, negligible at the bounds used here
        return np.int64(z % np.uint64(bound)), state

    @jit
    def exponential(state, rate):
        u, state = u01(state)
        return -math.log(1.0 - u) / rate, state

else:

    def u01(state):
        state = (int(state) + GOLDEN) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * _MULT1) & _MASK
        z = ((z ^ (z >> 27)) * _MULT2) & _MASK
        z = z ^ (z >> 31)
        return (z >> 11) * _INV53, state

    def randint(state, bound):
        state = (int(state) + GOLDEN) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * _MULT1) & _MASK
        z = ((z ^ (z >> 27)) * _MULT2) & _MASK
        z = z ^ (z >> 31)
        return z % int(bound), state

    def exponential(state, rate):
        u, state = u01(state)
        return -math.log(1.0 - u) / rate, state


def derive_seed(seed, *keys) -> int:
    """Derive an independent stream state from ``seed`` and integer keys.

    Deterministic: ``h = mix(seed)`` then ``h = mix(h ^ mix(k))`` for each
    key in order, where ``mix`` is the splitmix64 output function.
    """
    h = _mix_int(int(seed) & _MASK)
    for k in keys:
        h = _mix_int((h ^ _mix_int(int(k) & _MASK)) & _MASK)
    return h


def spawn_seeds(seed, count, *keys) -> np.ndarray:
    """Return ``count`` child seeds (uint64) for per-task streams.

    Child ``i`` equals the ``i``-th output of the stream rooted at
    ``derive_seed(seed, *keys)``; computed vectorized.
    """
    base = derive_seed(seed, *keys)
    counters = np.uint64(base) + np.uint64(GOLDEN) * np.arange(1, count + 1, dtype=np.uint64)
    z = counters
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MULT1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MULT2)
    return z ^ (z >> np.uint64(31))


class Rng:
    """Small splitmix64 stream with explicit state.

    Construction hashes the seed once so that nearby integer seeds give
    unrelated streams. ``derive`` returns an independent child stream
    without advancing the parent.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = np.uint64(_mix_int(int(seed) & _MASK))

    @classmethod
    def _from_state(cls, state: int) -> "Rng":
        rng = cls.__new__(cls)
        rng.state = np.uint64(int(state) & _MASK)
        return rng

    def u01(self) -> float:
        u, self.state = u01(self.state)
        self.state = np.uint64(self.state)
        return float(u)

    def randint(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError("bound must be positive")
        k, self.state = randint(self.state, bound)
        self.state = np.uint64(self.state)
        return int(k)

    def exponential(self, rate: float) -> float:
        x, self.state = exponential(self.state, rate)
        self.state = np.uint64(self.state)
        return float(x)

    def u01_array(self, count: int) -> np.ndarray:
        """``count`` uniforms, identical to that many sequential u01 calls."""
        counters = self.state + np.uint64(GOLDEN) * np.arange(1, count + 1, dtype=np.uint64)
        z = counters
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MULT1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MULT2)
        z = z ^ (z >> np.uint64(31))
        self.state = np.uint64((int(self.state) + GOLDEN * count) & _MASK)
        return (z >> np.uint64(11)) * _INV53

    def derive(self, *keys) -> "Rng":
        return Rng._from_state(derive_seed(int(self.state), *keys))

    def spawn(self, count: int, *keys) -> np.ndarray:
        return spawn_seeds(int(self.state), count, *keys)

    def __repr__(self) -> str:  # pragma: no cover
        return f"Rng(state={int(self.state):#018x})"
