"""Configuration management for the levy_mp package.

This module provides a thread-safe configuration singleton holding the numerical
knobs shared by every part of the toolkit: quadrature tolerances, Fourier cutoffs,
simulation guards, Monte Carlo verdict rules and the default thread count.  The
configuration can be modified at runtime and supports safe concurrent access from
multiple threads.

The configuration uses a singleton pattern so that all modules share the same
state.  The 'from' import pattern is supported through a mutate-in-place API, so
imported references never go stale.

Key Features:
    * Thread-safe configuration updates and reads
    * Singleton pattern for global configuration state
    * Thread count falls back to the ``LEVY_MP_THREADS`` environment variable
    * Consistent snapshots for atomic reads (recorded in every run report)

Attributes:
    config (_Config): The global configuration singleton instance.

Example::

    >>> from levy_mp.config import config
    >>> config.set(small_jump_cutoff=1e-4, threads=8)
    >>> config.snapshot()['threads']
    8

See Also:
    levy_mp.levy_core: Symbol quadrature driven by the quadrature settings
    levy_mp.simulate: Path simulation driven by the simulation settings
"""
from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from threading import RLock
from typing import Optional

from levy_mp.exceptions import ConfigError

# Used to support thread-safe reads and coherent snapshots of configuration
_lock = RLock()


def _default_threads() -> int:
    """Read the default worker count from LEVY_MP_THREADS, falling back to 4."""
    raw = os.environ.get("LEVY_MP_THREADS")
    if raw is None:
        return 4
    try:
        threads = int(raw)
    except ValueError:
        return 4
    return max(threads, 1)


@dataclass
class _Config:
    """A basic config class that handles thread-safety and issues with name binding ('from' imports)"""
    threads: int = field(default_factory=_default_threads)
    """Default number of worker threads for lattice evaluation and simulation blocks"""

    quad_tolerance: float = 1e-8
    """Absolute tolerance requested from adaptive quadrature"""

    quad_error_limit: float = 1e-6
    """Largest accepted quadrature error estimate (relative to max(1, |value|)) before failing"""

    gl_nodes: int = 16
    """Gauss-Legendre nodes per panel for the fixed panel rules"""

    inner_panels: int = 60
    """Number of dyadic panels [2^-k-1, 2^-k] used toward the jump singularity"""

    outer_panels: int = 60
    """Number of dyadic panels [2^k, 2^k+1] used for the jump tail mass"""

    fourier_panel_width: float = 1.0
    """Width of the frequency panels used by Fourier quadrature"""

    fourier_block_panels: int = 32
    """Number of frequency panels evaluated per block before the tail test"""

    fourier_max_frequency: float = 4096.0
    """Largest frequency visited before Fourier quadrature gives up"""

    fourier_tail_tolerance: float = 1e-8
    """A frequency block whose mass falls below this, relative to the running mass, is treated as tail"""

    sup_bound_c1: Optional[float] = None
    """Constant C1 of the symbol forms of the operator sup bound (None means the standard bump constant)"""

    sup_bound_c2: float = 1.0 / (1.0 - math.sin(1.0))
    """Constant C2 of the symbol forms of the operator sup bound, 1/(1 - sin 1)"""

    shell_points: int = 64
    """Number of radii sampled outside the support for the tail term of the operator sup bound"""

    shell_factor: float = 8.0
    """Outer radius of the sampled shell, as a multiple of the support radius"""

    condition_tolerance: float = 1e-6
    """Tolerance used when judging monotone trends in condition reports"""

    c_r_frequency_radius: float = 10.0
    """Frequency radius used when estimating the empirical local bound constant c_R"""

    small_jump_cutoff: float = 1e-3
    """Jumps smaller than this are replaced by a Gaussian with matching variance"""

    blowup_threshold: float = 1e12
    """States beyond this magnitude are treated as a non-conservative blow-up"""

    jump_mark_threshold: float = 1.0
    """Increments larger than this are recorded as jump marks on a path"""

    block_size: int = 1024
    """Paths per random stream block; ensembles are deterministic for a fixed block size"""

    bridge_correction: bool = False
    """Apply the Brownian-bridge exit correction for continuous drivers"""

    mc_sigmas: float = 3.0
    """Number of standard errors allowed by Monte Carlo verdicts"""

    martingale_budget_factor: float = 1.0
    """Multiplier of ||f||_(2) * dt in the discretization budget of martingale residuals"""

    operator_table_spacing: float = 5e-3
    """Lattice spacing for tabulating Af near the support of f"""

    containment_epsilon: float = 0.05
    """Exceedance level the compact containment profile must reach at the largest radius"""

    resolvent_tail_tolerance: float = 1e-6
    """Largest accepted truncation bound exp(-lambda T) ||f|| / lambda"""

    generator_gap_window: float = 10.0
    """Half-width of the lattice used when a reference measure has unbounded support"""

    generator_gap_points: int = 801
    """Number of lattice points used by generator gap quadrature"""

    probe_radius: float = 10.0
    """Half-width of the probe lattice used to validate catalog parameters"""

    probe_points: int = 401
    """Number of probe lattice points used to validate catalog parameters"""

    harnack_window: float = 5.0
    """Half-width of the spatial window sampled by the Harnack kernel checks"""

    def set(self, **kwargs) -> None:
        """mutate-in-place API so imports never go stale"""
        names = {f.name for f in dataclasses.fields(self)}
        with _lock:
            for k, v in kwargs.items():
                if k not in names:
                    raise ConfigError(f"Unknown configuration key '{k}'")
                setattr(self, k, v)

    def snapshot(self) -> dict:
        """Get a consistent (thread-safe) snapshot of the config."""
        with _lock:
            return dataclasses.asdict(self)


config = _Config()  # singleton
