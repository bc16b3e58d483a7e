"""Pseudo-spectral 3D MHD with regularity-criterion monitors and inequality checks."""
from .dynamics import (ElsasserState, Integrator, SolverConfig, State, from_elsasser, initial_data,
                       simulate, step, tendency, to_elsasser)
from .errors import (BadMagic, BlowupDetected, CheckpointError, ConfigError, DegenerateInput,
                     GridMismatch, InvalidExponent, MHDError, NonLocalized, NotSolenoidal, TimeOrder,
                     TruncatedFile, UnsupportedGrid, UnsupportedVersion, WindowTooShort)
from .grid import Grid, inner_product, integral, lp_norm, magnitude, vector_lp_norm
from .inequality import (AnisoParams, TestFunctionSpec, check_A1, check_A2, check_A6, empirical_constant,
                         gamma_of)
from .monitors import (CriterionSpec, HolderExponents, MonitorRecorder, MonitorSeries, check_admissible,
                       energy_residual, holder_chain_check, sample)
from .spectral import (dealias_23, derivative, dft_forward, dft_inverse, divergence, gradient,
                       laplacian, leray_project, pressure_solve)

__version__ = "0.1.0"
