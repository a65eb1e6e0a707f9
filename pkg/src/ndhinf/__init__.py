"""Multidimensional H-infinity control toolkit.

Givone-Roesser realizations over the polydisk, structured LMI tests for
stability and performance, controller synthesis, Youla-Kucera
parametrization and Agler interpolation.
"""

__version__ = "0.1.0"

from .errors import (ConstructionFailed, D22NotZero, DimensionError, IllPosed, Infeasible,
                     NdHinfError, NoConvergence, NonHermitian, ReconstructionFailed, SchemaError,
                     Singular, SingularD, SingularPencil, SizeCap, VerificationFailed)
from .numerics import BACKEND, herm_eig, min_eig, orth_kernel, spectral_radius
from .lmi import (LmiProblem, LmiSolution, ScalingStructure, finsler_complete, finsler_scalar,
                  scaled_norm_bisect, solve_feasibility, structured_lyapunov)
from .grsys import (OperatorTuple, PointPolydisk, Realization, StructuredSpace, assemble_lft,
                    close_loop, eval_nc, eval_transfer, hautus_stable_grid, interconnect, lft,
                    scaled_stable, torus_sup_norm)
from .synth import (GainPair, HinfCertificate, hinf_feasibility, hinf_reconstruct,
                    observer_controller, scaled_performance, stabilize, stabilizing_gains)
from .youla import (CoprimeFactors, TransferMap, coprime_from_gains, model_matching_data,
                    parametrize_all, theta, uv_maps, youla_controller)
from .interp import (AglerCertificate, InterpolationData, agler_feasible, pick_matrix,
                     sample_instance, schur_agler_member)
