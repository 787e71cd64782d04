"""Upper bounds on discriminating optical modes under an energy budget."""
from .analytic import (chi_lp, chi_two_mode, helstrom, idp, phase_orthogonal_pair,
                       two_mode_channel_bound, two_mode_source_bound)
from .fock import EnergyConstraint, PhotonDistribution
from .gram import build_channel, build_fock, channel_bound, fock_bound
from .losses import (LossChannel, coherent_bound, estimate_floor, fock_bound_lossy,
                     heuristic_channel_lossy, loss_invert, loss_transform, source_lossy_bound)
from .modes import (FamilyError, ModeFamily, load_family, make_comp_ft_family, make_dps_family,
                    make_phase_family, make_two_mode, save_family)
from .results import CHANNEL, PROB, SOURCE, UD, BoundResult
from .source import (FockBoundTable, condition_check, dual_geometric_solve, fock_table, lp_bound,
                     source_bound)

__version__ = "0.1.0"

__all__ = [
    "ModeFamily", "FamilyError", "make_two_mode", "make_phase_family", "make_comp_ft_family",
    "make_dps_family", "load_family", "save_family",
    "PhotonDistribution", "EnergyConstraint",
    "build_channel", "build_fock", "channel_bound", "fock_bound",
    "FockBoundTable", "fock_table", "condition_check", "dual_geometric_solve", "lp_bound", "source_bound",
    "helstrom", "idp", "chi_two_mode", "chi_lp", "two_mode_channel_bound", "two_mode_source_bound",
    "phase_orthogonal_pair",
    "LossChannel", "loss_transform", "loss_invert", "source_lossy_bound", "coherent_bound",
    "fock_bound_lossy", "estimate_floor", "heuristic_channel_lossy",
    "BoundResult", "PROB", "UD", "CHANNEL", "SOURCE",
]
