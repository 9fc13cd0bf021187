"""Multi-view multiple clustering (MVMC) and co-clustering (MVMCC)."""

from .models import MultiViewDataset, MvmccConfig, MvmcConfig
from .mvmc_solver import solve
from .mvmcc_solver import solve_cc

__all__ = ["MultiViewDataset", "MvmcConfig", "MvmccConfig", "solve", "solve_cc"]
