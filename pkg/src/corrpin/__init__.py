"""Annealed critical curve and free energy of pinning models with finite-range correlated disorder."""

from .critical import CurvePoint, closed_form_h_c_ann, curve_point, h_c_zero, sweep, weak_disorder_slope
from .disorder import CorrelationProfile, MovingAverage, correlations, sample_omega
from .errors import InvalidParameter, NumericalFailure, NumericalInconsistency
from .free_energy import f_ann, f_ann_detail, f_tilde
from .kernels import STAR, TableLaw, ZetaLaw, build_zeta_law, hat
from .transfer import build_qstar, invariant_mu, perron, tilted_kernel

__version__ = "0.1.0"

__all__ = [
    "STAR",
    "CorrelationProfile",
    "CurvePoint",
    "InvalidParameter",
    "MovingAverage",
    "NumericalFailure",
    "NumericalInconsistency",
    "TableLaw",
    "ZetaLaw",
    "build_qstar",
    "build_zeta_law",
    "closed_form_h_c_ann",
    "correlations",
    "curve_point",
    "f_ann",
    "f_ann_detail",
    "f_tilde",
    "h_c_zero",
    "hat",
    "invariant_mu",
    "perron",
    "sample_omega",
    "sweep",
    "tilted_kernel",
    "weak_disorder_slope",
]
