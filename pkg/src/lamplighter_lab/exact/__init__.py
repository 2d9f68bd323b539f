"""Exact computations on instances small enough for dense or subset methods."""
from .cover import (CouponCurve, CouponResult, CoverDP, coupon_curve, coupon_expected_gap, coupon_log_mgf, coupon_mgf,
                    coupon_threshold, cover_dp, lumped_cover_dp, matthews_gap)
from .hitting import HittingResult, hitting_times, recurrence_residual, return_tail, return_tails
from .profile import DEFAULT_EPS, MixingProfile, mixing_profile, mixing_time, mixing_time_exact
from .spectral import DirichletResult, SpectrumResult, dirichlet_form, spectrum

__all__ = [
    "CouponCurve", "CouponResult", "CoverDP", "coupon_curve", "coupon_expected_gap", "coupon_log_mgf", "coupon_mgf",
    "coupon_threshold", "cover_dp", "lumped_cover_dp", "matthews_gap",
    "HittingResult", "hitting_times", "recurrence_residual", "return_tail", "return_tails",
    "DEFAULT_EPS", "MixingProfile", "mixing_profile", "mixing_time", "mixing_time_exact",
    "DirichletResult", "SpectrumResult", "dirichlet_form", "spectrum",
]
