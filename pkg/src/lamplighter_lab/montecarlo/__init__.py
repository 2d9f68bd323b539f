"""Scalable estimators: trajectory sampling, cover and MGF estimates, TV bounds."""
from .estimators import (DEFAULT_BATCHES, EstimateCI, ThresholdEstimate, base_tv_at, batch_means, mgf_samples,
                         mgf_source_dp, mgf_source_lumped, mgf_source_mc, returns_to_origin,
                         stationary_zero_tail, tv_lower_from_batch, tv_lower_zero_count, tv_upper_cover,
                         tv_upper_from_batch, uncovered_mgf_mc, uniform_time_from_mgf, write_batch_csv,
                         zero_tail_samples, zero_threshold)
from .sampler import (TrajectoryBatch, TrajectoryObservables, largest_uncovered_ball, returns_samples,
                      sample_trajectories, torus_side)

__all__ = [
    "DEFAULT_BATCHES", "EstimateCI", "ThresholdEstimate", "base_tv_at", "batch_means", "mgf_samples",
    "mgf_source_dp", "mgf_source_lumped", "mgf_source_mc", "returns_to_origin", "stationary_zero_tail",
    "tv_lower_from_batch", "tv_lower_zero_count", "tv_upper_cover", "tv_upper_from_batch",
    "uncovered_mgf_mc", "uniform_time_from_mgf", "write_batch_csv", "zero_tail_samples", "zero_threshold",
    "TrajectoryBatch", "TrajectoryObservables", "largest_uncovered_ball", "returns_samples",
    "sample_trajectories", "torus_side",
]
