"""Estimating functionals of an infinite-armed bandit's arm-mean distribution."""
