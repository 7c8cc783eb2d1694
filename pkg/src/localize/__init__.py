"""Numerical verification of localization formulas on CP^N and CQ^N."""
