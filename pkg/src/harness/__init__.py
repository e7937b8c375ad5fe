"""Experiment runs, sweeps, aggregation and figures"""
