"""Uplink world: radio formulas, detection model, environment and scenario names"""
