"""Test package for IoVUplink"""
