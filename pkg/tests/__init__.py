"""
Tests for the categorical morphology toolkit
"""
