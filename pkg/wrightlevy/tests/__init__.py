"""
Tests for wrightlevy
"""
