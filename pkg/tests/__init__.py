"""
Terminal Chat Client Test Suite
"""
