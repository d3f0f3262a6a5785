"""
Integration Tests

The ptyx command line end to end, and property checks against brute-force
oracles.
"""
