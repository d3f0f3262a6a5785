"""
Unit Tests

Orders, ordinals, denotation systems, proof search and probes, each checked
on instances small enough to enumerate.
"""
