"""
ptyx test suite

Test Organization:
- unit/: one module per core package, small orders and stages
- integration/: the command line and the acceptance properties
- fixtures (repo root): streams, trees, tables and the formula corpus
"""
