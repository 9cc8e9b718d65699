"""Many-sorted first-order logic toolkit.

Finite-model semantics, arrangements over shared variables, Ramsey-style
witness searches with constructive bounds, normal-form and Skolem
transformations, and bounded theory-combination procedures, all exposed
through one deterministic CLI (``msort-kit``).
"""

__version__ = "0.1.0"
