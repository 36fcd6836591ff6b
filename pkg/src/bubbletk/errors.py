"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: ConventionError (and any
other input problem) exits 2, VerificationError exits 1.
"""


class ConventionError(ValueError):
    """Input data violates a structural convention (zero sums, schema, shapes)."""


class VerificationError(RuntimeError):
    """A mathematical identity or post-condition that must hold did not."""
