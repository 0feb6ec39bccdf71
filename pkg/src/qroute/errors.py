class GuardError(ValueError):
    """Refusal to run because a size/ceiling guard or a config invariant was hit.

    Distinguished from plain ``ValueError`` so the CLI can map it to exit code 2.
    """
