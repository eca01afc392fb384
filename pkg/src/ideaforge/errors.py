"""Exception hierarchy shared across the package."""


class IdeaforgeError(Exception):
    """Base class for all package errors."""


class RegistryError(IdeaforgeError):
    """Invalid dataset catalog: bad manifest, broken invariants, unreadable payloads."""


class IdeaParseError(IdeaforgeError):
    """Model output could not be parsed into the expected idea structure."""


class TemplateError(IdeaforgeError):
    """Unknown template or unbound placeholder."""


class ProviderError(IdeaforgeError):
    """Chat-completion provider failed (auth, exhausted retries, bad response)."""


class ReplayMissError(ProviderError):
    """Replay transcript has no entry for the requested digest."""

    def __init__(self, digest, stage):
        self.digest = digest
        self.stage = stage
        super().__init__(f"no transcript entry for digest {digest[:12]}... (stage={stage})")


class SandboxError(IdeaforgeError):
    """Sandbox could not be set up or the interpreter is unusable."""


class VerdictParseError(IdeaforgeError):
    """No valid hypothesis-verdict object found in a model turn."""


class VoteParseError(IdeaforgeError):
    """Judge response did not contain a valid criterion vote."""


class SummaryParseError(IdeaforgeError):
    """Summarization response was not a usable step list."""


class StatsError(IdeaforgeError):
    """Statistic undefined for the given input."""


class StallError(IdeaforgeError):
    """Generation made no progress for too many consecutive batches."""


class StoreError(IdeaforgeError):
    """Run-store persistence problem or protocol violation."""
