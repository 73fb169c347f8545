"""Exception hierarchy shared by all modules."""


class MuhkaError(Exception):
    """Base class for domain errors raised by this package."""


class ExprSyntaxError(MuhkaError, ValueError):
    def __init__(self, message, text="", position=0):
        self.text = text
        self.position = position
        where = f" at position {position}" if text else ""
        super().__init__(f"{message}{where}")


class UnknownLetterError(ExprSyntaxError):
    pass


class UnboundVariableError(MuhkaError, ValueError):
    pass


class NotGuardedError(MuhkaError, ValueError):
    """An operation requiring (left-)guarded input received something else."""


class FragmentError(MuhkaError, ValueError):
    """Input uses a construct outside the supported fragment (e.g. nu in a mu-only routine)."""


class RuleError(MuhkaError, ValueError):
    """A rule instance does not match its conclusion."""


class ProofFormatError(MuhkaError, ValueError):
    pass


class MembershipError(MuhkaError, ValueError):
    """A membership precondition failed (e.g. word not in the language)."""


class BoundExceeded(MuhkaError):
    """A search bound was hit before a verdict could be reached."""


class WellfoundednessViolation(MuhkaError):
    """A materialised omega-premiss failed to close within its budget."""
