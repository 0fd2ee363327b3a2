"""Exception types shared by the engines and the command line."""


class InvalidInputError(ValueError):
    """An argument violates an operation's precondition."""


class OutsideClassError(ValueError):
    """The requested rewrite leaves the algebra class handled here."""


class RuleNotApplicableError(ValueError):
    """A rewrite rule's hypothesis does not hold for the given expression."""


class NoWitnessError(ValueError):
    """No fundamental-group certificate exists for the requested scale."""


class ParseError(ValueError):
    """Malformed JSON input; ``path`` names the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
