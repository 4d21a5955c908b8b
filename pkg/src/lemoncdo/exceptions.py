class GuardExceeded(ValueError):
    """A desk-scale enumeration or memory guard would be exceeded."""


class InfeasibleInstance(ValueError):
    """Parameters admit no construction under the fixed procedure."""


class FormatError(ValueError):
    """A graph, certificate, model or tranche file failed to parse."""

    def __init__(self, message, source=None, line=None):
        where = ""
        if source is not None:
            where += f"{source}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)
        self.source = source
        self.line = line
