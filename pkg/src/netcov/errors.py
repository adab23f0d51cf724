"""Exception hierarchy shared across the pipeline."""


class NetcovError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(NetcovError):
    def __init__(self, message, line=None, filename=None):
        self.line = line
        self.filename = filename
        self.message = message
        where = ""
        if filename is not None:
            where = f"{filename}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class ConfigSyntaxError(ConfigError):
    pass


class UnresolvedReference(ConfigError):
    def __init__(self, name, line=None, filename=None, kind="name"):
        self.name = name
        super().__init__(f"unresolved {kind} reference {name!r}", line, filename)


class DuplicateDefinition(ConfigError):
    def __init__(self, name, line=None, filename=None):
        self.name = name
        super().__init__(f"duplicate definition of {name!r}", line, filename)


class UnknownNeighbor(NetcovError):
    pass


class InvalidEnvironment(NetcovError):
    """Invalid environment file (bad announcement target, AS mismatch)."""


class NonConvergence(NetcovError):
    def __init__(self, round_count):
        self.round_count = round_count
        super().__init__(f"control plane did not converge after {round_count} rounds")


class NoRoute(NetcovError):
    def __init__(self, host, dst_ip):
        self.host = host
        self.dst_ip = dst_ip
        super().__init__(f"no route from {host} to {dst_ip}")


class Loop(NetcovError):
    def __init__(self, hops):
        self.hops = tuple(hops)
        super().__init__("forwarding loop: " + " -> ".join(self.hops))


class NotFound(NetcovError):
    """A stable-state lookup found nothing; the snapshot is inconsistent with the query."""


class Ambiguous(NetcovError):
    pass


class SnapshotError(NetcovError):
    pass


class InferenceError(NetcovError):
    def __init__(self, fact, rule, cause=None):
        self.fact = fact
        self.rule = rule
        self.cause = cause
        msg = f"rule {rule} failed on {fact}"
        if cause is not None:
            msg += f": {cause}"
        super().__init__(msg)


class SimulationMismatch(InferenceError):
    pass


class ShapeViolation(NetcovError):
    pass


class CycleDetected(NetcovError):
    pass


class BddCapacityError(NetcovError):
    pass


class SuiteError(NetcovError):
    pass
