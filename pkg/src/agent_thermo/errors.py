"""Exception types raised across the package."""


class AgentThermoError(Exception):
    """Base class for all package errors."""


class ValidationError(AgentThermoError, ValueError):
    """A distribution or machine violates its invariants."""


class ShapeError(AgentThermoError, ValueError):
    """Arrays do not share a consistent index set."""


class KernelError(AgentThermoError, ValueError):
    """A Gram matrix is not a valid overlap kernel (non-PSD, bad diagonal, ...)."""


class StructureError(AgentThermoError, ValueError):
    """The driven state chain is reducible or periodic."""


class CapacityError(AgentThermoError, RuntimeError):
    """An exact enumeration would exceed the configured budget."""


class ConvergenceError(AgentThermoError, RuntimeError):
    """A fixed-point iteration did not converge."""


class PreconditionError(AgentThermoError, ValueError):
    """An operation was called on an input it does not accept (e.g. a non-minimal machine)."""


class DomainError(AgentThermoError, ValueError):
    """A closed-form expression was evaluated outside its domain."""
