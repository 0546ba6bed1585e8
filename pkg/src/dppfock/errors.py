"""Exception hierarchy shared by all dppfock modules."""


class DPPFockError(Exception):
    """Base class for every error raised by this package."""


class NotHermitian(DPPFockError, ValueError):
    pass


class SpectrumOutOfRange(DPPFockError, ValueError):
    """Kernel eigenvalues fall outside [0, 1]; the matrix cannot define a DPP."""


class BadInterval(DPPFockError, ValueError):
    pass


class GroundSetTooLarge(DPPFockError, ValueError):
    """Exhaustive enumeration over 2**n subsets was requested for too large n."""


class OverlappingBlocks(DPPFockError, ValueError):
    pass


class UnboundedSupport(DPPFockError, ValueError):
    pass


class SplitMismatch(DPPFockError, ValueError):
    pass


class SingularOperator(DPPFockError, ValueError):
    pass


class FormulaMismatch(DPPFockError, ArithmeticError):
    """Two formulas for the same quantity disagree; indicates an internal bug."""


class NotAProjector(DPPFockError, ValueError):
    pass


class NumericalDegeneracy(DPPFockError, ArithmeticError):
    pass
