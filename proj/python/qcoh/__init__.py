from ._qcoh import *  # noqa: F401,F403
from ._qcoh import ParseError, LayoutError, PreconditionError, DomainError, NumericalError, InfiniteDivergence
