"""aspa: answer sets for logic programs with aggregates, via unfolding."""

__version__ = "0.1.0"

from .ast import (  # noqa: F401
    FALSUM,
    AggregateAtom,
    Atom,
    Const,
    IntensionalSpec,
    Naf,
    Program,
    Rule,
    Var,
    herbrand_base,
    is_model,
    satisfies,
)
from .config import DEFAULT_LIMITS, Limits, RunConfig  # noqa: F401
from .errors import (  # noqa: F401
    AspaError,
    EvalTypeError,
    InconsistentProgramError,
    InternalError,
    NotMonotoneError,
    NotStratifiedError,
    ParseError,
    ResourceCapError,
)
from .parser import SourceProgram, format_program, parse_program  # noqa: F401
