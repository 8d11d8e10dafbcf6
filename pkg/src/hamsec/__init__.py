"""Exact jet computations for singular sections of Hamiltonian systems.

The model is ``(R^(2n+2), dx^dy + sum dp_i^dq_i, f = y)``.  A section
``{h = 0}`` is classified by the tangency of the Hamiltonian fields of
``f`` and ``h``, brought to a preliminary normal form by a Weierstrass
division and a Moser transport, and its functional moduli are read off
after a symplectic normalization of the associated map of the reduced
space.  All arithmetic is exact over the rationals.
"""

from .classify import SingularityClass, classify_section, typical
from .errors import (ChartMismatch, ClassMismatch, ConsistencyError, FormError, GenericityError,
                     HamsecError, InvalidSection, OrderExhausted, PrecisionError,
                     SingularLinearPart, Undetermined)
from .forms import FormJet, d, pullback, standard_symplectic, wedge
from .jets import Chart, DiffeoJet, Jet, compose, divide_by_ideal_y, invert
from .moduli import SectionModuli, assemble_moduli, equivalence_between, validate_template
from .normalize import (A1NormalForm, PreliminaryNormalForm, kill_top_coefficient,
                        moser_darboux_orbit, reduce_A1, reduce_to_preliminary,
                        weierstrass_prepare)
from .parsing import ParseError, parse_map, parse_polynomial
from .poisson import bracket, first_nonvanishing, flow_tangency_oracle, hamiltonian_field
from .whitney import (MapJet, WhitneyClass, WhitneyModuli, ideal_membership, reduce_R,
                      reduce_R_omega, whitney_classify)

__version__ = "0.1.0"

__all__ = [
    "Chart", "Jet", "DiffeoJet", "compose", "invert", "divide_by_ideal_y",
    "FormJet", "d", "wedge", "pullback", "standard_symplectic",
    "bracket", "hamiltonian_field", "first_nonvanishing", "flow_tangency_oracle",
    "SingularityClass", "classify_section", "typical",
    "PreliminaryNormalForm", "A1NormalForm", "weierstrass_prepare", "kill_top_coefficient",
    "moser_darboux_orbit", "reduce_to_preliminary", "reduce_A1",
    "MapJet", "WhitneyClass", "WhitneyModuli", "whitney_classify", "reduce_R", "reduce_R_omega",
    "ideal_membership",
    "SectionModuli", "assemble_moduli", "validate_template", "equivalence_between",
    "parse_polynomial", "parse_map", "ParseError",
    "HamsecError", "ChartMismatch", "PrecisionError", "SingularLinearPart", "InvalidSection",
    "ClassMismatch", "GenericityError", "ConsistencyError", "FormError", "OrderExhausted",
    "Undetermined",
]
