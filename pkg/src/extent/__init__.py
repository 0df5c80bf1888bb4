"""Extension types in simplicial type theory, checked and modelled.

``extent`` has two halves.  The syntactic half parses ``.stt`` programs and
type-checks them with the formation, introduction, elimination and
computation rules for extension types.  The semantic half builds finite
presheaf models with a split universe and verifies, as equality of finite
tables, that extension types are strictly stable under substitution.
"""

from .extension import (ExtInput, SemShape, app, ext_former, ext_input, interpret_shape, lambda_former,
                        leibniz_ext, shape_from_topes)
from .harness import Config, check_stability, ext_oracle, gen_instance, run_suite
from .kernel import CheckReport, Kernel, check_program, check_source
from .presheaf import FinCat, FinPresheaf, PresheafMap, SizeLimit, get_base, load_category
from .syntax import ParseError, parse, show, subst_term
from .topes import Cube, NotAnInclusion, mk_shape_inclusion, tope_entails
from .universe import Code, Family, build_universe, classify, comprehension, pi_former

__all__ = [
    "Code", "CheckReport", "Config", "Cube", "ExtInput", "Family", "FinCat", "FinPresheaf", "Kernel",
    "NotAnInclusion", "ParseError", "PresheafMap", "SemShape", "SizeLimit", "app", "build_universe",
    "check_program", "check_source", "check_stability", "classify", "comprehension", "ext_former",
    "ext_input", "ext_oracle", "gen_instance", "get_base", "interpret_shape", "lambda_former",
    "leibniz_ext", "load_category", "mk_shape_inclusion", "parse", "pi_former", "run_suite",
    "shape_from_topes", "show", "subst_term", "tope_entails",
]
