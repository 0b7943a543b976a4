"""Decision procedure and witness models for relativized diagonal-free set
algebras."""

from .terms import (Term, Var, Not, Meet, Join, Cyl, ZERO, ONE, ParseError, EqualityError,
                    parse_term, parse_formula, render, formula_to_term, effective_dim)
from .forms import (NormalForm, count_forms, enumerate_forms, is_consistent, projection,
                    form_entails, form_to_term, intern_form, degree0_form)
from .models import (Unit, WitnessModel, evaluate, point_form, build_witness, zigzag,
                     extend_plus, bridge, product_unit, witness_to_json, witness_to_dot)
from .decision import (Verdict, CertificateError, DecisionError, decide_sat, decide_eq,
                       decide_valid, split, split_forms, fresh_split, zero_dim_witness,
                       dimension_set)
from .oracle import (enumerate_units, oracle_sat, check_axioms, GamModel, gam_eval)

__version__ = "0.1.0"
