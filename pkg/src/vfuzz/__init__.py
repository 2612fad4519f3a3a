"""Quantitative behavioural distances for an effectful linear lambda calculus."""
from .distance import DistQuery, DistResult, distance, probes
from .effects import get_monad
from .evaluation import Evaluator, eval_n, evaluate
from .parser import parse, parse_file, parse_term, parse_type, parse_value
from .printer import show
from .quantale import get_quantale
from .relators import RelatorCfg
from .typecheck import check, infer

__all__ = [
    "DistQuery", "DistResult", "Evaluator", "RelatorCfg", "check", "distance", "eval_n",
    "evaluate", "get_monad", "get_quantale", "infer", "parse", "parse_file", "parse_term",
    "parse_type", "parse_value", "probes", "show",
]
__version__ = "0.1.0"
