"""MiniC front end: lexing, parsing, type checking, USRs and serialization."""
from .ast import *  # noqa: F401,F403
from .lexer import FrontendError, MiniCSyntaxError, MiniCTypeError, line_token_spans, tokenize
from .parser import BUILTINS, NORETURN_BUILTINS, parse_translation_unit
from .serialize import DeserializeError, deserialize_ast, serialize_ast
from .usr import compute_usr, mangle_type
