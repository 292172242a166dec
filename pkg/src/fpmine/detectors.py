"""Detectors for the 22 functional-programming structures (plus opt-in ``const``).

Each detector is a pure function of ``(unit, scopes, policy)`` returning
:class:`FpOccurrence` records. ``site_span`` is the node that triggered the
rule; ``extent_span`` is the whole construct whose lines are attributed to
the structure.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

from tree_sitter import Node

from .scopes import (
    FUNCTION_KINDS,
    FUNCTION_LITERAL_KINDS,
    BindingKind,
    ScopeTable,
    Typedness,
    named_args,
    unwrap,
)
from .source import SourceUnit, Span


class Concept(str, enum.Enum):
    RECURSION = "Recursion"
    IMMUTABILITY = "Immutability"
    LAZY_EVALUATION = "LazyEvaluation"
    HIGHER_ORDER_FUNCTIONS = "HigherOrderFunctions"
    CALLBACKS_PROMISES = "CallbacksPromises"
    CONST_DECLARATION = "ConstDeclaration"


#: the five concepts of the study; ConstDeclaration is opt-in and reported apart
CORE_CONCEPTS = (
    Concept.CALLBACKS_PROMISES,
    Concept.HIGHER_ORDER_FUNCTIONS,
    Concept.IMMUTABILITY,
    Concept.LAZY_EVALUATION,
    Concept.RECURSION,
)

NATIVE_HOFS = (
    "every",
    "filter",
    "find",
    "findIndex",
    "flat",
    "flatMap",
    "forEach",
    "map",
    "reduce",
    "reduceRight",
    "some",
)
_NATIVE_HOF_BYTES = frozenset(n.encode() for n in NATIVE_HOFS)

STRUCTURE_CONCEPT: dict[str, Concept] = {
    **{f"hof-{name}": Concept.HIGHER_ORDER_FUNCTIONS for name in NATIVE_HOFS},
    "hof-non-native": Concept.HIGHER_ORDER_FUNCTIONS,
    "array-slice-noargs": Concept.IMMUTABILITY,
    "object-assign-empty": Concept.IMMUTABILITY,
    "object-freeze": Concept.IMMUTABILITY,
    "spread-assignment": Concept.IMMUTABILITY,
    "spread-element": Concept.IMMUTABILITY,
    "callback": Concept.CALLBACKS_PROMISES,
    "promise": Concept.CALLBACKS_PROMISES,
    "generator": Concept.LAZY_EVALUATION,
    "thunk": Concept.LAZY_EVALUATION,
    "recursion": Concept.RECURSION,
    "const-decl": Concept.CONST_DECLARATION,
}
STRUCTURES = tuple(STRUCTURE_CONCEPT)
#: the 22 structures counted by default
CORE_STRUCTURES = tuple(s for s in STRUCTURES if s != "const-decl")


@dataclass(frozen=True)
class DetectorPolicy:
    unknown_policy: str = "exclude"
    include_const: bool = False
    include_async_thunks: bool = True

    def __post_init__(self):
        if self.unknown_policy not in ("exclude", "include"):
            raise ValueError(f"unknown_policy must be 'exclude' or 'include', got {self.unknown_policy!r}")

    @property
    def include_unknown(self) -> bool:
        return self.unknown_policy == "include"

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class FpOccurrence:
    concept: Concept
    structure: str
    site_span: Span
    extent_span: Span
    file: str

    def sort_key(self) -> tuple:
        return (self.file, self.site_span.start_byte, self.structure)


def _occ(unit: SourceUnit, structure: str, site: Node, extent: Node) -> FpOccurrence:
    return FpOccurrence(STRUCTURE_CONCEPT[structure], structure, unit.span(site), unit.span(extent), unit.path)


def _member_call(call: Node) -> tuple[Node, Node] | None:
    """(receiver, property) for a property-access call ``o.f(...)`` / ``o?.f(...)``."""
    fn = call.child_by_field_name("function")
    if fn is None or fn.type != "member_expression":
        return None
    obj = fn.child_by_field_name("object")
    prop = fn.child_by_field_name("property")
    if obj is None or prop is None:
        return None
    return obj, prop


def _enclosing(node: Node, kinds: frozenset[str]) -> Node | None:
    n = node.parent
    while n is not None:
        if n.type in kinds:
            return n
        n = n.parent
    return None


# -- recursion ---------------------------------------------------------------

_RECURSIVE_KINDS = frozenset(
    {"function_declaration", "generator_function_declaration", "function_expression", "generator_function"}
)
_THIS_REBINDING = frozenset(
    {"function_declaration", "generator_function_declaration", "function_expression", "generator_function", "method_definition"}
)


def detect_recursion(unit: SourceUnit, scopes: ScopeTable) -> list[FpOccurrence]:
    """Direct recursion: a named function calling its own (non-shadowed) name.

    Methods count when they call ``this.<own name>(...)``.
    """
    found: dict[int, Node] = {}
    for call in unit.nodes("call_expression"):
        fn = call.child_by_field_name("function")
        if fn is None:
            continue
        if fn.type == "identifier":
            b = scopes.lookup(unit.node_text(fn), call)
            if (
                b is not None
                and b.kind is BindingKind.FUNCTION_DECLARATION
                and b.owner is not None
                and b.owner.type in _RECURSIVE_KINDS
                and b.owner.start_byte <= call.start_byte
                and call.end_byte <= b.owner.end_byte
            ):
                found[b.owner.id] = b.owner
        elif fn.type == "member_expression":
            obj = fn.child_by_field_name("object")
            prop = fn.child_by_field_name("property")
            if obj is None or prop is None or obj.type != "this":
                continue
            method = _enclosing(call, _THIS_REBINDING)
            if method is None or method.type != "method_definition":
                continue
            name = method.child_by_field_name("name")
            if name is not None and name.text == prop.text:
                found[method.id] = method
    return [_occ(unit, "recursion", fn, fn) for fn in found.values()]


# -- immutability ------------------------------------------------------------


def _is_empty_object(node: Node) -> bool:
    node = unwrap(node)
    return node.type == "object" and not named_args(node)


def _receiver_ok(t: Typedness, policy: DetectorPolicy) -> bool:
    return t is Typedness.YES or (t is Typedness.UNKNOWN and policy.include_unknown)


def detect_immutability(unit: SourceUnit, scopes: ScopeTable, policy: DetectorPolicy) -> list[FpOccurrence]:
    out: list[FpOccurrence] = []
    for call in unit.nodes("call_expression"):
        member = _member_call(call)
        if member is None:
            continue
        obj, prop = member
        name = prop.text
        if name not in (b"freeze", b"assign", b"slice"):
            continue
        args = named_args(call.child_by_field_name("arguments"))
        if name == b"slice":
            if not args and _receiver_ok(scopes.is_array_valued(obj), policy):
                out.append(_occ(unit, "array-slice-noargs", prop, call))
            continue
        if obj.type != "identifier" or obj.text != b"Object" or not scopes.resolves_to_global("Object", call):
            continue
        if name == b"freeze":
            out.append(_occ(unit, "object-freeze", prop, call))
        elif len(args) == 2 and _is_empty_object(args[0]) and args[1].type != "spread_element":
            out.append(_occ(unit, "object-assign-empty", prop, call))

    for spread in unit.nodes("spread_element"):
        parent = spread.parent
        if parent is None:
            continue
        if parent.type == "array":
            out.append(_occ(unit, "spread-element", spread, parent))
        elif parent.type == "object":
            out.append(_occ(unit, "spread-assignment", spread, parent))
    return out


# -- lazy evaluation ---------------------------------------------------------


def _has_token(node: Node, token: str) -> bool:
    return any(not c.is_named and c.type == token for c in node.children)


def _is_nullary_arrow(fn: Node) -> bool:
    if fn.child_by_field_name("parameter") is not None:
        return False
    params = fn.child_by_field_name("parameters")
    return params is not None and not named_args(params)


def detect_lazy(unit: SourceUnit, scopes: ScopeTable, policy: DetectorPolicy) -> list[FpOccurrence]:
    out: list[FpOccurrence] = []
    for kind in ("generator_function_declaration", "generator_function"):
        out.extend(_occ(unit, "generator", fn, fn) for fn in unit.nodes(kind))
    for method in unit.nodes("method_definition"):
        if _has_token(method, "*"):
            out.append(_occ(unit, "generator", method, method))
    for arrow in unit.nodes("arrow_function"):
        if not _is_nullary_arrow(arrow):
            continue
        if not policy.include_async_thunks and _has_token(arrow, "async"):
            continue
        out.append(_occ(unit, "thunk", arrow, arrow))
    return out


# -- higher-order functions --------------------------------------------------

_NON_NATIVE_KINDS = FUNCTION_KINDS


def _returns_by_function(unit: SourceUnit) -> dict[int, list[Node]]:
    by_fn: dict[int, list[Node]] = {}
    for ret in unit.nodes("return_statement"):
        fn = _enclosing(ret, FUNCTION_KINDS)
        if fn is not None:
            by_fn.setdefault(fn.id, []).append(ret)
    return by_fn


def detect_hof(unit: SourceUnit, scopes: ScopeTable, policy: DetectorPolicy) -> list[FpOccurrence]:
    out: list[FpOccurrence] = []
    for call in unit.nodes("call_expression"):
        member = _member_call(call)
        if member is None:
            continue
        obj, prop = member
        if prop.text not in _NATIVE_HOF_BYTES:
            continue
        args = named_args(call.child_by_field_name("arguments"))
        fn_args = [a for a in args if scopes.is_function_valued(a) is Typedness.YES]
        if not fn_args:
            continue
        receiver = scopes.is_array_valued(obj)
        if receiver is Typedness.NO:
            continue
        if receiver is Typedness.UNKNOWN and not policy.include_unknown:
            if not any(unwrap(a).type in FUNCTION_LITERAL_KINDS for a in fn_args):
                continue
        out.append(_occ(unit, "hof-" + prop.text.decode(), prop, call))

    returns = _returns_by_function(unit)
    for kind in _NON_NATIVE_KINDS:
        for fn in unit.nodes(kind):
            if _returns_function(fn, returns.get(fn.id, ()), scopes):
                out.append(_occ(unit, "hof-non-native", fn, fn))
    return out


def _returns_function(fn: Node, returns, scopes: ScopeTable) -> bool:
    for ret in returns:
        values = named_args(ret)
        if values and scopes.is_function_valued(values[0]) is Typedness.YES:
            return True
    if fn.type == "arrow_function":
        body = fn.child_by_field_name("body")
        if body is not None and body.type != "statement_block":
            return scopes.is_function_valued(body) is Typedness.YES
    return False


# -- callbacks and promises --------------------------------------------------


def detect_callbacks_promises(unit: SourceUnit, scopes: ScopeTable) -> list[FpOccurrence]:
    callbacks: dict[int, Node] = {}
    for call in unit.nodes("call_expression"):
        fn = call.child_by_field_name("function")
        if fn is None or fn.type != "identifier":
            continue
        b = scopes.lookup(unit.node_text(fn), call)
        if b is not None and b.kind is BindingKind.PARAMETER and b.owner is not None:
            callbacks[b.owner.id] = b.owner
    out = [_occ(unit, "callback", fn, fn) for fn in callbacks.values()]
    for new in unit.nodes("new_expression"):
        ctor = new.child_by_field_name("constructor")
        if ctor is not None and ctor.type == "identifier" and ctor.text == b"Promise":
            if scopes.resolves_to_global("Promise", new):
                out.append(_occ(unit, "promise", new, new))
    return out


def count_callback_call_sites(unit: SourceUnit, scopes: ScopeTable) -> int:
    """Call sites passing at least one function-valued argument to any callee.

    Informational only; not part of the callback occurrence metric.
    """
    total = 0
    for kind in ("call_expression", "new_expression"):
        for call in unit.nodes(kind):
            args = named_args(call.child_by_field_name("arguments"))
            if any(scopes.is_function_valued(a) is Typedness.YES for a in args):
                total += 1
    return total


# -- const and the driver ----------------------------------------------------


def detect_const(unit: SourceUnit, policy: DetectorPolicy | None = None) -> list[FpOccurrence]:
    if policy is not None and not policy.include_const:
        return []
    out = []
    for decl in unit.nodes("lexical_declaration"):
        kw = decl.child(0)
        if kw is not None and kw.type == "const":
            out.append(_occ(unit, "const-decl", decl, decl))
    return out


def detect_all(unit: SourceUnit, scopes: ScopeTable, policy: DetectorPolicy | None = None) -> list[FpOccurrence]:
    policy = policy or DetectorPolicy()
    occs = (
        detect_recursion(unit, scopes)
        + detect_immutability(unit, scopes, policy)
        + detect_lazy(unit, scopes, policy)
        + detect_hof(unit, scopes, policy)
        + detect_callbacks_promises(unit, scopes)
        + detect_const(unit, policy)
    )
    occs.sort(key=FpOccurrence.sort_key)
    return occs
