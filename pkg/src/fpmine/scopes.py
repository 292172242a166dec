"""Lexical scopes and a three-valued "is this a function / an array?" inference.

This is a deliberately small stand-in for a type checker. It knows about
declarations, hoisting and shadowing, and it answers ``UNKNOWN`` whenever a
value could have come from somewhere it cannot see (parameters, imports,
reassignment, ``with``/``eval``, arbitrary calls).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from tree_sitter import Node

from .source import SourceUnit, Span


class Typedness(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


class BindingKind(str, enum.Enum):
    FUNCTION_DECLARATION = "function-declaration"
    VARIABLE = "variable"
    PARAMETER = "parameter"
    CLASS = "class"
    IMPORT = "import"
    UNRESOLVED = "unresolved"


class InitShape(str, enum.Enum):
    FUNCTION_LITERAL = "function-literal"
    ARRAY_LITERAL = "array-literal"
    PROMISE_NEW = "promise-new"
    OBJECT_LITERAL = "object-literal"
    OTHER = "other"
    NONE = "none"


FUNCTION_KINDS = frozenset(
    {
        "function_declaration",
        "generator_function_declaration",
        "function_expression",
        "generator_function",
        "arrow_function",
        "method_definition",
    }
)
FUNCTION_LITERAL_KINDS = frozenset({"function_expression", "generator_function", "arrow_function"})
_NAMED_FUNCTION_KINDS = frozenset(
    {"function_declaration", "generator_function_declaration", "function_expression", "generator_function"}
)
_NON_FUNCTION_LITERALS = frozenset(
    {"number", "string", "template_string", "true", "false", "null", "undefined", "array", "object", "regex", "class"}
)
_NON_ARRAY_LITERALS = frozenset(
    {"number", "string", "template_string", "true", "false", "null", "undefined", "object", "regex", "class"}
    | FUNCTION_LITERAL_KINDS
)
_WRAPPERS = frozenset(
    {"parenthesized_expression", "as_expression", "non_null_expression", "satisfies_expression", "type_assertion"}
)
# Array.prototype methods whose result is again an array when the receiver is.
ARRAY_PRODUCING = frozenset({"filter", "map", "flat", "flatMap", "slice", "concat"})
_BLOCK_SCOPE_KINDS = frozenset(
    {"statement_block", "for_statement", "for_in_statement", "catch_clause", "switch_body", "class_static_block"}
)


@dataclass(eq=False)
class Binding:
    name: str
    kind: BindingKind
    initializer_shape: InitShape
    decl_span: Span
    scope: "Scope"
    #: function node for function declarations and parameters
    owner: Node | None = None
    init: Node | None = None
    reassigned: bool = False
    declarations: int = 1

    @property
    def stable(self) -> bool:
        return not self.reassigned and self.declarations == 1


@dataclass(eq=False)
class Scope:
    kind: str  # module, function, block
    node: Node
    parent: "Scope | None"
    bindings: dict[str, Binding] = field(default_factory=dict)
    dynamic: bool = False

    def function_scope(self) -> "Scope":
        s = self
        while s.kind == "block" and s.parent is not None:
            s = s.parent
        return s


def unwrap(node: Node) -> Node:
    """Strip parentheses and TypeScript-only wrappers (``as``, ``!``, ``satisfies``)."""
    while node.type in _WRAPPERS:
        inner = [c for c in node.named_children if c.type != "comment"]
        if not inner:
            break
        # type_assertion is `<T>expr`: the expression comes last
        node = inner[-1] if node.type == "type_assertion" else inner[0]
    return node


def named_args(node: Node | None) -> list[Node]:
    if node is None:
        return []
    return [c for c in node.named_children if c.type != "comment"]


def pattern_names(node: Node | None) -> list[Node]:
    """Identifier nodes bound by a declaration or parameter pattern."""
    if node is None:
        return []
    t = node.type
    if t in ("identifier", "shorthand_property_identifier_pattern"):
        return [node]
    if t in ("required_parameter", "optional_parameter"):
        return pattern_names(node.child_by_field_name("pattern"))
    if t in ("assignment_pattern", "object_assignment_pattern"):
        return pattern_names(node.child_by_field_name("left"))
    if t == "pair_pattern":
        return pattern_names(node.child_by_field_name("value"))
    if t in ("object_pattern", "array_pattern", "rest_pattern"):
        out: list[Node] = []
        for child in node.named_children:
            out.extend(pattern_names(child))
        return out
    return []


def _init_shape(value: Node | None) -> InitShape:
    if value is None:
        return InitShape.NONE
    value = unwrap(value)
    t = value.type
    if t in FUNCTION_LITERAL_KINDS:
        return InitShape.FUNCTION_LITERAL
    if t == "array":
        return InitShape.ARRAY_LITERAL
    if t == "object":
        return InitShape.OBJECT_LITERAL
    if t == "new_expression":
        ctor = value.child_by_field_name("constructor")
        if ctor is not None and ctor.type == "identifier":
            name = ctor.text
            if name == b"Promise":
                return InitShape.PROMISE_NEW
            if name == b"Array":
                return InitShape.ARRAY_LITERAL
    return InitShape.OTHER


def function_parameters(fn: Node) -> list[Node]:
    single = fn.child_by_field_name("parameter")
    if single is not None:
        return pattern_names(single)
    params = fn.child_by_field_name("parameters")
    if params is None:
        return []
    out: list[Node] = []
    for p in params.named_children:
        out.extend(pattern_names(p))
    return out


class ScopeTable:
    """Scopes of one :class:`SourceUnit`; immutable after :func:`build_scopes`."""

    def __init__(self, unit: SourceUnit):
        self.unit = unit
        self.scopes: dict[int, Scope] = {}
        root = unit.root
        self.module = Scope("module", root, None)
        self.scopes[root.id] = self.module

    # -- structure ---------------------------------------------------------

    def _is_scope_node(self, node: Node) -> bool:
        t = node.type
        if t in FUNCTION_KINDS:
            return True
        if t == "statement_block":
            parent = node.parent
            return parent is None or parent.type not in FUNCTION_KINDS
        return t in _BLOCK_SCOPE_KINDS

    def scope_of(self, node: Node) -> Scope:
        """Innermost scope whose node is a strict ancestor of ``node``."""
        n = node.parent
        while n is not None:
            s = self.scopes.get(n.id)
            if s is not None:
                return s
            n = n.parent
        return self.module

    def own_scope(self, fn: Node) -> Scope:
        return self.scopes[fn.id]

    # -- resolution --------------------------------------------------------

    def lookup(self, name: str, node: Node) -> Binding | None:
        s: Scope | None = self.scope_of(node)
        while s is not None:
            b = s.bindings.get(name)
            if b is not None:
                return b
            s = s.parent
        return None

    def resolves_to_global(self, name: str, node: Node) -> bool:
        return self.lookup(name, node) is None

    def _dynamic_between(self, node: Node, binding: Binding) -> bool:
        s: Scope | None = self.scope_of(node)
        while s is not None:
            if s.dynamic:
                return True
            if s is binding.scope:
                return False
            s = s.parent
        return False

    def _resolve_value(self, expr: Node) -> tuple[Binding | None, bool]:
        """(binding, is_dynamic) for an identifier reference."""
        b = self.lookup(expr.text.decode("utf-8", errors="replace"), expr)
        if b is None:
            return None, False
        return b, self._dynamic_between(expr, b)

    def is_function_valued(self, expr: Node, _seen: frozenset[int] = frozenset()) -> Typedness:
        expr = unwrap(expr)
        t = expr.type
        if t in FUNCTION_LITERAL_KINDS:
            return Typedness.YES
        if t in _NON_FUNCTION_LITERALS:
            return Typedness.NO
        if t == "ternary_expression":
            return _combine(
                self.is_function_valued(expr.child_by_field_name("consequence"), _seen),
                self.is_function_valued(expr.child_by_field_name("alternative"), _seen),
            )
        if t != "identifier":
            return Typedness.UNKNOWN
        b, dynamic = self._resolve_value(expr)
        if b is None or dynamic or not b.stable:
            return Typedness.UNKNOWN
        if b.kind is BindingKind.FUNCTION_DECLARATION:
            return Typedness.YES
        if b.kind is BindingKind.CLASS:
            return Typedness.NO
        if b.kind is BindingKind.VARIABLE and b.init is not None and b.init.id not in _seen:
            return self.is_function_valued(b.init, _seen | {b.init.id})
        return Typedness.UNKNOWN

    def is_array_valued(self, expr: Node, _seen: frozenset[int] = frozenset()) -> Typedness:
        expr = unwrap(expr)
        t = expr.type
        if t == "array":
            return Typedness.YES
        if t in _NON_ARRAY_LITERALS:
            return Typedness.NO
        if t == "new_expression":
            ctor = expr.child_by_field_name("constructor")
            if ctor is not None and ctor.type == "identifier" and ctor.text == b"Array":
                if self.resolves_to_global("Array", expr):
                    return Typedness.YES
            return Typedness.UNKNOWN
        if t == "call_expression":
            return self._array_call(expr, _seen)
        if t == "ternary_expression":
            return _combine(
                self.is_array_valued(expr.child_by_field_name("consequence"), _seen),
                self.is_array_valued(expr.child_by_field_name("alternative"), _seen),
            )
        if t != "identifier":
            return Typedness.UNKNOWN
        b, dynamic = self._resolve_value(expr)
        if b is None or dynamic or not b.stable:
            return Typedness.UNKNOWN
        if b.kind in (BindingKind.FUNCTION_DECLARATION, BindingKind.CLASS):
            return Typedness.NO
        if b.kind is BindingKind.VARIABLE and b.init is not None and b.init.id not in _seen:
            return self.is_array_valued(b.init, _seen | {b.init.id})
        return Typedness.UNKNOWN

    def _array_call(self, call: Node, seen: frozenset[int]) -> Typedness:
        fn = call.child_by_field_name("function")
        if fn is None:
            return Typedness.UNKNOWN
        if fn.type == "identifier":
            if fn.text == b"Array" and self.resolves_to_global("Array", call):
                return Typedness.YES
            return Typedness.UNKNOWN
        if fn.type != "member_expression":
            return Typedness.UNKNOWN
        obj = fn.child_by_field_name("object")
        prop = fn.child_by_field_name("property")
        if obj is None or prop is None:
            return Typedness.UNKNOWN
        name = prop.text
        if obj.type == "identifier" and obj.text == b"Array" and name in (b"from", b"of"):
            if self.resolves_to_global("Array", call):
                return Typedness.YES
            return Typedness.UNKNOWN
        if name.decode() in ARRAY_PRODUCING and self.is_array_valued(obj, seen) is Typedness.YES:
            return Typedness.YES
        return Typedness.UNKNOWN


def _combine(a: Typedness, b: Typedness) -> Typedness:
    return a if a is b else Typedness.UNKNOWN


def build_scopes(unit: SourceUnit) -> ScopeTable:
    """Build the scope table: module, function and block scopes, with hoisting."""
    table = ScopeTable(unit)
    scope_nodes: list[Node] = []
    for kind in FUNCTION_KINDS | _BLOCK_SCOPE_KINDS:
        for node in unit.nodes(kind):
            if table._is_scope_node(node):
                scope_nodes.append(node)
    # Parents before children: document order with outer nodes first.
    scope_nodes.sort(key=lambda n: (n.start_byte, -n.end_byte))
    for node in scope_nodes:
        parent = table.scope_of(node)
        kind = "function" if node.type in FUNCTION_KINDS else "block"
        table.scopes[node.id] = Scope(kind, node, parent)

    def declare(scope: Scope, ident: Node, kind: BindingKind, value: Node | None = None, owner: Node | None = None):
        name = unit.node_text(ident)
        existing = scope.bindings.get(name)
        if existing is not None:
            existing.declarations += 1
            return
        scope.bindings[name] = Binding(
            name, kind, _init_shape(value), unit.span(ident), scope, owner=owner, init=value
        )

    # functions: own name and parameters
    for kind in FUNCTION_KINDS:
        for fn in unit.nodes(kind):
            own = table.scopes[fn.id]
            for ident in function_parameters(fn):
                declare(own, ident, BindingKind.PARAMETER, owner=fn)
            if kind not in _NAMED_FUNCTION_KINDS:
                continue
            name = fn.child_by_field_name("name")
            if name is None:
                continue
            if kind in ("function_declaration", "generator_function_declaration"):
                declare(table.scope_of(fn), name, BindingKind.FUNCTION_DECLARATION, owner=fn)
            else:
                # a named function expression sees its own name
                declare(own, name, BindingKind.FUNCTION_DECLARATION, owner=fn)

    for decl in unit.nodes("variable_declaration"):
        target = table.scope_of(decl).function_scope()
        _declare_declarators(decl, target, declare)
    for decl in unit.nodes("lexical_declaration"):
        _declare_declarators(decl, table.scope_of(decl), declare)

    for kind in ("class_declaration", "enum_declaration", "internal_module"):
        for node in unit.nodes(kind):
            name = node.child_by_field_name("name")
            if name is not None and name.type in ("identifier", "type_identifier"):
                bkind = BindingKind.CLASS if kind == "class_declaration" else BindingKind.VARIABLE
                declare(table.scope_of(node), name, bkind)

    for node in unit.nodes("catch_clause"):
        for ident in pattern_names(node.child_by_field_name("parameter")):
            declare(table.scopes[node.id], ident, BindingKind.VARIABLE)

    for imp in unit.nodes("import_statement"):
        for ident in _import_names(imp):
            declare(table.module, ident, BindingKind.IMPORT)

    # for (x of xs) / for (const x of xs)
    for loop in unit.nodes("for_in_statement"):
        left = loop.child_by_field_name("left")
        keyword = loop.child_by_field_name("kind")
        names = pattern_names(left)
        if keyword is None:
            for ident in names:
                _mark_reassigned(table, ident)
        else:
            target = table.scopes[loop.id]
            if keyword.type == "var":
                target = table.scope_of(loop).function_scope()
            for ident in names:
                declare(target, ident, BindingKind.VARIABLE)
                # the loop variable takes a new value every iteration
                b = target.bindings[unit.node_text(ident)]
                b.reassigned = True

    # writes after all declarations are known (hoisting)
    for kind in ("assignment_expression", "augmented_assignment_expression"):
        for node in unit.nodes(kind):
            for ident in pattern_names(unwrap(node.child_by_field_name("left"))):
                _mark_reassigned(table, ident)
    for node in unit.nodes("update_expression"):
        arg = node.child_by_field_name("argument")
        if arg is not None and unwrap(arg).type == "identifier":
            _mark_reassigned(table, unwrap(arg))

    for node in unit.nodes("with_statement"):
        table.scope_of(node).function_scope().dynamic = True
    for call in unit.nodes("call_expression"):
        fn = call.child_by_field_name("function")
        if fn is not None and fn.type == "identifier" and fn.text == b"eval":
            if table.resolves_to_global("eval", call):
                table.scope_of(call).function_scope().dynamic = True
    return table


def _declare_declarators(decl: Node, scope: Scope, declare) -> None:
    for declarator in decl.named_children:
        if declarator.type != "variable_declarator":
            continue
        name = declarator.child_by_field_name("name")
        value = declarator.child_by_field_name("value")
        if name is None:
            continue
        if name.type == "identifier":
            declare(scope, name, BindingKind.VARIABLE, value=value)
        else:
            for ident in pattern_names(name):
                declare(scope, ident, BindingKind.VARIABLE)


def _import_names(imp: Node) -> list[Node]:
    out: list[Node] = []
    for clause in imp.named_children:
        if clause.type == "import_require_clause":  # TS: import x = require("m")
            first = clause.named_children[0] if clause.named_children else None
            if first is not None and first.type == "identifier":
                out.append(first)
            continue
        if clause.type != "import_clause":
            continue
        for part in clause.named_children:
            if part.type == "identifier":
                out.append(part)
            elif part.type == "namespace_import":
                out.extend(c for c in part.named_children if c.type == "identifier")
            elif part.type == "named_imports":
                for spec in part.named_children:
                    if spec.type != "import_specifier":
                        continue
                    alias = spec.child_by_field_name("alias")
                    name = alias if alias is not None else spec.child_by_field_name("name")
                    if name is not None and name.type == "identifier":
                        out.append(name)
    return out


def _mark_reassigned(table: ScopeTable, ident: Node) -> None:
    b = table.lookup(ident.text.decode("utf-8", errors="replace"), ident)
    if b is not None:
        b.reassigned = True
