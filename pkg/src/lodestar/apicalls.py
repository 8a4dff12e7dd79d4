"""Extract canonical API-call identifiers from source code.

Canonicalization rules:

* ``import pandas as pd`` makes ``pd.read_csv(...)`` emit ``pandas.read_csv``.
* ``from sklearn.linear_model import LinearRegression`` makes
  ``LinearRegression()`` emit ``sklearn.linear_model.LinearRegression``.
* A call on a receiver whose type is unknown (``df.dropna()``, or anything
  chained off a call result) emits a dot-prefixed method token
  (``.dropna``), so synonymous method use lines up across blocks without
  guessing at module attribution.
* A bare call to a name that no import explains (``print``, a local helper)
  is kept verbatim; such names are shared across blocks and are harmless as
  vocabulary terms.

Cells that do not parse fall back to a token-level scan for ``name(`` and
``.name(`` patterns; corpus code is frequently broken and extraction must
never abort on it.
"""

from __future__ import annotations

import ast
import keyword
import logging
import re

logger = logging.getLogger(__name__)


class AliasContext:
    """Name bindings introduced by import statements.

    ``modules`` maps a bound name to the dotted module it stands for
    (``pd`` -> ``pandas``); ``names`` maps a bound name to its fully
    qualified origin (``LinearRegression`` ->
    ``sklearn.linear_model.LinearRegression``). A context can accumulate
    over the cells of one document so later cells resolve aliases imported
    earlier.
    """

    def __init__(self) -> None:
        self.modules: dict[str, str] = {}
        self.names: dict[str, str] = {}

    def add_import(self, module: str, alias: str | None = None) -> None:
        bound = alias or module.split(".")[0]
        # `import pandas.io` binds the name "pandas", not "pandas.io"
        target = module if alias else module.split(".")[0]
        self.modules[bound] = target

    def add_from_import(self, module: str, name: str, alias: str | None = None) -> None:
        if name == "*":
            return
        self.names[alias or name] = f"{module}.{name}"

    def update_from_tree(self, tree: ast.AST) -> None:
        for node in ast.walk(tree):
            if isinstance(node, ast.Import):
                for item in node.names:
                    self.add_import(item.name, item.asname)
            elif isinstance(node, ast.ImportFrom):
                if node.module is None or node.level:
                    continue  # relative imports have no resolvable root
                for item in node.names:
                    self.add_from_import(node.module, item.name, item.asname)

    def update_from_text(self, text: str) -> None:
        """Best effort: parse if possible, else scan import lines by regex."""
        try:
            self.update_from_tree(ast.parse(text))
        except SyntaxError:
            self._update_from_broken_text(text)

    def _update_from_broken_text(self, text: str) -> None:
        for line in text.splitlines():
            line = line.strip()
            m = re.match(r"import\s+([\w.]+)(?:\s+as\s+(\w+))?\s*$", line)
            if m:
                self.add_import(m.group(1), m.group(2))
                continue
            m = re.match(r"from\s+([\w.]+)\s+import\s+(.+)$", line)
            if m and not m.group(1).startswith("."):
                for item in m.group(2).split(","):
                    parts = item.replace("(", "").replace(")", "").split()
                    if not parts or parts[0] == "*":
                        continue
                    alias = parts[2] if len(parts) == 3 and parts[1] == "as" else None
                    self.add_from_import(m.group(1), parts[0], alias)


def _attribute_chain(node: ast.expr) -> tuple[list[str], ast.expr]:
    """Return ([attr names outer-to-inner reversed], base expression)."""
    attrs: list[str] = []
    while isinstance(node, ast.Attribute):
        attrs.append(node.attr)
        node = node.value
    attrs.reverse()
    return attrs, node


def _canonical_call(func: ast.expr, ctx: AliasContext) -> str | None:
    if isinstance(func, ast.Name):
        name = func.id
        if name in ctx.names:
            return ctx.names[name]
        if name in ctx.modules:
            return ctx.modules[name]
        return name
    if isinstance(func, ast.Attribute):
        attrs, base = _attribute_chain(func)
        if isinstance(base, ast.Name):
            if base.id in ctx.modules:
                return ".".join([ctx.modules[base.id], *attrs])
            if base.id in ctx.names:
                return ".".join([ctx.names[base.id], *attrs])
        # unknown receiver: keep only the method name
        return "." + attrs[-1]
    return None  # calling a lambda, subscript, etc.: not an API identifier


def _call_sort_key(call: ast.Call) -> tuple[int, int]:
    # Order calls by where the called name *ends*, which matches reading
    # order for chains like df.dropna().head(10).
    func = call.func
    line = getattr(func, "end_lineno", None) or call.lineno
    col = getattr(func, "end_col_offset", None)
    if col is None:
        col = call.col_offset
    return (line, col)


_TOKEN_CALL = re.compile(r"((?:[A-Za-z_]\w*\.)+)?([A-Za-z_]\w*)\s*\(")


def _heuristic_calls(text: str, ctx: AliasContext) -> list[str]:
    """Token-level fallback for unparseable cells: name( and .name( hits,
    with dotted receivers resolved through the alias context when known."""
    # strip definitions so `def foo(` / `class Bar(` are not counted as calls
    text = re.sub(r"\b(?:def|class)\s+\w+\s*\(", "(", text)
    calls: list[str] = []
    for match in _TOKEN_CALL.finditer(text):
        prefix, name = match.group(1), match.group(2)
        preceded_by_dot = match.start() > 0 and text[match.start() - 1] == "."
        if prefix:
            parts = prefix.rstrip(".").split(".")
            if not preceded_by_dot and parts[0] in ctx.modules:
                calls.append(".".join([ctx.modules[parts[0]], *parts[1:], name]))
            elif not preceded_by_dot and parts[0] in ctx.names:
                calls.append(".".join([ctx.names[parts[0]], *parts[1:], name]))
            else:
                calls.append("." + name)
        elif preceded_by_dot:
            calls.append("." + name)  # receiver is a call result or subscript
        elif keyword.iskeyword(name):
            continue
        elif name in ctx.names:
            calls.append(ctx.names[name])
        elif name in ctx.modules:
            calls.append(ctx.modules[name])
        else:
            calls.append(name)
    return calls


def extract_api_calls(cell_text: str, context: AliasContext | None = None) -> list[str]:
    """List the canonical identifier of every call in a cell, in order.

    Duplicates are kept (frequency matters downstream). ``context`` carries
    alias bindings from earlier cells of the same document; when omitted, a
    fresh context is built from the cell itself.
    """
    ctx = context if context is not None else AliasContext()
    try:
        tree = ast.parse(cell_text)
    except SyntaxError:
        logger.debug("cell does not parse; falling back to token scan")
        ctx.update_from_text(cell_text)
        return _heuristic_calls(cell_text, ctx)

    ctx.update_from_tree(tree)
    calls = [node for node in ast.walk(tree) if isinstance(node, ast.Call)]
    calls.sort(key=_call_sort_key)
    out: list[str] = []
    for call in calls:
        ident = _canonical_call(call.func, ctx)
        if ident is not None:
            out.append(ident)
    return out


def root_module(identifier: str) -> str | None:
    """Root module of a canonical identifier; None for method-only tokens."""
    if identifier.startswith("."):
        return None
    return identifier.split(".")[0]


def imported_roots(cell_text: str) -> set[str]:
    """Root modules imported anywhere in a piece of source text."""
    ctx = AliasContext()
    ctx.update_from_text(cell_text)
    roots = {target.split(".")[0] for target in ctx.modules.values()}
    roots |= {origin.split(".")[0] for origin in ctx.names.values()}
    return roots
