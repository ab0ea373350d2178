"""
Minimal terminating rewrite system used to clean up generated skeletons.

Rules, applied bottom-up for at most three passes or until nothing changes:

- constant folding (only when the folded value is finite)
- identities: x+0, 0+x, x-0, x*1, 1*x, x/1 -> x
- self-annihilation: x-x -> 0 and x/x -> 1, guarded so that the rewrite never
  turns an invalid point into a valid one
- double negation: (-1)*((-1)*x) -> x and 0-(0-x) -> x
- placeholder collapse: a variable-free subtree containing a placeholder
  becomes a single placeholder
"""

from .expression import Expression, NodeKind, evaluate_batch, preorder

MAX_PASSES = 3

# Operators that are defined and finite for every finite input.
_TOTAL_OPERATORS = frozenset({"add", "sub", "mul", "sin", "cos", "pow2", "pow3", "abs", "atan"})


def simplify_basic(expr: Expression) -> Expression:
    """Rewrite ``expr`` to a fixed point of the local rules."""
    current = expr
    for _ in range(MAX_PASSES):
        rewritten = _rewrite(current)
        if rewritten == current:
            break
        current = rewritten
    return current


def _is_const(node: Expression, value: float | None = None) -> bool:
    if node.kind != NodeKind.CONSTANT:
        return False
    return value is None or node.value == value


def _is_total(node: Expression) -> bool:
    """True when the subtree is finite wherever its variables are finite."""
    for n in preorder(node):
        if n.kind == NodeKind.PLACEHOLDER:
            return False
        if n.kind == NodeKind.OPERATOR and n.symbol not in _TOTAL_OPERATORS:
            return False
    return True


def _is_bounded(node: Expression) -> bool:
    if node.kind == NodeKind.CONSTANT:
        return True
    return (
        node.kind == NodeKind.OPERATOR
        and node.symbol in ("sin", "cos")
        and _is_total(node.children[0])
    )


def _is_nonvanishing(node: Expression) -> bool:
    """Nonzero and finite everywhere: a nonzero constant or exp of a bounded term."""
    if node.kind == NodeKind.CONSTANT:
        return node.value != 0
    return (
        node.kind == NodeKind.OPERATOR
        and node.symbol == "exp"
        and _is_bounded(node.children[0])
    )


def _is_negation(node: Expression) -> Expression | None:
    """Operand of a negation written as (-1)*x or 0-x, else None."""
    if node.kind != NodeKind.OPERATOR:
        return None
    if node.symbol == "mul" and _is_const(node.children[0], -1.0):
        return node.children[1]
    if node.symbol == "sub" and _is_const(node.children[0], 0.0):
        return node.children[1]
    return None


def _rewrite(node: Expression) -> Expression:
    if node.is_leaf:
        return node
    children = tuple(_rewrite(c) for c in node.children)
    node = Expression.op(node.symbol, *children)

    if all(_is_const(c) for c in children):
        folded = evaluate_batch(node, [[0.0]])[0]
        if folded == folded:  # not NaN
            return Expression.const(folded)
        return node

    has_variable = any(n.kind == NodeKind.VARIABLE for n in preorder(node))
    if not has_variable and any(n.kind == NodeKind.PLACEHOLDER for n in preorder(node)):
        return Expression.placeholder()

    symbol = node.symbol
    if symbol in ("add", "sub", "mul", "div"):
        left, right = children
        if symbol == "add":
            if _is_const(right, 0.0):
                return left
            if _is_const(left, 0.0):
                return right
        elif symbol == "sub":
            if _is_const(right, 0.0):
                return left
            if left == right and _is_total(left):
                return Expression.const(0.0)
        elif symbol == "mul":
            if _is_const(right, 1.0):
                return left
            if _is_const(left, 1.0):
                return right
        elif symbol == "div":
            if _is_const(right, 1.0):
                return left
            if left == right and _is_nonvanishing(left):
                return Expression.const(1.0)

    inner = _is_negation(node)
    if inner is not None:
        twice = _is_negation(inner)
        if twice is not None:
            return twice
    return node
