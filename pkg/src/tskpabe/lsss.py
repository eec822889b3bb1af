"""Monotone AND/OR policies compiled to a linear secret-sharing structure.

The compiler uses the standard vector-labeling construction: the root
carries the label (1); an AND gate pads its label v to the current width
and hands (v, 1) to the left child and (0, ..., 0, -1) to the right child,
growing the width by one; an OR gate copies its label to both children.
Leaves become matrix rows in left-to-right order, so the matrix has one
row per leaf and one column per AND gate plus one.

Sharing a secret w draws a masking vector (w, y2, ..., yn) and gives row i
the share lambda_i = v . M_i.  A set of attributes reconstructs w iff the
unit vector (1, 0, ..., 0) lies in the span of its rows, in which case
Gaussian elimination yields coefficients omega_i with
sum(omega_i * lambda_i) = w.
"""

import re
from dataclasses import dataclass
from random import Random

from .groups import Scalar

_TOKEN_RE = re.compile(r"\s*(?:(\()|(\))|([A-Za-z_][A-Za-z0-9_\-]*))")


class PolicyError(ValueError):
    """Malformed policy text or structure."""


@dataclass(frozen=True)
class Leaf:
    attribute: str


@dataclass(frozen=True)
class Gate:
    op: str  # "AND" or "OR"
    left: "Leaf | Gate"
    right: "Leaf | Gate"


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise PolicyError(f"bad character in policy at offset {pos}: {text[pos:]!r}")
        if m.group(1):
            tokens.append("(")
        elif m.group(2):
            tokens.append(")")
        elif m.group(3):
            word = m.group(3)
            tokens.append(word.upper() if word.upper() in ("AND", "OR") else word)
        pos = m.end()
    return tokens


def parse_policy(text: str) -> "Leaf | Gate":
    """Parse ``ident``, ``AND``, ``OR`` and parentheses.  AND binds tighter."""
    tokens = _tokenize(text)
    if not tokens:
        raise PolicyError("empty policy")
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take():
        nonlocal pos
        token = peek()
        pos += 1
        return token

    def parse_or():
        node = parse_and()
        while peek() == "OR":
            take()
            node = Gate("OR", node, parse_and())
        return node

    def parse_and():
        node = parse_atom()
        while peek() == "AND":
            take()
            node = Gate("AND", node, parse_atom())
        return node

    def parse_atom():
        token = take()
        if token == "(":
            node = parse_or()
            if take() != ")":
                raise PolicyError("unbalanced parentheses")
            return node
        if token in (None, ")", "AND", "OR"):
            raise PolicyError(f"unexpected token {token!r}")
        return Leaf(token)

    root = parse_or()
    if pos != len(tokens):
        raise PolicyError(f"trailing tokens: {tokens[pos:]}")
    return root


def evaluate(node: "Leaf | Gate", attributes) -> bool:
    """Boolean evaluation of a policy against an attribute set."""
    attributes = set(attributes)

    def walk(n):
        if isinstance(n, Leaf):
            return n.attribute in attributes
        if n.op == "AND":
            return walk(n.left) and walk(n.right)
        return walk(n.left) or walk(n.right)

    return walk(node)


def policy_leaves(node: "Leaf | Gate") -> list[str]:
    """Leaf attributes in row order (duplicates preserved)."""
    out: list[str] = []

    def walk(n):
        if isinstance(n, Leaf):
            out.append(n.attribute)
        else:
            walk(n.left)
            walk(n.right)

    walk(node)
    return out


@dataclass(frozen=True)
class AccessStructure:
    """Share-generating matrix with its row-to-attribute map, entries mod p."""

    matrix: tuple[tuple[int, ...], ...]
    row_attributes: tuple[str, ...]
    modulus: int

    @property
    def rows(self) -> int:
        return len(self.matrix)

    @property
    def columns(self) -> int:
        return len(self.matrix[0])

    def rows_for(self, attributes) -> list[int]:
        attributes = set(attributes)
        return [i for i, a in enumerate(self.row_attributes) if a in attributes]


@dataclass(frozen=True)
class ShareSet:
    """A masking vector and the per-row shares it induces."""

    vector: tuple[int, ...]
    shares: tuple[int, ...]

    @property
    def secret(self) -> int:
        return self.vector[0]


def compile_policy(policy: "str | Leaf | Gate", modulus: int) -> AccessStructure:
    """Compile a monotone formula into an access structure over Z_p."""
    node = parse_policy(policy) if isinstance(policy, str) else policy
    rows: list[tuple[list[int], str]] = []
    width = 1

    def assign(n, label: list[int]):
        nonlocal width
        if isinstance(n, Leaf):
            rows.append((label, n.attribute))
            return
        if n.op == "OR":
            assign(n.left, list(label))
            assign(n.right, list(label))
            return
        padded = label + [0] * (width - len(label))
        left_label = padded + [1]
        right_label = [0] * width + [-1]
        width += 1
        assign(n.left, left_label)
        assign(n.right, right_label)

    assign(node, [1])
    matrix = tuple(
        tuple(v % modulus for v in label + [0] * (width - len(label)))
        for label, _ in rows
    )
    return AccessStructure(matrix, tuple(attr for _, attr in rows), modulus)


def share(
    structure: AccessStructure,
    secret: Scalar | int,
    rng: Random | None = None,
    tail: tuple[int, ...] | None = None,
) -> ShareSet:
    """Share a secret: vector (w, y2, ..., yn), share_i = vector . row_i.

    The tail (y2, ..., yn) is drawn from ``rng`` unless given explicitly.
    """
    p = structure.modulus
    w = int(secret) % p
    n = structure.columns
    if tail is None:
        if rng is None and n > 1:
            raise ValueError("need rng or an explicit tail")
        tail = tuple(rng.randrange(p) for _ in range(n - 1)) if n > 1 else ()
    if len(tail) != n - 1:
        raise ValueError(f"tail must have {n - 1} entries")
    vector = (w,) + tuple(t % p for t in tail)
    shares = tuple(
        sum(v * m for v, m in zip(vector, row)) % p for row in structure.matrix
    )
    return ShareSet(vector, shares)


def _solve_mod(matrix: list[list[int]], rhs: list[int], p: int) -> "list[int] | None":
    """First solution of matrix . x = rhs over Z_p in canonical pivot order,
    free variables set to zero.  Returns None when inconsistent."""
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    aug = [[matrix[r][c] % p for c in range(cols)] + [rhs[r] % p] for r in range(rows)]
    pivot_cols = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if aug[i][c]), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        inv = pow(aug[r][c], -1, p)
        aug[r] = [(v * inv) % p for v in aug[r]]
        for i in range(rows):
            if i != r and aug[i][c]:
                factor = aug[i][c]
                aug[i] = [(a - factor * b) % p for a, b in zip(aug[i], aug[r])]
        pivot_cols.append(c)
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if aug[i][cols]:
            return None
    solution = [0] * cols
    for row_idx, c in enumerate(pivot_cols):
        solution[c] = aug[row_idx][cols]
    return solution


def reconstruct_coeffs(
    structure: AccessStructure, attributes
) -> "dict[int, int] | None":
    """Coefficients over I = rows labeled by the attribute set.

    Returns {row_index: omega} covering every row of I (zeros included)
    with sum(omega_i * lambda_i) = w for every sharing, or None when the
    set does not satisfy the structure.
    """
    p = structure.modulus
    rows = structure.rows_for(attributes)
    if not rows:
        return None
    # Solve x^T M_I = (1, 0, ..., 0), i.e. M_I^T x = e1.
    cols = structure.columns
    transposed = [[structure.matrix[r][c] for r in rows] for c in range(cols)]
    rhs = [1] + [0] * (cols - 1)
    solution = _solve_mod(transposed, rhs, p)
    if solution is None:
        return None
    return {row: solution[idx] for idx, row in enumerate(rows)}
