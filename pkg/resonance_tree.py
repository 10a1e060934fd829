"""
resonance_tree.py - Stern-Brocot tree of resonance labels

This module builds the Stern-Brocot tree by mediants in exact integer
arithmetic, labels its nodes by left/right paths, and maps every node k/l to
(k + l)/(l - k), the tree of boundary slopes of the resonant tori.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction as Rational

from phase_space import DomainError

logger = logging.getLogger(__name__)

MAX_DEPTH = 30


@dataclass(frozen=True)
class Fraction:
    """Reduced fraction num/den with den >= 0; 1/0 is the infinity node."""
    num: int
    den: int

    def __post_init__(self):
        num, den = int(self.num), int(self.den)
        if num == 0 and den == 0:
            raise DomainError("0/0 is not a fraction")
        if den < 0:
            num, den = -num, -den
        if den == 0:
            num = 1
        else:
            g = math.gcd(num, den)
            num, den = num // g, den // g
        object.__setattr__(self, 'num', num)
        object.__setattr__(self, 'den', den)

    @property
    def is_infinite(self):
        return self.den == 0

    def as_rational(self):
        if self.is_infinite:
            raise DomainError("The infinity node has no rational value")
        return Rational(self.num, self.den)

    def __lt__(self, other):
        # cross-multiplication is order-preserving because both denominators are >= 0
        if self.is_infinite:
            return False
        if other.is_infinite:
            return True
        return self.num * other.den < other.num * self.den

    def __str__(self):
        return "∞" if self.is_infinite else f"{self.num}/{self.den}"


ZERO = Fraction(0, 1)
INFINITY = Fraction(1, 0)
ROOT = Fraction(1, 1)


@dataclass(frozen=True)
class TreePath:
    """Left/right moves from the root: 0 is the left (even) child, 1 the right (odd) one."""
    bits: tuple = ()

    @classmethod
    def from_string(cls, text):
        if any(ch not in '01' for ch in text):
            raise DomainError(f"Tree paths are strings over 0/1, got {text!r}")
        return cls(tuple(int(ch) for ch in text))

    @classmethod
    def from_index(cls, depth, index):
        """Path of the index-th node (left to right) on the given level."""
        if not 0 <= index < 2 ** depth:
            raise DomainError(f"Level {depth} has no node {index}")
        return cls(tuple((index >> shift) & 1 for shift in range(depth - 1, -1, -1)))

    @property
    def depth(self):
        return len(self.bits)

    @property
    def index(self):
        value = 0
        for bit in self.bits:
            value = 2 * value + bit
        return value

    def __str__(self):
        return ''.join(str(bit) for bit in self.bits)


@dataclass(frozen=True)
class TreeLevel:
    depth: int
    nodes: tuple

    def __str__(self):
        return '  '.join(str(node) for node in self.nodes)


def mediant(f, g):
    """(f.num + g.num) / (f.den + g.den), reduced."""
    if f.den == 0 and g.den == 0:
        raise DomainError("The mediant of two infinite nodes is undefined")
    return Fraction(f.num + g.num, f.den + g.den)


def _check_depth(n):
    if n < 0:
        raise DomainError(f"Tree depth must be non-negative, got {n}")
    if n > MAX_DEPTH:
        raise DomainError(f"Tree depth {n} exceeds the supported maximum {MAX_DEPTH}")


def stern_brocot_levels(depth):
    """
    Yield the Stern-Brocot levels 0..depth in one pass.

    Starting from 0/1, 1/0, each stage inserts the mediants of all consecutive
    entries; the entries inserted at stage n form level n. The merged sequence
    is kept between stages, so each level costs one sweep.

    Args:
        depth (int): Deepest level, 0 for the root 1/1 alone

    Yields:
        TreeLevel: The 2^n nodes of level n, increasing left to right
    """
    _check_depth(depth)
    sequence = [ZERO, INFINITY]
    for n in range(depth + 1):
        new = [mediant(lo, hi) for lo, hi in zip(sequence, sequence[1:])]
        yield TreeLevel(depth=n, nodes=tuple(new))
        if n < depth:
            merged = [None] * (len(sequence) + len(new))
            merged[::2] = sequence
            merged[1::2] = new
            sequence = merged


def stern_brocot_level(n):
    """Level n of the Stern-Brocot tree."""
    _check_depth(n)
    for level in stern_brocot_levels(n):
        pass
    return level


def node_at(path):
    """Descend from 1/1, narrowing the (low, high) bracket by mediants."""
    low, high = ZERO, INFINITY
    node = ROOT
    for bit in path.bits:
        if bit == 0:
            high = node
        else:
            low = node
        node = mediant(low, high)
    return node


def path_of(fraction):
    """
    Path from the root to a positive finite fraction.

    Args:
        fraction (Fraction): Positive rational node

    Returns:
        TreePath: The unique path with node_at(path) == fraction
    """
    if fraction.is_infinite or fraction.num <= 0:
        raise DomainError(f"{fraction} is not a node of the Stern-Brocot tree")
    low, high = ZERO, INFINITY
    node = ROOT
    bits = []
    while node != fraction:
        if fraction < node:
            bits.append(0)
            high = node
        else:
            bits.append(1)
            low = node
        node = mediant(low, high)
    return TreePath(tuple(bits))


def _require_coprime(k, l):
    if k < 1 or l < 1:
        raise DomainError(f"Resonance labels must be positive, got ({k}, {l})")
    if math.gcd(k, l) != 1:
        raise DomainError(f"({k}, {l}) is not coprime")


def transform_node(k, l):
    """
    Map the node k/l to (k + l)/(l - k), reduced, with the sign on the numerator.

    Args:
        k (int): Numerator of the Stern-Brocot node
        l (int): Denominator, gcd(k, l) = 1

    Returns:
        Fraction: The transformed node; 1/0 for k = l = 1
    """
    _require_coprime(k, l)
    return Fraction(k + l, l - k)


def _transform_level(level):
    return TreeLevel(depth=level.depth, nodes=tuple(transform_node(f.num, f.den) for f in level.nodes))


def new_tree_level(n):
    return _transform_level(stern_brocot_level(n))


def new_tree_levels(depth):
    for level in stern_brocot_levels(depth):
        yield _transform_level(level)


def slope_cross_check(k, l):
    """
    Exact residual between transform_node(k, l) and (1 - g')/(1 + g') with g' = -k/l.

    g' is the tangent of the level curve at the torus point of T_{k,l}. At
    (1, 1) both sides are infinite and the residual is 0.

    Returns:
        fractions.Fraction: The residual, 0 when the identity holds
    """
    node = transform_node(k, l)
    slope = Rational(-k, l)
    if slope == -1:
        return Rational(0) if node.is_infinite else Rational(1)
    expected = (1 - slope) / (1 + slope)
    if node.is_infinite:
        return abs(expected)
    return abs(node.as_rational() - expected)


# Listings

@dataclass(frozen=True)
class TreeRow:
    depth: int
    index: int
    path: str
    k: int
    l: int
    value: Fraction


def tree_rows(depth):
    """Rows (depth, index, path, k, l, value) for every node up to the given depth."""
    rows = []
    for level in stern_brocot_levels(depth):
        n = level.depth
        for index, node in enumerate(level.nodes):
            rows.append(TreeRow(depth=n, index=index, path=str(TreePath.from_index(n, index)),
                                k=node.num, l=node.den, value=transform_node(node.num, node.den)))
    return rows


def format_tree(depth):
    """Both trees level by level, each line centred on the widest one."""
    _check_depth(depth)
    if depth > 6:
        logger.info("Formatting %d tree levels; lines get long", depth + 1)
    sections = (("Stern-Brocot tree", stern_brocot_levels),
                ("Slope tree (k+l)/(l-k)", new_tree_levels))
    blocks = []
    for title, levels in sections:
        lines = [str(level) for level in levels(depth)]
        width = max(len(line) for line in lines)
        blocks.append('\n'.join([title] + [line.center(width).rstrip() for line in lines]))
    return '\n\n'.join(blocks) + '\n'
