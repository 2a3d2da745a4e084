"""Coordinate charts: ordered variable names with optional bundle split."""

from __future__ import annotations

from typing import Iterable, Optional, Sequence, Union

from ..errors import ChartMismatchError, SplitError

VarRef = Union[int, str]


class Chart:
    """An ordered list of coordinate names.

    ``laurent`` marks variables that may carry negative exponents.
    ``base`` and ``fiber`` (both or neither) partition the marked
    variables into the base block x and fiber block y; any remaining
    variables are extra coordinates such as an auxiliary ``t``.
    """

    __slots__ = ("names", "laurent", "base", "fiber", "_index", "_hash")

    def __init__(
        self,
        names: Sequence[str],
        laurent: Iterable[VarRef] = (),
        base: Optional[Sequence[VarRef]] = None,
        fiber: Optional[Sequence[VarRef]] = None,
    ):
        names = tuple(str(n) for n in names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        self.names = names
        self._index = {n: i for i, n in enumerate(names)}
        marked = {self.index(v) for v in laurent}
        self.laurent = tuple(i in marked for i in range(len(names)))
        if (base is None) != (fiber is None):
            if base is None:
                base = ()
            else:
                fiber = ()
        if base is None:
            self.base = None
            self.fiber = None
        else:
            b = tuple(self.index(v) for v in base)
            f = tuple(self.index(v) for v in fiber)
            if len(set(b)) != len(b) or len(set(f)) != len(f) or set(b) & set(f):
                raise ValueError("base and fiber blocks must be disjoint")
            self.base = tuple(sorted(b))
            self.fiber = tuple(sorted(f))
        self._hash = hash((self.names, self.laurent, self.base, self.fiber))

    @classmethod
    def bundle(cls, base_names: Sequence[str], fiber_names: Sequence[str], laurent=()):
        """Chart (x; y) with the split already set."""
        return cls(list(base_names) + list(fiber_names), laurent=laurent,
                   base=list(base_names), fiber=list(fiber_names))

    @property
    def dim(self) -> int:
        return len(self.names)

    @property
    def has_split(self) -> bool:
        return self.base is not None

    @property
    def extra(self) -> tuple:
        if self.base is None:
            return tuple(range(self.dim))
        marked = set(self.base) | set(self.fiber)
        return tuple(i for i in range(self.dim) if i not in marked)

    def index(self, var: VarRef) -> int:
        if isinstance(var, int):
            if not 0 <= var < len(self.names):
                raise IndexError(f"variable index {var} out of range")
            return var
        try:
            return self._index[var]
        except KeyError:
            raise KeyError(f"unknown variable {var!r} in chart {self.names}") from None

    def require_split(self):
        if self.base is None:
            raise SplitError("chart has no base/fiber split")
        return self.base, self.fiber

    def subchart(self, keep: Sequence[VarRef]) -> "Chart":
        """Chart on the kept variables, inheriting flags and split membership."""
        idx = [self.index(v) for v in keep]
        names = [self.names[i] for i in idx]
        laurent = [self.names[i] for i in idx if self.laurent[i]]
        if self.base is None:
            return Chart(names, laurent)
        base = [self.names[i] for i in idx if i in self.base]
        fiber = [self.names[i] for i in idx if i in self.fiber]
        return Chart(names, laurent, base, fiber)

    def with_split(self, base: Sequence[VarRef], fiber: Sequence[VarRef]) -> "Chart":
        laurent = [n for n, f in zip(self.names, self.laurent) if f]
        return Chart(self.names, laurent, base, fiber)

    def check_same(self, other: "Chart"):
        if self is not other and self != other:
            raise ChartMismatchError(f"charts differ: {self} vs {other}")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Chart):
            return NotImplemented
        return (self.names == other.names and self.laurent == other.laurent
                and self.base == other.base and self.fiber == other.fiber)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        parts = [repr(list(self.names))]
        if any(self.laurent):
            parts.append(f"laurent={[n for n, f in zip(self.names, self.laurent) if f]}")
        if self.base is not None:
            parts.append(f"base={[self.names[i] for i in self.base]}")
            parts.append(f"fiber={[self.names[i] for i in self.fiber]}")
        return f"Chart({', '.join(parts)})"
