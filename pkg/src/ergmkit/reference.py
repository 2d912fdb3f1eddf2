"""Reference measures for valued models and the binary Bernoulli default.

The reference fixes the support of a dyad value and the factor h(y): the
sampler needs log h ratios for jumps, and exact enumeration needs per-value
log h weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ModelError
from .formula import Call, FormulaNode, Ident, Num, Unary, parse_text


@dataclass(frozen=True)
class Reference:
    name: str
    a: float = 0.0
    b: float = 0.0
    trials: int = 0

    @property
    def discrete(self) -> bool:
        return self.name != "Unif"

    def finite_support(self):
        """List of attainable values, or None when unbounded/continuous."""
        if self.name == "Bernoulli":
            return [0.0, 1.0]
        if self.name == "DiscUnif":
            return [float(v) for v in range(int(self.a), int(self.b) + 1)]
        if self.name == "Binomial":
            return [float(v) for v in range(self.trials + 1)]
        return None

    def in_support(self, v: float) -> bool:
        if self.name == "Bernoulli":
            return v in (0.0, 1.0)
        if self.name == "Unif":
            return self.a <= v <= self.b
        if self.name == "DiscUnif":
            return v == int(v) and self.a <= v <= self.b
        if self.name in ("Poisson", "Geometric"):
            return v == int(v) and v >= 0
        if self.name == "Binomial":
            return v == int(v) and 0 <= v <= self.trials
        raise ModelError(f"unknown reference {self.name!r}")

    def log_h(self, v: float) -> float:
        if self.name == "Poisson":
            return -math.lgamma(v + 1.0)
        if self.name == "Binomial":
            return (math.lgamma(self.trials + 1.0) - math.lgamma(v + 1.0)
                    - math.lgamma(self.trials - v + 1.0))
        return 0.0

    def log_h_ratio(self, old: float, new: float) -> float:
        if self.name == "Poisson":
            return math.lgamma(old + 1.0) - math.lgamma(new + 1.0)
        if self.name == "Binomial":
            return (math.lgamma(old + 1.0) + math.lgamma(self.trials - old + 1.0)
                    - math.lgamma(new + 1.0) - math.lgamma(self.trials - new + 1.0))
        return 0.0


def _num_value(node, what: str) -> float:
    if isinstance(node, Num):
        return float(node.value)
    if isinstance(node, Unary) and node.op == "-" and isinstance(node.operand, Num):
        return -float(node.operand.value)
    raise ModelError(f"{what}: expected a number")


def parse_reference(text) -> Reference:
    """Parse a reference spec like "~Poisson" or "~DiscUnif(0,3)"."""
    if text is None:
        return Reference("Bernoulli")
    if isinstance(text, Reference):
        return text
    node = parse_text(text) if isinstance(text, str) else text
    if isinstance(node, FormulaNode):
        node = node.rhs
    if isinstance(node, Ident):
        node = Call(node.name, ())
    if not isinstance(node, Call):
        raise ModelError("reference must name a distribution")
    name = node.name
    pos = [a.value for a in node.args if a.name is None]
    named = {a.name: a.value for a in node.args if a.name is not None}
    if name == "Bernoulli":
        return Reference("Bernoulli")
    if name in ("Unif", "DiscUnif"):
        if len(pos) != 2:
            raise ModelError(f"{name}(a, b) needs two bounds")
        a = _num_value(pos[0], name)
        b = _num_value(pos[1], name)
        if b < a:
            raise ModelError(f"{name}: upper bound below lower bound")
        if name == "DiscUnif" and (a != int(a) or b != int(b)):
            raise ModelError("DiscUnif bounds must be integers")
        return Reference(name, a=a, b=b)
    if name == "Poisson":
        return Reference("Poisson")
    if name == "Geometric":
        return Reference("Geometric")
    if name == "Binomial":
        t = named.get("trials", pos[0] if pos else None)
        if t is None:
            raise ModelError("Binomial needs trials")
        return Reference("Binomial", trials=int(_num_value(t, "Binomial trials")))
    raise ModelError(f"unknown reference {name!r}")
