"""Exact truncated polynomial arithmetic for cohomology-ring computations.

Models the even-degree cohomology ring of a space generated by one degree-2
class x with the single relation x^(top+1) = 0, keeping all coefficients as
exact rationals. Pairing with the fundamental class reads off the coefficient
of x^top under the normalization that x^top integrates to 1.
"""

from fractions import Fraction
from math import factorial


def _coerce_scalar(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"ring coefficients must be exact rationals, got {type(value).__name__}")


class RingElement:
    """Polynomial in the degree-2 generator, truncated above power `top`.

    Coefficients are stored by power of the generator; anything at power
    greater than `top` is annihilated by the ring relation.
    """

    __slots__ = ("top", "coeffs")

    def __init__(self, top, coeffs=()):
        top = int(top)
        if top < 0:
            raise ValueError("top power must be nonnegative")
        stored = [Fraction(0)] * (top + 1)
        items = coeffs.items() if hasattr(coeffs, "items") else enumerate(coeffs)
        for power, value in items:
            power = int(power)
            if power < 0:
                raise ValueError("generator powers must be nonnegative")
            if power <= top:
                stored[power] += _coerce_scalar(value)
        object.__setattr__(self, "top", top)
        object.__setattr__(self, "coeffs", tuple(stored))

    def __setattr__(self, name, value):
        raise AttributeError("RingElement is immutable")

    @classmethod
    def constant(cls, top, value):
        return cls(top, {0: _coerce_scalar(value)})

    @classmethod
    def generator(cls, top, power=1):
        return cls(top, {power: Fraction(1)})

    def coefficient(self, power):
        power = int(power)
        if power < 0:
            raise ValueError("generator powers must be nonnegative")
        return self.coeffs[power] if power <= self.top else Fraction(0)

    def _match(self, other):
        if isinstance(other, RingElement):
            if other.top != self.top:
                raise ValueError("ring elements live in different truncations")
            return other
        return RingElement.constant(self.top, other)

    def __add__(self, other):
        other = self._match(other)
        return RingElement(self.top, {p: a + b for p, (a, b)
                                      in enumerate(zip(self.coeffs, other.coeffs))})

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._match(other))

    def __rsub__(self, other):
        return self._match(other) + (-self)

    def __neg__(self):
        return RingElement(self.top, {p: -a for p, a in enumerate(self.coeffs)})

    def __mul__(self, other):
        if not isinstance(other, RingElement):
            scalar = _coerce_scalar(other)
            return RingElement(self.top, {p: scalar * a
                                          for p, a in enumerate(self.coeffs)})
        other = self._match(other)
        out = {}
        for p, a in enumerate(self.coeffs):
            if not a:
                continue
            for q, b in enumerate(other.coeffs):
                if b and p + q <= self.top:
                    out[p + q] = out.get(p + q, Fraction(0)) + a * b
        return RingElement(self.top, out)

    __rmul__ = __mul__

    def __pow__(self, exponent):
        exponent = int(exponent)
        if exponent < 0:
            raise ValueError("negative powers are not defined in the truncated ring")
        result = RingElement.constant(self.top, 1)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other):
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.top == other.top and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.top, self.coeffs))

    def exp(self):
        """Exponential series; requires a vanishing constant term (nilpotency)."""
        if self.coeffs[0]:
            raise ValueError("exp is defined only for elements with zero constant term")
        result = RingElement.constant(self.top, 1)
        power = RingElement.constant(self.top, 1)
        for j in range(1, self.top + 1):
            power = power * self
            result = result + power * Fraction(1, factorial(j))
        return result

    def integrate(self):
        """Pair with the fundamental class: the coefficient of the top power."""
        return self.coeffs[self.top]

    def __repr__(self):
        terms = []
        for power, value in enumerate(self.coeffs):
            if not value:
                continue
            if power == 0:
                terms.append(str(value))
            else:
                head = "x" if power == 1 else f"x^{power}"
                terms.append(head if value == 1 else f"{value}*{head}")
        body = " + ".join(terms) if terms else "0"
        return f"RingElement(top={self.top}, {body})"
