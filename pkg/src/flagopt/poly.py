"""Multivariate polynomials over the complex numbers.

A polynomial is a map from exponent tuples to coefficients, e.g.

    {(2, 0): 1+0j, (0, 1): -3+0j}   for   x0^2 - 3*x1

in a fixed number of variables.  Zero coefficients are never stored.
Systems carry named variable blocks (``Z`` before multipliers, ambient
coordinates before multipliers) so that serialized fingerprints are stable.

``CompiledSystem`` flattens a system into exponent/coefficient arrays for
vectorized evaluation of many points at once; the homotopy tracker lives on
this code path.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

_COEFF_CHOP = 0.0  # store coefficients exactly as computed; prune exact zeros only


class Polynomial:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars, terms=None):
        self.nvars = int(nvars)
        self.terms = {}
        if terms:
            for exps, coeff in terms.items():
                c = complex(coeff)
                if c != 0:
                    if len(exps) != self.nvars:
                        raise ValueError(
                            f"exponent tuple {exps} has arity {len(exps)}, expected {self.nvars}"
                        )
                    self.terms[tuple(int(e) for e in exps)] = c

    @classmethod
    def zero(cls, nvars):
        return cls(nvars)

    @classmethod
    def constant(cls, nvars, value):
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars, index):
        exps = [0] * nvars
        exps[index] = 1
        return cls(nvars, {tuple(exps): 1.0})

    def is_zero(self):
        return not self.terms

    def degree(self):
        if not self.terms:
            return 0
        return max(sum(e) for e in self.terms)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for exps, coeff in other.terms.items():
            c = out.get(exps, 0j) + coeff
            if c == 0:
                out.pop(exps, None)
            else:
                out[exps] = c
        return Polynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return Polynomial(self.nvars, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                c = out.get(key, 0j) + c1 * c2
                if c == 0:
                    out.pop(key, None)
                else:
                    out[key] = c
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, exponent):
        if exponent < 0 or exponent != int(exponent):
            raise ValueError("only nonnegative integer powers")
        result = Polynomial.constant(self.nvars, 1.0)
        base = self
        e = int(exponent)
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def diff(self, index):
        out = {}
        for exps, coeff in self.terms.items():
            k = exps[index]
            if k == 0:
                continue
            new = list(exps)
            new[index] = k - 1
            out[tuple(new)] = coeff * k
        return Polynomial(self.nvars, out)

    def evaluate(self, x):
        x = np.asarray(x)
        if x.shape[0] != self.nvars:
            raise ValueError(f"point has {x.shape[0]} coordinates, expected {self.nvars}")
        total = 0j
        for exps, coeff in self.terms.items():
            term = coeff
            for value, e in zip(x, exps):
                if e:
                    term *= value**e
            total += term
        return total

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError("mixing polynomials with different variable counts")
            return other
        return Polynomial.constant(self.nvars, other)

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.nvars == other.nvars and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "Polynomial(0)"
        bits = []
        for exps in sorted(self.terms):
            mono = "*".join(f"x{i}^{e}" if e > 1 else f"x{i}" for i, e in enumerate(exps) if e)
            c = self.terms[exps]
            bits.append(f"({c:g}){'*' + mono if mono else ''}")
        return " + ".join(bits)


@dataclass(frozen=True)
class VariableBlock:
    name: str
    size: int


class PolySystem:
    """A list of polynomials sharing one variable space split into named blocks."""

    def __init__(self, polys, blocks, origin=""):
        self.polys = list(polys)
        self.blocks = [VariableBlock(b.name, b.size) if isinstance(b, VariableBlock) else VariableBlock(*b) for b in blocks]
        self.origin = origin
        nvars = sum(b.size for b in self.blocks)
        for p in self.polys:
            if p.nvars != nvars:
                raise ValueError("polynomial arity does not match the block layout")
        self._compiled = None

    @property
    def nvars(self):
        return sum(b.size for b in self.blocks)

    @property
    def npolys(self):
        return len(self.polys)

    @property
    def degrees(self):
        return [p.degree() for p in self.polys]

    @property
    def is_square(self):
        return self.npolys == self.nvars

    def block_slice(self, name):
        start = 0
        for b in self.blocks:
            if b.name == name:
                return slice(start, start + b.size)
            start += b.size
        raise KeyError(f"no variable block named {name!r}")

    def compiled(self):
        if self._compiled is None:
            self._compiled = CompiledSystem(self.polys, self.nvars)
        return self._compiled

    def evaluate(self, x):
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.nvars,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.nvars},)")
        return self.compiled().eval_many(x[None, :])[0]

    def residual(self, x):
        return float(np.abs(self.evaluate(x)).max()) if self.polys else 0.0

    def jacobian(self):
        """Matrix of partial derivatives, entry (i, j) = d poly_i / d x_j."""
        return [[p.diff(j) for j in range(self.nvars)] for p in self.polys]

    def jacobian_at(self, x):
        x = np.asarray(x, dtype=complex)
        return self.compiled().jac_many(x[None, :])[0]

    def to_json(self):
        return {
            "blocks": [{"name": b.name, "size": b.size} for b in self.blocks],
            "polys": [
                {
                    "terms": [
                        {"exps": list(e), "re": c.real, "im": c.imag}
                        for e, c in sorted(p.terms.items())
                    ]
                }
                for p in self.polys
            ],
            "origin": self.origin,
            "degrees": self.degrees,
        }

    @classmethod
    def from_json(cls, data):
        blocks = [VariableBlock(b["name"], b["size"]) for b in data["blocks"]]
        nvars = sum(b.size for b in blocks)
        polys = []
        for pd in data["polys"]:
            terms = {
                tuple(t["exps"]): complex(t["re"], t["im"]) for t in pd["terms"]
            }
            polys.append(Polynomial(nvars, terms))
        return cls(polys, blocks, origin=data.get("origin", ""))


def bezout_number(system):
    """Product of total degrees; the path count of a total-degree homotopy."""
    if not system.is_square:
        raise ValueError(
            f"Bezout number needs a square system, got {system.npolys} equations in {system.nvars} variables"
        )
    out = 1
    for d in system.degrees:
        out *= max(d, 1)
    return out


class CompiledSystem:
    """Exponent/coefficient arrays for batched evaluation.

    All monomials of the system and of its Jacobian share one table, so a
    combined value+Jacobian evaluation costs a single monomial pass.

    eval_many:    (P, n) points -> (P, m) values.
    jac_many:     (P, n) points -> (P, m, n) Jacobians.
    eval_and_jac: both at once.
    """

    def __init__(self, polys, nvars):
        self.nvars = nvars
        self.npolys = len(polys)
        jac_entries = [p.diff(j) for p in polys for j in range(nvars)]
        index = {}
        for p in itertools.chain(polys, jac_entries):
            for e in p.terms:
                if e not in index:
                    index[e] = len(index)
        if not index:
            index[(0,) * nvars] = 0
        self.exps = np.zeros((len(index), nvars), dtype=np.int64)
        for e, i in index.items():
            self.exps[i] = e
        self.coeffs = _coeff_matrix(polys, index)
        self.jac_coeffs = _coeff_matrix(jac_entries, index)
        # per-variable maximum degree, hoisted out of the evaluation loop
        self.var_maxdeg = self.exps.max(axis=0)

    def _monomials(self, x):
        npoints = x.shape[0]
        vals = np.ones((npoints, self.exps.shape[0]), dtype=complex)
        for j in range(self.nvars):
            dmax = self.var_maxdeg[j]
            if dmax == 0:
                continue
            powers = np.empty((npoints, dmax + 1), dtype=complex)
            powers[:, 0] = 1.0
            for d in range(1, dmax + 1):
                powers[:, d] = powers[:, d - 1] * x[:, j]
            vals *= powers[:, self.exps[:, j]]
        return vals

    def eval_many(self, x):
        return self._monomials(x) @ self.coeffs.T

    def jac_many(self, x):
        flat = self._monomials(x) @ self.jac_coeffs.T
        return flat.reshape(x.shape[0], self.npolys, self.nvars)

    def eval_and_jac(self, x):
        mono = self._monomials(x)
        vals = mono @ self.coeffs.T
        jac = (mono @ self.jac_coeffs.T).reshape(x.shape[0], self.npolys, self.nvars)
        return vals, jac


def _coeff_matrix(polys, index):
    coeffs = np.zeros((len(polys), len(index)), dtype=complex)
    for row, p in enumerate(polys):
        for e, c in p.terms.items():
            coeffs[row, index[e]] = c
    return coeffs
