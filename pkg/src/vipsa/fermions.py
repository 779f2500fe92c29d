"""Second-quantized terms, Pauli strings, and the Jordan-Wigner map.

Occupation convention: basis-state bit 1 means occupied, so the number
operator maps to (I - Z)/2 and a Fermi sea is prepared by X gates on the
occupied orbitals' qubits.  Jordan-Wigner parity strings run over qubits
below the acted-on qubit:

    c†_q -> (prod_{k<q} Z_k) (X_q - i Y_q)/2
    c_q  -> (prod_{k<q} Z_k) (X_q + i Y_q)/2
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

CREATE = "+"
ANNIHILATE = "-"

# letters: sparse Pauli map as a tuple of (qubit, "X"|"Y"|"Z"), ascending qubit
Letters = tuple[tuple[int, str], ...]

COEFF_DROP_TOL = 1e-12

# single-qubit products (left * right) -> (phase, letter or None for identity)
_PAULI_PRODUCT = {
    ("X", "X"): (1, None), ("Y", "Y"): (1, None), ("Z", "Z"): (1, None),
    ("X", "Y"): (1j, "Z"), ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"), ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"), ("X", "Z"): (-1j, "Y"),
}


@dataclass(frozen=True)
class LadderTerm:
    """coefficient times an ordered product of ladder factors.

    factors are (orbital qubit index, CREATE | ANNIHILATE), listed in
    operator order: factors[0] is the leftmost factor, i.e. the last one
    applied to a ket.
    """

    coeff: complex
    factors: tuple[tuple[int, str], ...]

    def __post_init__(self):
        for q, kind in self.factors:
            if kind not in (CREATE, ANNIHILATE):
                raise ValueError(f"bad ladder factor kind {kind!r}")
            if q < 0:
                raise ValueError(f"negative orbital index {q}")

    def dagger(self) -> "LadderTerm":
        flipped = tuple((q, ANNIHILATE if kind == CREATE else CREATE)
                        for q, kind in reversed(self.factors))
        return LadderTerm(complex(self.coeff).conjugate(), flipped)

    def scaled(self, factor: complex) -> "LadderTerm":
        return LadderTerm(self.coeff * factor, self.factors)


def multiply_letters(a: Letters, b: Letters) -> tuple[complex, Letters]:
    """Product of two Pauli letter maps, returning (phase, letters)."""
    phase = 1 + 0j
    out: list[tuple[int, str]] = []
    i = j = 0
    while i < len(a) or j < len(b):
        if j >= len(b) or (i < len(a) and a[i][0] < b[j][0]):
            out.append(a[i]); i += 1
        elif i >= len(a) or b[j][0] < a[i][0]:
            out.append(b[j]); j += 1
        else:
            q = a[i][0]
            p, letter = _PAULI_PRODUCT[(a[i][1], b[j][1])]
            phase *= p
            if letter is not None:
                out.append((q, letter))
            i += 1; j += 1
    return phase, tuple(out)


def commutes(a: Letters, b: Letters) -> bool:
    """True iff the strings anticommute on an even number of positions."""
    clashes = 0
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i][0] < b[j][0]:
            i += 1
        elif b[j][0] < a[i][0]:
            j += 1
        else:
            if a[i][1] != b[j][1]:
                clashes += 1
            i += 1; j += 1
    return clashes % 2 == 0


def letters_to_masks(letters: Letters) -> tuple[int, int, int]:
    """Bit masks (x, y, z) of the qubits carrying each letter."""
    xm = ym = zm = 0
    for q, letter in letters:
        if letter == "X":
            xm |= 1 << q
        elif letter == "Y":
            ym |= 1 << q
        else:
            zm |= 1 << q
    return xm, ym, zm


def _format_coeff(c: complex) -> str:
    c = complex(c)
    if c.imag == 0.0:
        return repr(c.real)
    if c.real == 0.0:
        return repr(c.imag) + "j"
    return f"({c.real!r}{c.imag:+}j)"


class PauliSum:
    """Canonicalized linear combination of Pauli strings.

    No two stored terms share a letter map; terms with |coefficient| below
    1e-12 are dropped.  Instances are treated as immutable values.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: dict[Letters, complex] | None = None):
        canon: dict[Letters, complex] = {}
        for letters, coeff in (terms or {}).items():
            if abs(coeff) >= COEFF_DROP_TOL:
                canon[letters] = complex(coeff)
        self._terms = canon

    @classmethod
    def zero(cls) -> "PauliSum":
        return cls()

    @classmethod
    def identity(cls, coeff: complex = 1.0) -> "PauliSum":
        return cls({(): coeff})

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[complex, Letters]]) -> "PauliSum":
        acc: dict[Letters, complex] = {}
        for coeff, letters in terms:
            acc[letters] = acc.get(letters, 0.0) + coeff
        return cls(acc)

    def terms(self) -> list[tuple[complex, Letters]]:
        """Terms sorted by letter map, for deterministic iteration."""
        return [(self._terms[k], k) for k in sorted(self._terms)]

    def __iter__(self) -> Iterator[tuple[complex, Letters]]:
        return iter(self.terms())

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, PauliSum) and self._terms == other._terms

    def allclose(self, other: "PauliSum", tol: float = 1e-10) -> bool:
        keys = set(self._terms) | set(other._terms)
        return all(abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) <= tol
                   for k in keys)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        acc = dict(self._terms)
        for letters, coeff in other._terms.items():
            acc[letters] = acc.get(letters, 0.0) + coeff
        return PauliSum(acc)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-1.0) * other

    def __neg__(self) -> "PauliSum":
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            acc: dict[Letters, complex] = {}
            for la, ca in self._terms.items():
                for lb, cb in other._terms.items():
                    phase, letters = multiply_letters(la, lb)
                    acc[letters] = acc.get(letters, 0.0) + ca * cb * phase
            return PauliSum(acc)
        return PauliSum({k: complex(other) * v for k, v in self._terms.items()})

    def __rmul__(self, scalar: complex) -> "PauliSum":
        return self * scalar

    def dagger(self) -> "PauliSum":
        # Pauli strings are Hermitian, so only coefficients conjugate.
        return PauliSum({k: v.conjugate() for k, v in self._terms.items()})

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(v.imag) <= tol for v in self._terms.values())

    def is_diagonal(self) -> bool:
        return all(all(letter == "Z" for _, letter in k) for k in self._terms)

    def max_qubit(self) -> int:
        """Largest qubit index touched; -1 for scalar sums."""
        qubits = [q for letters in self._terms for q, _ in letters]
        return max(qubits) if qubits else -1

    def to_text(self) -> str:
        """One term per line: coefficient then letter-qubit tokens, e.g. '0.125 X0 Y3 Z5'."""
        lines = []
        for coeff, letters in self.terms():
            tokens = " ".join(f"{letter}{q}" for q, letter in letters) or "I"
            lines.append(f"{_format_coeff(coeff)} {tokens}")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str) -> "PauliSum":
        acc: dict[Letters, complex] = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            coeff = complex(parts[0])
            letters = []
            for token in parts[1:]:
                if token == "I":
                    continue
                if token[0] not in "XYZ":
                    raise ValueError(f"bad Pauli token {token!r}")
                letters.append((int(token[1:]), token[0]))
            letters.sort()
            key = tuple(letters)
            acc[key] = acc.get(key, 0.0) + coeff
        return cls(acc)

    def __repr__(self) -> str:
        return f"PauliSum({len(self._terms)} terms)"


def _jw_factor(q: int, kind: str) -> PauliSum:
    chain = tuple((k, "Z") for k in range(q))
    sign = -1j if kind == CREATE else 1j
    return PauliSum.from_terms([
        (0.5, chain + ((q, "X"),)),
        (0.5 * sign, chain + ((q, "Y"),)),
    ])


def jordan_wigner(term: LadderTerm, n_qubits: int) -> PauliSum:
    """Exact Pauli expansion of one ladder-operator product."""
    for q, _ in term.factors:
        if q >= n_qubits:
            raise ValueError(f"orbital index {q} out of range for {n_qubits} qubits")
    result = PauliSum.identity(term.coeff)
    for q, kind in term.factors:
        result = result * _jw_factor(q, kind)
    return result


def jordan_wigner_sum(terms: Iterable[LadderTerm], n_qubits: int) -> PauliSum:
    result = PauliSum.zero()
    for term in terms:
        result = result + jordan_wigner(term, n_qubits)
    return result


def hopping_pair(i: int, j: int, coeff: complex = 1.0) -> list[LadderTerm]:
    """c†_i c_j + c†_j c_i, the Hermitian hopping pair on two orbitals."""
    return [LadderTerm(coeff, ((i, CREATE), (j, ANNIHILATE))),
            LadderTerm(complex(coeff).conjugate(), ((j, CREATE), (i, ANNIHILATE)))]


def number_term(q: int, coeff: complex = 1.0) -> LadderTerm:
    return LadderTerm(coeff, ((q, CREATE), (q, ANNIHILATE)))
