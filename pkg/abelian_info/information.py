"""Sources, entropy, typical projections and prefix-free codes.

A source is a state omega on an algebra A; its output is the element
O_omega = sum omega(x_i) x_i, and entropy is -omega(log2 O_omega) with the
extended log (log 0 = 0). Codes map source symbols to basis strings of the
infinite tensor power of the code alphabet.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Tuple

import numpy as np

from .algebra import Algebra, Element, absolute, apply_function, apply_real, log2_extended
from .config import check_budget, resolve_tol
from .errors import (
    DecodeError,
    DimensionError,
    InvalidCodeError,
    InvalidStateError,
    ValidationError,
)
from .files import CodeFile, TypicalSummary, load_model, to_json, write_text
from .probability import event_le
from .states import State, expectation, trace
from .tensor import basis_string, format_symbols, parse_symbols, power_output, tmul

logger = logging.getLogger(__name__)


def source_output(omega):
    """O_omega = sum omega(x_i) x_i."""
    return Element(omega.algebra, omega.weights)


def shannon_entropy(omega):
    """-omega(log2 O_omega) in bits."""
    h = -float(expectation(omega, apply_function(log2_extended, source_output(omega))))
    return h + 0.0


# ===========================================================
#  Typical projections
# ===========================================================

def compositions(n, parts):
    """All (k_1..k_parts) with k_i >= 0 and sum n, in lexicographic order."""
    if parts == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in compositions(n - first, parts - 1):
            yield (first,) + rest


def multinomial(counts):
    total, out = 0, 1
    for k in counts:
        total += k
        out *= math.comb(total, k)
    return out


def _typical_weights(omega, mode):
    if mode not in ("strict", "lenient"):
        raise ValidationError(f"Unknown mode {mode!r} (strict|lenient)")
    weights = omega.weights
    zero = [int(i) for i in np.flatnonzero(weights <= 0)]
    if zero and mode == "strict":
        raise InvalidStateError(
            f"Symbols {zero} have zero probability; use lenient mode to drop them"
        )
    kept = weights[weights > 0]
    return kept / kept.sum(), zero


def typical_summary(omega, n, eps, mode="strict", method="type-class", budget=None, tol=None):
    """Mass and trace of Q, the projection onto the eps-typical n-strings.

    A string s is typical iff |-(1/n) log2 p(s) - H| <= eps. The type-class
    method groups strings by symbol multiplicities, so it never touches the
    d^n strings themselves; "enumerate" builds Q on the full tensor power.
    """
    tol = resolve_tol(tol)
    if eps <= 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    if n < 1:
        raise ValidationError(f"Block length must be >= 1, got {n}")
    p, dropped = _typical_weights(omega, mode)
    reduced = State(Algebra(len(p)), p)
    h = shannon_entropy(reduced)

    if method == "type-class":
        count, mass = _typical_by_type_class(p, n, eps, h, budget, tol)
    elif method == "enumerate":
        count, mass = _typical_by_enumeration(reduced, n, eps, h, budget, tol)
    else:
        raise ValidationError(f"Unknown method {method!r} (type-class|enumerate)")

    log2_count = math.log2(count) if count else float("-inf")
    lower = math.log2(1 - eps) + n * (h - eps) if eps < 1 else float("-inf")
    upper = n * (h + eps)
    holds = count > 0 and lower - tol <= log2_count <= upper + tol
    logger.debug("typical n=%d eps=%g: mass %.6g, log2 count %.6g", n, eps, mass, log2_count)
    return TypicalSummary(
        n=n,
        eps=eps,
        entropy=h,
        prob_mass=mass,
        count=count,
        log2_count=log2_count,
        lower_log2=lower,
        upper_log2=upper,
        sandwich_holds=holds,
        mode=mode,
        method=method,
        dropped_symbols=dropped,
    )


def _typical_by_type_class(p, n, eps, h, budget, tol):
    d = len(p)
    check_budget(math.comb(n + d - 1, d - 1), budget, f"type classes (n={n}, d={d})")
    logp = np.log2(p)
    count, masses = 0, []
    for counts in compositions(n, d):
        logprob = math.fsum(k * lp for k, lp in zip(counts, logp))
        if abs(-logprob / n - h) > eps + tol:
            continue
        size = multinomial(counts)
        count += size
        masses.append(2.0 ** (math.log2(size) + logprob))
    return count, min(math.fsum(masses), 1.0)


def _typical_by_enumeration(reduced, n, eps, h, budget, tol):
    """Q = support of (eps 1 - |log2(O^n)/n + H|)_+, closed at eps."""
    o_n = power_output(reduced, n, budget)
    deviation = absolute(apply_real(np.log2, o_n) / n + h)
    q = event_le(deviation, eps, tol)
    count = int(round(float(trace(q))))
    mass = math.fsum(o_n.coeffs.real * q.coeffs.real)
    return count, min(mass, 1.0)


def aep_threshold(omega, eps, grid, mode="strict", budget=None):
    """Smallest n in `grid` from which on prob_mass > 1 - eps, or None."""
    grid = sorted(grid)
    above = [typical_summary(omega, n, eps, mode, budget=budget).prob_mass > 1 - eps for n in grid]
    for i, n in enumerate(grid):
        if all(above[i:]):
            return n
    return None


# ===========================================================
#  Prefix-free codes
# ===========================================================

class KraftCheck(NamedTuple):
    holds: bool
    slack: int


def _check_base(base):
    if isinstance(base, bool) or not isinstance(base, (int, np.integer)) or base < 2:
        raise ValidationError(f"Code alphabet size must be an integer >= 2, got {base!r}")
    return int(base)


def _check_lengths(lengths):
    lengths = [int(k) for k in lengths]
    if not lengths or min(lengths) < 1:
        raise ValidationError(f"Word lengths must be a nonempty list of integers >= 1, got {lengths}")
    return lengths


def kraft_check(lengths, base=2):
    """sum n^(k_m - k_i) <= n^(k_m), in exact integers."""
    base = _check_base(base)
    lengths = _check_lengths(lengths)
    top = max(lengths)
    slack = base ** top - sum(base ** (top - k) for k in lengths)
    return KraftCheck(slack >= 0, slack)


@dataclass(frozen=True)
class Code:
    """Codewords per source symbol, as strings over 0..code_dim-1."""

    codewords: Tuple[Tuple[int, ...], ...]
    code_dim: int = 2

    def __post_init__(self):
        code_dim = _check_base(self.code_dim)
        try:
            words = tuple(parse_symbols(w) for w in self.codewords)
        except DimensionError as e:
            raise InvalidCodeError(str(e)) from None
        if not words:
            raise InvalidCodeError("A code needs at least one codeword")
        for i, w in enumerate(words):
            if not w:
                raise InvalidCodeError(f"Codeword {i} is empty")
            if max(w) >= code_dim:
                raise InvalidCodeError(f"Codeword {i} uses a symbol outside 0..{code_dim - 1}")
        object.__setattr__(self, "codewords", words)
        object.__setattr__(self, "code_dim", code_dim)

    @classmethod
    def from_file(cls, path):
        code_file = load_model(CodeFile, path)
        return cls(tuple(code_file.codewords), code_file.code_dim)

    def save(self, path):
        write_text(Path(path), to_json(CodeFile(code_dim=self.code_dim, codewords=self.strings())))

    @property
    def source_dim(self):
        return len(self.codewords)

    @property
    def lengths(self):
        return [len(w) for w in self.codewords]

    @property
    def code_algebra(self):
        return Algebra(self.code_dim)

    def strings(self):
        return [format_symbols(w) for w in self.codewords]

    def images(self):
        """f'(x_i) as basis strings of the infinite tensor power."""
        return [basis_string(self.code_algebra, w) for w in self.codewords]

    def is_prefix_free(self):
        return is_prefix_free(self)

    def encode(self, symbols):
        return encode(self, symbols)

    def decode(self, stream):
        return decode(self, stream)


def is_prefix_free(code):
    """Codeword images pairwise orthogonal: f'(x_i) f'(x_j) = 0 for i != j."""
    images = code.images()
    for i, a in enumerate(images):
        for b in images[i + 1:]:
            if not tmul(a, b).is_zero():
                return False
    return True


def encode(code, symbols):
    out = []
    for s in parse_symbols(symbols):
        if not 0 <= s < code.source_dim:
            raise DimensionError(f"Source symbol {s} out of range 0..{code.source_dim - 1}")
        out.extend(code.codewords[s])
    return tuple(out)


def decode(code, stream):
    """Greedy left-to-right parse; unique for prefix-free codes."""
    table = {w: i for i, w in enumerate(code.codewords)}
    longest = max(code.lengths)
    try:
        stream = parse_symbols(stream)
    except DimensionError as e:
        raise DecodeError(str(e)) from None
    out, buffer = [], ()
    for position, c in enumerate(stream):
        if not 0 <= c < code.code_dim:
            raise DecodeError(f"Symbol {c} at position {position} is outside the code alphabet")
        buffer += (c,)
        if buffer in table:
            out.append(table[buffer])
            buffer = ()
        elif len(buffer) >= longest:
            raise DecodeError(f"No codeword matches {format_symbols(buffer)!r} ending at position {position}")
    if buffer:
        raise DecodeError(f"Stream ends inside a codeword (trailing {format_symbols(buffer)!r})")
    return tuple(out)


def canonical_code(lengths, base=2):
    """A prefix-free code with the given word lengths; exists iff Kraft holds.

    Words are assigned in order of increasing length, each one the next
    integer after the previous word, padded out to the new length.
    """
    base = _check_base(base)
    lengths = _check_lengths(lengths)
    if not kraft_check(lengths, base).holds:
        raise InvalidCodeError(f"Word lengths {lengths} violate the Kraft inequality for base {base}")
    order = sorted(range(len(lengths)), key=lambda i: (lengths[i], i))
    words = [None] * len(lengths)
    value, previous = 0, lengths[order[0]]
    for i in order:
        value *= base ** (lengths[i] - previous)
        previous = lengths[i]
        digits = []
        v = value
        for _ in range(lengths[i]):
            v, r = divmod(v, base)
            digits.append(r)
        words[i] = tuple(reversed(digits))
        value += 1
    return Code(tuple(words), base)


class NoiselessCheck(NamedTuple):
    avg_len: float
    entropy_bound: float
    holds: bool


def noiseless_bound_check(omega, code, tol=None):
    """omega(sum k_i x_i + log2 O_omega) >= 0: mean length against entropy.

    For code alphabets larger than 2 the bound is H / log2(code_dim), which
    the binary statement does not cover; it is reported, not guaranteed.
    """
    tol = resolve_tol(tol)
    if code.source_dim != omega.algebra.dim:
        raise DimensionError(f"Code has {code.source_dim} words for a {omega.algebra.dim}-symbol source")
    if not is_prefix_free(code):
        raise InvalidCodeError("The noiseless coding bound needs a prefix-free code")
    lengths = Element(omega.algebra, code.lengths)
    avg_len = float(expectation(omega, lengths))
    bound = shannon_entropy(omega) / math.log2(code.code_dim)
    if code.code_dim > 2:
        logger.warning("noiseless bound for a %d-ary code alphabet uses H / log2(%d)", code.code_dim, code.code_dim)
    return NoiselessCheck(avg_len, bound, avg_len >= bound - tol)


class GibbsCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def gibbs_check(omega, a, f=log2_extended, tol=None):
    """omega(sum f(omega(x_i)/a_i) x_i) >= f(1) for a_i > 0, sum a_i <= 1.

    Needs x f(x) convex with x f(x) -> 0 at 0; zero-weight terms drop out.
    """
    tol = resolve_tol(tol)
    a = np.asarray(a, dtype=float)
    if a.shape != (omega.algebra.dim,) or np.any(a <= 0) or a.sum() > 1 + tol:
        raise ValidationError("Need one a_i > 0 per basis element with sum a_i <= 1")
    p = omega.weights
    terms = [float(pi * f(pi / ai)) for pi, ai in zip(p, a) if pi > 0]
    lhs = math.fsum(terms)
    rhs = float(f(1.0))
    return GibbsCheck(lhs, rhs, lhs >= rhs - tol)


def binary_recode(n):
    """Fixed-width binary image of n symbols; width = bits of n - 1, MSB first."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2:
        raise ValidationError(f"binary_recode needs n >= 2, got {n!r}")
    width = int(n - 1).bit_length()
    return Code(tuple(tuple(int(b) for b in format(r, f"0{width}b")) for r in range(n)), 2)


def binary_decode(stream, n):
    return decode(binary_recode(n), stream)

