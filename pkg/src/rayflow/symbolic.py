"""Itineraries over {0, 1, *}, kneading sequences of angles and the identification 0e ~ 1e.

Sequences are eventually periodic ``head(repeat)`` words handled exactly, or
finite truncations when no repeating tail is known.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .angles import ExactAngle, doubling_orbit
from .errors import PeriodicE, StarInKneading

SYMBOLS = ("0", "1", "*")


def _primitive(word: str) -> str:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


@dataclass(frozen=True)
class ItinerarySeq:
    """head followed by repeat^infinity, or a bare truncation when ``repeat`` is None.

    Eventually periodic sequences are always stored canonically (shortest head,
    primitive repeat), so equality of objects is equality of sequences.
    """

    head: str
    repeat: Optional[str] = None

    def __post_init__(self):
        for ch in self.head + (self.repeat or ""):
            if ch not in SYMBOLS:
                raise ValueError(f"bad symbol {ch!r}")
        if self.repeat is not None:
            if not self.repeat:
                raise ValueError("repeat must be nonempty")
            head, rep = self.head, _primitive(self.repeat)
            while head and head[-1] == rep[-1]:
                head, rep = head[:-1], rep[-1] + rep[:-1]
            object.__setattr__(self, "head", head)
            object.__setattr__(self, "repeat", rep)

    # -- construction / printing
    @classmethod
    def parse(cls, text: str) -> "ItinerarySeq":
        m = re.fullmatch(r"([01*]*)(?:\(([01*]+)\))?", text.strip())
        if m is None:
            raise ValueError(f"cannot parse itinerary {text!r}")
        return cls(m.group(1), m.group(2))

    def __str__(self) -> str:
        return self.head if self.repeat is None else f"{self.head}({self.repeat})"

    @property
    def periodic_form(self) -> bool:
        return self.repeat is not None

    # -- access
    def __getitem__(self, n: int) -> str:
        if n < len(self.head):
            return self.head[n]
        if self.repeat is None:
            raise IndexError(f"index {n} beyond truncation depth {len(self.head)}")
        return self.repeat[(n - len(self.head)) % len(self.repeat)]

    def prefix(self, n: int) -> str:
        if self.repeat is None or n <= len(self.head):
            return self.head[:n]
        k = n - len(self.head)
        return self.head + (self.repeat * (k // len(self.repeat) + 1))[:k]

    def depth(self) -> float:
        return float("inf") if self.repeat is not None else len(self.head)

    def prepend(self, symbols: str) -> "ItinerarySeq":
        return ItinerarySeq(symbols + self.head, self.repeat)

    def truncate(self, n: int) -> "ItinerarySeq":
        return ItinerarySeq(self.prefix(n), None)

    def flip(self, k: int) -> "ItinerarySeq":
        sym = self[k]
        if sym == "*":
            raise ValueError("cannot flip a * symbol")
        other = "1" if sym == "0" else "0"
        if self.repeat is None:
            return ItinerarySeq(self.head[:k] + other + self.head[k + 1:], None)
        head = self.prefix(max(k + 1, len(self.head)))
        return ItinerarySeq(head[:k] + other + head[k + 1:], self.rotated_repeat(len(head)))

    def rotated_repeat(self, start: int) -> str:
        """The repeating block read from index ``start`` (start >= len(head))."""
        r = self.repeat
        off = (start - len(self.head)) % len(r)
        return r[off:] + r[:off]

    def has_star(self) -> bool:
        return "*" in self.head or "*" in (self.repeat or "")

    def is_aperiodic(self) -> bool:
        """sigma^n(s) != s for all n >= 1 (exact for eventually periodic forms)."""
        if self.repeat is None:
            raise ValueError("periodicity is undecidable for a bare truncation")
        return len(self.head) > 0


def shift(s: ItinerarySeq, times: int = 1) -> ItinerarySeq:
    if times == 0:
        return s
    if s.repeat is None:
        if len(s.head) < times:
            raise ValueError("cannot shift an exhausted truncation")
        return ItinerarySeq(s.head[times:], None)
    if times <= len(s.head):
        return ItinerarySeq(s.head[times:], s.repeat)
    return ItinerarySeq("", s.rotated_repeat(times))


def _equal(a: ItinerarySeq, b: ItinerarySeq, depth: Optional[int]) -> bool:
    if a.repeat is not None and b.repeat is not None:
        return a == b
    n = int(min(a.depth(), b.depth()))
    if depth is not None:
        n = min(n, depth)
    return a.prefix(n) == b.prefix(n)


# ---------------------------------------------------------------- angles

@dataclass(frozen=True)
class AngleClassification:
    preperiod: int
    period: int
    recurrent: bool


def classify_angle(t: ExactAngle) -> AngleClassification:
    _, pre, per = doubling_orbit(t)
    return AngleClassification(pre, per, pre == 0)


def angle_symbol(theta: ExactAngle, x: ExactAngle) -> str:
    """0 on the open half circle between theta/2 and (theta+1)/2 containing theta,
    1 on the other open half, * on the two endpoints."""
    a, b = theta.fraction / 2, (theta.fraction + 1) / 2
    u = x.fraction
    if u == a or u == b:
        return "*"
    inside = a < u < b
    theta_inside = a < theta.fraction < b
    return "0" if inside == theta_inside else "1"


def angle_itinerary(theta: ExactAngle, t: ExactAngle, depth: Optional[int] = None) -> ItinerarySeq:
    """E^theta(t); exact eventually periodic form, or a truncation to ``depth`` if given."""
    if theta.num == 0:
        raise ValueError("theta must be nonzero")
    orbit, pre, per = doubling_orbit(t)
    word = "".join(angle_symbol(theta, x) for x in orbit)
    seq = ItinerarySeq(word[:pre], word[pre:])
    return seq.truncate(depth) if depth is not None else seq


def kneading(theta: ExactAngle, depth: Optional[int] = None) -> ItinerarySeq:
    seq = angle_itinerary(theta, theta)
    if not classify_angle(theta).recurrent and seq.has_star():
        raise StarInKneading(f"kneading sequence of {theta} contains * although {theta} is not recurrent")
    return seq.truncate(depth) if depth is not None else seq


# ---------------------------------------------------------------- equivalence

def _require_aperiodic(e: ItinerarySeq):
    if e.repeat is None:
        raise ValueError("e must be given in eventually periodic form")
    if not e.is_aperiodic():
        raise PeriodicE(f"{e} is periodic under the shift")


def tail_hits(e: ItinerarySeq, s: ItinerarySeq, depth: Optional[int] = None) -> list[int]:
    """All k >= 0 with sigma^(k+1)(s) = e.

    Exact for eventually periodic s (at most one k when e is aperiodic). For a
    truncation the comparison uses the available symbols and may return several.
    """
    if s.repeat is not None:
        m = len(s.head) - len(e.head)
        if m >= 1 and shift(s, m) == e:
            return [m - 1]
        return []
    n = len(s.head) if depth is None else min(depth, len(s.head))
    return [k for k in range(n - 1) if s.head[k + 1:n] == e.prefix(n - k - 1)]


def equivalent_wrt(e: ItinerarySeq, a: ItinerarySeq, s: ItinerarySeq, depth: Optional[int] = None) -> bool:
    """a ~_e s: equal, or equal off one index k with sigma^(k+1)(a) = sigma^(k+1)(s) = e."""
    _require_aperiodic(e)
    if _equal(a, s, depth):
        return True
    ka = set(tail_hits(e, a, depth))
    for k in sorted(ka & set(tail_hits(e, s, depth))):
        if a.prefix(k) == s.prefix(k):
            return True
    return False


def fiber_partner(e: ItinerarySeq, s: ItinerarySeq, depth: Optional[int] = None) -> Optional[ItinerarySeq]:
    """The unique a != s with a ~_e s, or None.

    Several admissible k can only occur for truncated input; the smallest is
    used and the input cannot be the itinerary of an actual point.
    """
    _require_aperiodic(e)
    ks = tail_hits(e, s, depth)
    if not ks:
        return None
    return s.flip(ks[0])


def words(length: int, alphabet: str = "01"):
    """All words of the given length over ``alphabet`` in lexicographic order."""
    if length == 0:
        yield ""
        return
    for w in words(length - 1, alphabet):
        for ch in alphabet:
            yield w + ch


def sample_set(e: ItinerarySeq, max_len: int) -> list[ItinerarySeq]:
    """w.tail for every binary word w of length <= max_len and tail in {e, 0^inf, 1^inf}."""
    tails = [e, ItinerarySeq("", "0"), ItinerarySeq("", "1")]
    seen = {}
    for n in range(max_len + 1):
        for w in words(n):
            for tl in tails:
                s = tl.prepend(w)
                seen.setdefault(s, None)
    return list(seen)
