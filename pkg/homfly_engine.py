"""
Точная арифметика разреженных многочленов Лорана и вычисление полинома
HOMFLY замкнутой косы по скейн-соотношению

    v^{-1} P(L+) - v P(L-) = z P(L0),    P(unknot) = 1,

с мемоизацией по canonical_key. Отсюда же специализации: Конвей (v = 1),
Джонс (v = t, z = t^{1/2} - t^{-1/2}) и Александер (∇ при z = t^{1/2} - t^{-1/2}).
"""
import logging
import threading
from dataclasses import dataclass
from math import comb
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from braid_core import (
    DEFAULT_NODE_CAP,
    BraidPolyError,
    BraidWord,
    Exhausted,
    LowOccurrence,
    SquareFound,
    canonical_key,
    closure_components,
    cyclic_free_reduce,
    find_positive_square,
    format_braid,
    least_rotation,
    occurrence_counts,
)
from link_analysis import _remove_single_crossing, split_factors

logger = logging.getLogger(__name__)

DEFAULT_MAX_STRANDS = 16
DEFAULT_MAX_LETTERS = 64
DEFAULT_MEMO_MAX_ENTRIES = 10_000_000


class SquareSearchExhausted(BraidPolyError):
    """Поиск квадрата σ_j² не дал результата в пределах лимита узлов."""


class EngineLimitExceeded(BraidPolyError):
    """Превышен лимит движка (нити, буквы, записи кэша)."""


class OddExponent(BraidPolyError):
    """Нечётная степень там, где ожидается чётная."""


class InexactDivision(BraidPolyError):
    """Деление многочленов с ненулевым остатком."""


class LaurentPoly2:
    """
    Многочлен Лорана от двух переменных (v, z) с целыми коэффициентами.
    Хранит словарь (степень v, степень z) -> коэффициент без нулевых записей.
    После создания не изменяется.
    """
    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Mapping[Tuple[int, int], int]] = None):
        self._terms: Dict[Tuple[int, int], int] = {
            (int(p), int(q)): int(c) for (p, q), c in (terms or {}).items() if c
        }

    @classmethod
    def zero(cls) -> "LaurentPoly2":
        return cls()

    @classmethod
    def one(cls) -> "LaurentPoly2":
        return cls({(0, 0): 1})

    @classmethod
    def monomial(cls, p: int, q: int, coeff: int = 1) -> "LaurentPoly2":
        return cls({(p, q): coeff})

    @property
    def terms(self) -> Dict[Tuple[int, int], int]:
        return dict(self._terms)

    def items(self) -> Iterable[Tuple[Tuple[int, int], int]]:
        return self._terms.items()

    def coefficient(self, p: int, q: int) -> int:
        return self._terms.get((p, q), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = LaurentPoly2({(0, 0): other})
        if not isinstance(other, LaurentPoly2):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __neg__(self) -> "LaurentPoly2":
        return LaurentPoly2({k: -c for k, c in self._terms.items()})

    def __add__(self, other) -> "LaurentPoly2":
        if isinstance(other, int):
            other = LaurentPoly2({(0, 0): other})
        if not isinstance(other, LaurentPoly2):
            return NotImplemented
        result = dict(self._terms)
        for key, c in other._terms.items():
            result[key] = result.get(key, 0) + c
        return LaurentPoly2(result)

    __radd__ = __add__

    def __sub__(self, other) -> "LaurentPoly2":
        if isinstance(other, int):
            other = LaurentPoly2({(0, 0): other})
        if not isinstance(other, LaurentPoly2):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "LaurentPoly2":
        return (-self) + other

    def __mul__(self, other) -> "LaurentPoly2":
        if isinstance(other, int):
            return LaurentPoly2({k: c * other for k, c in self._terms.items()})
        if not isinstance(other, LaurentPoly2):
            return NotImplemented
        result: Dict[Tuple[int, int], int] = {}
        for (p1, q1), c1 in self._terms.items():
            for (p2, q2), c2 in other._terms.items():
                key = (p1 + p2, q1 + q2)
                result[key] = result.get(key, 0) + c1 * c2
        return LaurentPoly2(result)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "LaurentPoly2":
        if exponent < 0:
            raise ValueError("отрицательная степень многочлена не определена")
        result = LaurentPoly2.one()
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def shift(self, dp: int, dq: int) -> "LaurentPoly2":
        """Умножение на моном v^dp z^dq."""
        return LaurentPoly2({(p + dp, q + dq): c for (p, q), c in self._terms.items()})

    def mirror(self) -> "LaurentPoly2":
        """P(v, z) -> P(v^{-1}, -z)."""
        return LaurentPoly2({(-p, q): (-c if q % 2 else c) for (p, q), c in self._terms.items()})

    def sorted_terms(self) -> List[Tuple[int, int, int]]:
        """Термы, упорядоченные по (степень z, степень v)."""
        return [(p, q, c) for (p, q), c in sorted(self._terms.items(), key=lambda kv: (kv[0][1], kv[0][0]))]

    def to_text(self, first: str = "v", second: str = "z") -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"{c}*{first}^{p}*{second}^{q}" for p, q, c in self.sorted_terms())

    def to_json(self) -> List[list]:
        return [[p, q, str(c)] for p, q, c in self.sorted_terms()]

    @classmethod
    def from_json(cls, data: Iterable[Iterable]) -> "LaurentPoly2":
        return cls({(int(p), int(q)): int(c) for p, q, c in data})

    def __repr__(self) -> str:
        return f"LaurentPoly2({self.to_text()})"


class HalfLaurent:
    """
    Многочлен Лорана от одной переменной с целыми коэффициентами:
    степень -> коэффициент. Для Джонса и Александера переменная -- s = t^{1/2}.
    """
    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Mapping[int, int]] = None):
        self._terms: Dict[int, int] = {int(e): int(c) for e, c in (terms or {}).items() if c}

    @classmethod
    def one(cls) -> "HalfLaurent":
        return cls({0: 1})

    @classmethod
    def monomial(cls, exponent: int, coeff: int = 1) -> "HalfLaurent":
        return cls({exponent: coeff})

    @property
    def terms(self) -> Dict[int, int]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, exponent: int) -> int:
        return self._terms.get(exponent, 0)

    def is_zero(self) -> bool:
        return not self._terms

    def min_degree(self) -> int:
        return min(self._terms)

    def max_degree(self) -> int:
        return max(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = HalfLaurent({0: other})
        if not isinstance(other, HalfLaurent):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __neg__(self) -> "HalfLaurent":
        return HalfLaurent({e: -c for e, c in self._terms.items()})

    def __add__(self, other) -> "HalfLaurent":
        if isinstance(other, int):
            other = HalfLaurent({0: other})
        if not isinstance(other, HalfLaurent):
            return NotImplemented
        result = dict(self._terms)
        for e, c in other._terms.items():
            result[e] = result.get(e, 0) + c
        return HalfLaurent(result)

    __radd__ = __add__

    def __sub__(self, other) -> "HalfLaurent":
        if isinstance(other, int):
            other = HalfLaurent({0: other})
        return self + (-other)

    def __mul__(self, other) -> "HalfLaurent":
        if isinstance(other, int):
            return HalfLaurent({e: c * other for e, c in self._terms.items()})
        if not isinstance(other, HalfLaurent):
            return NotImplemented
        result: Dict[int, int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                result[e1 + e2] = result.get(e1 + e2, 0) + c1 * c2
        return HalfLaurent(result)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "HalfLaurent":
        if exponent < 0:
            raise ValueError("отрицательная степень многочлена не определена")
        result = HalfLaurent.one()
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def shift(self, delta: int) -> "HalfLaurent":
        return HalfLaurent({e + delta: c for e, c in self._terms.items()})

    def exact_div(self, divisor: "HalfLaurent") -> "HalfLaurent":
        """
        Точное деление. Делимое и делитель приводятся к многочленам со
        свободным членом, затем деление столбиком от старшей степени.

        Исключения:
            InexactDivision при ненулевом остатке
        """
        if divisor.is_zero():
            raise ZeroDivisionError("деление на нулевой многочлен")
        if self.is_zero():
            return HalfLaurent()
        a_min, b_min = self.min_degree(), divisor.min_degree()
        remainder = {e - a_min: c for e, c in self._terms.items()}
        b = {e - b_min: c for e, c in divisor._terms.items()}
        b_deg = max(b)
        b_lead = b[b_deg]
        quotient: Dict[int, int] = {}
        while remainder:
            top = max(remainder)
            if top < b_deg:
                break
            coeff, rest = divmod(remainder[top], b_lead)
            if rest:
                break
            shift = top - b_deg
            quotient[shift] = coeff
            for e, c in b.items():
                key = e + shift
                value = remainder.get(key, 0) - coeff * c
                if value:
                    remainder[key] = value
                else:
                    remainder.pop(key, None)
        if remainder:
            raise InexactDivision(f"остаток при делении {self!r} на {divisor!r}")
        return HalfLaurent(quotient).shift(a_min - b_min)

    def evaluate(self, value: int) -> int:
        """Значение в целой точке (только для неотрицательных степеней или value = ±1)."""
        total = 0
        for e, c in self._terms.items():
            if e < 0 and value not in (1, -1):
                raise ValueError("отрицательная степень в точке, отличной от ±1")
            total += c * (value ** e if e >= 0 else value ** (-e))
        return total

    def sorted_terms(self) -> List[Tuple[int, int]]:
        return sorted(self._terms.items())

    def all_even(self) -> bool:
        return all(e % 2 == 0 for e in self._terms)

    def to_text(self, variable: str = "t", half: bool = True) -> str:
        """
        Текстовая запись. При half=True степени хранятся в s = t^{1/2}:
        если все они чётные, печатаются степени t, иначе дробные.
        """
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            if half:
                power = str(e // 2) if e % 2 == 0 else f"({e}/2)"
            else:
                power = str(e)
            parts.append(f"{c}*{variable}^{power}")
        return " + ".join(parts)

    def to_json(self) -> List[list]:
        return [[e, str(c)] for e, c in self.sorted_terms()]

    def __repr__(self) -> str:
        return f"HalfLaurent({self.to_text(variable='s', half=False)})"


@dataclass(frozen=True)
class SkeinTriple:
    """Тройка скейн-соотношения для буквы position слова."""
    plus: BraidWord
    minus: BraidWord
    zero: BraidWord
    position: int
    delta: int


class HomflyCache:
    """
    Кэш значений HOMFLY по canonical_key: атомарный get-or-insert.
    Конкурентные вычисления одного ключа могут продублировать работу, но
    никогда не увидят частично построенное значение.
    """

    def __init__(self, max_entries: int = DEFAULT_MEMO_MAX_ENTRIES):
        self.max_entries = max_entries
        self.hits = 0
        self.misses = 0
        self._data: Dict[str, LaurentPoly2] = {}
        self._lock = threading.Lock()

    def get(self, key: str) -> Optional[LaurentPoly2]:
        with self._lock:
            value = self._data.get(key)
            if value is None:
                self.misses += 1
            else:
                self.hits += 1
            return value

    def get_or_insert(self, key: str, value: LaurentPoly2) -> LaurentPoly2:
        with self._lock:
            existing = self._data.get(key)
            if existing is not None:
                return existing
            if len(self._data) >= self.max_entries:
                raise EngineLimitExceeded(f"кэш HOMFLY переполнен ({self.max_entries} записей)")
            self._data[key] = value
            return value

    def clear(self) -> None:
        with self._lock:
            self._data.clear()
            self.hits = 0
            self.misses = 0

    def __len__(self) -> int:
        with self._lock:
            return len(self._data)

    def stats(self) -> Dict[str, int]:
        with self._lock:
            return {"entries": len(self._data), "hits": self.hits, "misses": self.misses}


_default_cache = HomflyCache()


def default_cache() -> HomflyCache:
    return _default_cache


_V = LaurentPoly2.monomial


def unlink_value(n: int) -> LaurentPoly2:
    """
    ((v^{-1} - v)/z)^{n-1}, раскрытое по биному.

    Параметры:
        n: число компонент тривиального зацепления, n >= 1
    """
    if n < 1:
        raise ValueError(f"число компонент должно быть >= 1, получено {n}")
    k = n - 1
    return LaurentPoly2({(-k + 2 * i, -k): (-1) ** i * comb(k, i) for i in range(k + 1)})


def skein_triple(w: BraidWord, position: int) -> SkeinTriple:
    """
    Строит тройку (L+, L-, L0) для буквы с номером position.

    Исключения:
        IndexError, если position вне слова
    """
    if not 0 <= position < len(w.letters):
        raise IndexError(f"позиция {position} вне слова длины {len(w.letters)}")
    letters = list(w.letters)
    index = abs(letters[position])
    plus = BraidWord(w.strands, tuple(letters[:position] + [index] + letters[position + 1:]))
    minus = BraidWord(w.strands, tuple(letters[:position] + [-index] + letters[position + 1:]))
    zero = BraidWord(w.strands, tuple(letters[:position] + letters[position + 1:]))
    delta = (closure_components(plus) - closure_components(zero) + 1) // 2
    return SkeinTriple(plus, minus, zero, position, delta)


class _SkeinEvaluator:
    """Одно вычисление HOMFLY: рекурсия по скейн-дереву с общим кэшем."""

    def __init__(self, cache: Optional[HomflyCache], node_cap: int):
        self.cache = cache
        self.node_cap = node_cap
        self.orbit_nodes = 0
        self.skein_nodes = 0

    def compute(self, w: BraidWord) -> LaurentPoly2:
        w = cyclic_free_reduce(w)
        key = canonical_key(w)
        if self.cache is not None:
            cached = self.cache.get(key)
            if cached is not None:
                return cached
        value = self._evaluate(w)
        if self.cache is not None:
            value = self.cache.get_or_insert(key, value)
        return value

    def _evaluate(self, w: BraidWord) -> LaurentPoly2:
        self.skein_nodes += 1
        counts = occurrence_counts(w)

        if any(count == 0 for count in counts.values()):
            factors = split_factors(w)
            result = unlink_value(2) ** (len(factors) - 1)
            for factor in factors:
                result = result * self.compute(factor)
            return result

        single = [i for i, count in counts.items() if count == 1]
        if single:
            return self.compute(_remove_single_crossing(w, single[0]))

        if not w.letters:
            return unlink_value(w.strands)

        if not w.is_positive:
            # P(L-) = v^{-2} P(L+) - v^{-1} z P(L0) в первой отрицательной букве канонического сдвига
            letters = least_rotation(w.letters)
            position = next(k for k, x in enumerate(letters) if x < 0)
            plus = BraidWord(w.strands, letters[:position] + (-letters[position],) + letters[position + 1:])
            zero = BraidWord(w.strands, letters[:position] + letters[position + 1:])
            return _V(-2, 0) * self.compute(plus) - _V(-1, 1) * self.compute(zero)

        outcome = find_positive_square(w, self.node_cap)
        if isinstance(outcome, SquareFound):
            self.orbit_nodes += outcome.visited
            word = outcome.word
            rest = BraidWord(w.strands, word.letters[2:])
            smoothed = BraidWord(w.strands, word.letters[1:])
            # P(L+) = v^2 P(L-) + v z P(L0)
            return _V(2, 0) * self.compute(rest) + _V(1, 1) * self.compute(smoothed)
        if isinstance(outcome, LowOccurrence):
            self.orbit_nodes += outcome.visited
            return self.compute(outcome.word)
        raise SquareSearchExhausted(
            f"квадрат не найден для {format_braid(w)} после {outcome.visited} слов орбиты"
        )


def _check_limits(w: BraidWord, max_strands: int, max_letters: int) -> None:
    if w.strands > max_strands:
        raise EngineLimitExceeded(f"число нитей {w.strands} больше лимита {max_strands}")
    if len(w.letters) > max_letters:
        raise EngineLimitExceeded(f"длина слова {len(w.letters)} больше лимита {max_letters}")


def homfly(
    w: BraidWord,
    cache: Optional[HomflyCache] = None,
    use_memo: bool = True,
    node_cap: int = DEFAULT_NODE_CAP,
    max_strands: int = DEFAULT_MAX_STRANDS,
    max_letters: int = DEFAULT_MAX_LETTERS,
) -> LaurentPoly2:
    """
    Полином HOMFLY замыкания слова (знаки букв произвольные).

    Параметры:
        w: слово косы
        cache: кэш значений (по умолчанию общий для модуля)
        use_memo: False -- вычисление без кэша
        node_cap: лимит узлов поиска квадрата
        max_strands, max_letters: лимиты движка

    Исключения:
        SquareSearchExhausted, EngineLimitExceeded
    """
    result, _ = homfly_with_stats(w, cache, use_memo, node_cap, max_strands, max_letters)
    return result


def homfly_with_stats(w: BraidWord, cache: Optional[HomflyCache] = None, use_memo: bool = True,
                      node_cap: int = DEFAULT_NODE_CAP, max_strands: int = DEFAULT_MAX_STRANDS,
                      max_letters: int = DEFAULT_MAX_LETTERS) -> Tuple[LaurentPoly2, Dict[str, int]]:
    """Как homfly, но дополнительно возвращает счётчики узлов для телеметрии."""
    _check_limits(w, max_strands, max_letters)
    if use_memo and cache is None:
        cache = _default_cache
    evaluator = _SkeinEvaluator(cache if use_memo else None, node_cap)
    result = evaluator.compute(w)
    logger.debug(
        f"HOMFLY {format_braid(w)}: {evaluator.skein_nodes} узлов скейн-дерева, "
        f"{evaluator.orbit_nodes} слов орбит"
    )
    return result, {"skein_nodes": evaluator.skein_nodes, "orbit_nodes": evaluator.orbit_nodes}


_Z_IN_S = HalfLaurent({1: 1, -1: -1})


def _substitute_z(grouped: Mapping[int, HalfLaurent]) -> HalfLaurent:
    """
    Σ_q c_q(s) z^q при z = s - s^{-1}. Отрицательные степени z снимаются
    точным делением на (s - s^{-1})^k.
    """
    if not grouped:
        return HalfLaurent()
    low = min(grouped)
    total = HalfLaurent()
    for q, part in grouped.items():
        total = total + part * (_Z_IN_S ** (q - low))
    if low >= 0:
        return total * (_Z_IN_S ** low)
    return total.exact_div(_Z_IN_S ** (-low))


def conway_from_homfly(P: LaurentPoly2) -> HalfLaurent:
    """∇(z) = P(1, z): переменная результата -- z."""
    result: Dict[int, int] = {}
    for (p, q), c in P.items():
        result[q] = result.get(q, 0) + c
    return HalfLaurent(result)


def jones_from_homfly(P: LaurentPoly2) -> HalfLaurent:
    """V(t) = P(t, t^{1/2} - t^{-1/2}); результат в степенях s = t^{1/2}."""
    grouped: Dict[int, HalfLaurent] = {}
    for (p, q), c in P.items():
        grouped[q] = grouped.get(q, HalfLaurent()) + HalfLaurent.monomial(2 * p, c)
    return _substitute_z(grouped)


def alexander_from_conway(conway_poly: HalfLaurent) -> HalfLaurent:
    """Δ(t) = ∇(t^{1/2} - t^{-1/2}); результат в степенях s = t^{1/2}."""
    grouped = {q: HalfLaurent.one() * c for q, c in conway_poly.items()}
    return _substitute_z(grouped)


def conway(w: BraidWord, cache: Optional[HomflyCache] = None, **limits) -> HalfLaurent:
    """Многочлен Конвея замыкания (переменная z)."""
    return conway_from_homfly(homfly(w, cache, **limits))


def jones(w: BraidWord, cache: Optional[HomflyCache] = None, **limits) -> HalfLaurent:
    """
    Многочлен Джонса в степенях s = t^{1/2}.

    Исключения:
        OddExponent, если у узла получились нечётные степени s
    """
    value = jones_from_homfly(homfly(w, cache, **limits))
    if closure_components(w) == 1 and not value.all_even():
        raise OddExponent(f"у узла {format_braid(w)} многочлен Джонса содержит полуцелые степени t")
    return value


def alexander(w: BraidWord, cache: Optional[HomflyCache] = None, **limits) -> HalfLaurent:
    """Симметризованный многочлен Александера в степенях s = t^{1/2}."""
    return alexander_from_conway(conway(w, cache, **limits))
