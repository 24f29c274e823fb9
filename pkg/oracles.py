"""
Независимые оракулы для сверки специализаций HOMFLY:

  bracket_jones   -- скобка Кауффмана замкнутой косы по сумме состояний,
                     собранной по планарным паросочетаниям (Темперли-Либ);
  burau_alexander -- многочлен Александера через det(I - ρ(β)) для
                     редуцированного представления Бурау (sympy).

С рекурсией по скейн-соотношению код не пересекается.
"""
import logging
from functools import lru_cache
from typing import Dict, List, Tuple

import sympy

from braid_core import BraidPolyError, BraidWord, closure_components, exponent_sum, format_braid
from homfly_engine import HalfLaurent, InexactDivision, OddExponent
from normalized_theory import NotAKnot

logger = logging.getLogger(__name__)

DEFAULT_BRACKET_MAX_CROSSINGS = 24

_t = sympy.Symbol("t")

Matching = Tuple[int, ...]


class OracleLimitExceeded(BraidPolyError):
    """Слово слишком велико для оракула."""


# Значение петли δ = -A² - A⁻², степени по A
_LOOP = HalfLaurent({2: -1, -2: -1})


def _identity(n: int) -> Matching:
    return tuple(list(range(n, 2 * n)) + list(range(n)))


def _cap_cup(n: int, i: int) -> Matching:
    """e_i: дуга между верхними точками i-1, i и между нижними n+i-1, n+i."""
    partner = list(_identity(n))
    a, b = i - 1, i
    partner[a], partner[b] = b, a
    partner[n + a], partner[n + b] = n + b, n + a
    return tuple(partner)


def _compose(upper: Matching, lower: Matching, n: int) -> Tuple[Matching, int]:
    """
    Склеивает нижние точки upper с верхними точками lower.

    Возвращает:
        (паросочетание результата, число замкнутых петель в середине)
    """
    result = [0] * (2 * n)
    visited = [False] * n

    def walk(in_upper: bool, point: int) -> int:
        while True:
            if in_upper:
                q = upper[point]
                if q < n:
                    return q
                visited[q - n] = True
                in_upper, point = False, q - n
            else:
                q = lower[point]
                if q >= n:
                    return q
                visited[q] = True
                in_upper, point = True, n + q

    for x in range(n):
        result[x] = walk(True, x)
    for y in range(n, 2 * n):
        result[y] = walk(False, y)

    loops = 0
    for k in range(n):
        if visited[k]:
            continue
        loops += 1
        current = k
        while not visited[current]:
            visited[current] = True
            j = upper[n + current] - n
            visited[j] = True
            current = lower[j]
    return tuple(result), loops


def _closure_loops(matching: Matching, n: int) -> int:
    """Число окружностей после замыкания: верх i соединяется с низом n+i."""
    visited = [False] * (2 * n)
    loops = 0
    for start in range(2 * n):
        if visited[start]:
            continue
        loops += 1
        current = start
        while not visited[current]:
            visited[current] = True
            other = matching[current]
            visited[other] = True
            current = other + n if other < n else other - n
    return loops


def kauffman_bracket(w: BraidWord) -> HalfLaurent:
    """
    Скобка ⟨D⟩ диаграммы замкнутой косы, ⟨O⟩ = 1; степени по A.

    σ_i -> A·1 + A⁻¹·e_i,  σ_i⁻¹ -> A⁻¹·1 + A·e_i.
    """
    n = w.strands
    states: Dict[Matching, HalfLaurent] = {_identity(n): HalfLaurent.one()}
    generators = {i: _cap_cup(n, i) for i in range(1, n)}
    loop_powers: List[HalfLaurent] = [HalfLaurent.one()]

    for letter in w.letters:
        smooth_a, smooth_b = (1, -1) if letter > 0 else (-1, 1)
        cap = generators[abs(letter)]
        new_states: Dict[Matching, HalfLaurent] = {}
        for matching, coeff in states.items():
            kept = coeff.shift(smooth_a)
            new_states[matching] = new_states.get(matching, HalfLaurent()) + kept

            joined, loops = _compose(matching, cap, n)
            while len(loop_powers) <= loops:
                loop_powers.append(loop_powers[-1] * _LOOP)
            turned = coeff.shift(smooth_b) * loop_powers[loops]
            new_states[joined] = new_states.get(joined, HalfLaurent()) + turned
        states = {m: c for m, c in new_states.items() if not c.is_zero()}

    total = HalfLaurent()
    for matching, coeff in states.items():
        loops = _closure_loops(matching, n)
        total = total + coeff * (_LOOP ** (loops - 1))
    return total


def bracket_jones(w: BraidWord, max_crossings: int = DEFAULT_BRACKET_MAX_CROSSINGS) -> HalfLaurent:
    """
    Многочлен Джонса через скобку Кауффмана: V = (-A³)^{-writhe}⟨D⟩, A = t^{-1/4}.

    Возвращает:
        HalfLaurent в степенях s = t^{1/2}

    Исключения:
        OracleLimitExceeded при числе перекрёстков больше max_crossings
    """
    if len(w.letters) > max_crossings:
        raise OracleLimitExceeded(
            f"{format_braid(w)}: {len(w.letters)} перекрёстков больше лимита {max_crossings}"
        )
    writhe = exponent_sum(w)
    bracket = kauffman_bracket(w)
    sign = -1 if writhe % 2 else 1
    in_a = bracket.shift(-3 * writhe) * sign

    # A^a = t^{-a/4} = s^{-a/2}
    terms = {}
    for a, c in in_a.items():
        if a % 2:
            raise OddExponent(f"{format_braid(w)}: нечётная степень A^{a} в (-A³)^-w⟨D⟩")
        terms[-a // 2] = c
    result = HalfLaurent(terms)
    logger.debug(f"Оракул скобки для {format_braid(w)}: {result.to_text()}")
    return result


@lru_cache(maxsize=None)
def _burau_generator(n: int, i: int, inverse: bool) -> sympy.ImmutableMatrix:
    """Редуцированная матрица Бурау σ_i (или σ_i⁻¹) размера (n-1)×(n-1)."""
    size = n - 1
    m = sympy.eye(size)
    if size == 1:
        m[0, 0] = -_t
    elif i == 1:
        m[0, 0] = -_t
        m[1, 0] = 1
    elif i == n - 1:
        m[size - 2, size - 1] = _t
        m[size - 1, size - 1] = -_t
    else:
        r = i - 2
        m[r, r + 1] = _t
        m[r + 1, r + 1] = -_t
        m[r + 2, r + 1] = 1
    if inverse:
        m = m.inv().applyfunc(sympy.simplify)
    return sympy.ImmutableMatrix(m)


def _laurent_terms(expr) -> Dict[int, sympy.Rational]:
    """Раскладывает рациональную функцию от t, равную многочлену Лорана."""
    numer, denom = sympy.fraction(sympy.cancel(sympy.together(expr)))
    denom_poly = sympy.Poly(denom, _t)
    if len(denom_poly.terms()) != 1:
        raise InexactDivision(f"знаменатель {denom} не является мономом")
    ((shift,), scale), = denom_poly.terms()
    terms = {}
    for (e,), c in sympy.Poly(numer, _t).terms():
        terms[e - shift] = sympy.Rational(c) / scale
    return terms


def burau_alexander(w: BraidWord) -> HalfLaurent:
    """
    Симметризованный многочлен Александера узла:
    Δ = det(I - ρ(β))·(1-t)/(1-tⁿ), затем сдвиг к симметричным степеням
    и выбор знака с Δ(1) = +1.

    Возвращает:
        HalfLaurent в степенях s = t^{1/2}

    Исключения:
        NotAKnot для многокомпонентных замыканий
    """
    if closure_components(w) != 1:
        raise NotAKnot(f"оракул Бурау применим только к узлам: {format_braid(w)}")
    n = w.strands
    if n == 1:
        return HalfLaurent.one()

    product = sympy.eye(n - 1)
    for letter in w.letters:
        product = (product * _burau_generator(n, abs(letter), letter < 0)).applyfunc(sympy.expand)
    det = (sympy.eye(n - 1) - product).det(method="berkowitz")
    terms = _laurent_terms(det * (1 - _t) / (1 - _t ** n))

    low, high = min(terms), max(terms)
    values = {}
    for e, c in terms.items():
        if c.q != 1:
            raise InexactDivision(f"нецелый коэффициент {c} в det(I - ρ)")
        values[2 * e - (low + high)] = int(c)
    result = HalfLaurent(values)
    if sum(values.values()) < 0:
        result = -result
    logger.debug(f"Оракул Бурау для {format_braid(w)}: {result.to_text()}")
    return result
