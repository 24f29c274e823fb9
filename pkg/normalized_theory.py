"""
Нормализованный полином HOMFLY, таблица коэффициентов h_{i,j} и проверки
свойств (i), (a)-(f), а также следствия для многочленов Конвея, Джонса и
Александера.

    P̃ = (1+α)^{-s+1} (-α)^{-(-χ+2-#K)/2} (v^{-1}z)^{#K-1} P|_{-v²=α}
"""
import logging
from dataclasses import dataclass
from math import comb
from typing import Dict, List, Mapping, Optional, Tuple

from braid_core import (
    DEFAULT_NODE_CAP,
    BraidPolyError,
    BraidWord,
    NonPositiveWord,
    SquareFound,
    closure_components,
    find_positive_square,
    format_braid,
)
from homfly_engine import (
    HalfLaurent,
    HomflyCache,
    InexactDivision,
    LaurentPoly2,
    OddExponent,
    alexander,
    alexander_from_conway,
    conway_from_homfly,
    homfly,
    jones_from_homfly,
    skein_triple,
)
from link_analysis import LinkProfile, PreconditionViolated, link_profile

logger = logging.getLogger(__name__)

_ONE_PLUS_ALPHA = HalfLaurent({0: 1, 1: 1})
_ONE_PLUS_ALPHA_2 = LaurentPoly2({(0, 0): 1, (1, 0): 1})


class NotAKnot(BraidPolyError):
    """Операция определена только для однокомпонентных замыканий."""


@dataclass(frozen=True)
class HGrid:
    """
    Коэффициенты P̃ = Σ h_{i,j} α^i z^{2j}: словарь (i, j) -> h_{i,j}
    без нулей, и профиль зацепления, по которому шла нормализация.
    """
    entries: Mapping[Tuple[int, int], int]
    profile: LinkProfile

    def h(self, i: int, j: int) -> int:
        return self.entries.get((i, j), 0)

    @property
    def all_nonnegative(self) -> bool:
        return all(c >= 0 for c in self.entries.values())

    @property
    def min_alpha(self) -> int:
        return min((i for i, _ in self.entries), default=0)

    def as_poly(self) -> LaurentPoly2:
        """P̃ как многочлен от (α, z)."""
        return LaurentPoly2({(i, 2 * j): c for (i, j), c in self.entries.items()})

    def to_text(self) -> str:
        return self.as_poly().to_text("a", "z")

    def to_json(self) -> Dict[str, object]:
        return {
            "d": self.profile.d,
            "m": self.profile.m,
            "p": self.profile.prime,
            "h": [[i, j, str(c)] for (i, j), c in sorted(self.entries.items())],
            "nonnegative": self.all_nonnegative,
        }


@dataclass(frozen=True)
class TheoremItem:
    """Результат проверки одного пункта: ожидание, наблюдение, итог."""
    name: str
    expected: object
    observed: object
    passed: bool
    vacuous: bool = False

    def to_json(self) -> Dict[str, object]:
        return {
            "expected": self.expected,
            "observed": self.observed,
            "pass": self.passed,
            "vacuous": self.vacuous,
        }


@dataclass(frozen=True)
class TheoremReport:
    """Пункты (i) и (a)-(f) для одного замыкания."""
    items: Dict[str, TheoremItem]
    profile: LinkProfile
    informational: bool = False

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items.values())

    @property
    def core_passed(self) -> bool:
        """Пункты (a)-(f) без условия неотрицательности."""
        return all(item.passed for name, item in self.items.items() if name != "i")

    @property
    def vacuous_count(self) -> int:
        return sum(1 for item in self.items.values() if item.vacuous)

    def to_json(self) -> Dict[str, object]:
        data: Dict[str, object] = {name: item.to_json() for name, item in self.items.items()}
        data["pass"] = self.passed
        data["core_pass"] = self.core_passed
        data["informational"] = self.informational
        return data


def _alpha_shift(profile: LinkProfile) -> int:
    """Показатель t в множителе (-α)^t, t = -(-χ+2-#K)/2."""
    twice = -profile.euler + 2 - profile.components
    if twice % 2:
        raise OddExponent(f"-χ+2-#K = {twice} нечётно: профиль не согласован")
    return -(twice // 2)


def _sign(power: int) -> int:
    return -1 if power % 2 else 1


def normalize(P: LaurentPoly2, profile: LinkProfile) -> HGrid:
    """
    Строит таблицу h_{i,j} нормализованного полинома HOMFLY.

    Параметры:
        P: полином HOMFLY зацепления
        profile: профиль того же зацепления (#K, χ, s)

    Возвращает:
        HGrid

    Исключения:
        OddExponent: нечётная степень v или z
        InexactDivision: P̃ не делится на (1+α)^{s-1}
    """
    k = profile.components
    shifted = P.shift(-(k - 1), k - 1)
    t = _alpha_shift(profile)

    by_z: Dict[int, Dict[int, int]] = {}
    for (p, q), c in shifted.items():
        if p % 2:
            raise OddExponent(f"нечётная степень v^{p} после умножения на (v^-1 z)^{k - 1}")
        # v^{2a} -> (-α)^a, затем умножение на (-α)^t
        power = p // 2 + t
        part = by_z.setdefault(q, {})
        part[power] = part.get(power, 0) + _sign(power) * c

    divisor = _ONE_PLUS_ALPHA ** (profile.split - 1)
    entries: Dict[Tuple[int, int], int] = {}
    for q, part in sorted(by_z.items()):
        try:
            quotient = HalfLaurent(part).exact_div(divisor)
        except InexactDivision:
            raise InexactDivision(
                f"коэффициент при z^{q} не делится на (1+α)^{profile.split - 1}"
            ) from None
        if quotient.is_zero():
            continue
        if q % 2 or q < 0:
            raise OddExponent(f"степень z^{q} после нормализации нечётна или отрицательна")
        for i, c in quotient.items():
            entries[(i, q // 2)] = c
    return HGrid(entries, profile)


def denormalize(grid: HGrid) -> LaurentPoly2:
    """Обратное к normalize: восстанавливает P(v, z) по таблице и профилю."""
    profile = grid.profile
    k = profile.components
    t = _alpha_shift(profile)
    multiplier = _ONE_PLUS_ALPHA ** (profile.split - 1)

    by_j: Dict[int, Dict[int, int]] = {}
    for (i, j), c in grid.entries.items():
        by_j.setdefault(j, {})[i] = c

    terms: Dict[Tuple[int, int], int] = {}
    for j, part in by_j.items():
        for i, c in (HalfLaurent(part) * multiplier).items():
            # α^i = (-1)^i (-α)^{i-t} (-α)^t, (-α)^a -> v^{2a}
            key = (2 * (i - t), 2 * j)
            terms[key] = terms.get(key, 0) + _sign(i) * c
    return LaurentPoly2(terms).shift(k - 1, -(k - 1))


def check_theorem_main(grid: HGrid, informational: bool = False) -> TheoremReport:
    """
    Проверяет пункты (i), (a)-(f) по таблице и профилю.

    Пункты, ссылающиеся на отрицательный индекс j (малое d), считаются
    выполненными с пометкой vacuous.

    Параметры:
        grid: таблица, построенная normalize
        informational: True для слов, не являющихся положительными

    Возвращает:
        TheoremReport
    """
    profile = grid.profile
    m, d, p = profile.m, profile.d, profile.prime
    h = grid.h
    items: Dict[str, TheoremItem] = {}

    items["i"] = TheoremItem(
        "i",
        expected="h_{i,j} >= 0, i >= 0",
        observed={"nonnegative": grid.all_nonnegative, "min_alpha": grid.min_alpha},
        passed=grid.all_nonnegative and grid.min_alpha >= 0,
    )

    outside = [[i, j, str(c)] for (i, j), c in sorted(grid.entries.items()) if i + j > d]
    items["a"] = TheoremItem("a", expected=[], observed=outside, passed=not outside)

    diagonal = [h(i, d - i) for i in range(d + 1)]
    binomials = [comb(p, i) for i in range(d + 1)]
    items["b"] = TheoremItem("b", expected=binomials, observed=diagonal, passed=diagonal == binomials)

    if d >= 1:
        items["c"] = TheoremItem("c", expected=m, observed=h(0, d - 1), passed=h(0, d - 1) == m)
    else:
        items["c"] = TheoremItem("c", expected=m, observed=None, passed=True, vacuous=True)

    if d >= 2:
        expected_d = (m - 1) * (m - 2) // 2 + p - 1
        items["d"] = TheoremItem("d", expected=expected_d, observed=h(0, d - 2), passed=h(0, d - 2) == expected_d)
        lower, upper = (m - 2) * p, (m - 2) * p + m
        observed_e = h(1, d - 2)
        items["e"] = TheoremItem("e", expected=[lower, upper], observed=observed_e,
                                 passed=lower <= observed_e <= upper)
    else:
        items["d"] = TheoremItem("d", expected=None, observed=None, passed=True, vacuous=True)
        items["e"] = TheoremItem("e", expected=None, observed=None, passed=True, vacuous=True)

    if d >= 3:
        expected_f = (m - 1) * (m - 2) * (m - 6) // 6 + h(1, d - 2) - 2 * (p - 1)
        items["f"] = TheoremItem("f", expected=expected_f, observed=h(0, d - 3), passed=h(0, d - 3) == expected_f)
    else:
        items["f"] = TheoremItem("f", expected=None, observed=None, passed=True, vacuous=True)

    report = TheoremReport(items, profile, informational)
    vacuous = [name for name, item in items.items() if item.vacuous]
    if vacuous:
        logger.debug(f"d={d}: пункты {', '.join(vacuous)} выполнены тривиально")
    if informational:
        logger.warning(
            f"Проверка для неположительного слова носит информационный характер: "
            f"(i) {'да' if items['i'].passed else 'нет'}, (a)-(f) {'да' if report.core_passed else 'нет'}"
        )
    return report


def _require_knot(w: BraidWord) -> None:
    if closure_components(w) != 1:
        raise NotAKnot(f"замыкание {format_braid(w)} имеет {closure_components(w)} компонент")


def _jones_head(P: LaurentPoly2) -> Tuple[int, List[int]]:
    """
    Степень младшего члена V(t) и первые четыре коэффициента t^{-mindeg} V(t).
    """
    V = jones_from_homfly(P)
    if not V.all_even():
        raise OddExponent("многочлен Джонса узла содержит полуцелые степени t")
    low = V.min_degree()
    return low // 2, [V.coefficient(low + 2 * i) for i in range(4)]


def _h_value(grid: HGrid) -> int:
    """h = h_{1,d-2} (0, если d < 2)."""
    d = grid.profile.d
    return grid.h(1, d - 2) if d >= 2 else 0


def _check(expected, observed, passed: bool, **extra) -> Dict[str, object]:
    record = {"expected": expected, "observed": observed, "pass": passed}
    record.update(extra)
    return record


def conway_report(w: BraidWord, profile: LinkProfile, cache: Optional[HomflyCache] = None) -> Dict[str, object]:
    """
    Коэффициенты a_{2g-2}, a_{2g-4} многочлена Конвея положительного узла.

    Исключения:
        NotAKnot
    """
    _require_knot(w)
    g, p = profile.genus, profile.prime
    nabla = conway_from_homfly(homfly(w, cache))

    a_top = nabla.coefficient(2 * g - 2)
    report: Dict[str, object] = {
        "word": format_braid(w),
        "genus": g,
        "p": p,
        "a_2g-2": _check(2 * g - p, a_top, a_top == 2 * g - p, vacuous=g < 1),
    }

    a_next = nabla.coefficient(2 * g - 4)
    if g >= 2:
        lower = 2 * g * g - (5 + 2 * p) * g + 3 * p
        upper = 2 * g * g - (3 + 2 * p) * g + p * (p + 5) // 2
        report["a_2g-4"] = _check([lower, upper], a_next, lower <= a_next <= upper)
    else:
        report["a_2g-4"] = _check(None, a_next, True, vacuous=True)

    if p == 1 and g >= 1:
        older_upper = 2 * g * g - 5 * g + 3
        report["older_bounds"] = {
            "a_2g-2": [g, 2 * g - 1],
            "a_2g-4": [g * (g - 1) // 2, older_upper],
            "pass": g <= a_top <= 2 * g - 1 and (g < 2 or g * (g - 1) // 2 <= a_next <= older_upper),
            "informational": True,
        }

    report["pass"] = report["a_2g-2"]["pass"] and report["a_2g-4"]["pass"]
    return report


def jones_report(w: BraidWord, profile: LinkProfile, cache: Optional[HomflyCache] = None) -> Dict[str, object]:
    """
    Начало t^{-g} V(t) = 1 + p t² + k t³ + ... и связь k = h + (1-2g)p.

    Возвращает:
        словарь с коэффициентами c0..c3, проверками и границей -p <= k <= -p+2g

    Исключения:
        NotAKnot
    """
    _require_knot(w)
    g, p = profile.genus, profile.prime
    P = homfly(w, cache)
    mindeg, (c0, c1, c2, c3) = _jones_head(P)
    h = _h_value(normalize(P, profile))
    k = c3

    checks = {
        "mindeg": _check(g, mindeg, mindeg == g),
        "c0": _check(1, c0, c0 == 1),
        "c1": _check(0, c1, c1 == 0),
        "c2": _check(p, c2, c2 == p),
        "k_bounds": _check([-p, -p + 2 * g], k, -p <= k <= -p + 2 * g),
        "k_identity": _check(h + (1 - 2 * g) * p, k, k == h + (1 - 2 * g) * p),
    }
    report: Dict[str, object] = {"word": format_braid(w), "genus": g, "p": p, "k": k, "h": h}
    report.update(checks)
    report["older_upper_bound"] = {
        "bound": f"k <= 3/2*({2 * g - p})",
        "pass": 2 * k <= 3 * (2 * g - p),
        "informational": True,
    }
    report["pass"] = all(item["pass"] for item in checks.values())
    return report


def _alexander_form_ok(delta: HalfLaurent, g: int) -> bool:
    """Ненулевые коэффициенты равны ±1 и чередуются; старший блок t^g - t^{g-1}."""
    terms = sorted(delta.items(), reverse=True)
    if len(terms) < 2 or not delta.all_even():
        return False
    if terms[0] != (2 * g, 1) or terms[1] != (2 * g - 2, -1):
        return False
    if any(abs(c) != 1 for _, c in terms):
        return False
    return all(a[1] * b[1] == -1 for a, b in zip(terms, terms[1:]))


def lspace_screen(w: BraidWord, profile: Optional[LinkProfile] = None,
                  cache: Optional[HomflyCache] = None, **limits) -> Dict[str, object]:
    """
    Три необходимых условия для L-space узла с положительной косой.
    Узел, не прошедший хотя бы одно, не является L-space узлом.
    Без профиля он строится по слову, а для неположительного слова по
    размаху многочлена Александера.

    Исключения:
        NotAKnot
    """
    _require_knot(w)
    if profile is None:
        if w.is_positive:
            profile = link_profile(w, limits.get("node_cap", DEFAULT_NODE_CAP))
        else:
            profile = knot_profile_from_alexander(w, cache=cache, **limits)
    g = profile.genus
    if g == 0:
        return {"word": format_braid(w), "genus": 0, "jones_ok": True, "h_ok": True,
                "alexander_form_ok": True, "candidate": True}

    P = homfly(w, cache, **limits)
    _, (_, _, c2, k) = _jones_head(P)
    h = _h_value(normalize(P, profile))
    delta = alexander_from_conway(conway_from_homfly(P))

    jones_ok = c2 == 1 and k in (0, -1)
    h_ok = h in (2 * g - 2, 2 * g - 1)
    alexander_ok = _alexander_form_ok(delta, g)
    return {
        "word": format_braid(w),
        "genus": g,
        "k": k,
        "h": h,
        "jones_ok": jones_ok,
        "h_ok": h_ok,
        "alexander_form_ok": alexander_ok,
        "candidate": jones_ok and h_ok and alexander_ok,
    }


def knot_profile_from_alexander(w: BraidWord, s: int = 1, p: int = 1,
                                cache: Optional[HomflyCache] = None, **limits) -> LinkProfile:
    """
    Профиль узла по многочлену Александера: g = (t-размах Δ)/2, χ = 1 - 2g.
    Годится для расслоенных узлов, заданных неположительными словами.

    Исключения:
        NotAKnot
    """
    _require_knot(w)
    delta = alexander(w, cache, **limits)
    span = delta.max_degree() - delta.min_degree()
    if span % 4:
        raise OddExponent(f"размах многочлена Александера {span}/2 нечётен")
    genus = span // 4
    euler = 1 - 2 * genus
    logger.info(f"{format_braid(w)}: род {genus} взят из размаха многочлена Александера")
    return LinkProfile(
        strands=w.strands,
        components=1,
        euler=euler,
        split=s,
        prime=p,
        m=-euler + s,
        d=(-euler + 1) // 2,
        genus=genus,
        source="alexander_span",
    )


def profile_from_override(w: BraidWord, override: Mapping[str, int]) -> LinkProfile:
    """
    Профиль из явно заданных значений: {"genus": G, "s": S, "p": P} для узлов
    или {"euler": X, "s": S, "p": P} для зацеплений.

    Исключения:
        PreconditionViolated при неполных или несогласованных данных
    """
    components = closure_components(w)
    s = int(override.get("s", 1))
    p = int(override.get("p", 1))
    if "euler" in override:
        euler = int(override["euler"])
        genus = (1 - euler) // 2 if components == 1 else None
    elif "genus" in override:
        if components != 1:
            raise PreconditionViolated("род задаётся только для узлов; для зацеплений укажите euler")
        genus = int(override["genus"])
        euler = 1 - 2 * genus
    else:
        raise PreconditionViolated("ожидался ключ genus или euler")
    if (-euler + components) % 2:
        raise PreconditionViolated(f"-χ + #K = {-euler + components} нечётно")
    return LinkProfile(
        strands=w.strands,
        components=components,
        euler=euler,
        split=s,
        prime=p,
        m=-euler + s,
        d=(-euler + components) // 2,
        genus=genus,
        source="override",
    )


def skein_base_check(w: BraidWord, cache: Optional[HomflyCache] = None,
                     node_cap: int = DEFAULT_NODE_CAP) -> Dict[str, object]:
    """
    Записывает слово как σ_j² β', строит K_- = замыкание β' и K_0 = замыкание σ_j β'
    и проверяет нормализованное скейн-соотношение

        (1+α)^{s(K)-1} P̃_K = (1+α)^{s(K_-)-1} P̃_{K_-} + z^{2δ} (1+α)^{s(K_0)-1} P̃_{K_0},

    а также d(K) = d(K_0) + δ = d(K_-) + 1.

    Исключения:
        NonPositiveWord, PreconditionViolated (в орбите нет квадрата)
    """
    if not w.is_positive:
        raise NonPositiveWord(f"слово {format_braid(w)} содержит отрицательные буквы")
    outcome = find_positive_square(w, node_cap)
    if not isinstance(outcome, SquareFound):
        raise PreconditionViolated(f"в орбите {format_braid(w)} нет слова вида σ_j² β'")

    word = outcome.word
    triple = skein_triple(word, 0)
    minus = BraidWord(word.strands, word.letters[2:])
    zero = triple.zero

    def weighted(x: BraidWord) -> Tuple[LaurentPoly2, LinkProfile]:
        profile = link_profile(x, node_cap)
        grid = normalize(homfly(x, cache), profile)
        return grid.as_poly() * (_ONE_PLUS_ALPHA_2 ** (profile.split - 1)), profile

    lhs, profile = weighted(word)
    minus_part, minus_profile = weighted(minus)
    zero_part, zero_profile = weighted(zero)
    rhs = minus_part + LaurentPoly2.monomial(0, 2 * triple.delta) * zero_part

    identity_ok = lhs == rhs
    d_ok = profile.d == zero_profile.d + triple.delta == minus_profile.d + 1
    if not identity_ok:
        logger.error(f"{format_braid(w)}: нормализованное скейн-соотношение нарушено")
    return {
        "word": format_braid(w),
        "square_word": format_braid(word),
        "generator": outcome.generator,
        "delta": triple.delta,
        "d": [profile.d, zero_profile.d, minus_profile.d],
        "identity_pass": identity_ok,
        "d_pass": d_ok,
        "pass": identity_ok and d_ok,
    }


def prime_knot_report(w: BraidWord, profile: LinkProfile, cache: Optional[HomflyCache] = None) -> Dict[str, object]:
    """
    Старшие коэффициенты HOMFLY простого положительного узла и третий
    коэффициент α₃ симметризованного многочлена Александера (при t^{g-2}).

    Исключения:
        NotAKnot, PreconditionViolated (узел составной или тривиальный)
    """
    _require_knot(w)
    g = profile.genus
    if profile.prime != 1 or not g:
        raise PreconditionViolated(f"{format_braid(w)}: требуется простой нетривиальный узел")

    P = homfly(w, cache)
    grid = normalize(P, profile)
    h = _h_value(grid)
    _, (_, _, _, k) = _jones_head(P)
    delta = alexander_from_conway(conway_from_homfly(P))
    alpha3 = delta.coefficient(2 * (g - 2))

    def v_part(q: int) -> Dict[int, int]:
        return {p: c for (p, qq), c in P.items() if qq == q}

    checks: Dict[str, Dict[str, object]] = {
        "z^2g": _check({2 * g: 1}, v_part(2 * g), v_part(2 * g) == {2 * g: 1}),
        "z^2g-2": _check({2 * g: 2 * g, 2 * g + 2: -1}, v_part(2 * g - 2),
                         v_part(2 * g - 2) == {2 * g: 2 * g, 2 * g + 2: -1}),
        "h_bounds": _check([2 * g - 2, 4 * g - 2], h, 2 * g - 2 <= h <= 4 * g - 2),
        "alpha3_identity": _check(-h + 2 * g - 1, alpha3, alpha3 == -h + 2 * g - 1),
        "alpha3_bounds": _check([-2 * g + 1, 1], alpha3, -2 * g + 1 <= alpha3 <= 1),
        "alpha3_jones": _check(-k, alpha3, alpha3 == -k),
    }
    if g >= 2:
        third = v_part(2 * g - 4)
        expected = [(2 * g - 1) * (g - 1), -h]
        observed = [third.get(2 * g, 0), third.get(2 * g + 2, 0)]
        checks["z^2g-4"] = _check(expected, observed, observed == expected)
    if g >= 3:
        fourth = v_part(2 * g - 6)
        expected_fourth = (2 * g - 1) * (g - 1) * (2 * g - 6) // 3 + h
        observed_fourth = fourth.get(2 * g, 0)
        checks["z^2g-6"] = _check(expected_fourth, observed_fourth, observed_fourth == expected_fourth)

    # JSON допускает только строковые ключи
    for item in checks.values():
        for key in ("expected", "observed"):
            if isinstance(item[key], dict):
                item[key] = {str(e): c for e, c in sorted(item[key].items())}

    report: Dict[str, object] = {"word": format_braid(w), "genus": g, "h": h, "k": k, "alpha3": alpha3}
    report.update(checks)
    report["pass"] = all(item["pass"] for item in checks.values())
    return report
