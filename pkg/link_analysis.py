"""
Нормализация диаграмм замкнутых кос и геометрические инварианты замыкания:
расщепление, удаление нугаторных перекрёстков, разложение в связную сумму,
эйлерова характеристика и профиль зацепления.
"""
import logging
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from braid_core import (
    DEFAULT_NODE_CAP,
    BraidPolyError,
    BraidWord,
    NonPositiveWord,
    canonical_key,
    closure_components,
    exponent_sum,
    format_braid,
    low_occurrence_index,
    occurrence_counts,
    rewrite_orbit,
)

logger = logging.getLogger(__name__)


class PreconditionViolated(BraidPolyError):
    """Слово не удовлетворяет предусловию операции."""


@dataclass(frozen=True)
class LinkProfile:
    """Набор инвариантов замыкания: #K, χ, s, p и производные m, d, g."""
    strands: int
    components: int
    euler: int
    split: int
    prime: int
    m: int
    d: int
    genus: Optional[int] = None
    source: str = "decomposition"

    def to_json(self) -> Dict[str, object]:
        return {
            "strands": self.strands,
            "components": self.components,
            "euler": self.euler,
            "split": self.split,
            "prime": self.prime,
            "m": self.m,
            "d": self.d,
            "genus": self.genus,
            "source": self.source,
        }


@dataclass(frozen=True)
class DecompositionTree:
    """
    Узел разложения: kind = "split" | "sum" | "prime" | "unknot".
    word -- слово, которое раскладывает этот узел.
    """
    kind: str
    word: BraidWord
    children: Tuple["DecompositionTree", ...] = field(default=())

    @property
    def split_count(self) -> int:
        return len(self.children) if self.kind == "split" else 1

    @property
    def prime_count(self) -> int:
        if self.kind == "prime":
            return 1
        return sum(child.prime_count for child in self.children)

    def leaves(self) -> List["DecompositionTree"]:
        if self.kind in ("prime", "unknot"):
            return [self]
        return [leaf for child in self.children for leaf in child.leaves()]

    def to_json(self) -> Dict[str, object]:
        return {
            "type": self.kind,
            "word": format_braid(self.word),
            "children": [child.to_json() for child in self.children],
        }


def _sign(x: int) -> int:
    return 1 if x > 0 else -1


def split_factors(w: BraidWord) -> List[BraidWord]:
    """
    Разбивает нити на максимальные блоки, не связанные ни одной буквой.

    Возвращает:
        список подслов (по одному на блок) с индексами, перенумерованными с 1;
        изолированная нить даёт пустое слово на одной нити
    """
    used = {abs(x) for x in w.letters}
    blocks = []
    start = 1
    for strand in range(1, w.strands + 1):
        if strand == w.strands or strand not in used:
            blocks.append((start, strand))
            start = strand + 1

    factors = []
    for first, last in blocks:
        letters = tuple(
            _sign(x) * (abs(x) - first + 1) for x in w.letters if first <= abs(x) <= last - 1
        )
        factors.append(BraidWord(last - first + 1, letters))
    return factors


def _remove_single_crossing(w: BraidWord, index: int) -> BraidWord:
    """
    Удаляет единственную букву с индексом index. Остальные буквы делятся на
    младшие (< index) и старшие (> index); эти группы попарно коммутируют,
    поэтому их можно расставить подряд перед удалением.
    """
    position = next(k for k, x in enumerate(w.letters) if abs(x) == index)
    rest = w.letters[position + 1:] + w.letters[:position]
    low = [x for x in rest if abs(x) < index]
    high = [x - _sign(x) for x in rest if abs(x) > index]
    return BraidWord(w.strands - 1, tuple(low + high))


def remove_nugatory(w: BraidWord) -> BraidWord:
    """
    Пока есть индекс с ровно одним вхождением, удаляет этот перекрёсток
    (дестабилизация Маркова) и уменьшает число нитей.
    """
    while True:
        single = [i for i, count in occurrence_counts(w).items() if count == 1]
        if not single:
            return w
        w = _remove_single_crossing(w, single[0])


def _check_composite_preconditions(w: BraidWord) -> None:
    if not w.is_positive:
        raise NonPositiveWord(f"слово {format_braid(w)} содержит отрицательные буквы")
    if not w.letters:
        raise PreconditionViolated("пустое слово не раскладывается")
    counts = occurrence_counts(w)
    if any(count == 0 for count in counts.values()):
        raise PreconditionViolated(f"слово {format_braid(w)} расщеплено")
    if any(count == 1 for count in counts.values()):
        raise PreconditionViolated(f"слово {format_braid(w)} содержит нугаторный перекрёсток")


def _direct_factorization(w: BraidWord) -> Optional[Tuple[BraidWord, BraidWord]]:
    """Ищет сдвиг слова вида u·v, где буквы u имеют индекс < j, а буквы v -- >= j."""
    letters = w.letters
    size = len(letters)
    for r in range(size):
        rotated = letters[r:] + letters[:r]
        for j in range(2, w.strands):
            k = sum(1 for x in rotated if x < j)
            if 0 < k < size and all(x < j for x in rotated[:k]):
                u = BraidWord(j, rotated[:k])
                v = BraidWord(w.strands - j + 1, tuple(x - (j - 1) for x in rotated[k:]))
                return u, v
    return None


def composite_split(w: BraidWord, node_cap: int = DEFAULT_NODE_CAP) -> Optional[Tuple[BraidWord, BraidWord]]:
    """
    Ищет разложение замыкания в связную сумму: сначала по сдвигам самого
    слова, затем по орбите перестроек (слова орбиты с индексом, встречающимся
    не более раза, пропускаются).

    Параметры:
        w: положительное, нерасщеплённое, неприводимое непустое слово
        node_cap: лимит узлов обхода орбиты

    Возвращает:
        (u, v): u на нитях 1..j, v на нитях j..n с индексами, сдвинутыми на j-1;
        None, если разложение не найдено

    Исключения:
        OrbitSearchExhausted, если лимит исчерпан раньше, чем найдено
        разложение или обойдена вся орбита
    """
    _check_composite_preconditions(w)
    visited = 0
    for node in rewrite_orbit(w, node_cap, strict=True):
        visited += 1
        if node.index > 0 and low_occurrence_index(node.word) is not None:
            continue
        pair = _direct_factorization(node.word)
        if pair is not None:
            logger.debug(
                f"Разложение {format_braid(w)} = {format_braid(pair[0])} # {format_braid(pair[1])} "
                f"(слово орбиты #{node.index})"
            )
            return pair
    logger.debug(f"{format_braid(w)}: разложение не найдено, просмотрено {visited} слов орбиты")
    return None


class DecompositionCache:
    """Потокобезопасный кэш деревьев разложения по canonical_key."""

    def __init__(self, max_entries: int = 1_000_000):
        self.max_entries = max_entries
        self._data: Dict[str, DecompositionTree] = {}
        self._lock = threading.Lock()

    def get(self, key: str) -> Optional[DecompositionTree]:
        with self._lock:
            return self._data.get(key)

    def put(self, key: str, tree: DecompositionTree) -> DecompositionTree:
        with self._lock:
            if len(self._data) >= self.max_entries:
                return tree
            return self._data.setdefault(key, tree)

    def clear(self) -> None:
        with self._lock:
            self._data.clear()


_default_decomposition_cache = DecompositionCache()


def _decompose(w: BraidWord, node_cap: int, cache: DecompositionCache) -> DecompositionTree:
    factors = split_factors(w)
    if len(factors) > 1:
        children: List[DecompositionTree] = []
        for factor in factors:
            child = _decompose(factor, node_cap, cache)
            children.extend(child.children if child.kind == "split" else [child])
        return DecompositionTree("split", w, tuple(children))

    key = canonical_key(w)
    cached = cache.get(key)
    if cached is not None:
        return cached

    tree = _decompose_nonsplit(w, node_cap, cache)
    return cache.put(key, tree)


def _decompose_nonsplit(w: BraidWord, node_cap: int, cache: DecompositionCache) -> DecompositionTree:
    reduced = remove_nugatory(w)
    if reduced != w:
        return _decompose(reduced, node_cap, cache)
    if not w.letters:
        return DecompositionTree("unknot", w)

    # Приводимое слово орбиты позволяет уменьшить число нитей
    for node in rewrite_orbit(w, node_cap, strict=True):
        if low_occurrence_index(node.word) is not None:
            logger.debug(f"{format_braid(w)} приводится через {format_braid(node.word)}")
            return _decompose(node.word, node_cap, cache)

    pair = composite_split(w, node_cap)
    if pair is None:
        return DecompositionTree("prime", w)

    children: List[DecompositionTree] = []
    for part in pair:
        child = _decompose(part, node_cap, cache)
        children.extend(child.children if child.kind == "sum" else [child])
    return DecompositionTree("sum", w, tuple(children))


def decompose(w: BraidWord, node_cap: int = DEFAULT_NODE_CAP, cache: Optional[DecompositionCache] = None) -> DecompositionTree:
    """
    Строит дерево разложения замыкания положительного слова на расщеплённые
    и простые множители.

    Параметры:
        w: положительное слово
        node_cap: лимит узлов обхода орбиты
        cache: кэш деревьев (по умолчанию общий для модуля)

    Возвращает:
        DecompositionTree

    Исключения:
        NonPositiveWord, OrbitSearchExhausted (в кэш попадают только
        деревья, построенные по полностью обойдённым орбитам)
    """
    if not w.is_positive:
        raise NonPositiveWord(f"слово {format_braid(w)} содержит отрицательные буквы")
    return _decompose(w, node_cap, cache or _default_decomposition_cache)


def euler_characteristic(w: BraidWord) -> int:
    """χ(K) = n - e(β) для замыкания положительной косы."""
    if not w.is_positive:
        raise NonPositiveWord(f"χ вычисляется только для положительных слов: {format_braid(w)}")
    return w.strands - exponent_sum(w)


def link_profile(w: BraidWord, node_cap: int = DEFAULT_NODE_CAP, cache: Optional[DecompositionCache] = None) -> LinkProfile:
    """
    Собирает профиль замыкания положительного слова.

    Возвращает:
        LinkProfile с #K, χ, s, p, m = -χ + s, d = (-χ + #K)/2 и родом для узлов
    """
    euler = euler_characteristic(w)
    components = closure_components(w)
    tree = decompose(w, node_cap, cache)
    split = tree.split_count
    prime = tree.prime_count
    genus = (1 - euler) // 2 if components == 1 else None
    return LinkProfile(
        strands=w.strands,
        components=components,
        euler=euler,
        split=split,
        prime=prime,
        m=-euler + split,
        d=(-euler + components) // 2,
        genus=genus,
    )
