"""
Слова в группе кос: представление, разбор текстового формата, перестановка
замыкания, локальные перестройки слова и поиск квадрата σ_j² по орбите
перестроек.

Формат слова: "<n>: i1 i2 ...", где ik -- целое со знаком (σ_|ik|^sign(ik)),
либо токен "s<i>" / "s<i>^<e>" (степень разворачивается при разборе).
"""
import logging
import re
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

logger = logging.getLogger(__name__)

DEFAULT_NODE_CAP = 1_000_000

_HEADER_RE = re.compile(r"^\s*(\d+)\s*:(.*)$", re.DOTALL)
_INT_RE = re.compile(r"^[+-]?\d+$")
_POWER_RE = re.compile(r"^s(\d+)(?:\^([+-]?\d+))?$")


class BraidPolyError(Exception):
    """Базовая ошибка пакета."""


class BraidSyntaxError(BraidPolyError):
    """Ошибка разбора или некорректное слово."""


class NonPositiveWord(BraidPolyError):
    """Операция определена только для положительных слов."""


class OrbitSearchExhausted(BraidPolyError):
    """Лимит узлов исчерпан до полного обхода орбиты перестроек."""


@dataclass(frozen=True)
class BraidWord:
    """
    Коса на strands нитях как последовательность образующих со знаком.

    Буква k обозначает σ_|k|^sign(k), 1 <= |k| <= strands - 1.
    """
    strands: int
    letters: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(x) for x in self.letters))
        if self.strands < 1:
            raise BraidSyntaxError(f"число нитей должно быть >= 1, получено {self.strands}")
        for letter in self.letters:
            if letter == 0 or abs(letter) > self.strands - 1:
                raise BraidSyntaxError(
                    f"индекс {abs(letter)} вне диапазона [1, {self.strands - 1}]"
                )

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return format_braid(self)

    @property
    def is_positive(self) -> bool:
        return all(x > 0 for x in self.letters)

    def rotate(self, k: int) -> "BraidWord":
        """Циклический сдвиг влево на k букв (сопряжение)."""
        if not self.letters:
            return self
        k %= len(self.letters)
        return BraidWord(self.strands, self.letters[k:] + self.letters[:k])

    def to_json(self) -> Dict[str, object]:
        return {"strands": self.strands, "letters": list(self.letters)}


@dataclass(frozen=True)
class OrbitNode:
    """Вершина обхода орбиты: слово, номер родителя (-1 для корня) и собственный номер."""
    word: BraidWord
    parent: int
    index: int


@dataclass(frozen=True)
class SquareFound:
    """Найдено слово орбиты вида σ_j σ_j u (квадрат стоит в начале)."""
    word: BraidWord
    generator: int
    path: Tuple[BraidWord, ...] = field(default=(), compare=False)
    visited: int = field(default=0, compare=False)


@dataclass(frozen=True)
class LowOccurrence:
    """В орбите найдено слово, где индекс встречается не более одного раза."""
    word: BraidWord
    index: int
    visited: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Exhausted:
    """Орбита (или лимит узлов) исчерпана без результата."""
    visited: int


RewriteOutcome = Union[SquareFound, LowOccurrence, Exhausted]


def parse_braid(text: str) -> BraidWord:
    """
    Разбирает строку вида "<n>: <токены>".

    Параметры:
        text: строка с косой, например "2: 1 1 1" или "3: s1^2 s2 -1"

    Возвращает:
        BraidWord с развёрнутыми степенями

    Исключения:
        BraidSyntaxError при синтаксической ошибке или индексе вне [1, n-1]
    """
    match = _HEADER_RE.match(text or "")
    if not match:
        raise BraidSyntaxError(f"ожидался формат '<n>: <буквы>', получено {text!r}")
    strands = int(match.group(1))
    if strands < 1:
        raise BraidSyntaxError(f"число нитей должно быть >= 1, получено {strands}")

    letters: List[int] = []
    for token in match.group(2).split():
        if _INT_RE.match(token):
            value = int(token)
            if value == 0:
                raise BraidSyntaxError("буква 0 недопустима")
            letters.append(value)
            continue
        power = _POWER_RE.match(token)
        if not power:
            raise BraidSyntaxError(f"нераспознанный токен {token!r}")
        index = int(power.group(1))
        exponent = int(power.group(2)) if power.group(2) is not None else 1
        if index == 0:
            raise BraidSyntaxError("образующая s0 недопустима")
        sign = 1 if exponent > 0 else -1
        letters.extend([sign * index] * abs(exponent))
    return BraidWord(strands, tuple(letters))


def format_braid(w: BraidWord) -> str:
    """Канонический вывод: "<n>: i1 i2 ..."."""
    if not w.letters:
        return f"{w.strands}:"
    return f"{w.strands}: " + " ".join(str(x) for x in w.letters)


def closure_permutation(w: BraidWord) -> Tuple[int, ...]:
    """Перестановка замыкания: начальная позиция нити -> конечная позиция."""
    result = []
    for start in range(w.strands):
        pos = start
        for letter in w.letters:
            i = abs(letter)
            if pos == i - 1:
                pos = i
            elif pos == i:
                pos = i - 1
        result.append(pos)
    return tuple(result)


def closure_components(w: BraidWord) -> int:
    """Число компонент замыкания (#K) -- число циклов перестановки."""
    perm = closure_permutation(w)
    seen = [False] * w.strands
    cycles = 0
    for start in range(w.strands):
        if seen[start]:
            continue
        cycles += 1
        pos = start
        while not seen[pos]:
            seen[pos] = True
            pos = perm[pos]
    return cycles


def exponent_sum(w: BraidWord) -> int:
    """Сумма знаков букв e(β)."""
    return sum(1 if x > 0 else -1 for x in w.letters)


def occurrence_counts(w: BraidWord) -> Dict[int, int]:
    """Число вхождений каждого индекса 1..n-1 (любого знака)."""
    counts = Counter(abs(x) for x in w.letters)
    return {i: counts.get(i, 0) for i in range(1, w.strands)}


def cyclic_free_reduce(w: BraidWord) -> BraidWord:
    """
    Удаляет пары σ_i σ_i^{-1} (в том числе через циклический шов) до упора.
    Замыкание не меняется.
    """
    stack: List[int] = []
    for letter in w.letters:
        if stack and stack[-1] == -letter:
            stack.pop()
        else:
            stack.append(letter)
    start, end = 0, len(stack)
    while end - start >= 2 and stack[start] == -stack[end - 1]:
        start += 1
        end -= 1
    return BraidWord(w.strands, tuple(stack[start:end]))


def least_rotation(letters: Sequence[int]) -> Tuple[int, ...]:
    """Лексикографически наименьший циклический сдвиг."""
    letters = tuple(letters)
    if not letters:
        return letters
    return min(letters[i:] + letters[:i] for i in range(len(letters)))


def canonical_key(w: BraidWord) -> str:
    """Ключ мемоизации: число нитей + наименьший циклический сдвиг букв."""
    return f"{w.strands}:" + ",".join(str(x) for x in least_rotation(w.letters))


def _require_positive(w: BraidWord) -> None:
    if not w.is_positive:
        raise NonPositiveWord(f"слово {format_braid(w)} содержит отрицательные буквы")


def rewrite_neighbors(w: BraidWord) -> List[BraidWord]:
    """
    Все слова, получаемые одним ходом: сдвиг на одну букву, перестановка
    соседних коммутирующих букв (|i-j| >= 2), замена σ_iσ_jσ_i на σ_jσ_iσ_j
    (|i-j| = 1). Ходы применяются и через циклический шов.

    Порядок: сдвиг, коммутации слева направо, соотношения кос слева направо.
    Повторы убраны, порядок первого появления сохранён.
    """
    _require_positive(w)
    letters = w.letters
    size = len(letters)
    result: List[BraidWord] = []
    seen = set()

    def emit(new_letters):
        new_letters = tuple(new_letters)
        if new_letters not in seen:
            seen.add(new_letters)
            result.append(BraidWord(w.strands, new_letters))

    if size >= 2:
        emit(letters[1:] + letters[:1])

        for i in range(size):
            j = (i + 1) % size
            if abs(letters[i] - letters[j]) >= 2:
                swapped = list(letters)
                swapped[i], swapped[j] = swapped[j], swapped[i]
                emit(swapped)

    if size >= 3:
        for i in range(size):
            a, b, c = i, (i + 1) % size, (i + 2) % size
            if letters[a] == letters[c] and abs(letters[a] - letters[b]) == 1:
                moved = list(letters)
                moved[a], moved[b], moved[c] = letters[b], letters[a], letters[b]
                emit(moved)
    return result


def rewrite_orbit(w: BraidWord, node_cap: int = DEFAULT_NODE_CAP, strict: bool = False) -> Iterator[OrbitNode]:
    """
    Обход в ширину орбиты перестроек с отсевом по canonical_key.

    Параметры:
        w: положительное слово
        node_cap: максимум посещённых слов
        strict: при исчерпании лимита до конца орбиты бросать исключение,
            а не останавливаться молча

    Возвращает:
        итератор OrbitNode в порядке посещения

    Исключения:
        OrbitSearchExhausted (только при strict=True)
    """
    _require_positive(w)
    seen = {canonical_key(w)}
    queue = deque([(w, -1)])
    visited = 0
    while queue and visited < node_cap:
        word, parent = queue.popleft()
        index = visited
        visited += 1
        yield OrbitNode(word, parent, index)
        for neighbor in rewrite_neighbors(word):
            key = canonical_key(neighbor)
            if key not in seen:
                seen.add(key)
                queue.append((neighbor, index))
    if queue and strict:
        raise OrbitSearchExhausted(
            f"орбита {format_braid(w)} не обойдена: лимит {node_cap} слов, в очереди ещё {len(queue)}"
        )


def square_position(w: BraidWord) -> Optional[int]:
    """Первая позиция i, для которой letters[i] == letters[(i+1) mod L]."""
    size = len(w.letters)
    if size < 2:
        return None
    for i in range(size):
        if w.letters[i] == w.letters[(i + 1) % size]:
            return i
    return None


def low_occurrence_index(w: BraidWord) -> Optional[int]:
    """Наименьший индекс, встречающийся не более одного раза, либо None."""
    for index, count in occurrence_counts(w).items():
        if count <= 1:
            return index
    return None


def orbit_path(nodes: Sequence[OrbitNode], index: int) -> Tuple[BraidWord, ...]:
    """Цепочка родителей от корня обхода до вершины index."""
    chain = []
    while index >= 0:
        node = nodes[index]
        chain.append(node.word)
        index = node.parent
    return tuple(reversed(chain))


def find_positive_square(w: BraidWord, node_cap: int = DEFAULT_NODE_CAP) -> RewriteOutcome:
    """
    Ищет в орбите перестроек слово с циклически соседней парой равных букв.

    Параметры:
        w: положительное слово, каждый индекс встречается >= 2 раз
        node_cap: максимум посещённых слов

    Возвращает:
        SquareFound (слово сдвинуто так, что квадрат стоит в начале),
        иначе LowOccurrence для первого посещённого слова с индексом,
        встречающимся <= 1 раза, иначе Exhausted
    """
    nodes: List[OrbitNode] = []
    low: Optional[Tuple[BraidWord, int]] = None
    for node in rewrite_orbit(w, node_cap):
        nodes.append(node)
        position = square_position(node.word)
        if position is not None:
            rotated = node.word.rotate(position)
            logger.debug(f"Квадрат σ_{rotated.letters[0]} найден после {len(nodes)} слов орбиты")
            return SquareFound(rotated, rotated.letters[0], orbit_path(nodes, node.index), len(nodes))
        if low is None:
            index = low_occurrence_index(node.word)
            if index is not None:
                low = (node.word, index)

    if low is not None:
        return LowOccurrence(low[0], low[1], len(nodes))
    logger.debug(f"Квадрат не найден, просмотрено {len(nodes)} слов")
    return Exhausted(len(nodes))
