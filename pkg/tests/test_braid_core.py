import itertools

import pytest

from braid_core import (
    BraidSyntaxError,
    BraidWord,
    Exhausted,
    LowOccurrence,
    NonPositiveWord,
    OrbitSearchExhausted,
    SquareFound,
    canonical_key,
    closure_components,
    closure_permutation,
    cyclic_free_reduce,
    exponent_sum,
    find_positive_square,
    format_braid,
    least_rotation,
    occurrence_counts,
    parse_braid,
    rewrite_neighbors,
    rewrite_orbit,
)

CABLE_TEXT = "4: 2 1 3 2 2 1 3 2 2 1 3 2 -1 -1 -1"


# --- Tests for parse_braid / format_braid ---

def test_parse_simple_word():
    """Проверяет разбор слова из целых чисел."""
    assert parse_braid("2: 1 1 1") == BraidWord(2, (1, 1, 1))


def test_parse_cable_word(cable_word):
    """Проверяет разбор слова кабельного примера со знаками."""
    assert parse_braid(CABLE_TEXT) == cable_word


def test_parse_power_tokens():
    """Проверяет, что степени вида s1^3 разворачиваются при разборе."""
    assert parse_braid("3: s1^2 s2 s2^-2 -1") == BraidWord(3, (1, 1, 2, -2, -2, -1))


def test_parse_empty_word():
    """Проверяет, что пустое слово допустимо."""
    assert parse_braid("3:") == BraidWord(3, ())


@pytest.mark.parametrize("text", ["3: 1 4", "2: 0", "abc", "2: x1", "0:"])
def test_parse_errors(text):
    """Проверяет ошибки разбора: индекс вне диапазона, нулевая буква, мусор."""
    with pytest.raises(BraidSyntaxError):
        parse_braid(text)


def test_format_roundtrip(cable_word):
    """Проверяет канонический вывод слова."""
    assert format_braid(cable_word) == CABLE_TEXT
    assert format_braid(BraidWord(3)) == "3:"
    assert str(BraidWord(2, (1, -1))) == "2: 1 -1"


def test_braid_word_validation():
    """Тест: конструктор отвергает индексы вне [1, n-1]."""
    with pytest.raises(BraidSyntaxError):
        BraidWord(2, (2,))
    with pytest.raises(BraidSyntaxError):
        BraidWord(0)


# --- Tests for closure invariants ---

@pytest.mark.parametrize("word, expected", [
    (BraidWord(2, (1, 1, 1)), 1),
    (BraidWord(2, (1, 1)), 2),
    (BraidWord(3, ()), 3),
    (BraidWord(3, (1, 2)), 1),
    (BraidWord(4, (1, 1, 3, 3)), 4),
])
def test_closure_components(word, expected):
    """Проверяет число компонент замыкания."""
    assert closure_components(word) == expected


def test_closure_permutation():
    """Проверяет перестановку замыкания σ1σ2 на трёх нитях."""
    assert closure_permutation(BraidWord(3, (1, 2))) == (2, 0, 1)


def test_exponent_sum(trefoil, cable_word):
    """Проверяет сумму показателей."""
    assert exponent_sum(trefoil) == 3
    assert exponent_sum(cable_word) == 9
    assert exponent_sum(BraidWord(3)) == 0


def test_components_parity():
    """Тест: #K ≡ n - e (mod 2) для всех коротких слов на трёх нитях."""
    for length in range(5):
        for letters in itertools.product((-2, -1, 1, 2), repeat=length):
            word = BraidWord(3, letters)
            assert (closure_components(word) - word.strands + exponent_sum(word)) % 2 == 0


def test_occurrence_counts():
    """Проверяет подсчёт вхождений индексов любого знака."""
    assert occurrence_counts(BraidWord(4, (1, -1, 3))) == {1: 2, 2: 0, 3: 1}


# --- Tests for cyclic_free_reduce ---

@pytest.mark.parametrize("letters, expected", [
    ((1, -1), ()),
    ((1, 2, -2, -1), ()),
    ((-1, 2, 1), (2,)),
    ((1, 2, 1), (1, 2, 1)),
])
def test_cyclic_free_reduce(letters, expected):
    """Проверяет сокращение пар σσ⁻¹, в том числе через шов."""
    assert cyclic_free_reduce(BraidWord(3, letters)) == BraidWord(3, expected)


# --- Tests for canonical_key ---

def test_canonical_key_rotation_invariant():
    """Проверяет, что ключ не меняется при циклическом сдвиге."""
    assert canonical_key(BraidWord(3, (2, 1, 1))) == canonical_key(BraidWord(3, (1, 1, 2)))
    assert canonical_key(BraidWord(3, (1, 2))) == canonical_key(BraidWord(3, (2, 1)))
    assert canonical_key(BraidWord(2, (1,))) != canonical_key(BraidWord(3, (1,)))


def test_canonical_key_all_rotations(cable_word):
    """Тест: ключ одинаков для всех сдвигов слова кабельного примера."""
    keys = {canonical_key(cable_word.rotate(k)) for k in range(len(cable_word))}
    assert len(keys) == 1
    assert least_rotation((3, 1, 2)) == (1, 2, 3)


# --- Tests for rewrite_neighbors ---

def test_neighbors_braid_relation():
    """Проверяет замену σ1σ2σ1 на σ2σ1σ2."""
    assert BraidWord(3, (2, 1, 2)) in rewrite_neighbors(BraidWord(3, (1, 2, 1)))


def test_neighbors_commutation():
    """Проверяет перестановку коммутирующих букв."""
    assert BraidWord(4, (3, 1, 2)) in rewrite_neighbors(BraidWord(4, (1, 3, 2)))


def test_neighbors_trefoil_only_rotation(trefoil):
    """Тест: у σ1³ нет соседей, кроме самого себя (сдвиг)."""
    assert rewrite_neighbors(trefoil) == [trefoil]


def test_neighbors_seam_moves():
    """Проверяет ходы через циклический шов."""
    neighbors = rewrite_neighbors(BraidWord(4, (3, 2, 1)))
    # коммутация последней и первой буквы
    assert BraidWord(4, (1, 2, 3)) in neighbors


def test_neighbors_preserve_invariants():
    """Тест: соседи сохраняют длину, число нитей, сумму показателей и #K."""
    word = BraidWord(4, (1, 2, 1, 3, 2, 3))
    for neighbor in rewrite_neighbors(word):
        assert len(neighbor) == len(word)
        assert neighbor.strands == word.strands
        assert exponent_sum(neighbor) == exponent_sum(word)
        assert closure_components(neighbor) == closure_components(word)


def test_neighbors_reject_negative():
    """Проверяет ошибку для слова с отрицательной буквой."""
    with pytest.raises(NonPositiveWord):
        rewrite_neighbors(BraidWord(2, (1, -1)))


# --- Tests for rewrite_orbit / find_positive_square ---

def test_orbit_is_deduplicated():
    """Тест: обход орбиты не повторяет классы сдвигов."""
    nodes = list(rewrite_orbit(BraidWord(3, (1, 2, 1, 2, 1, 2))))
    keys = [canonical_key(node.word) for node in nodes]
    assert len(keys) == len(set(keys))
    assert nodes[0].parent == -1


def test_orbit_respects_node_cap():
    """Проверяет ограничение числа посещённых слов."""
    assert len(list(rewrite_orbit(BraidWord(4, (1, 2, 3, 1, 2, 3)), node_cap=3))) == 3


def test_orbit_strict_raises_on_truncation():
    """Тест: в строгом режиме исчерпание лимита до конца орбиты бросает исключение."""
    with pytest.raises(OrbitSearchExhausted):
        list(rewrite_orbit(BraidWord(4, (1, 3, 1, 2, 2, 3)), node_cap=1, strict=True))


def test_orbit_strict_complete_orbit():
    """Проверяет, что полностью обойдённая орбита в строгом режиме не даёт ошибки."""
    word = BraidWord(3, (1, 2, 1, 2, 1, 2))
    nodes = list(rewrite_orbit(word))
    assert list(rewrite_orbit(word, node_cap=len(nodes), strict=True)) == nodes


def test_square_already_leads():
    """Проверяет, что квадрат в начале слова находится сразу."""
    outcome = find_positive_square(BraidWord(3, (1, 1, 2, 2)))
    assert outcome == SquareFound(BraidWord(3, (1, 1, 2, 2)), 1)


def test_square_via_braid_move():
    """Проверяет поиск квадрата через соотношение кос: [1,2,1,2] -> [2,2,2,1]."""
    outcome = find_positive_square(BraidWord(3, (1, 2, 1, 2)))
    assert isinstance(outcome, SquareFound)
    assert outcome.word == BraidWord(3, (2, 2, 2, 1))
    assert outcome.generator == 2
    assert outcome.path[0] == BraidWord(3, (1, 2, 1, 2))


def test_square_full_twist():
    """Тест: для (σ1σ2)³ квадрат находится и стоит в начале слова."""
    outcome = find_positive_square(BraidWord(3, (1, 2, 1, 2, 1, 2)))
    assert isinstance(outcome, SquareFound)
    assert outcome.word.letters[0] == outcome.word.letters[1]


def test_square_path_replays_moves():
    """Тест: каждое слово пути получается из предыдущего одним ходом."""
    outcome = find_positive_square(BraidWord(4, (1, 2, 3, 1, 2, 3, 1, 2, 3)))
    assert isinstance(outcome, SquareFound)
    for prev, nxt in zip(outcome.path, outcome.path[1:]):
        neighbor_keys = {canonical_key(n) for n in rewrite_neighbors(prev)}
        assert canonical_key(nxt) in neighbor_keys


def test_low_occurrence_reported():
    """Проверяет результат LowOccurrence, если квадрата нет, но есть редкий индекс."""
    outcome = find_positive_square(BraidWord(3, (1, 2)))
    assert isinstance(outcome, LowOccurrence)
    assert outcome.index == 1


def test_exhausted_with_tiny_cap():
    """Проверяет результат Exhausted при исчерпании лимита узлов."""
    outcome = find_positive_square(BraidWord(3, (1, 2, 1, 2)), node_cap=1)
    assert outcome == Exhausted(1)
