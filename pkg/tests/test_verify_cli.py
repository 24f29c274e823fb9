import json
from unittest.mock import patch

import pytest

from braid_core import BraidWord, canonical_key
from braidpoly_utils import EngineSettings
from link_analysis import DecompositionCache
from verify_cli import (
    CatalogEntry,
    CatalogSpec,
    SweepReport,
    build_catalog,
    check_skein_identity,
    engine_limits,
    enumerate_positive_words,
    hopf_sum,
    main,
    named_examples,
    print_summary,
    resolve_word,
    torus_2k,
    verify_sweep,
    verify_word,
    words_of_shape,
)

FAST_SETTINGS = EngineSettings(memo_check_fraction=1.0, skein_sample_size=10)


@pytest.fixture
def run_cli(capsys):
    """Запускает main без настройки файлового лога и возвращает (код, stdout, stderr)."""
    def run(*argv, settings=None):
        with patch('verify_cli.setup_logging'), \
                patch('verify_cli.get_settings', return_value=settings or EngineSettings()):
            code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return run


# --- Tests for catalog ---

def test_words_of_shape_two_strands():
    """Проверяет единственное слово длины 3 на двух нитях."""
    assert list(words_of_shape(2, 3)) == [BraidWord(2, (1, 1, 1))]


def test_words_of_shape_deduplicates_rotations():
    """Проверяет, что [1,2] и [2,1] дают один класс."""
    assert list(words_of_shape(3, 2)) == [
        BraidWord(3, (1, 1)), BraidWord(3, (1, 2)), BraidWord(3, (2, 2)),
    ]


def test_enumerate_positive_words():
    """Проверяет перечисление при n <= 2, длине <= 4."""
    words = list(enumerate_positive_words(CatalogSpec(2, 4)))
    assert words == [BraidWord(1)] + [BraidWord(2, (1,) * k) for k in range(5)]


def test_named_examples():
    """Проверяет именованные примеры и их слова."""
    examples = dict(named_examples())
    assert examples["trefoil"] == BraidWord(2, (1, 1, 1))
    assert examples["cable_T23"].letters[-3:] == (-1, -1, -1)
    assert examples["H_2"] == BraidWord(3, (1, 1, 2, 2))
    assert examples["T_2_12"] == torus_2k(12)
    assert hopf_sum(3) == BraidWord(4, (1, 1, 2, 2, 3, 3))


def test_resolve_word():
    """Проверяет разбор слова по имени и по записи."""
    assert resolve_word("hopf") == BraidWord(2, (1, 1))
    assert resolve_word("3: 1 2") == BraidWord(3, (1, 2))


def test_build_catalog_dedup_and_order():
    """Тест: T_2_3 и trefoil совпадают по ключу, остаётся имя из именованных примеров."""
    catalog = build_catalog(CatalogSpec(2, 3, frozenset({"torus_2k", "named_examples"})))
    names = [entry.name for entry in catalog]
    assert "trefoil" in names
    assert "T_2_3" not in names
    keys = [canonical_key(entry.word) for entry in catalog]
    assert keys == sorted(keys)
    assert len(keys) == len(set(keys))


def test_build_catalog_unknown_family():
    """Проверяет ошибку для неизвестного семейства."""
    with pytest.raises(ValueError):
        build_catalog(CatalogSpec(2, 3, frozenset({"random_words"})))


# --- Tests for verify_word ---

def test_verify_word_trefoil():
    """Проверяет полную запись для трилистника."""
    record = verify_word(CatalogEntry("trefoil", BraidWord(2, (1, 1, 1))), FAST_SETTINGS, check_memo=True)
    assert record["pass"]
    assert set(record["checks"]) >= {
        "round_trip", "theorem", "decomposition", "conway", "jones", "prime_knot",
        "oracle_jones", "oracle_alexander", "memo",
    }
    assert record["profile"]["genus"] == 1
    assert "error" not in record


def test_verify_word_link():
    """Тест: для зацепления проверки для узлов не выполняются."""
    record = verify_word(CatalogEntry("H_2", hopf_sum(2)), FAST_SETTINGS)
    assert record["pass"]
    assert "conway" not in record
    assert "oracle_alexander" not in record["checks"]


def test_verify_word_cable_is_informational():
    """Проверяет, что неположительное слово не участвует в итоге теоремы."""
    entry = CatalogEntry("cable_T23", dict(named_examples())["cable_T23"])
    record = verify_word(entry, FAST_SETTINGS)
    assert record["informational"] is True
    assert record["theorem"]["pass"] is False
    assert "theorem" not in record["checks"]
    assert record["pass"]


def test_verify_word_engine_error():
    """Проверяет запись ошибки движка."""
    settings = EngineSettings(max_letters=2)
    record = verify_word(CatalogEntry("trefoil", BraidWord(2, (1, 1, 1))), settings)
    assert record["pass"] is False
    assert record["error"].startswith("EngineLimitExceeded")


def test_verify_word_unexpected_error(mocker):
    """Проверяет, что ошибка вне движка записывается в отчёт слова, а не прерывает проверку."""
    mocker.patch('verify_cli.burau_alexander', side_effect=ValueError("сбой определителя"))
    mock_log = mocker.patch('verify_cli.log_exception')
    record = verify_word(CatalogEntry("trefoil", BraidWord(2, (1, 1, 1))), FAST_SETTINGS)
    assert record["pass"] is False
    assert record["error"] == "ValueError: сбой определителя"
    assert record["checks"]["theorem"] is True
    mock_log.assert_called_once()


def test_sweep_survives_unexpected_error(mocker):
    """Тест: прогон доходит до конца, если оракул падает с ValueError на узлах."""
    mocker.patch('verify_cli.burau_alexander', side_effect=ValueError("сбой"))
    mocker.patch('verify_cli.log_exception')
    report = verify_sweep(CatalogSpec(2, 3), FAST_SETTINGS)
    knots = [r for r in report.records if r["profile"]["components"] == 1]
    assert report.summary["words"] == 5
    assert report.summary["errors"] == len(knots) > 0
    assert all(r["pass"] for r in report.records if r["profile"]["components"] > 1)


def test_verify_word_baker_kegel_lspace():
    """Тест: для неположительного узла пишется информационный результат screen, не входящий в проверки."""
    entry = CatalogEntry("baker_kegel", dict(named_examples())["baker_kegel"])
    record = verify_word(entry, FAST_SETTINGS)
    assert record["informational"] is True
    assert record["lspace"]["candidate"] is True
    assert "lspace" not in record["checks"]
    assert record["pass"]


def test_verify_word_truncated_orbit(mocker):
    """Проверяет, что исчерпание лимита узлов при разложении даёт ошибку, а не неверное p."""
    mocker.patch('link_analysis._default_decomposition_cache', DecompositionCache())
    entry = CatalogEntry("sum", BraidWord(4, (1, 3, 1, 2, 2, 3)))
    record = verify_word(entry, EngineSettings(node_cap=1))
    assert record["pass"] is False
    assert record["error"].startswith("OrbitSearchExhausted")


def test_engine_limits():
    """Проверяет лимиты движка, передаваемые в homfly."""
    settings = EngineSettings(node_cap=5, max_strands=6, max_letters=7)
    assert engine_limits(settings) == {"node_cap": 5, "max_strands": 6, "max_letters": 7}


def test_check_skein_identity():
    """Проверяет скейн-соотношение по всем буквам слова."""
    assert check_skein_identity(BraidWord(3, (1, 2, 1, 2, 2)))


# --- Tests for verify_sweep ---

@pytest.mark.parametrize("strands, max_length", [(3, 7), (4, 6)])
def test_sweep_default_catalog(strands, max_length):
    """Тест: прогон по всем положительным словам малого каталога без нарушений."""
    report = verify_sweep(CatalogSpec(strands, max_length), FAST_SETTINGS)
    assert report.ok, [r for r in report.records if not r["pass"]]
    assert report.summary["errors"] == 0
    assert report.summary["words"] == len(build_catalog(CatalogSpec(strands, max_length)))
    assert report.summary["skein_failures"] == []


def test_sweep_families():
    """Проверяет прогон по T(2,k), H_k и именованным примерам."""
    spec = CatalogSpec(1, 0, frozenset({"torus_2k", "hopf_sums", "named_examples"}))
    report = verify_sweep(spec, FAST_SETTINGS)
    assert report.ok
    by_name = {record["name"]: record for record in report.records}
    assert by_name["T_2_7"]["theorem"]["pass"]
    assert by_name["H_6"]["grid"]["p"] == 6
    assert by_name["baker_kegel"]["theorem"]["core_pass"] is True
    assert report.summary["informational"] == 2


def test_sweep_is_deterministic():
    """Тест: два прогона с одинаковыми настройками дают одинаковый отчёт."""
    spec = CatalogSpec(3, 5)
    first = verify_sweep(spec, FAST_SETTINGS)
    second = verify_sweep(spec, FAST_SETTINGS)
    assert first.to_lines() == second.to_lines()


@pytest.mark.slow
def test_sweep_full_catalog():
    """Полный прогон n <= 4, длина <= 10."""
    report = verify_sweep(CatalogSpec(4, 10), EngineSettings(), jobs=2)
    assert report.ok


def test_print_summary(capsys):
    """Проверяет вывод итоговой таблицы и строк с ошибками."""
    report = SweepReport(
        records=[{"name": "bad", "pass": False, "error": "EngineLimitExceeded: лимит"}],
        summary={"words": 1, "passed": 0, "failed": 1, "errors": 1, "informational": 0,
                 "vacuous_items": 0, "oracle_checks": 0, "memo_checks": 0, "skein_checks": 0},
    )
    print_summary(report)
    err = capsys.readouterr().err
    assert "Не пройдено" in err
    assert "bad: EngineLimitExceeded" in err
    assert not report.ok


# --- Tests for main ---

def test_cli_homfly_text(run_cli):
    """Проверяет вывод HOMFLY трилистника в текстовом формате."""
    code, out, _ = run_cli("homfly", "2:", "1", "1", "1")
    assert code == 0
    assert out.strip() == "2*v^2*z^0 + -1*v^4*z^0 + 1*v^2*z^2"


def test_cli_homfly_json(run_cli):
    """Проверяет вывод HOMFLY в JSON."""
    code, out, _ = run_cli("homfly", "--format", "json", "hopf")
    assert code == 0
    assert json.loads(out)["homfly"] == [[1, -1, "1"], [3, -1, "-1"], [1, 1, "1"]]


def test_cli_normalized_cable(run_cli):
    """Тест: нормализованный полином кабеля с родом из многочлена Александера."""
    code, out, _ = run_cli("normalized", "cable_T23")
    data = json.loads(out)
    assert code == 0
    assert data["profile"]["genus"] == 3
    assert [3, 1, "-1"] in data["grid"]["h"]
    assert data["theorem"]["informational"] is True


def test_cli_normalized_override(run_cli):
    """Проверяет заданный вручную профиль."""
    code, out, _ = run_cli("normalized", "cable_T23", "--profile-override", '{"genus": 3}')
    assert code == 0
    assert json.loads(out)["profile"]["source"] == "override"


def test_cli_normalized_bad_override(run_cli):
    """Проверяет код 2 при некорректном JSON."""
    code, _, err = run_cli("normalized", "trefoil", "--profile-override", "{bad")
    assert code == 2
    assert "Ошибка" in err


def test_cli_invariants_negative_word(run_cli):
    """Проверяет код 2 и сообщение для неположительного слова."""
    code, _, err = run_cli("invariants", "3: 1 -1")
    assert code == 2
    assert "Ошибка" in err


def test_cli_syntax_error(run_cli):
    """Проверяет код 2 для некорректного слова."""
    code, _, err = run_cli("jones", "2: 5")
    assert code == 2
    assert "Ошибка" in err


def test_cli_jones_and_conway(run_cli):
    """Проверяет многочлены Джонса и Конвея трилистника."""
    code, out, _ = run_cli("jones", "trefoil")
    assert code == 0
    assert json.loads(out)["text"] == "1*t^1 + 1*t^3 + -1*t^4"
    code, out, _ = run_cli("conway", "trefoil")
    assert json.loads(out)["text"] == "1*z^0 + 1*z^2"


@pytest.mark.parametrize("command", ["homfly", "jones", "conway", "alexander", "screen", "normalized"])
def test_cli_respects_node_cap(run_cli, command):
    """Тест: лимит узлов из настроек действует во всех командах с вычислением HOMFLY."""
    code, _, err = run_cli(command, "3: 1 2 1 2", settings=EngineSettings(node_cap=1))
    assert code == 2
    assert "Ошибка" in err


@pytest.mark.parametrize("command", ["homfly", "jones", "conway", "alexander"])
def test_cli_respects_memo_cap(run_cli, command):
    """Проверяет, что размер кэша HOMFLY берётся из настроек."""
    code, _, err = run_cli(command, "trefoil", settings=EngineSettings(memo_max_entries=1))
    assert code == 2
    assert "переполнен" in err


def test_cli_decompose(run_cli):
    """Проверяет дерево разложения Hopf # Hopf."""
    code, out, _ = run_cli("decompose", "3: 1 1 2 2")
    assert code == 0
    assert json.loads(out)["type"] == "sum"


def test_cli_screen_and_skein(run_cli):
    """Проверяет команды screen и skein-check для трилистника."""
    code, out, _ = run_cli("screen", "trefoil")
    assert code == 0
    assert json.loads(out)["candidate"] is True
    code, out, _ = run_cli("skein-check", "trefoil")
    assert code == 0
    assert json.loads(out)["pass"] is True


def test_cli_catalog(run_cli):
    """Проверяет список слов каталога."""
    code, out, _ = run_cli("catalog", "--strands", "2", "--max-length", "2")
    assert code == 0
    assert out.splitlines() == ["1:", "2:", "2: 1", "2: 1 1"]


def test_cli_verify_exit_code(run_cli, tmp_path, mocker):
    """Проверяет код 1 при непройденных проверках и запись отчёта в файл."""
    report = SweepReport(
        records=[{"name": "x", "pass": False, "checks": {"theorem": False}}],
        summary={"words": 1, "passed": 0, "failed": 1, "errors": 0, "informational": 0,
                 "vacuous_items": 0, "oracle_checks": 0, "memo_checks": 0, "skein_checks": 0},
    )
    out_path = tmp_path / "report.jsonl"
    mock_sweep = mocker.patch('verify_cli.verify_sweep', return_value=report)
    code, _, err = run_cli("verify", "--strands", "2", "--max-length", "3", "--out", str(out_path))
    assert code == 1
    mock_sweep.assert_called_once()
    lines = out_path.read_text(encoding="utf-8").splitlines()
    assert json.loads(lines[-1])["summary"]["failed"] == 1
    assert "✗ x" in err
