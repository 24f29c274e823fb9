"""
Каталог слов, проверочный прогон и командная строка.

Примеры:
    python verify_cli.py homfly "2: 1 1 1"
    python verify_cli.py normalized cable_T23
    python verify_cli.py verify --strands 3 --max-length 8 --out report.jsonl
"""
import argparse
import itertools
import json
import logging
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from dotenv import load_dotenv

from braid_core import (
    BraidPolyError,
    BraidWord,
    canonical_key,
    format_braid,
    parse_braid,
)
from braidpoly_utils import EngineSettings, get_settings, log_exception, setup_logging
from homfly_engine import (
    HomflyCache,
    alexander,
    alexander_from_conway,
    conway,
    conway_from_homfly,
    homfly,
    homfly_with_stats,
    jones,
    jones_from_homfly,
    skein_triple,
)
from link_analysis import decompose, link_profile
from normalized_theory import (
    check_theorem_main,
    conway_report,
    denormalize,
    jones_report,
    knot_profile_from_alexander,
    lspace_screen,
    normalize,
    prime_knot_report,
    profile_from_override,
    skein_base_check,
)
from oracles import bracket_jones, burau_alexander

ENV_PATH = os.getenv('ENV_PATH') or 'env/.env'
load_dotenv(ENV_PATH)

logger = logging.getLogger(__name__)

FAMILIES = ("all_positive_words", "torus_2k", "hopf_sums", "named_examples")

# сверка без кэша только для коротких слов
MEMO_CHECK_MAX_LETTERS = 12

_CABLE_PREFIX = (2, 1, 3, 2) * 3


@dataclass(frozen=True)
class CatalogSpec:
    max_strands: int
    max_length: int
    families: FrozenSet[str] = frozenset({"all_positive_words"})


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    word: BraidWord


@dataclass
class SweepReport:
    """Записи по словам (в порядке canonical_key) и итоговые счётчики."""
    records: List[Dict[str, object]]
    summary: Dict[str, object]
    elapsed: float = field(default=0.0, compare=False)

    @property
    def ok(self) -> bool:
        return self.summary.get("failed", 0) == 0

    def to_lines(self) -> List[str]:
        lines = [json.dumps(record, sort_keys=True, ensure_ascii=False) for record in self.records]
        lines.append(json.dumps({"summary": self.summary}, sort_keys=True, ensure_ascii=False))
        return lines


def words_of_shape(strands: int, length: int) -> Iterator[BraidWord]:
    """Положительные слова ровно на strands нитях длины length, по одному на класс сдвигов."""
    if strands == 1:
        if length == 0:
            yield BraidWord(1)
        return
    seen = set()
    for letters in itertools.product(range(1, strands), repeat=length):
        word = BraidWord(strands, letters)
        key = canonical_key(word)
        if key not in seen:
            seen.add(key)
            yield word


def enumerate_positive_words(spec: CatalogSpec) -> Iterator[BraidWord]:
    """Все положительные слова с n <= max_strands и длиной <= max_length."""
    for strands in range(1, spec.max_strands + 1):
        for length in range(spec.max_length + 1):
            yield from words_of_shape(strands, length)


def torus_2k(k: int) -> BraidWord:
    return BraidWord(2, (1,) * k)


def hopf_sum(k: int) -> BraidWord:
    """H_k: связная сумма k зацеплений Хопфа, σ1²σ2²...σ_k² на k+1 нитях."""
    return BraidWord(k + 1, tuple(i for i in range(1, k + 1) for _ in range(2)))


def named_examples() -> List[Tuple[str, BraidWord]]:
    """Именованные примеры: трилистник, Хопф, кабель, пример Бейкера-Кегеля, T(2,k), H_k."""
    examples = [
        ("trefoil", BraidWord(2, (1, 1, 1))),
        ("hopf", BraidWord(2, (1, 1))),
        ("cable_T23", BraidWord(4, _CABLE_PREFIX + (-1, -1, -1))),
        ("baker_kegel", BraidWord(4, _CABLE_PREFIX + (-1, 2, 1, 1, 2))),
    ]
    examples.extend((f"T_2_{k}", torus_2k(k)) for k in range(1, 13))
    examples.extend((f"H_{k}", hopf_sum(k)) for k in range(1, 7))
    return examples


def resolve_word(text: str) -> BraidWord:
    """Слово из строки "<n>: ..." или по имени примера."""
    for name, word in named_examples():
        if text.strip() == name:
            return word
    return parse_braid(text)


def build_catalog(spec: CatalogSpec) -> List[CatalogEntry]:
    """Каталог без повторов canonical_key, упорядоченный по ключу."""
    entries: Dict[str, CatalogEntry] = {}

    def add(name: str, word: BraidWord) -> None:
        entries.setdefault(canonical_key(word), CatalogEntry(name, word))

    for family in sorted(spec.families):
        if family not in FAMILIES:
            raise ValueError(f"неизвестное семейство {family!r}")
    if "named_examples" in spec.families:
        for name, word in named_examples():
            add(name, word)
    if "torus_2k" in spec.families:
        for k in range(1, 13):
            add(f"T_2_{k}", torus_2k(k))
    if "hopf_sums" in spec.families:
        for k in range(1, 7):
            add(f"H_{k}", hopf_sum(k))
    if "all_positive_words" in spec.families:
        for word in enumerate_positive_words(spec):
            add(format_braid(word), word)
    return [entries[key] for key in sorted(entries)]


def engine_limits(settings: EngineSettings) -> Dict[str, int]:
    """Лимиты движка из настроек в виде именованных аргументов homfly."""
    return {
        "node_cap": settings.node_cap,
        "max_strands": settings.max_strands,
        "max_letters": settings.max_letters,
    }


def _profile_for(word: BraidWord, settings: EngineSettings, cache: Optional[HomflyCache] = None):
    """Профиль для проверки: по разложению для положительных слов, по Александеру иначе."""
    if word.is_positive:
        return link_profile(word, settings.node_cap), False
    return knot_profile_from_alexander(word, cache=cache, **engine_limits(settings)), True


def _error_record(record: Dict[str, object], checks: Dict[str, bool], error: Exception) -> Dict[str, object]:
    record["error"] = f"{type(error).__name__}: {error}"
    logger.error(f"{record['name']} ({record['word']}): {record['error']}")
    record["checks"] = checks
    record["pass"] = False
    return record


def verify_word(entry: CatalogEntry, settings: EngineSettings, check_memo: bool = False,
                cache: Optional[HomflyCache] = None) -> Dict[str, object]:
    """
    Полная проверка одного слова: профиль, HOMFLY, P̃, пункты (i), (a)-(f),
    следствия для узлов и сверка с оракулами. Для неположительных узлов
    добавляется информационная запись "lspace".

    Возвращает:
        запись отчёта; ключ "pass" -- итог, "error" -- текст ошибки
    """
    word = entry.word
    limits = engine_limits(settings)
    record: Dict[str, object] = {
        "name": entry.name,
        "word": format_braid(word),
        "key": canonical_key(word),
        "positive": word.is_positive,
    }
    checks: Dict[str, bool] = {}
    try:
        profile, informational = _profile_for(word, settings, cache)
        P, stats = homfly_with_stats(word, cache, **limits)
        grid = normalize(P, profile)
        report = check_theorem_main(grid, informational)
        record.update({
            "profile": profile.to_json(),
            "homfly": P.to_json(),
            "grid": grid.to_json(),
            "theorem": report.to_json(),
            "informational": informational,
            "skein_nodes": stats["skein_nodes"],
        })
        checks["round_trip"] = denormalize(grid) == P
        if not informational:
            checks["theorem"] = report.passed
            if profile.d >= 1:
                checks["decomposition"] = grid.h(1, profile.d - 1) == profile.prime

        is_knot = profile.components == 1
        if is_knot and not informational:
            conway_rec = conway_report(word, profile, cache)
            jones_rec = jones_report(word, profile, cache)
            record["conway"] = conway_rec
            record["jones"] = jones_rec
            checks["conway"] = bool(conway_rec["pass"])
            checks["jones"] = bool(jones_rec["pass"])
            if profile.prime == 1 and profile.genus:
                prime_rec = prime_knot_report(word, profile, cache)
                record["prime_knot"] = prime_rec
                checks["prime_knot"] = bool(prime_rec["pass"])
        if is_knot and informational:
            # необходимые условия L-space узла: только для сведения
            record["lspace"] = lspace_screen(word, profile, cache, **limits)

        if len(word.letters) <= settings.oracle_max_crossings:
            checks["oracle_jones"] = bracket_jones(word, settings.bracket_max_crossings) == jones_from_homfly(P)
            if is_knot:
                checks["oracle_alexander"] = burau_alexander(word) == alexander_from_conway(conway_from_homfly(P))

        if check_memo and len(word.letters) <= MEMO_CHECK_MAX_LETTERS:
            checks["memo"] = homfly(word, use_memo=False, **limits) == P
    except BraidPolyError as e:
        return _error_record(record, checks, e)
    except Exception as e:
        # ошибки вне движка (sympy, ValueError) тоже остаются в записи слова
        log_exception(logger)
        return _error_record(record, checks, e)

    record["checks"] = checks
    record["pass"] = all(checks.values())
    if not record["pass"]:
        failed = ", ".join(name for name, ok in checks.items() if not ok)
        logger.error(f"{entry.name} ({format_braid(word)}): не пройдены проверки {failed}")
    return record


def check_skein_identity(word: BraidWord, cache: Optional[HomflyCache] = None) -> bool:
    """v⁻¹P(L+) - vP(L-) = zP(L0) для каждой буквы слова."""
    for position in range(len(word.letters)):
        triple = skein_triple(word, position)
        left = homfly(triple.plus, cache).shift(-1, 0) - homfly(triple.minus, cache).shift(1, 0)
        if left != homfly(triple.zero, cache).shift(0, 1):
            logger.error(f"Скейн-соотношение нарушено: {format_braid(word)}, позиция {position}")
            return False
    return True


def _verify_task(args: Tuple[CatalogEntry, EngineSettings, bool]) -> Dict[str, object]:
    entry, settings, check_memo = args
    return verify_word(entry, settings, check_memo)


def verify_sweep(spec: CatalogSpec, settings: Optional[EngineSettings] = None, jobs: int = 1) -> SweepReport:
    """
    Прогон по каталогу. Порядок записей -- по canonical_key, независимо от
    порядка завершения задач.

    Параметры:
        spec: описание каталога
        settings: настройки движка
        jobs: число процессов (1 -- в текущем процессе)

    Возвращает:
        SweepReport
    """
    settings = settings or get_settings()
    started = time.monotonic()
    catalog = build_catalog(spec)
    rng = random.Random(settings.random_seed)
    memo_flags = [rng.random() < settings.memo_check_fraction for _ in catalog]
    tasks = [(entry, settings, flag) for entry, flag in zip(catalog, memo_flags)]
    logger.info(f"Проверка {len(catalog)} слов, процессов: {jobs}")

    # в одном процессе у прогона свой кэш
    cache = None if jobs > 1 else HomflyCache(settings.memo_max_entries)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_verify_task, tasks, chunksize=16))
    else:
        records = [verify_word(entry, settings, flag, cache) for entry, flag in zip(catalog, memo_flags)]

    sample_size = min(settings.skein_sample_size, len(catalog))
    sample = rng.sample(catalog, sample_size) if sample_size else []
    skein_failures = [entry.name for entry in sample if not check_skein_identity(entry.word, cache)]

    records.sort(key=lambda r: r["key"])
    # счётчик узлов зависит от состояния кэша, поэтому в записи не попадает
    skein_nodes = sum(r.pop("skein_nodes", 0) for r in records)
    failed = sum(1 for r in records if not r["pass"])
    summary = {
        "words": len(records),
        "passed": len(records) - failed,
        "failed": failed + len(skein_failures),
        "errors": sum(1 for r in records if "error" in r),
        "informational": sum(1 for r in records if r.get("informational")),
        "vacuous_items": sum(
            1 for r in records for item in r.get("theorem", {}).values()
            if isinstance(item, dict) and item.get("vacuous")
        ),
        "memo_checks": sum(1 for r in records if "memo" in r.get("checks", {})),
        "oracle_checks": sum(
            1 for r in records for name in r.get("checks", {}) if name.startswith("oracle_")
        ),
        "skein_checks": sample_size,
        "skein_failures": skein_failures,
        "skein_nodes": skein_nodes,
        "cache_entries": len(cache) if cache is not None else None,
    }
    elapsed = time.monotonic() - started
    logger.info(f"Проверка завершена: {summary['passed']}/{summary['words']} слов, {elapsed:.1f} с")
    return SweepReport(records, summary, elapsed)


def print_summary(report: SweepReport, stream=None) -> None:
    """Таблица итогов для человека."""
    stream = stream or sys.stderr
    rows = [
        ("Слов", report.summary["words"]),
        ("Пройдено", report.summary["passed"]),
        ("Не пройдено", report.summary["failed"]),
        ("Ошибок движка", report.summary["errors"]),
        ("Информационных", report.summary["informational"]),
        ("Тривиальных пунктов", report.summary["vacuous_items"]),
        ("Сверок с оракулами", report.summary["oracle_checks"]),
        ("Сверок без кэша", report.summary["memo_checks"]),
        ("Скейн-проверок", report.summary["skein_checks"]),
        ("Время, с", f"{report.elapsed:.2f}"),
    ]
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        print(f"{name.ljust(width)}  {value}", file=stream)
    for record in report.records:
        if not record["pass"]:
            print(f"  ✗ {record['name']}: {record.get('error') or record.get('checks')}", file=stream)


def _print_json(data) -> None:
    print(json.dumps(data, ensure_ascii=False, indent=2))


def _word_arg(args) -> BraidWord:
    return resolve_word(" ".join(args.word))


def cmd_invariants(args, settings: EngineSettings, cache: HomflyCache) -> int:
    word = _word_arg(args)
    _print_json(link_profile(word, settings.node_cap).to_json())
    return 0


def cmd_homfly(args, settings: EngineSettings, cache: HomflyCache) -> int:
    word = _word_arg(args)
    P = homfly(word, cache, **engine_limits(settings))
    if args.format == "json":
        _print_json({"word": format_braid(word), "homfly": P.to_json()})
    else:
        print(P.to_text())
    return 0


def cmd_normalized(args, settings: EngineSettings, cache: HomflyCache) -> int:
    word = _word_arg(args)
    if args.profile_override:
        try:
            override = json.loads(args.profile_override)
        except json.JSONDecodeError as e:
            print(f"Ошибка: некорректный JSON в --profile-override: {e}", file=sys.stderr)
            return 2
        profile, informational = profile_from_override(word, override), True
    else:
        profile, informational = _profile_for(word, settings, cache)
    P = homfly(word, cache, **engine_limits(settings))
    grid = normalize(P, profile)
    report = check_theorem_main(grid, informational or not word.is_positive)
    _print_json({
        "word": format_braid(word),
        "profile": profile.to_json(),
        "normalized": grid.to_text(),
        "grid": grid.to_json(),
        "theorem": report.to_json(),
    })
    return 0


def cmd_decompose(args, settings: EngineSettings, cache: HomflyCache) -> int:
    _print_json(decompose(_word_arg(args), settings.node_cap).to_json())
    return 0


def cmd_jones(args, settings: EngineSettings, cache: HomflyCache) -> int:
    value = jones(_word_arg(args), cache, **engine_limits(settings))
    _print_json({"text": value.to_text("t", half=True), "terms": value.to_json()})
    return 0


def cmd_conway(args, settings: EngineSettings, cache: HomflyCache) -> int:
    value = conway(_word_arg(args), cache, **engine_limits(settings))
    _print_json({"text": value.to_text("z", half=False), "terms": value.to_json()})
    return 0


def cmd_alexander(args, settings: EngineSettings, cache: HomflyCache) -> int:
    value = alexander(_word_arg(args), cache, **engine_limits(settings))
    _print_json({"text": value.to_text("t", half=True), "terms": value.to_json()})
    return 0


def cmd_screen(args, settings: EngineSettings, cache: HomflyCache) -> int:
    _print_json(lspace_screen(_word_arg(args), cache=cache, **engine_limits(settings)))
    return 0


def cmd_skein_check(args, settings: EngineSettings, cache: HomflyCache) -> int:
    result = skein_base_check(_word_arg(args), cache, node_cap=settings.node_cap)
    _print_json(result)
    return 0 if result["pass"] else 1


def cmd_catalog(args, settings: EngineSettings, cache: HomflyCache) -> int:
    spec = CatalogSpec(args.strands, args.max_length)
    for word in enumerate_positive_words(spec):
        print(format_braid(word))
    return 0


def cmd_verify(args, settings: EngineSettings, cache: HomflyCache) -> int:
    spec = CatalogSpec(args.strands, args.max_length, frozenset(args.families))
    report = verify_sweep(spec, settings, args.jobs)
    lines = report.to_lines()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")
    else:
        print("\n".join(lines))
    print_summary(report)
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="braidpoly",
        description="Полиномы HOMFLY замкнутых кос и проверка свойств нормализованного полинома",
    )
    parser.add_argument("--debug", action="store_true", help="подробный лог")
    sub = parser.add_subparsers(dest="command", required=True)

    word_commands = [
        ("invariants", cmd_invariants, "профиль зацепления (JSON)"),
        ("homfly", cmd_homfly, "полином HOMFLY"),
        ("normalized", cmd_normalized, "нормализованный полином и проверка (i), (a)-(f)"),
        ("decompose", cmd_decompose, "дерево разложения (JSON)"),
        ("jones", cmd_jones, "многочлен Джонса"),
        ("conway", cmd_conway, "многочлен Конвея"),
        ("alexander", cmd_alexander, "многочлен Александера"),
        ("screen", cmd_screen, "необходимые условия L-space узла"),
        ("skein-check", cmd_skein_check, "нормализованное скейн-соотношение"),
    ]
    for name, handler, help_text in word_commands:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("word", nargs="+", help='слово "<n>: i1 i2 ..." или имя примера')
        p.set_defaults(handler=handler)
        if name == "homfly":
            p.add_argument("--format", choices=("text", "json"), default="text")
        if name == "normalized":
            p.add_argument("--profile-override", dest="profile_override",
                           help='JSON {"genus":G,"s":S,"p":P} или {"euler":X,"s":S,"p":P}')

    verify = sub.add_parser("verify", help="проверочный прогон по каталогу")
    verify.add_argument("--strands", type=int, required=True)
    verify.add_argument("--max-length", dest="max_length", type=int, required=True)
    verify.add_argument("--families", nargs="+", choices=FAMILIES, default=["all_positive_words"])
    verify.add_argument("--jobs", type=int, default=1)
    verify.add_argument("--out")
    verify.set_defaults(handler=cmd_verify)

    catalog = sub.add_parser("catalog", help="список слов каталога")
    catalog.add_argument("--strands", type=int, required=True)
    catalog.add_argument("--max-length", dest="max_length", type=int, required=True)
    catalog.set_defaults(handler=cmd_catalog)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    setup_logging("braidpoly", settings, debug=True if args.debug else None)
    cache = HomflyCache(settings.memo_max_entries)
    try:
        return args.handler(args, settings, cache)
    except BraidPolyError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"Ошибка: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        log_exception(logger)
        print(f"Ошибка: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
