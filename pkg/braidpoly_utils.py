"""
Общие утилиты: загрузка настроек движка, настройка логирования, форматтер
времени с учётом часового пояса.
"""
import json
import logging
import os
import sys
import traceback
from dataclasses import dataclass, fields, replace
from datetime import datetime
from logging.handlers import TimedRotatingFileHandler
from typing import Any, Dict, Optional

import pytz

logger = logging.getLogger(__name__)

CONFIG_PATH = os.getenv("CONFIG_PATH", "config.json")

DEFAULT_CONFIG: Dict[str, Any] = {
    "timezone": "Europe/Moscow",
    "node_cap": 1_000_000,
    "max_strands": 16,
    "max_letters": 64,
    "memo_max_entries": 10_000_000,
    "bracket_max_crossings": 24,
    "memo_check_fraction": 0.05,
    "random_seed": 20240101,
    "skein_sample_size": 100,
    "oracle_max_crossings": 14,
    "log_dir": "logs",
    "log_backup_days": 14,
}


@dataclass(frozen=True)
class EngineSettings:
    """Неизменяемый набор настроек движка (config.json + переменные окружения)."""
    timezone: str = DEFAULT_CONFIG["timezone"]
    node_cap: int = DEFAULT_CONFIG["node_cap"]
    max_strands: int = DEFAULT_CONFIG["max_strands"]
    max_letters: int = DEFAULT_CONFIG["max_letters"]
    memo_max_entries: int = DEFAULT_CONFIG["memo_max_entries"]
    bracket_max_crossings: int = DEFAULT_CONFIG["bracket_max_crossings"]
    memo_check_fraction: float = DEFAULT_CONFIG["memo_check_fraction"]
    random_seed: int = DEFAULT_CONFIG["random_seed"]
    skein_sample_size: int = DEFAULT_CONFIG["skein_sample_size"]
    oracle_max_crossings: int = DEFAULT_CONFIG["oracle_max_crossings"]
    log_dir: str = DEFAULT_CONFIG["log_dir"]
    log_backup_days: int = DEFAULT_CONFIG["log_backup_days"]


def load_config(config_path, logger=None, default=None):
    """
    Загружает конфиг из файла. Возвращает default при ошибке.

    Параметры:
        config_path: путь к файлу конфигурации
        logger: логгер (опционально)
        default: значения по умолчанию (опционально)
    """
    if default is None:
        default = dict(DEFAULT_CONFIG)

    try:
        if logger:
            logger.debug(f"Чтение конфигурации из {config_path}")

        if not os.path.exists(config_path):
            if logger:
                logger.warning(f"Файл конфигурации {config_path} не найден, используются значения по умолчанию")
            return dict(default)

        with open(config_path, "r", encoding="utf-8") as f:
            config = json.load(f)

        # Недостающие ключи берём из значений по умолчанию
        for key, value in default.items():
            config.setdefault(key, value)
        return config
    except json.JSONDecodeError as e:
        if logger:
            logger.error(f"Ошибка парсинга JSON в {config_path}: {e}")
        return dict(default)
    except Exception as e:
        if logger:
            logger.error(f"Ошибка чтения конфигурации из {config_path}: {e}")
        return dict(default)


def _coerce(name: str, value: Any, fallback: Any) -> Any:
    """Приводит значение настройки к типу значения по умолчанию."""
    try:
        if isinstance(fallback, bool):
            return bool(value)
        if isinstance(fallback, int):
            result = int(value)
            if result <= 0:
                raise ValueError("значение должно быть положительным")
            return result
        if isinstance(fallback, float):
            result = float(value)
            if not 0.0 <= result <= 1.0:
                raise ValueError("значение должно лежать в [0, 1]")
            return result
        return str(value)
    except (TypeError, ValueError) as e:
        logger.error(f"Некорректное значение настройки {name}={value!r}: {e}. Используется {fallback!r}")
        return fallback


def get_settings(config_path: Optional[str] = None) -> EngineSettings:
    """
    Собирает настройки движка: config.json, затем переопределения из окружения.

    Параметры:
        config_path: путь к файлу конфигурации (по умолчанию CONFIG_PATH)

    Возвращает:
        EngineSettings
    """
    cfg = load_config(config_path or CONFIG_PATH, logger)
    values = {}
    for f in fields(EngineSettings):
        values[f.name] = _coerce(f.name, cfg.get(f.name, f.default), f.default)
    settings = EngineSettings(**values)

    node_cap = os.getenv("BRAIDPOLY_NODE_CAP")
    if node_cap:
        cap = _coerce("BRAIDPOLY_NODE_CAP", node_cap, settings.node_cap)
        settings = replace(settings, node_cap=cap, memo_max_entries=cap)
        logger.debug(f"BRAIDPOLY_NODE_CAP={cap} переопределяет лимиты поиска и кэша")
    return settings


def is_debug() -> bool:
    """Проверяет переменную окружения DEBUG."""
    return os.getenv("DEBUG", "0").lower() in ("1", "true", "yes")


class TZFormatter(logging.Formatter):
    """
    Форматтер для логов с учетом часового пояса.
    """
    def __init__(self, fmt: str, datefmt: str, timezone: str = DEFAULT_CONFIG["timezone"]):
        super().__init__(fmt, datefmt)
        try:
            self.tz = pytz.timezone(timezone)
        except pytz.UnknownTimeZoneError:
            self.tz = pytz.timezone(DEFAULT_CONFIG["timezone"])

    def formatTime(self, record: logging.LogRecord, datefmt: Optional[str] = None) -> str:
        dt = datetime.fromtimestamp(record.created, tz=pytz.utc).astimezone(self.tz)
        if datefmt:
            return dt.strftime(datefmt)
        return dt.strftime("%Y-%m-%d %H:%M:%S %Z")


def setup_logging(name: str, settings: Optional[EngineSettings] = None, debug: Optional[bool] = None) -> logging.Logger:
    """
    Настраивает корневой логгер пакета: файл с ротацией (по дням) и stderr.

    Параметры:
        name: имя лог-файла (без расширения)
        settings: настройки движка (часовой пояс, каталог логов)
        debug: уровень DEBUG; по умолчанию берётся из переменной DEBUG

    Возвращает:
        настроенный логгер
    """
    settings = settings or get_settings()
    debug = is_debug() if debug is None else debug

    root = logging.getLogger()
    root.setLevel(logging.DEBUG if debug else logging.INFO)
    formatter = TZFormatter('%(asctime)s %(levelname)s %(name)s: %(message)s', '%Y-%m-%d %H:%M:%S', settings.timezone)
    root.handlers.clear()

    try:
        os.makedirs(settings.log_dir, exist_ok=True)
        handler = TimedRotatingFileHandler(
            os.path.join(settings.log_dir, f"{name}.log"),
            when="midnight",
            backupCount=settings.log_backup_days,
            encoding="utf-8",
        )
        handler.setFormatter(formatter)
        root.addHandler(handler)
    except OSError as e:
        print(f"[WARNING] Не удалось открыть лог-файл в {settings.log_dir}: {e}", file=sys.stderr)

    # stdout занят отчётами, поэтому консольный лог идёт в stderr
    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(formatter)
    console.setLevel(logging.DEBUG if debug else logging.WARNING)
    root.addHandler(console)
    return logging.getLogger(name)


def log_exception(logger):
    """
    Логирует текущий стек вызовов.

    Параметры:
        logger: логгер для записи ошибки
    """
    logger.error(traceback.format_exc())
