import logging
import os
import sys
from pathlib import Path

from colorama import Back
from colorama import Fore
from colorama import Style
from colorama import init

init(autoreset=True)


PLAIN_FORMAT = "%(asctime)s.%(msecs)03d | %(levelname)-8s | %(name)s:%(funcName)s:%(lineno)d - %(message)s"


class ColoredFormatter(logging.Formatter):
    COLORS = {
        "DEBUG": Fore.CYAN,
        "INFO": Fore.GREEN,
        "WARNING": Fore.YELLOW,
        "ERROR": Fore.RED,
        "CRITICAL": Fore.RED + Back.WHITE,
    }

    def format(self, record):
        levelname = record.levelname
        color = self.COLORS.get(levelname, Fore.WHITE)
        if levelname in self.COLORS:
            record = logging.makeLogRecord(record.__dict__)
            record.levelname = self.COLORS[levelname] + Style.BRIGHT + levelname + Style.RESET_ALL

        message = super().format(record)

        message = message.replace("$RESET", Style.RESET_ALL)
        message = message.replace("$BOLD", Style.BRIGHT)
        message = message.replace("$COLOR", color)
        message = message.replace("$BLUE", Fore.BLUE + Style.BRIGHT)

        return message


def get_logger(name: str) -> logging.Logger:
    logger = logging.getLogger(name.split(".")[-1])
    mode: str = os.getenv("ENV", "prod")

    logger.setLevel(logging.DEBUG if mode != "prod" else logging.INFO)
    logger.propagate = False
    logger.handlers = [h for h in logger.handlers if isinstance(h, logging.FileHandler)]

    format_string = (
        "$BLUE%(asctime)s.%(msecs)03d$RESET | "
        "$COLOR$BOLD%(levelname)-8s$RESET | "
        "$BLUE%(name)s$RESET:"
        "$BLUE%(funcName)s$RESET:"
        "$BLUE%(lineno)d$RESET - "
        "$COLOR$BOLD%(message)s$RESET"
    )

    colored_formatter = ColoredFormatter(format_string, datefmt="%Y-%m-%d %H:%M:%S")

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setFormatter(colored_formatter)
    logger.addHandler(console_handler)

    return logger


def add_file_handler(path: Path | str) -> logging.Handler:
    """
    Mirror every dynpix logger into a plain-text file (no colour codes).

    Returns the handler so the caller can detach it with `remove_file_handler` once the run ends.
    """
    handler = logging.FileHandler(path, encoding="utf-8")
    handler.setFormatter(logging.Formatter(PLAIN_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
    for logger in _dynpix_loggers():
        logger.addHandler(handler)
    return handler


def remove_file_handler(handler: logging.Handler) -> None:
    for logger in _dynpix_loggers():
        if handler in logger.handlers:
            logger.removeHandler(handler)
    handler.close()


def _dynpix_loggers() -> list[logging.Logger]:
    manager = logging.Logger.manager
    return [
        logger
        for logger in manager.loggerDict.values()
        if isinstance(logger, logging.Logger) and not logger.propagate
    ]
