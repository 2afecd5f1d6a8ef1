import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import List, Optional

# Ensure the root directory is in the python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from api.cli import build_parser, dispatch, load_config  # noqa: E402
from core.config_manager import ConfigManager  # noqa: E402

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"

logger = logging.getLogger("main")


def setup_logging(config: ConfigManager, verbose: bool = False):
    """stderr always; a rotating file when logging.file is set. stdout stays report-only."""
    level = logging.INFO if verbose and config.log_level not in ("DEBUG", "INFO") else getattr(logging, config.log_level)
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if config.log_file:
        log_path = Path(config.log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(RotatingFileHandler(
            log_path,
            maxBytes=10 * 1024 * 1024,  # 10 MB
            backupCount=5,
            encoding="utf-8",
        ))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    config = load_config(args)
    setup_logging(config, args.verbose)
    logger.info(f"[SYSTEM] holx {args.command} {args.file} (PID {os.getpid()})")
    return dispatch(args, config)


if __name__ == "__main__":
    sys.exit(main())
