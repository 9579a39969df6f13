"""
Configuração de logging estruturado em PT-BR
"""
import logging
import sys

import structlog
from structlog.processors import JSONRenderer, TimeStamper, add_log_level


def configure_logging(log_level: str = "INFO"):
    """
    Configura logging estruturado com structlog

    Eventos em JSON vão para stderr; stdout fica livre para a saída dos comandos.
    """
    processors = [
        TimeStamper(fmt="iso", utc=True),
        add_log_level,
        structlog.stdlib.add_logger_name,
        JSONRenderer(ensure_ascii=False),
    ]

    structlog.configure(
        processors=processors,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    level = getattr(logging, log_level.upper(), None)
    if not isinstance(level, int):
        level = logging.INFO
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level, force=True)
