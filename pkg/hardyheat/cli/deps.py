"""
Dependências da CLI - Configuração e inicialização de componentes
"""
import os
from functools import lru_cache

import structlog
from dotenv import load_dotenv

from hardyheat.core.discretize import DEFAULT_NODE_CAP
from hardyheat.core.errors import ConfigInvalid
from hardyheat.core.heat import DEFAULT_KERNEL_DENSE_LIMIT
from hardyheat.core.spectral import DEFAULT_DENSE_LIMIT
from hardyheat.infra.logging import configure_logging
from hardyheat.runner.builders import ExperimentBuilder
from hardyheat.runner.router import TaskRouter
from hardyheat.runner.state import ExperimentConfig
from hardyheat.runner.tasks import (
    AppendixTask,
    ExponentsTask,
    HarnackTask,
    HeatKernelTask,
    LogSobolevTask,
    MoserTask,
    PoincareTask,
    SobolevTask,
    SpectrumTask,
    VolumeTask,
)
from hardyheat.runner.veredito import VereditoProcessor

# Carrega variáveis de ambiente
load_dotenv()

logger = structlog.get_logger(__name__)

_NIVEIS_LOG = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


class Settings:
    """Configurações do processo"""

    def __init__(self):
        self.log_level = os.getenv("HARDYHEAT_LOG_LEVEL", "INFO")
        self.node_cap = os.getenv("HARDYHEAT_NODE_CAP", str(DEFAULT_NODE_CAP))
        self.dense_limit = os.getenv("HARDYHEAT_DENSE_LIMIT", str(DEFAULT_DENSE_LIMIT))
        self.kernel_dense_limit = os.getenv("HARDYHEAT_KERNEL_DENSE_LIMIT", str(DEFAULT_KERNEL_DENSE_LIMIT))
        self.out_dir = os.getenv("HARDYHEAT_OUT_DIR", "out")

        self._validate_required_settings()

    def _validate_required_settings(self):
        """Valida e converte as configurações numéricas"""
        invalidas = []
        for nome, attr in (("HARDYHEAT_NODE_CAP", "node_cap"), ("HARDYHEAT_DENSE_LIMIT", "dense_limit"),
                           ("HARDYHEAT_KERNEL_DENSE_LIMIT", "kernel_dense_limit")):
            try:
                valor = int(getattr(self, attr))
            except (TypeError, ValueError):
                invalidas.append(nome)
                continue
            if valor <= 0:
                invalidas.append(nome)
                continue
            setattr(self, attr, valor)
        if self.log_level.upper() not in _NIVEIS_LOG:
            invalidas.append("HARDYHEAT_LOG_LEVEL")
        if not self.out_dir:
            invalidas.append("HARDYHEAT_OUT_DIR")

        if invalidas:
            raise ConfigInvalid(f"Variáveis de ambiente inválidas: {', '.join(invalidas)}", chaves=invalidas)


@lru_cache()
def get_settings() -> Settings:
    """Retorna configurações (cached)"""
    return Settings()


# Componentes globais (inicializados uma vez)
_components = {}


def get_veredito_processor() -> VereditoProcessor:
    """Retorna processador de veredito"""
    if "veredito_processor" not in _components:
        _components["veredito_processor"] = VereditoProcessor()
    return _components["veredito_processor"]


def get_builder(config: ExperimentConfig) -> ExperimentBuilder:
    """Builder por experimento (não compartilhado entre configurações)"""
    settings = get_settings()
    return ExperimentBuilder(config, node_cap=settings.node_cap, dense_limit=settings.dense_limit)


def get_router(builder: ExperimentBuilder) -> TaskRouter:
    return TaskRouter(builder.dominio)


def get_tasks(builder: ExperimentBuilder) -> dict:
    """Handlers das tarefas ligados ao builder do experimento"""
    settings = get_settings()
    return {
        "spectrum": SpectrumTask(builder),
        "exponents": ExponentsTask(builder),
        "heatkernel": HeatKernelTask(builder, settings.kernel_dense_limit),
        "harnack": HarnackTask(builder, settings.kernel_dense_limit),
        "sobolev": SobolevTask(builder),
        "logsobolev": LogSobolevTask(builder),
        "poincare": PoincareTask(builder),
        "moser": MoserTask(builder),
        "volume": VolumeTask(builder),
        "appendix": AppendixTask(builder),
    }


def initialize_logging(log_level: str = None):
    """Inicializa logging"""
    settings = get_settings()
    level = log_level or settings.log_level
    configure_logging(level)
    logger.debug("Logging inicializado", log_level=level)
