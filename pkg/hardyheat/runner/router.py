"""
Router de tarefas
Plano de execução determinístico e gates de aplicabilidade antes de qualquer cálculo
"""
from typing import Dict, List

import structlog

from hardyheat.core.errors import ParameterOutOfRange
from hardyheat.core.geometry import StratifiedDomain
from hardyheat.runner.state import ExperimentState

logger = structlog.get_logger(__name__)

# Tarefas que leem o ground state do nível mais fino
_USAM_GROUND_STATE = {"exponents", "heatkernel", "harnack", "logsobolev"}


class TaskRouter:
    """Decide a ordem das tarefas e rejeita combinações sem sentido para o domínio"""

    def __init__(self, dominio: StratifiedDomain):
        self.dominio = dominio
        logger.info("TaskRouter inicializado", dimensao=dominio.dimension)

    def _aplicar_gates(self, state: ExperimentState) -> None:
        cfg = state.config
        tarefas = set(cfg.tasks)
        if "appendix" in tarefas and any(s.codim != 1 for s in self.dominio.strata):
            raise ParameterOutOfRange("appendix exige domínio só com estratos de codim 1", tarefa="appendix")
        if "sobolev" in tarefas:
            for run in cfg.params.sobolev.runs:
                if run.kind == "log_corrected" and self.dominio.dimension < 2:
                    raise ParameterOutOfRange("Sobolev log-corrigido exige n ≥ 2", tarefa="sobolev", corrida=run.kind)
        if "heatkernel" in tarefas and cfg.params.heatkernel.oracle == "sine_series":
            if cfg.potential.id != "zero" or cfg.domain.shape != "interval":
                raise ParameterOutOfRange("oráculo por série de senos exige V = 0 no intervalo", tarefa="heatkernel")

    def rotear(self, state: ExperimentState) -> List[str]:
        """
        Plano na ordem da configuração

        Returns:
            Lista de ids de tarefa a executar
        """
        logger.info("Iniciando roteamento", experimento=state.config.name, tarefas=state.config.tasks)
        self._aplicar_gates(state)
        plano = list(state.config.tasks)
        precisa_gs = bool(_USAM_GROUND_STATE & set(plano))
        state.meta["plano"] = plano
        state.meta["ground_state_compartilhado"] = precisa_gs
        logger.info("Roteamento concluído", plano=plano, ground_state=precisa_gs)
        return plano

    def agrupar(self, plano: List[str]) -> Dict[str, List[str]]:
        """Tarefas que compartilham o ground state ficam no mesmo grupo serial"""
        grupos: Dict[str, List[str]] = {}
        for t in plano:
            grupos.setdefault("ground_state" if t in _USAM_GROUND_STATE or t == "spectrum" else t, []).append(t)
        return grupos
