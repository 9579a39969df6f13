"""
Módulo Veredito - Sempre o último
Consolida as verificações das tarefas no código de saída e no resumo
"""
from typing import Any, Dict, List

import structlog

from hardyheat.runner.state import ExperimentState

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_ERRO = 1
EXIT_INCONCLUSIVO = 2


class VereditoProcessor:
    """Transforma o estado final em código de saída"""

    def __init__(self):
        logger.info("VereditoProcessor inicializado")

    def resumo(self, state: ExperimentState) -> List[Dict[str, Any]]:
        """Linhas do summary.csv; cada valor também está em report.json"""
        return [
            {"task": tarefa, "check": v.nome, "value": v.valor, "bound": v.limite, "status": v.status}
            for tarefa, v in state.verificacoes()
        ]

    def processar_veredito(self, state: ExperimentState) -> int:
        """
        0 se todas as verificações passam, 2 se alguma é inconclusiva, 1 se alguma falha
        """
        falhas = [f"{t}.{v.nome}" for t, v in state.verificacoes() if v.status == "falhou"]
        inconclusivas = [f"{t}.{v.nome}" for t, v in state.verificacoes() if v.status == "inconclusivo"]
        if falhas:
            codigo = EXIT_ERRO
            logger.error("Verificações falharam", falhas=falhas)
        elif inconclusivas:
            codigo = EXIT_INCONCLUSIVO
            logger.warning("Verificações inconclusivas", inconclusivas=inconclusivas)
        else:
            codigo = EXIT_OK
        state.codigo_saida = codigo
        logger.info("Veredito emitido", codigo=codigo, verificacoes=len(state.verificacoes()))
        return codigo
