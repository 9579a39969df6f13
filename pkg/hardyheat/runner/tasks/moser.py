"""
Tarefa moser
Razão de Moser local ponderada com ν ≥ n + 2A
"""
import math

import structlog

from hardyheat.core.inequalities import local_moser
from hardyheat.runner.builders import ExperimentBuilder
from hardyheat.runner.state import ExperimentState, ResultadoTarefa, Verificacao
from hardyheat.runner.tasks._pontos import pontos_padrao

logger = structlog.get_logger(__name__)


class MoserTask:
    def __init__(self, builder: ExperimentBuilder):
        self.builder = builder
        logger.info("MoserTask inicializado")

    def processar(self, state: ExperimentState) -> str:
        params = state.config.params.moser
        dom = self.builder.dominio
        alphas = params.alphas or self.builder.alphas_por_codim()
        nu = params.nu or dom.dimension + 2.0 * max([0.0, *alphas.values()])
        centros = params.centers or pontos_padrao(dom)
        res = local_moser(dom, alphas, nu, centros, params.radii, f_count=params.f_samples,
                          h_min=params.h_min, seed=state.config.seed)
        state.registrar("moser", ResultadoTarefa(
            codigo="MOSER_OK",
            resultado={"C_M": res["C_M"], "nu": nu, "alphas": alphas},
            verificacoes=[Verificacao.de("C_M_finito", res["C_M"], math.isfinite(res["C_M"]))],
            tabelas={"moser": res["entries"]},
        ))
        return "MOSER_OK"
