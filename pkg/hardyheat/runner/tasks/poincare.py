"""
Tarefa poincare
Constante de Poincaré local ponderada sobre a varredura de bolas
"""
import structlog

from hardyheat.core.inequalities import local_poincare
from hardyheat.runner.builders import ExperimentBuilder
from hardyheat.runner.state import ExperimentState, ResultadoTarefa, Verificacao
from hardyheat.runner.tasks._pontos import pontos_padrao

logger = structlog.get_logger(__name__)


class PoincareTask:
    def __init__(self, builder: ExperimentBuilder):
        self.builder = builder
        logger.info("PoincareTask inicializado")

    def processar(self, state: ExperimentState) -> str:
        params = state.config.params.poincare
        tol = state.config.tolerances
        dom = self.builder.dominio
        alphas = params.alphas or self.builder.alphas_por_codim()
        centros = params.centers or pontos_padrao(dom)
        res = local_poincare(dom, alphas, centros, params.radii, h_min=params.h_min)
        verificacoes = [Verificacao.de("dispersao_C_P", res["spread"], res["spread"] <= tol.poincare_spread,
                                       f"<= {tol.poincare_spread}")]
        state.registrar("poincare", ResultadoTarefa(
            codigo="POINCARE_OK",
            resultado={"C_P": res["C_P"], "spread": res["spread"], "alphas": alphas},
            verificacoes=verificacoes,
            tabelas={"poincare": res["entries"]},
        ))
        return "POINCARE_OK"
