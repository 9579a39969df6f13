"""
Tarefa volume
Sanduíche do volume ponderado contra o modelo e constante de duplicação
"""
import numpy as np
import structlog

from hardyheat.core.geometry import doubling_constant, sandwich_ratios, volume_grid
from hardyheat.runner.builders import ExperimentBuilder
from hardyheat.runner.state import ExperimentState, ResultadoTarefa, Verificacao

logger = structlog.get_logger(__name__)


class VolumeTask:
    def __init__(self, builder: ExperimentBuilder):
        self.builder = builder
        logger.info("VolumeTask inicializado")

    def processar(self, state: ExperimentState) -> str:
        params = state.config.params.volume
        tol = state.config.tolerances
        dom = self.builder.dominio
        alphas = params.alphas or self.builder.alphas_por_codim()
        amostras = volume_grid(dom, params.points, params.radii)
        razoes = sandwich_ratios(dom, alphas, amostras)
        dispersao = float(razoes.max() / razoes.min())
        c_d = doubling_constant(dom, alphas, amostras)
        c_d2 = doubling_constant(dom, alphas, volume_grid(dom, 2 * params.points, params.radii))
        variacao = abs(c_d2 / c_d - 1.0)
        verificacoes = [
            Verificacao.de("dispersao_sanduiche", dispersao, dispersao <= tol.volume_spread,
                           f"<= {tol.volume_spread}"),
            Verificacao.de("duplicacao_estavel", variacao, variacao <= tol.doubling_stability,
                           f"<= {tol.doubling_stability}"),
        ]
        tabela = [dict({f"x{j}": float(t) for j, t in enumerate(x)}, r=r, ratio=float(q))
                  for (x, r), q in zip(amostras, razoes)]
        state.registrar("volume", ResultadoTarefa(
            codigo="VOLUME_OK",
            resultado={"spread": dispersao, "C_D": c_d, "C_D_doubled": c_d2, "alphas": alphas,
                       "ratio_min": float(np.min(razoes)), "ratio_max": float(np.max(razoes))},
            verificacoes=verificacoes,
            tabelas={"volume": tabela},
        ))
        return "VOLUME_OK"
