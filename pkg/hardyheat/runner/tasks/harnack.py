"""
Tarefa harnack
Varredura de C_H com dados iniciais positivos em bolas interiores e tocando a fronteira
"""
import numpy as np
import structlog

from hardyheat.core.heat import HeatKernel, harnack_by_kind, harnack_scan, positive_initial_data
from hardyheat.runner.builders import ExperimentBuilder
from hardyheat.runner.state import ExperimentState, ResultadoTarefa, Verificacao
from hardyheat.runner.tasks._pontos import pontos_padrao

logger = structlog.get_logger(__name__)

_GRUPOS = {"interior": "interior", "boundary": "fronteira"}


class HarnackTask:
    """Constante de Harnack parabólica em até dois níveis"""

    def __init__(self, builder: ExperimentBuilder, kernel_dense_limit: int):
        self.builder = builder
        self.kernel_dense_limit = kernel_dense_limit
        logger.info("HarnackTask inicializado")

    def _varrer(self, nivel: int, params, seed: int):
        gs = self.builder.ground_state(nivel)
        rng = np.random.default_rng(seed)
        amostras = positive_initial_data(gs.form, gs, params.samples, rng)
        centros = params.centers or pontos_padrao(self.builder.dominio)
        kernel = HeatKernel(gs.form, dense_limit=self.kernel_dense_limit)
        return harnack_scan(gs.form, gs, centros, params.radii, amostras, kernel=kernel)

    def processar(self, state: ExperimentState) -> str:
        params = state.config.params.harnack
        tol = state.config.tolerances
        niveis = self.builder.niveis()
        usados = list(range(len(niveis)))[-2:]
        por_nivel = []
        grupos = []
        entradas = []
        for i in usados:
            c_h, entradas = self._varrer(i, params, state.config.seed)
            por_nivel.append(c_h)
            grupos.append(harnack_by_kind(entradas))
        verificacoes = [Verificacao.de("C_H_finito", por_nivel[-1], bool(np.isfinite(por_nivel[-1])))]
        if len(por_nivel) == 2:
            variacao = abs(por_nivel[1] / por_nivel[0] - 1.0)
            verificacoes.append(Verificacao.de("C_H_estavel", variacao, variacao <= tol.harnack_stability,
                                               f"<= {tol.harnack_stability}"))
            for chave, nome in _GRUPOS.items():
                grosso, fino = grupos[0][chave], grupos[1][chave]
                if grosso is None or fino is None:
                    continue
                variacao = abs(fino / grosso - 1.0)
                verificacoes.append(Verificacao.de(f"C_H_{nome}_estavel", variacao,
                                                   variacao <= tol.harnack_stability, f"<= {tol.harnack_stability}"))

        interior, fronteira = grupos[-1]["interior"], grupos[-1]["boundary"]
        limite = tol.harnack_boundary_ratio
        if interior is None or fronteira is None:
            logger.warning("Varredura sem bolas dos dois tipos", interior=interior, fronteira=fronteira)
            verificacoes.append(Verificacao.de("C_H_fronteira_mesma_ordem", None, None,
                                               f"[1/{limite:g}, {limite:g}]"))
        else:
            razao = fronteira / interior
            verificacoes.append(Verificacao.de("C_H_fronteira_mesma_ordem", razao, 1.0 / limite <= razao <= limite,
                                               f"[1/{limite:g}, {limite:g}]"))
        resultado = {
            "C_H": por_nivel[-1],
            "C_H_levels": por_nivel,
            "C_H_interior": interior,
            "C_H_boundary": fronteira,
            "C_H_by_kind_levels": grupos,
        }
        state.registrar("harnack", ResultadoTarefa(
            codigo="HARNACK_OK", resultado=resultado, verificacoes=verificacoes,
            tabelas={"harnack": [e.to_dict() for e in entradas]},
        ))
        logger.info("Tarefa harnack concluída", C_H=por_nivel[-1], interior=interior, fronteira=fronteira)
        return "HARNACK_OK"
