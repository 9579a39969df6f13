"""
Tarefa heatkernel
Sanduíche de curto prazo, razão de longo prazo, cota ultracontrativa e oráculo por série de senos
"""
import math
from itertools import combinations_with_replacement

import numpy as np
import structlog

from hardyheat.core.heat import HeatKernel, fit_sandwich, nearest_dof, ultracontractive_bound
from hardyheat.runner.builders import ExperimentBuilder
from hardyheat.runner.state import ExperimentState, ResultadoTarefa, Verificacao
from hardyheat.runner.tasks._pontos import fracoes_amostra

logger = structlog.get_logger(__name__)


def serie_senos(t: float, x: float, y: float, length: float = 1.0, termos: int = 400) -> float:
    """Núcleo de Dirichlet em (0,L) por expansão em senos"""
    k = np.arange(1, termos + 1)
    return float(2.0 / length * np.sum(np.exp(-(k * math.pi / length) ** 2 * t)
                                       * np.sin(k * math.pi * x / length) * np.sin(k * math.pi * y / length)))


class HeatKernelTask:
    """Certificado do núcleo do calor em dois níveis de malha"""

    def __init__(self, builder: ExperimentBuilder, kernel_dense_limit: int):
        self.builder = builder
        self.kernel_dense_limit = kernel_dense_limit
        logger.info("HeatKernelTask inicializado", limite_denso=kernel_dense_limit)

    def _pares(self, form, maximo: int):
        dofs = sorted({nearest_dof(form, p) for p in fracoes_amostra(self.builder.dominio)})
        return list(combinations_with_replacement(dofs, 2))[:maximo]

    def _certificado(self, nivel: int, params, gs_needed: bool = True):
        gs = self.builder.ground_state(nivel)
        kernel = HeatKernel(gs.form, dense_limit=self.kernel_dense_limit)
        pares = self._pares(gs.form, params.pairs)
        cert = fit_sandwich(kernel, self.builder.alphas_por_estrato(), self.builder.dominio.dimension, pares,
                            params.times, params.long_times, gs if gs_needed else None,
                            long_tol=self.builder.config.tolerances.long_time)
        return gs, kernel, pares, cert

    def processar(self, state: ExperimentState) -> str:
        params = state.config.params.heatkernel
        tol = state.config.tolerances
        verificacoes = []
        gs, kernel, pares, cert = self._certificado(-1, params)
        alphas = self.builder.alphas_por_estrato()
        n = self.builder.dominio.dimension
        C_u, expoente = ultracontractive_bound(kernel, gs, alphas, n, pares, params.times)
        cert.ultracontractive_C = C_u
        cert.ultracontractive_exponent = expoente
        resultado = {"certificate": cert.to_dict(), "pairs": [list(p) for p in pares]}

        razao = cert.C2_prime / cert.C1
        verificacoes.append(Verificacao.de("razao_sanduiche", razao, razao <= tol.sandwich_ratio_max,
                                           f"<= {tol.sandwich_ratio_max}"))
        if cert.long_time_onset is None:
            verificacoes.append(Verificacao.de("longo_prazo", None, None, f"<= 1 + {tol.long_time}"))
        else:
            verificacoes.append(Verificacao.de("longo_prazo", cert.long_spread,
                                               cert.long_spread <= 1.0 + tol.long_time, f"<= 1 + {tol.long_time}"))

        if len(self.builder.niveis()) >= 2:
            _, _, _, grosso = self._certificado(-2, params, gs_needed=False)
            crescimento = razao / (grosso.C2_prime / grosso.C1) - 1.0
            resultado["coarse_ratio"] = grosso.C2_prime / grosso.C1
            verificacoes.append(Verificacao.de("crescimento_razao", crescimento,
                                               crescimento <= tol.sandwich_growth, f"<= {tol.sandwich_growth}"))

        if kernel.spectral:
            resultado["chapman_kolmogorov"] = kernel.chapman_kolmogorov(params.times[0], params.times[-1])
            resultado["eigenmode_identity"] = kernel.eigenmode_identity(gs, params.times[-1])

        if params.oracle == "sine_series":
            shape = self.builder.dominio.shape
            L = shape.b - shape.a
            nodes = gs.form.mesh.nodes[gs.form.free][:, 0]
            t = params.oracle_time
            pior, escala = 0.0, 0.0
            for x, y in pares:
                ref = serie_senos(t, nodes[x] - shape.a, nodes[y] - shape.a, L)
                pior = max(pior, abs(kernel.value(t, x, y) - ref))
                escala = max(escala, abs(ref))
            erro = pior / escala
            resultado["oracle"] = {"t": t, "rel_error": erro}
            verificacoes.append(Verificacao.de("oraculo_serie_senos", erro, erro <= tol.kernel_oracle,
                                               f"<= {tol.kernel_oracle}"))

        state.registrar("heatkernel", ResultadoTarefa(
            codigo="HEATKERNEL_OK", resultado=resultado, verificacoes=verificacoes,
            tabelas={"heatkernel_samples": cert.samples},
        ))
        logger.info("Tarefa heatkernel concluída", razao=razao, T=cert.T)
        return "HEATKERNEL_OK"
