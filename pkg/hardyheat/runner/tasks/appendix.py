"""
Tarefa appendix
μ₁ da camada de fronteira em δ decrescente e quociente de Hardy refinado
"""
import structlog

from hardyheat.core.spectral import boundary_layer_mu1, refined_hardy_quotient
from hardyheat.runner.builders import ExperimentBuilder
from hardyheat.runner.state import ExperimentState, ResultadoTarefa, Verificacao

logger = structlog.get_logger(__name__)


class AppendixTask:
    def __init__(self, builder: ExperimentBuilder):
        self.builder = builder
        logger.info("AppendixTask inicializado")

    def processar(self, state: ExperimentState) -> str:
        params = state.config.params.appendix
        tol = state.config.tolerances
        deltas = sorted(params.deltas, reverse=True)
        camadas = boundary_layer_mu1(self.builder.dominio, deltas, params.h_min)
        mus = [c.mu1 for c in camadas]
        crescente = all(b > a for a, b in zip(mus, mus[1:]))
        acima_cota = all(c.mu1 >= c.lower_bound for c in camadas)
        refinado = refined_hardy_quotient(params.refined_delta)
        verificacoes = [
            Verificacao.de("mu1_crescente", mus[-1], crescente, "estritamente crescente"),
            Verificacao.de("mu1_acima_cota", min(c.mu1 / c.lower_bound for c in camadas), acima_cota, ">= 1"),
            Verificacao.de("hardy_refinado", refinado, refinado >= 0.125 - tol.refined_hardy_slack,
                           f">= {0.125 - tol.refined_hardy_slack}"),
        ]
        piso = 0.125 - tol.refined_hardy_slack
        for c in camadas:
            verificacoes.append(Verificacao.de(f"hardy_refinado_delta_{c.delta:g}", c.refined_quotient,
                                               c.refined_quotient >= piso, f">= {piso}"))
        state.registrar("appendix", ResultadoTarefa(
            codigo="APPENDIX_OK",
            resultado={"layers": [c.to_dict() for c in camadas], "refined_hardy": refinado},
            verificacoes=verificacoes,
            tabelas={"appendix_layers": [c.to_dict() for c in camadas]},
        ))
        return "APPENDIX_OK"
