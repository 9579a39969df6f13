"""
Tarefa spectrum
λ₁ por nível, Richardson, limitação inferior, oráculo opcional e identidade do ground state
"""
import numpy as np
import structlog

from hardyheat.core import spectral
from hardyheat.core.errors import HardyHeatError, NotBoundedBelow
from hardyheat.runner.builders import ExperimentBuilder
from hardyheat.runner.state import ExperimentState, ResultadoTarefa, Verificacao

logger = structlog.get_logger(__name__)

_ORACULOS = {
    "zero_interval": lambda b: spectral.oracle_zero_interval(b.dominio.shape.b - b.dominio.shape.a),
    "example_III_interval": lambda b: spectral.oracle_example_III_interval(),
    "example_I_ball": lambda b: spectral.oracle_example_I_ball(
        b.config.potential.poles[0].c if b.config.potential.poles else 0.0,
        b.dominio.dimension, b.dominio.shape.radius),
}


class SpectrumTask:
    """Autovalor fundamental ao longo dos níveis de malha"""

    def __init__(self, builder: ExperimentBuilder):
        self.builder = builder
        logger.info("SpectrumTask inicializado")

    def processar(self, state: ExperimentState) -> str:
        params = state.config.params.spectrum
        tol = state.config.tolerances
        niveis = self.builder.niveis()
        verificacoes = []
        linhas = []
        lambdas = []
        for i, h in enumerate(niveis):
            gs = self.builder.ground_state(i)
            lambdas.append(gs.lambda1)
            linhas.append({"level": i, "h_min": h, "dofs": gs.form.dofs, "lambda1": gs.lambda1,
                           "residual": gs.residual})
        resultado = {"levels": linhas, "lambda1": lambdas[-1]}

        if len(lambdas) >= 2:
            resultado["richardson"] = spectral.richardson(lambdas[-1], lambdas[-2])
        try:
            spectral.check_bounded_below(lambdas)
            verificacoes.append(Verificacao.de("limitado_inferiormente", lambdas[-1], True))
        except NotBoundedBelow as e:
            logger.warning("λ₁ não estabiliza", error=str(e))
            verificacoes.append(Verificacao.de("limitado_inferiormente", lambdas[-1], False))

        if params.oracle:
            ref = _ORACULOS[params.oracle](self.builder)
            erro = abs(lambdas[-1] - ref) / abs(ref)
            resultado["oracle"] = {"id": params.oracle, "lambda1": ref, "rel_error": erro}
            verificacoes.append(Verificacao.de("oraculo_lambda1", erro, erro <= tol.eigen_rtol,
                                               f"<= {tol.eigen_rtol}"))

        if params.identity_samples > 0:
            rng = np.random.default_rng(state.config.seed)
            defeitos = []
            for i in range(len(niveis)):
                gs = self.builder.ground_state(i)
                amostras = spectral.bump_samples(gs.form, gs, params.identity_samples, rng)
                try:
                    defeitos.append(spectral.ground_state_identity(gs.form, gs, amostras))
                except HardyHeatError as e:
                    logger.error("Erro na identidade de ground state", nivel=i, error=str(e))
                    raise
            resultado["identity_defects"] = defeitos
            verificacoes.append(Verificacao.de("defeito_identidade", defeitos[-1],
                                               defeitos[-1] <= tol.identity_defect, f"<= {tol.identity_defect}"))
            if len(defeitos) >= 2:
                verificacoes.append(Verificacao.de("defeito_decrescente", defeitos[-1] / defeitos[-2],
                                                   defeitos[-1] <= defeitos[-2] * (1.0 + 1e-9), "<= 1"))

        fino = self.builder.ground_state(-1)
        nodes = fino.form.mesh.nodes
        tabela = [dict({f"x{j}": float(nodes[k, j]) for j in range(nodes.shape[1])}, phi1=float(fino.phi1[k]))
                  for k in range(len(nodes))]
        state.registrar("spectrum", ResultadoTarefa(
            codigo="SPECTRUM_OK", resultado=resultado, verificacoes=verificacoes,
            tabelas={"spectrum_levels": linhas, "phi1": tabela},
        ))
        logger.info("Tarefa spectrum concluída", lambda1=lambdas[-1], niveis=len(niveis))
        return "SPECTRUM_OK"
