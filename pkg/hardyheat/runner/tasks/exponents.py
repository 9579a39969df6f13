"""
Tarefa exponents
Ajuste log-log de φ₁ junto a cada estrato e comparação com os expoentes previstos
"""
import structlog

from hardyheat.core.spectral import cross_check_exponents, default_window, fit_exponents
from hardyheat.runner.builders import ExperimentBuilder
from hardyheat.runner.state import ExperimentState, ResultadoTarefa, Verificacao

logger = structlog.get_logger(__name__)


class ExponentsTask:
    """Recuperação dos expoentes α̂ do ground state"""

    def __init__(self, builder: ExperimentBuilder):
        self.builder = builder
        logger.info("ExponentsTask inicializado")

    def processar(self, state: ExperimentState) -> str:
        params = state.config.params.exponents
        tolerancias = state.config.tolerances
        tol = tolerancias.exponent
        gs = self.builder.ground_state(-1)
        janela = params.window or default_window(gs)
        ajustes = fit_exponents(gs, self.builder.dominio, janela)
        verificacoes = []
        linhas = []
        for label, fit in ajustes.items():
            alvo = params.expected.get(label, fit.predicted)
            erro = abs(fit.alpha_hat - alvo)
            verificacoes.append(Verificacao.de(f"alpha_{label}", fit.alpha_hat, erro <= tol, f"{alvo} ± {tol}"))
            linhas.append({"label": label, "codim": fit.codim, "alpha_hat": fit.alpha_hat,
                           "predicted": fit.predicted, "expected": alvo, "r2": fit.r2})
        resultado = {"fits": {k: v.to_dict() for k, v in ajustes.items()}, "h_min": gs.form.mesh.h_min}

        if params.plain_check:
            plano = self.builder.ground_state(basis="plain", h_min=params.plain_h_min)
            cruzado = cross_check_exponents(gs, plano, self.builder.dominio, janela)
            resultado["plain_check"] = cruzado
            tol_plano = tolerancias.exponent_plain
            for label, c in cruzado.items():
                if not c["checked"]:
                    logger.info("Estrato crítico fora da verificação na base plana", estrato=label,
                                alpha_plano=c["alpha_plain"])
                    continue
                alvo = params.expected.get(label, c["predicted"])
                erro = abs(c["alpha_plain"] - alvo)
                verificacoes.append(Verificacao.de(f"alpha_plano_{label}", c["alpha_plain"], erro <= tol_plano,
                                                   f"{alvo} ± {tol_plano}"))

        state.registrar("exponents", ResultadoTarefa(
            codigo="EXPONENTS_OK",
            resultado=resultado,
            verificacoes=verificacoes,
            tabelas={"exponents": linhas},
        ))
        return "EXPONENTS_OK"
