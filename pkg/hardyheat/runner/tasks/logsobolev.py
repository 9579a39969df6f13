"""
Tarefa logsobolev
Constante K̂ da log-Sobolev ponderada e inclinação em ln ε
"""
import math

import structlog

from hardyheat.core.inequalities import log_sobolev_slope, weighted_log_sobolev
from hardyheat.runner.builders import ExperimentBuilder
from hardyheat.runner.state import ExperimentState, ResultadoTarefa, Verificacao

logger = structlog.get_logger(__name__)


class LogSobolevTask:
    def __init__(self, builder: ExperimentBuilder):
        self.builder = builder
        logger.info("LogSobolevTask inicializado")

    def processar(self, state: ExperimentState) -> str:
        params = state.config.params.logsobolev
        tol = state.config.tolerances
        gs = self.builder.ground_state(-1, basis="ground_state")
        k = weighted_log_sobolev(gs.form, gs, params.eps, count=params.samples, seed=state.config.seed)
        fina = self.builder.forma(basis="ground_state", h_min=params.slope_h_min)
        incl = log_sobolev_slope(fina, eps_grid=params.slope_eps)
        erro = abs(incl["slope"] - incl["expected"]) / abs(incl["expected"])
        verificacoes = [
            Verificacao.de("K_finito", k["K_hat"], math.isfinite(k["K_hat"])),
            Verificacao.de("inclinacao_eps", incl["slope"], erro <= tol.slope_rtol,
                           f"{incl['expected']} ± {tol.slope_rtol * 100:g}%"),
        ]
        tabela = [{"eps": e, "bound": b} for e, b in zip(incl["eps_grid"], incl["bounds"])]
        state.registrar("logsobolev", ResultadoTarefa(
            codigo="LOGSOBOLEV_OK",
            resultado={"K_hat": k, "slope": {kk: v for kk, v in incl.items() if kk != "bounds"}},
            verificacoes=verificacoes,
            tabelas={"logsobolev_slope": tabela},
        ))
        return "LOGSOBOLEV_OK"
