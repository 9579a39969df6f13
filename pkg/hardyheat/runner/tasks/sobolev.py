"""
Tarefa sobolev
Quocientes de Sobolev, log-corrigido, Hardy–log crítico e blocos de codimensão
"""
import structlog

from hardyheat.core import inequalities
from hardyheat.core.errors import ExcludedExponent
from hardyheat.runner.builders import ExperimentBuilder
from hardyheat.runner.state import ExperimentState, ResultadoTarefa, SobolevRun, Verificacao

logger = structlog.get_logger(__name__)


class SobolevTask:
    """Executa cada corrida declarada e compara o veredito com o esperado"""

    def __init__(self, builder: ExperimentBuilder):
        self.builder = builder
        logger.info("SobolevTask inicializado")

    def _executar(self, run: SobolevRun, seed: int) -> inequalities.QuotientReport:
        dom, spec = self.builder.dominio, self.builder.potencial
        levels = run.levels or inequalities.DEFAULT_LEVELS
        if run.kind == "sobolev":
            return inequalities.sobolev_quotient(dom, spec, run.q, run.lam, levels, seed, ambient_n=run.ambient_n)
        if run.kind == "log_corrected":
            return inequalities.log_corrected_quotient(dom, spec, run.q, run.lam, levels, seed)
        if run.kind == "critical_hardy":
            return inequalities.critical_hardy_log(dom, spec, run.lam, levels, with_x=True)
        if run.kind == "critical_hardy_control":
            return inequalities.critical_hardy_log(dom, spec, run.lam, levels, with_x=False)
        return inequalities.codim_block(dom, run.k, run.q, run.alpha_k, run.delta, levels, run.ambient_n, seed)

    def processar(self, state: ExperimentState) -> str:
        runs = state.config.params.sobolev.runs
        verificacoes = []
        relatorios = []
        tabelas = {}
        linhas = []
        for i, run in enumerate(runs):
            nome = f"{run.kind}_{i}"
            try:
                rep = self._executar(run, state.config.seed)
            except ExcludedExponent as e:
                logger.warning("Expoente excluído; corrida não minimizada", corrida=nome, error=str(e))
                relatorios.append({"run": nome, "excluded": e.to_dict()})
                verificacoes.append(Verificacao.de(nome, None, None, "expoente excluído"))
                continue
            relatorios.append(dict(rep.to_dict(), run=nome))
            for h, v in zip(rep.levels, rep.estimates):
                linhas.append({"run": nome, "h_min": h, "estimate": v})
            if rep.snapshot:
                tabelas[f"sobolev_{nome}_snapshot"] = [
                    {"x": x, "u": u} for x, u in zip(rep.snapshot["x"], rep.snapshot["u"])
                ]
            veredito = rep.verdict.value
            if run.expect is not None:
                ok = veredito == run.expect
                if not ok and veredito == inequalities.Verdict.INCONCLUSIVE.value:
                    ok = None
            else:
                ok = None if veredito == inequalities.Verdict.INCONCLUSIVE.value else True
            verificacoes.append(Verificacao.de(nome, rep.estimates[-1], ok, run.expect or veredito))
        tabelas["sobolev_estimates"] = linhas
        state.registrar("sobolev", ResultadoTarefa(
            codigo="SOBOLEV_OK", resultado={"runs": relatorios}, verificacoes=verificacoes, tabelas=tabelas,
        ))
        return "SOBOLEV_OK"
