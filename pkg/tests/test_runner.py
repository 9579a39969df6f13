"""
Router, veredito e execução das configurações de exemplo
"""
import threading
from pathlib import Path

import pytest

from hardyheat.cli.main import ExperimentRunner, carregar_config
from hardyheat.core import geometry
from hardyheat.core.errors import ConfigInvalid, IncompatibleCoefficients, OverlappingSingularities, ParameterOutOfRange
from hardyheat.runner import builders
from hardyheat.runner.builders import ExperimentBuilder, construir_potencial
from hardyheat.runner.router import TaskRouter
from hardyheat.runner.state import ExperimentState, PotentialConfig, ResultadoTarefa, Verificacao, validar_config
from hardyheat.runner.tasks.appendix import AppendixTask
from hardyheat.runner.tasks.harnack import HarnackTask
from hardyheat.runner.veredito import EXIT_ERRO, EXIT_INCONCLUSIVO, EXIT_OK, VereditoProcessor

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _estado(config_minima, **mudancas):
    config_minima.update(mudancas)
    return ExperimentState(config=validar_config(config_minima))


class TestRouter:
    def test_plano_na_ordem_da_configuracao(self, intervalo, config_minima):
        state = _estado(config_minima, tasks=["volume", "spectrum", "exponents"])
        router = TaskRouter(intervalo)
        plano = router.rotear(state)
        assert plano == ["volume", "spectrum", "exponents"]
        assert state.meta["ground_state_compartilhado"]
        assert router.agrupar(plano) == {"volume": ["volume"], "ground_state": ["spectrum", "exponents"]}

    def test_appendix_recusa_polos(self, bola, config_minima):
        state = _estado(config_minima, tasks=["appendix"])
        with pytest.raises(ParameterOutOfRange):
            TaskRouter(bola).rotear(state)

    def test_sobolev_no_intervalo_como_reducao(self, intervalo, config_minima):
        state = _estado(config_minima, tasks=["sobolev"])
        assert TaskRouter(intervalo).rotear(state) == ["sobolev"]

    def test_log_corrigido_recusa_n_1(self, intervalo, config_minima):
        config_minima["params"]["sobolev"] = {"runs": [{"kind": "log_corrected"}]}
        state = _estado(config_minima, tasks=["sobolev"])
        with pytest.raises(ParameterOutOfRange):
            TaskRouter(intervalo).rotear(state)

    def test_serie_de_senos_so_com_v_zero(self, config_minima):
        config_minima["params"]["heatkernel"] = {"oracle": "sine_series"}
        state = _estado(config_minima, tasks=["heatkernel"], potential={"id": "example_III"})
        with pytest.raises(ParameterOutOfRange):
            TaskRouter(geometry.interval(0.0, 1.0)).rotear(state)


class TestPotencialSoma:
    _POLO = {"id": "example_I", "poles": [{"center": [0.0, 0.0, 0.0], "c": 0.1875}]}

    def test_sum_exige_dois_termos(self, config_minima):
        config_minima["potential"] = {"id": "sum", "terms": [{"id": "zero"}]}
        with pytest.raises(ConfigInvalid) as exc:
            validar_config(config_minima)
        assert exc.value.mensagem.startswith("configuração inválida em 'potential'")

    def test_terms_fora_de_sum(self, config_minima):
        config_minima["potential"] = {"id": "zero", "terms": [{"id": "zero"}, {"id": "zero"}]}
        with pytest.raises(ConfigInvalid):
            validar_config(config_minima)

    def test_fronteira_mais_polo_na_bola(self, bola):
        cfg = PotentialConfig.model_validate({"id": "sum", "terms": [{"id": "example_III"}, self._POLO]})
        spec = construir_potencial(cfg, bola)
        assert spec.name == "sum(example_III,example_I)"
        alphas = spec.alphas_by_codim(bola)
        assert alphas[1] == pytest.approx(0.5)
        assert alphas[3] == pytest.approx(-0.25)

    def test_example_iii_sozinho_recusa_polo(self, bola):
        with pytest.raises(ParameterOutOfRange):
            construir_potencial(PotentialConfig(id="example_III"), bola)

    def test_polos_sobrepostos(self, bola):
        cfg = PotentialConfig.model_validate({"id": "sum", "terms": [self._POLO, self._POLO]})
        with pytest.raises(OverlappingSingularities):
            construir_potencial(cfg, bola)

    def test_coeficientes_incompativeis(self, bola):
        cfg = PotentialConfig.model_validate(
            {"id": "sum", "terms": [{"id": "example_V", "a": -0.25}, {"id": "example_III"}]}
        )
        with pytest.raises(IncompatibleCoefficients):
            construir_potencial(cfg, bola)


class TestVeredito:
    @pytest.mark.parametrize(
        "status, esperado",
        [(["ok", "ok"], EXIT_OK), (["ok", "inconclusivo"], EXIT_INCONCLUSIVO), (["inconclusivo", "falhou"], EXIT_ERRO)],
    )
    def test_codigo_de_saida(self, config_minima, status, esperado):
        state = _estado(config_minima)
        state.registrar("spectrum", ResultadoTarefa(
            codigo="SPECTRUM_OK",
            verificacoes=[Verificacao(nome=f"v{i}", status=s) for i, s in enumerate(status)],
        ))
        processor = VereditoProcessor()
        assert processor.processar_veredito(state) == esperado
        assert state.codigo_saida == esperado
        assert [linha["status"] for linha in processor.resumo(state)] == status

    def test_verificacao_sem_decisao_e_inconclusiva(self):
        assert Verificacao.de("x", 1.0, None).status == "inconclusivo"
        assert Verificacao.de("x", 1.0, False, "<= 0").status == "falhou"


@pytest.mark.slow
@pytest.mark.parametrize(
    "arquivo",
    [
        "zero_interval.json",
        "example_III_interval.json",
        "example_I_ball.json",
        "critical_hardy_interval.json",
        "sobolev_ball_admissible.json",
        "sobolev_ball_critical.json",
        "inequalities_interval.json",
        "sum_ball.json",
    ],
)
def test_configuracoes_de_exemplo_passam(tmp_path, arquivo):
    config = carregar_config(CONFIGS / arquivo)
    assert ExperimentRunner(config, tmp_path).executar() == EXIT_OK


def test_niveis_distintos_montam_em_paralelo(config_minima, monkeypatch):
    builder = ExperimentBuilder(validar_config(config_minima), node_cap=10 ** 6, dense_limit=2000)
    h_grosso = builder.niveis()[0]
    entrou, liberado = threading.Event(), threading.Event()
    original = builders.build_mesh

    def build_mesh_bloqueado(dom, spec, h, **kwargs):
        if h == h_grosso:
            entrou.set()
            liberado.wait(timeout=30)
        return original(dom, spec, h, **kwargs)

    monkeypatch.setattr(builders, "build_mesh", build_mesh_bloqueado)
    grosso = threading.Thread(target=builder.forma, args=(0,))
    grosso.start()
    assert entrou.wait(timeout=30)
    fino = threading.Thread(target=builder.forma, args=(1,))
    fino.start()
    fino.join(timeout=30)
    concluiu_antes = not fino.is_alive()
    liberado.set()
    grosso.join(timeout=30)
    assert concluiu_antes
    assert builder.forma(0).dofs < builder.forma(1).dofs


def test_appendix_verifica_quociente_refinado_por_camada(config_minima):
    config_minima["params"]["appendix"] = {"deltas": [0.2, 0.1], "h_min": 2.0 ** -12}
    state = _estado(config_minima, tasks=["appendix"])
    builder = ExperimentBuilder(state.config, node_cap=10 ** 6, dense_limit=2000)
    AppendixTask(builder).processar(state)
    checks = {v.nome: v for v in state.resultados["appendix"].verificacoes}
    for delta in ("0.2", "0.1"):
        assert checks[f"hardy_refinado_delta_{delta}"].status == "ok"
    assert all(v.status == "ok" for v in checks.values())


def test_harnack_verifica_grupos_por_nivel(config_minima):
    config_minima["params"]["harnack"] = {"centers": [[0.02], [0.5]], "radii": [0.1], "samples": 2}
    state = _estado(config_minima, tasks=["harnack"])
    builder = ExperimentBuilder(state.config, node_cap=10 ** 6, dense_limit=2000)
    assert HarnackTask(builder, kernel_dense_limit=2000).processar(state) == "HARNACK_OK"
    res = state.resultados["harnack"]
    checks = {v.nome: v for v in res.verificacoes}
    assert {"C_H_finito", "C_H_estavel", "C_H_interior_estavel", "C_H_fronteira_estavel"} <= set(checks)
    assert checks["C_H_fronteira_mesma_ordem"].status == "ok"
    assert len(res.resultado["C_H_by_kind_levels"]) == 2
    assert res.resultado["C_H"] == max(res.resultado["C_H_interior"], res.resultado["C_H_boundary"])


def test_harnack_sem_bola_na_fronteira_inconclusivo(config_minima):
    config_minima["params"]["harnack"] = {"centers": [[0.5]], "radii": [0.1], "samples": 2}
    state = _estado(config_minima, tasks=["harnack"])
    builder = ExperimentBuilder(state.config, node_cap=10 ** 6, dense_limit=2000)
    HarnackTask(builder, kernel_dense_limit=2000).processar(state)
    checks = {v.nome: v for v in state.resultados["harnack"].verificacoes}
    assert checks["C_H_fronteira_mesma_ordem"].status == "inconclusivo"
    assert "C_H_fronteira_estavel" not in checks
