"""
CLI: validação, reprodutibilidade do relatório, compare e catalog
"""
import orjson
import pytest

from hardyheat.cli import deps
from hardyheat.cli.main import main
from hardyheat.core.errors import ConfigInvalid


def _gravar(tmp_path, config, nome="config.json"):
    path = tmp_path / nome
    path.write_bytes(orjson.dumps(config))
    return path


def _rodar(tmp_path, config, saida, *extra):
    path = _gravar(tmp_path, config)
    return main(["run", str(path), "--out", str(tmp_path / saida), *extra])


class TestValidacao:
    def test_dry_run(self, tmp_path, config_minima, capsys):
        assert main(["run", str(_gravar(tmp_path, config_minima)), "--dry-run"]) == 0
        assert "configuração válida: zero_rapido (spectrum, volume)" in capsys.readouterr().out
        assert not (tmp_path / "out").exists()

    def test_chave_desconhecida_na_raiz(self, tmp_path, config_minima, capsys):
        config_minima["foo"] = 1
        assert main(["run", str(_gravar(tmp_path, config_minima)), "--dry-run"]) == 1
        assert "'foo'" in capsys.readouterr().err

    def test_chave_aninhada_invalida(self, tmp_path, config_minima, capsys):
        config_minima["mesh"]["h_min"] = -1.0
        assert main(["run", str(_gravar(tmp_path, config_minima)), "--dry-run"]) == 1
        assert "'mesh.h_min'" in capsys.readouterr().err

    def test_tarefa_desconhecida(self, tmp_path, config_minima, capsys):
        config_minima["tasks"] = ["spectrum", "magia"]
        assert main(["run", str(_gravar(tmp_path, config_minima)), "--dry-run"]) == 1
        assert "tasks" in capsys.readouterr().err

    def test_arquivo_inexistente(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "nada.json")]) == 1
        assert "não encontrado" in capsys.readouterr().err

    def test_variavel_de_ambiente_invalida(self, monkeypatch):
        monkeypatch.setenv("HARDYHEAT_NODE_CAP", "muitos")
        with pytest.raises(ConfigInvalid) as exc:
            deps.Settings()
        assert "HARDYHEAT_NODE_CAP" in exc.value.mensagem

    def test_nivel_de_log_invalido(self, monkeypatch):
        monkeypatch.setenv("HARDYHEAT_LOG_LEVEL", "VERBOSO")
        with pytest.raises(ConfigInvalid):
            deps.Settings()


class TestExecucao:
    def test_pacote_de_relatorio(self, tmp_path, config_minima):
        assert _rodar(tmp_path, config_minima, "a") == 0
        saida = tmp_path / "a"
        relatorio = orjson.loads((saida / "report.json").read_bytes())
        assert relatorio["experiment"] == "zero_rapido"
        assert relatorio["exit_code"] == 0
        assert "out_dir" not in relatorio["config"]
        assert set(relatorio["tasks"]) == {"spectrum", "volume"}
        assert all(c["status"] == "ok" for t in relatorio["tasks"].values() for c in t["checks"])
        cabecalho = (saida / "summary.csv").read_text().splitlines()[0]
        assert cabecalho == "task,check,value,bound,status"
        assert (saida / "report.meta.json").exists()

    def test_relatorio_deterministico(self, tmp_path, config_minima):
        assert _rodar(tmp_path, config_minima, "a") == 0
        assert _rodar(tmp_path, config_minima, "b") == 0
        assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()

    def test_jobs_nao_altera_o_relatorio(self, tmp_path, config_minima):
        assert _rodar(tmp_path, config_minima, "serial") == 0
        assert _rodar(tmp_path, config_minima, "paralelo", "--jobs", "2") == 0
        serial = (tmp_path / "serial" / "report.json").read_bytes()
        assert serial == (tmp_path / "paralelo" / "report.json").read_bytes()

    def test_soma_incompativel_encerra_com_erro(self, tmp_path, config_minima, capsys):
        config_minima["domain"] = {"shape": "radial_ball", "radius": 1.0, "ambient_n": 3}
        config_minima["potential"] = {"id": "sum", "terms": [{"id": "example_V", "a": -0.25}, {"id": "example_III"}]}
        config_minima["params"] = {}
        assert _rodar(tmp_path, config_minima, "s") == 1
        assert "coeficientes" in capsys.readouterr().err

    def test_exporta_matrizes(self, tmp_path, config_minima):
        assert _rodar(tmp_path, config_minima, "m", "--dump-matrices") == 0
        matrizes = tmp_path / "m" / "matrices"
        for nivel in (0, 1):
            for sufixo in ("A", "P", "M"):
                assert (matrizes / f"level{nivel}_{sufixo}.txt").exists()


class TestCompare:
    @pytest.fixture
    def dois_relatorios(self, tmp_path, config_minima):
        assert _rodar(tmp_path, config_minima, "a") == 0
        assert _rodar(tmp_path, config_minima, "b") == 0
        return tmp_path / "a" / "report.json", tmp_path / "b" / "report.json"

    def test_relatorios_iguais(self, dois_relatorios, capsys):
        a, b = dois_relatorios
        assert main(["compare", str(a), str(b)]) == 0
        diff = orjson.loads(capsys.readouterr().out)
        assert diff["within_tolerance"] and diff["differences"] == []

    def test_campo_alterado(self, dois_relatorios, capsys):
        a, b = dois_relatorios
        dados = orjson.loads(b.read_bytes())
        dados["tasks"]["spectrum"]["result"]["lambda1"] *= 1.01
        b.write_bytes(orjson.dumps(dados))
        assert main(["compare", str(a), str(b)]) == 1
        diff = orjson.loads(capsys.readouterr().out)
        assert [d["field"] for d in diff["differences"]] == ["spectrum.result.lambda1"]

    def test_tolerancia_explicita(self, dois_relatorios):
        a, b = dois_relatorios
        dados = orjson.loads(b.read_bytes())
        dados["tasks"]["spectrum"]["result"]["lambda1"] *= 1.0 + 1e-6
        b.write_bytes(orjson.dumps(dados))
        assert main(["compare", str(a), str(b), "--rtol", "1e-3"]) == 0

    def test_versao_de_esquema_diferente(self, dois_relatorios, capsys):
        a, b = dois_relatorios
        dados = orjson.loads(b.read_bytes())
        dados["schema_version"] = 99
        b.write_bytes(orjson.dumps(dados))
        assert main(["compare", str(a), str(b)]) == 1
        assert "esquema" in capsys.readouterr().err


def test_catalogo_lista_cinco_potenciais(capsys):
    assert main(["catalog", "--n", "3"]) == 0
    linhas = capsys.readouterr().out.splitlines()
    assert len(linhas) == 5
    assert orjson.loads(linhas[0])["name"] == "example_I"
